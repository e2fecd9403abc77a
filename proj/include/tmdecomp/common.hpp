#ifndef TMDECOMP_COMMON_HPP
#define TMDECOMP_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmdecomp {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent user input (files, parameters, dimensions).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine produced a non-finite or otherwise unusable value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace tmdecomp

#endif  // TMDECOMP_COMMON_HPP
