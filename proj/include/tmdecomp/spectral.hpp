#ifndef TMDECOMP_SPECTRAL_HPP
#define TMDECOMP_SPECTRAL_HPP

// Unitary discrete Fourier transform and periodogram utilities.
//
// Forward transform convention: alpha(t) = T^{-1/2} sum_k x(k) e^{-2 pi i (t-1)(k-1)/T}.
// Positions are 1-based in every public function taking a position; vectors
// are stored 0-based, so position t lives at index t-1.

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "tmdecomp/common.hpp"

namespace tmdecomp {

/// Periodogram: power per DFT position.
struct SpectralDensity {
  Vector phi;

  Index length() const { return phi.size(); }
  /// Power at 1-based position t.
  double at(Index t) const {
    require(t >= 1 && t <= phi.size(), "spectral position " + std::to_string(t) + " out of range");
    return phi(t - 1);
  }
  /// Mirror position T-t+2 of a 1-based position t >= 2.
  static Index dual(Index t, Index T) { return T - t + 2; }
};

/// Reusable unitary transform of a fixed length. Holds mutable plan caches,
/// so one instance must not be shared between threads.
class UnitaryFft {
 public:
  explicit UnitaryFft(Index length) : length_(length), scale_(1.0 / std::sqrt(double(length))) {
    require(length >= 1, "transform length must be >= 1");
    fft_.SetFlag(Eigen::FFT<double>::Unscaled);
    real_in_.resize(static_cast<std::size_t>(length));
    cplx_in_.resize(static_cast<std::size_t>(length));
  }

  Index length() const { return length_; }

  template <typename Derived>
  CVector forward(const Eigen::MatrixBase<Derived>& x) {
    require(x.size() == length_, "transform length mismatch");
    // kissfft does not handle a single point; the transform is the identity there.
    if (length_ == 1) return CVector::Constant(1, Complex(x(0), 0.0));
    for (Index k = 0; k < length_; ++k) real_in_[std::size_t(k)] = x(k);
    fft_.fwd(cplx_out_, real_in_);
    CVector out(length_);
    for (Index t = 0; t < length_; ++t) out(t) = cplx_out_[std::size_t(t)] * scale_;
    return out;
  }

  /// Inverse of forward (conjugate-transpose of the unitary basis).
  CVector inverse(const CVector& alpha) {
    require(alpha.size() == length_, "transform length mismatch");
    if (length_ == 1) return alpha;
    for (Index t = 0; t < length_; ++t) cplx_in_[std::size_t(t)] = alpha(t);
    fft_.inv(cplx_out_, cplx_in_);
    CVector out(length_);
    for (Index k = 0; k < length_; ++k) out(k) = cplx_out_[std::size_t(k)] * scale_;
    return out;
  }

 private:
  Index length_;
  double scale_;
  Eigen::FFT<double> fft_;
  std::vector<double> real_in_;
  std::vector<Complex> cplx_in_;
  std::vector<Complex> cplx_out_;
};

/// Unitary DFT of a real vector.
inline CVector dft(const Vector& x) {
  require(x.size() >= 1, "dft of an empty vector");
  UnitaryFft fft(x.size());
  return fft.forward(x);
}

/// Inverse unitary DFT; the result is complex in general.
inline CVector inverse_dft(const CVector& alpha) {
  require(alpha.size() >= 1, "inverse dft of an empty vector");
  UnitaryFft fft(alpha.size());
  return fft.inverse(alpha);
}

inline SpectralDensity spectral_density(const Vector& x) {
  return SpectralDensity{dft(x).cwiseAbs2()};
}

/// Column-summed periodogram of a T x P matrix.
inline SpectralDensity aggregate_density(const Matrix& m) {
  require(m.rows() >= 1, "aggregate density of an empty matrix");
  UnitaryFft fft(m.rows());
  Vector total = Vector::Zero(m.rows());
  for (Index j = 0; j < m.cols(); ++j) total += fft.forward(m.col(j)).cwiseAbs2();
  return SpectralDensity{std::move(total)};
}

/// Period, in hours, of the harmonic at 1-based position t of a length-T
/// series sampled every interval_seconds. Position 1 (DC) has no period.
inline std::optional<double> position_period_hours(Index t, Index T, double interval_seconds) {
  require(T >= 1, "series length must be >= 1");
  require(t >= 1 && t <= T, "position " + std::to_string(t) + " outside [1, " +
                                std::to_string(T) + "]");
  require(interval_seconds > 0, "sampling interval must be positive");
  if (t == 1) return std::nullopt;
  // Cycles per record: t-1 below the Nyquist position, T-t+1 at and above it
  // (so a position and its dual T-t+2 share one period).
  const Index cycles = std::min(t - 1, T - t + 1);
  return double(T) / double(cycles) * interval_seconds / 3600.0;
}

}  // namespace tmdecomp

#endif  // TMDECOMP_SPECTRAL_HPP
