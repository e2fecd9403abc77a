#ifndef TMDECOMP_PROX_HPP
#define TMDECOMP_PROX_HPP

// Proximal operators for the three blocks of the relaxed decomposition
// problem: singular value thresholding (A), entry-wise soft thresholding (E)
// and the frequency-weighted quadratic shrink (N).

#include <cmath>
#include <string>

#include "tmdecomp/common.hpp"
#include "tmdecomp/parallel.hpp"
#include "tmdecomp/spectral.hpp"
#include "tmdecomp/weights.hpp"

namespace tmdecomp {

struct ProxContext {
  double lipschitz = 3.0;
  double mu = 1.0;
  double lambda = 1.0;
  double gamma = 1.0;
  const WeightVector& weights;
};

/// sign(m) * max(|m| - eps, 0), entry-wise.
inline Matrix soft_threshold(const Matrix& m, double eps) {
  require(eps > 0, "soft threshold must be positive");
  return m.unaryExpr([eps](double v) {
    const double mag = std::abs(v) - eps;
    return mag > 0 ? std::copysign(mag, v) : 0.0;
  });
}

struct SvtResult {
  Matrix value;
  Index rank = 0;
  /// Surviving singular values after shrinkage (length == rank).
  Vector singular_values;
};

/// U * soft_threshold(S) * V^T for the thin SVD M = U S V^T.
inline SvtResult svt(const Matrix& m, double eps) {
  require(eps > 0, "singular value threshold must be positive");
  if (!m.allFinite()) throw NumericalError("svt: non-finite input");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("svt: SVD failed");
  const Vector& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s(rank) > eps) ++rank;
  SvtResult out;
  out.rank = rank;
  out.singular_values = s.head(rank).array() - eps;
  if (rank == 0) {
    out.value = Matrix::Zero(m.rows(), m.cols());
  } else {
    out.value = svd.matrixU().leftCols(rank) * out.singular_values.asDiagonal() *
                svd.matrixV().leftCols(rank).transpose();
  }
  return out;
}

namespace detail {

inline void require_symmetric_weights(const WeightVector& w, Index rows) {
  require(w.length() == rows, "weight length " + std::to_string(w.length()) +
                                  " does not match series length " + std::to_string(rows));
  require(w.is_symmetric(), "noise weights must satisfy c_t = c_{T-t+2}");
}

}  // namespace detail

/// Per-frequency multiplier L_f / (L_f + 2 mu gamma c_t^2) of the noise prox.
inline Vector noise_shrink_factors(const ProxContext& ctx) {
  const double s = 2.0 * ctx.mu * ctx.gamma;
  return ctx.weights.c.array().square().unaryExpr(
      [&](double c2) { return ctx.lipschitz / (ctx.lipschitz + s * c2); });
}

/// argmin_N (L_f/2)||N - G||_F^2 + mu gamma ||C W^T N||_F^2, computed column by
/// column as a scalar shrink of each DFT coefficient. Columns are independent,
/// so the result does not depend on the worker count.
inline Matrix noise_prox_fft(const Matrix& g, const ProxContext& ctx) {
  detail::require_symmetric_weights(ctx.weights, g.rows());
  const Vector factors = noise_shrink_factors(ctx);
  Matrix out(g.rows(), g.cols());
  parallel_chunks(g.cols(), [&](Index begin, Index end) {
    UnitaryFft fft(g.rows());
    for (Index j = begin; j < end; ++j) {
      CVector alpha = fft.forward(g.col(j));
      alpha.array() *= factors.array();
      const CVector col = fft.inverse(alpha);
      const double residue = col.imag().cwiseAbs().maxCoeff();
      if (residue > 1e-8 * g.col(j).norm())
        throw NumericalError("noise prox: imaginary residue " + std::to_string(residue) +
                             " in column " + std::to_string(j + 1));
      out.col(j) = col.real();
    }
  });
  return out;
}

/// Unitary DFT basis W with W(k, t) = T^{-1/2} exp(-2 pi i (t-1)(k-1)/T)
/// (column t is the basis vector W_t).
inline CMatrix fourier_basis(Index T) {
  require(T >= 1, "basis size must be >= 1");
  CMatrix w(T, T);
  const double pi = std::acos(-1.0);
  const double scale = 1.0 / std::sqrt(double(T));
  for (Index k = 0; k < T; ++k)
    for (Index t = 0; t < T; ++t) {
      // Reduce the exponent modulo T so the angle stays small and exact.
      const double phase = -2.0 * pi * double((t * k) % T) / double(T);
      w(k, t) = std::polar(scale, phase);
    }
  return w;
}

/// Reference solve of the noise prox by an explicit T x T linear system
///   (L_f I + 2 mu gamma W C^2 W^H) N = L_f G.
/// O(T^3); intended for small T as an oracle for noise_prox_fft.
inline Matrix noise_prox_dense(const Matrix& g, const ProxContext& ctx) {
  detail::require_symmetric_weights(ctx.weights, g.rows());
  const Index T = g.rows();
  const CMatrix w = fourier_basis(T);
  const CMatrix reg = w * ctx.weights.c.array().square().matrix().asDiagonal() * w.adjoint();
  const double imag = reg.imag().cwiseAbs().maxCoeff();
  if (imag > 1e-9 * std::max(1.0, reg.real().cwiseAbs().maxCoeff()))
    throw NumericalError("noise prox: regularizer is not real");
  const Matrix system =
      ctx.lipschitz * Matrix::Identity(T, T) + 2.0 * ctx.mu * ctx.gamma * reg.real();
  return system.llt().solve(ctx.lipschitz * g);
}

}  // namespace tmdecomp

#endif  // TMDECOMP_PROX_HPP
