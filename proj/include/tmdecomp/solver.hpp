#ifndef TMDECOMP_SOLVER_HPP
#define TMDECOMP_SOLVER_HPP

// Accelerated proximal gradient (APG) solver with Nesterov momentum and
// mu-continuation for
//
//   min_{A,E,N}  mu * g(A,E,N) + f(A,E,N)
//   g = ||A||_* + lambda ||E||_1 + gamma ||C W^T N||_F^2
//   f = 1/2 ||A + E + N - X||_F^2
//
// Uniform weights (C = I) give the classic stable PCP problem.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "tmdecomp/common.hpp"
#include "tmdecomp/dataset.hpp"
#include "tmdecomp/prox.hpp"
#include "tmdecomp/spectral.hpp"
#include "tmdecomp/weights.hpp"

namespace tmdecomp {

inline double default_lambda(Index T, Index P) {
  return 1.0 / std::sqrt(double(std::max(T, P)));
}

/// 1 / (2 sqrt(2 ln(TP) max(T,P))), natural logarithm.
inline double default_gamma(Index T, Index P) {
  const double tp = double(T) * double(P);
  return 1.0 / (2.0 * std::sqrt(2.0 * std::log(tp) * double(std::max(T, P))));
}

struct SolverConfig {
  double lambda = 0.0;
  double gamma = 0.0;
  double eta = 0.9;
  double mu0_factor = 0.99;
  double mu_bar_factor = 1e-5;
  double lipschitz = 3.0;
  int max_iters = 1000;
  double tol = 1e-7;
  WeightVector weights;

  /// Defaults for a T x P problem with the given weights.
  static SolverConfig defaults(Index T, Index P, WeightVector weights) {
    SolverConfig cfg;
    cfg.lambda = default_lambda(T, P);
    cfg.gamma = default_gamma(T, P);
    cfg.weights = std::move(weights);
    return cfg;
  }

  void validate(Index T) const {
    require(lambda > 0, "lambda must be positive");
    require(gamma > 0, "gamma must be positive");
    require(eta > 0 && eta < 1, "eta must lie in (0, 1)");
    require(mu0_factor > 0, "mu0_factor must be positive");
    require(mu_bar_factor > 0 && mu_bar_factor <= 1, "mu_bar_factor must lie in (0, 1]");
    require(lipschitz >= 3, "Lipschitz constant must be >= 3 for the three-block majorization");
    require(max_iters >= 1, "max_iters must be >= 1");
    require(tol > 0, "tol must be positive");
    require(weights.length() == T, "weight length " + std::to_string(weights.length()) +
                                       " does not match series length " + std::to_string(T));
    require((weights.c.array() > 0).all(), "weights must be positive");
    require(weights.is_symmetric(), "weights must satisfy c_t = c_{T-t+2}");
  }
};

/// Largest singular value.
inline double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (!m.allFinite()) throw NumericalError("spectral norm of a non-finite matrix");
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// cur + ((t_prev - 1) / t_cur) (cur - prev).
inline Matrix momentum_point(const Matrix& cur, const Matrix& prev, double t_cur, double t_prev) {
  require(cur.rows() == prev.rows() && cur.cols() == prev.cols(), "momentum: shape mismatch");
  return cur + ((t_prev - 1.0) / t_cur) * (cur - prev);
}

struct BlockTriple {
  Matrix A, E, N;
};

/// Gradient step on f at (Y_A, Y_E, Y_N): every block moves by the same
/// residual (Y_A + Y_E + Y_N - X) / L_f.
inline BlockTriple gradient_point(const Matrix& ya, const Matrix& ye, const Matrix& yn, const Matrix& x,
                                  double lipschitz) {
  require(ya.rows() == x.rows() && ye.rows() == x.rows() && yn.rows() == x.rows() &&
              ya.cols() == x.cols() && ye.cols() == x.cols() && yn.cols() == x.cols(),
          "gradient point: shape mismatch");
  const Matrix residual = (ya + ye + yn - x) / lipschitz;
  return {ya - residual, ye - residual, yn - residual};
}

/// ||C W^T N||_F^2 = sum_j sum_t c_t^2 |alpha_j(t)|^2.
inline double weighted_noise_energy(const Matrix& n, const WeightVector& w) {
  require(w.length() == n.rows(), "weight length does not match series length");
  const Vector c2 = w.c.array().square();
  UnitaryFft fft(n.rows());
  double total = 0.0;
  for (Index j = 0; j < n.cols(); ++j) total += c2.dot(fft.forward(n.col(j)).cwiseAbs2());
  return total;
}

/// F(A,E,N) = mu g + f with a known nuclear norm of A.
inline double relaxed_objective(double nuclear_a, const Matrix& e, const Matrix& n, const Matrix& a,
                                const Matrix& x, double mu, const SolverConfig& cfg) {
  const double g = nuclear_a + cfg.lambda * e.cwiseAbs().sum() + cfg.gamma * weighted_noise_energy(n, cfg.weights);
  const double f = 0.5 * (a + e + n - x).squaredNorm();
  return mu * g + f;
}

inline double relaxed_objective(const Matrix& a, const Matrix& e, const Matrix& n, const Matrix& x,
                                double mu, const SolverConfig& cfg) {
  Eigen::BDCSVD<Matrix> svd(a);
  return relaxed_objective(svd.singularValues().sum(), e, n, a, x, mu, cfg);
}

/// k0 = ceil(log(mu0 / mu_bar) / log(1 / eta)): the first index from which
/// the continuation parameter is pinned at mu_bar.
inline long k0_bound(double mu0, double mu_bar, double eta) {
  require(mu_bar > 0 && mu0 > mu_bar, "k0 bound needs mu0 > mu_bar > 0");
  require(eta > 0 && eta < 1, "k0 bound needs eta in (0, 1)");
  const double ratio = std::log(mu0 / mu_bar) / std::log(1.0 / eta);
  // Guard against ratio landing a few ulps above an exact integer.
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<long>(nearest);
  return static_cast<long>(std::ceil(ratio));
}

/// Read-only view of the iterate handed to an observer after each step.
struct IterationView {
  int k = 0;  ///< index of the iterate just produced (1 after the first step)
  const Matrix& A;
  const Matrix& E;
  const Matrix& N;
  double mu = 0.0;  ///< continuation value used to produce this iterate
  double objective = 0.0;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Runs the APG loop on a (noise-normalized) matrix.
///
/// Stops once the mu schedule has reached mu_bar and the largest relative
/// block change max ||Z_{k+1} - Z_k||_F / max(1, ||Z_k||_F) falls below tol.
/// Without convergence after max_iters the lowest-objective iterate is
/// returned with converged = false. The objective trace holds F at mu_bar for
/// every iterate, starting with the zero initial point.
inline Decomposition solve(const Matrix& x, const SolverConfig& cfg, const IterationObserver& observer = {}) {
  require(x.rows() >= 1 && x.cols() >= 1, "solve: empty input");
  if (!x.allFinite()) throw InputError("solve: input contains non-finite entries");
  cfg.validate(x.rows());

  const Index T = x.rows();
  const Index P = x.cols();
  const double mu0 = cfg.mu0_factor * spectral_norm(x);
  const double mu_bar = cfg.mu_bar_factor * mu0;

  Decomposition out = Decomposition::zeros(T, P);
  Diagnostics& diag = out.diagnostics;
  const double f0 = 0.5 * x.squaredNorm();
  diag.objective_trace.push_back(f0);

  if (mu0 == 0.0) {
    // X = 0: the zero triple is the global minimizer.
    diag.iterations = 1;
    diag.converged = true;
    diag.objective_trace.push_back(0.0);
    diag.mu_trace.push_back(0.0);
    return out;
  }

  Matrix a = Matrix::Zero(T, P), e = a, n = a;
  Matrix a_prev = a, e_prev = a, n_prev = a;
  double t_cur = 1.0, t_prev = 1.0;
  double mu = mu0;

  double best_objective = f0;
  int best_k = 0;
  Matrix best_a = a, best_e = e, best_n = n;

  auto rel_change = [](const Matrix& next, const Matrix& cur) {
    return (next - cur).norm() / std::max(1.0, cur.norm());
  };

  int k = 0;
  bool converged = false;
  while (k < cfg.max_iters) {
    const Matrix ya = momentum_point(a, a_prev, t_cur, t_prev);
    const Matrix ye = momentum_point(e, e_prev, t_cur, t_prev);
    const Matrix yn = momentum_point(n, n_prev, t_cur, t_prev);
    BlockTriple g = gradient_point(ya, ye, yn, x, cfg.lipschitz);

    if (!g.A.allFinite() || !g.E.allFinite() || !g.N.allFinite())
      throw NumericalError("solve: non-finite gradient point at iteration " + std::to_string(k));

    SvtResult a_next = svt(g.A, mu / cfg.lipschitz);
    Matrix e_next = soft_threshold(g.E, cfg.lambda * mu / cfg.lipschitz);
    const ProxContext ctx{cfg.lipschitz, mu, cfg.lambda, cfg.gamma, cfg.weights};
    Matrix n_next = noise_prox_fft(g.N, ctx);

    if (!a_next.value.allFinite() || !e_next.allFinite() || !n_next.allFinite())
      throw NumericalError("solve: non-finite iterate at iteration " + std::to_string(k));

    const double change = std::max({rel_change(a_next.value, a), rel_change(e_next, e), rel_change(n_next, n)});
    const double objective =
        relaxed_objective(a_next.singular_values.sum(), e_next, n_next, a_next.value, x, mu_bar, cfg);

    a_prev = std::move(a);
    e_prev = std::move(e);
    n_prev = std::move(n);
    a = std::move(a_next.value);
    e = std::move(e_next);
    n = std::move(n_next);

    const double mu_used = mu;
    const double t_next = (1.0 + std::sqrt(4.0 * t_cur * t_cur + 1.0)) / 2.0;
    t_prev = t_cur;
    t_cur = t_next;
    mu = std::max(cfg.eta * mu, mu_bar);
    ++k;

    diag.objective_trace.push_back(objective);
    diag.mu_trace.push_back(mu_used);
    diag.final_mu = mu_used;
    if (observer) observer(IterationView{k, a, e, n, mu_used, objective});

    if (objective < best_objective) {
      best_objective = objective;
      best_k = k;
      best_a = a;
      best_e = e;
      best_n = n;
    }
    if (change < cfg.tol && mu_used == mu_bar) {
      converged = true;
      break;
    }
  }

  diag.iterations = k;
  diag.converged = converged;
  if (converged || best_k == k) {
    out.A = std::move(a);
    out.E = std::move(e);
    out.N = std::move(n);
  } else {
    out.A = std::move(best_a);
    out.E = std::move(best_e);
    out.N = std::move(best_n);
  }
  const double xnorm = x.norm();
  diag.residual_fro = (out.A + out.E + out.N - x).norm() / (xnorm > 0 ? xnorm : 1.0);
  return out;
}

inline Decomposition solve(const TrafficMatrix& x, const SolverConfig& cfg,
                           const IterationObserver& observer = {}) {
  return solve(x.data, cfg, observer);
}

}  // namespace tmdecomp

#endif  // TMDECOMP_SOLVER_HPP
