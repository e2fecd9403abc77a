#ifndef TMDECOMP_WEIGHTS_HPP
#define TMDECOMP_WEIGHTS_HPP

// Frequency-domain noise weights c_1..c_T (the diagonal of C).
//
// The unscaled profile is
//   w_t = v(t) + rho   for t in S1 (penalized positions and their duals),
//   w_t = v(t)         otherwise,
// with v a mirrored exponential decay
//   v(x) = amplitude * exp(-(x-1)/decay_scale) + offset        on [1, T/2+1)
//   v(x) = amplitude * exp(-(T-x+1)/decay_scale) + offset      on [T/2+1, T],
// and c = beta * w with beta chosen so that sum_t c_t^2 = T.

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "tmdecomp/common.hpp"

namespace tmdecomp {

/// Harmonic periods (hours) that divide one day; the default penalized set.
inline const std::vector<double>& daily_harmonic_periods() {
  static const std::vector<double> periods{24.0, 12.0, 6.0, 3.0, 1.5, 1.0};
  return periods;
}

/// 1-based DFT position of a periodic component with the given period:
/// round(T * interval / period) + 1. Throws if the period is not resolvable
/// to a unique position (a tie at .5) or lands outside [2, floor(T/2)+1].
inline Index position_for_period(double period_hours, Index T, double interval_seconds) {
  require(period_hours > 0, "period must be positive");
  require(interval_seconds > 0, "sampling interval must be positive");
  const double cycles = double(T) * interval_seconds / (period_hours * 3600.0);
  const double nearest = std::round(cycles);
  if (std::abs(cycles - nearest) >= 0.5 - 1e-9)
    throw InputError("period " + std::to_string(period_hours) + " h is not close to a DFT position");
  const Index t = static_cast<Index>(nearest) + 1;
  require(t >= 2 && t <= T / 2 + 1, "period " + std::to_string(period_hours) +
                                        " h maps to position " + std::to_string(t) +
                                        ", outside [2, " + std::to_string(T / 2 + 1) + "]");
  return t;
}

struct WeightSpec {
  Index T = 2016;
  /// Penalized low-frequency positions (1-based, without their duals).
  std::vector<Index> s1a{8, 15, 29, 57, 113, 169};
  double rho = 2.0;
  double decay_scale = 200.0;
  double amplitude = 4.0;
  double offset = 1.0;

  /// Defaults for a length-T record: the daily harmonics mapped to positions
  /// at the given sampling interval, skipping those the record cannot resolve.
  /// For T = 2016 at 300 s this is {8, 15, 29, 57, 113, 169}.
  static WeightSpec for_series(Index T, double interval_seconds = 300.0) {
    WeightSpec spec;
    spec.T = T;
    spec.s1a.clear();
    for (double period : daily_harmonic_periods()) {
      try {
        spec.s1a.push_back(position_for_period(period, T, interval_seconds));
      } catch (const InputError&) {
      }
    }
    return spec;
  }

  void validate() const {
    require(T >= 1, "weight length T must be >= 1");
    require(rho > 0, "rho must be positive");
    require(decay_scale > 0, "decay_scale must be positive");
    require(amplitude >= 0, "amplitude must be non-negative");
    require(offset > 0, "offset must be positive");
    for (Index t : s1a)
      require(t >= 2 && t <= T / 2 + 1, "penalized position " + std::to_string(t) +
                                            " outside [2, " + std::to_string(T / 2 + 1) + "]");
  }

  /// S1: s1a together with the dual positions T-t+2, sorted.
  std::vector<Index> penalized_positions() const {
    std::set<Index> all;
    for (Index t : s1a) {
      all.insert(t);
      all.insert(T - t + 2);
    }
    return {all.begin(), all.end()};
  }
};

struct WeightVector {
  Vector c;
  double beta = 1.0;

  Index length() const { return c.size(); }
  /// Weight at 1-based position t.
  double at(Index t) const { return c(t - 1); }

  bool is_symmetric(double rel_tol = 1e-12) const {
    const Index T = c.size();
    for (Index t = 2; t <= T; ++t)
      if (std::abs(c(t - 1) - c(T - t + 1)) > rel_tol * std::max(std::abs(c(t - 1)), 1.0)) return false;
    return true;
  }
};

/// Decay profile v(x) on [1, T].
inline double decay_profile(double x, const WeightSpec& spec) {
  const double T = double(spec.T);
  require(x >= 1.0 && x <= T, "decay profile argument outside [1, T]");
  const double lag = x < T / 2.0 + 1.0 ? x - 1.0 : T - x + 1.0;
  return spec.amplitude * std::exp(-lag / spec.decay_scale) + spec.offset;
}

inline WeightVector build_weights(const WeightSpec& spec) {
  spec.validate();
  Vector w(spec.T);
  for (Index t = 1; t <= spec.T; ++t) w(t - 1) = decay_profile(double(t), spec);
  for (Index t : spec.penalized_positions()) w(t - 1) += spec.rho;
  const double beta = std::sqrt(double(spec.T) / w.squaredNorm());
  return {beta * w, beta};
}

/// Flat weights, c_t = 1. With these the frequency-weighted noise penalty
/// equals the plain squared Frobenius norm.
inline WeightVector uniform_weights(Index T) {
  require(T >= 1, "weight length T must be >= 1");
  return {Vector::Ones(T), 1.0};
}

}  // namespace tmdecomp

#endif  // TMDECOMP_WEIGHTS_HPP
