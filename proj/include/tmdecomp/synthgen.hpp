#ifndef TMDECOMP_SYNTHGEN_HPP
#define TMDECOMP_SYNTHGEN_HPP

// Synthetic traffic matrices with known low-rank, sparse and noise parts.
//
// Random numbers come from std::mt19937_64 (its output sequence is fixed by
// the C++ standard). Uniforms in [0,1) are (x >> 11) * 2^-53; each Gaussian
// consumes two uniforms u1, u2 and is sqrt(-2 ln(1 - u1)) cos(2 pi u2).
// Draw order:
//   1. per component i = 1..rank: one uniform amplitude jitter and one
//      uniform phase per harmonic (in list order), then four uniforms
//      (phase1, phase2, amp1, amp2) for the flow loadings;
//   2. anomaly positions (partial Fisher-Yates over the T*P column-major
//      cells), then per anomaly one Gaussian and one uniform sign draw;
//   3. noise, column-major, one Gaussian per cell.
// The same sequence can be reproduced in any language from the seed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmdecomp/common.hpp"
#include "tmdecomp/dataset.hpp"

namespace tmdecomp {

struct Harmonic {
  double period_hours = 24.0;
  double amplitude = 1.0;
};

inline std::vector<Harmonic> default_harmonics() {
  return {{24.0, 0.5}, {12.0, 0.3}, {6.0, 0.2}, {3.0, 0.15}, {1.5, 0.1}, {1.0, 0.1}};
}

struct SynthSpec {
  Index T = 2016;
  Index P = 20;
  Index rank = 4;
  int interval_seconds = 300;
  /// Harmonic time structure; amplitudes are relative to a unit offset.
  std::vector<Harmonic> harmonics = default_harmonics();
  /// Mean traffic level of a flow, in noise-sigma units.
  double level = 50.0;
  double anomaly_density = 0.005;
  /// Spike scale in multiples of the flow's noise sigma.
  double anomaly_magnitude = 10.0;
  /// One entry (shared by all flows) or P entries.
  std::vector<double> noise_sigma{1.0};
  std::uint64_t seed = 1;

  double sigma(Index j) const {
    return noise_sigma.size() == 1 ? noise_sigma.front() : noise_sigma[std::size_t(j)];
  }

  void validate() const {
    require(T >= 2 && P >= 1, "synthetic matrix needs T >= 2 and P >= 1");
    require(rank >= 1 && rank <= std::min(T, P), "rank must lie in [1, min(T, P)]");
    require(interval_seconds > 0, "sampling interval must be positive");
    require(anomaly_density >= 0 && anomaly_density <= 1, "anomaly density must lie in [0, 1]");
    require(anomaly_magnitude >= 0, "anomaly magnitude must be non-negative");
    require(level >= 0, "traffic level must be non-negative");
    require(noise_sigma.size() == 1 || noise_sigma.size() == std::size_t(P),
            "noise_sigma must have 1 or P entries");
    for (double s : noise_sigma) require(s >= 0 && std::isfinite(s), "noise sigma must be finite and >= 0");
    for (const auto& h : harmonics) require(h.period_hours > 0, "harmonic periods must be positive");
  }
};

inline nlohmann::json to_json(const SynthSpec& s) {
  nlohmann::json harmonics = nlohmann::json::array();
  for (const auto& h : s.harmonics) harmonics.push_back({{"period_hours", h.period_hours}, {"amplitude", h.amplitude}});
  return {{"T", s.T},
          {"P", s.P},
          {"rank", s.rank},
          {"interval_seconds", s.interval_seconds},
          {"harmonics", harmonics},
          {"level", s.level},
          {"anomaly_density", s.anomaly_density},
          {"anomaly_magnitude", s.anomaly_magnitude},
          {"noise_sigma", s.noise_sigma},
          {"seed", s.seed}};
}

inline SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  s.T = j.at("T").get<Index>();
  s.P = j.at("P").get<Index>();
  s.rank = j.at("rank").get<Index>();
  s.interval_seconds = j.at("interval_seconds").get<int>();
  s.harmonics.clear();
  for (const auto& h : j.at("harmonics"))
    s.harmonics.push_back({h.at("period_hours").get<double>(), h.at("amplitude").get<double>()});
  s.level = j.at("level").get<double>();
  s.anomaly_density = j.at("anomaly_density").get<double>();
  s.anomaly_magnitude = j.at("anomaly_magnitude").get<double>();
  s.noise_sigma = j.at("noise_sigma").get<std::vector<double>>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

/// Portable uniform and Gaussian draws on top of mt19937_64.
class SynthRng {
 public:
  explicit SynthRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }

  double gaussian() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::acos(-1.0) * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return std::min<std::uint64_t>(std::uint64_t(uniform() * double(n)), n - 1); }

 private:
  std::mt19937_64 engine_;
};

struct SynthResult {
  TrafficMatrix x;
  Decomposition truth;
};

/// X = A* + E* + N*, with A* a sum of `rank` outer products of harmonic time
/// profiles and nonnegative flow loadings in [0, 2], E* a set of round(density*T*P)
/// volume spikes (positive with probability 0.9), and N* column-wise white
/// Gaussian noise.
inline SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const Index T = spec.T;
  const Index P = spec.P;
  SynthRng rng(spec.seed);
  const double two_pi = 2.0 * std::acos(-1.0);

  Matrix a = Matrix::Zero(T, P);
  for (Index i = 0; i < spec.rank; ++i) {
    Vector profile = Vector::Ones(T);
    for (const auto& h : spec.harmonics) {
      const double amp = h.amplitude * (0.5 + rng.uniform());
      const double phase = two_pi * rng.uniform();
      const double cycles_per_sample = double(spec.interval_seconds) / (h.period_hours * 3600.0);
      for (Index t = 0; t < T; ++t) profile(t) += amp * std::cos(two_pi * cycles_per_sample * double(t) + phase);
    }
    // Loadings vary smoothly over the flow index, so no single flow
    // dominates a component.
    const double phase1 = two_pi * rng.uniform();
    const double phase2 = two_pi * rng.uniform();
    const double amp1 = rng.uniform();
    const double amp2 = rng.uniform();
    Vector loading(P);
    for (Index j = 0; j < P; ++j) {
      const double x = two_pi * double(j) / double(P);
      loading(j) = 1.0 + 0.5 * amp1 * std::cos(x + phase1) + 0.5 * amp2 * std::cos(2.0 * x + phase2);
    }
    // Component i carries weight 1/(i+1) of the traffic level.
    a += (spec.level / double(i + 1)) * profile * loading.transpose();
  }

  Matrix e = Matrix::Zero(T, P);
  const std::uint64_t cells = std::uint64_t(T) * std::uint64_t(P);
  const auto spikes = static_cast<std::uint64_t>(std::llround(spec.anomaly_density * double(cells)));
  if (spikes > 0) {
    std::vector<std::uint64_t> order(cells);
    std::iota(order.begin(), order.end(), 0);
    for (std::uint64_t s = 0; s < spikes; ++s) std::swap(order[s], order[s + rng.below(cells - s)]);
    for (std::uint64_t s = 0; s < spikes; ++s) {
      const Index j = Index(order[s] / std::uint64_t(T));
      const Index t = Index(order[s] % std::uint64_t(T));
      const double magnitude = spec.anomaly_magnitude * spec.sigma(j) * (1.0 + std::abs(rng.gaussian()));
      const double sign = rng.uniform() < 0.9 ? 1.0 : -1.0;
      e(t, j) = sign * magnitude;
    }
  }

  Matrix n(T, P);
  for (Index j = 0; j < P; ++j)
    for (Index t = 0; t < T; ++t) n(t, j) = spec.sigma(j) * rng.gaussian();

  SynthResult out;
  out.x = TrafficMatrix::from(a + e + n, spec.interval_seconds);
  out.truth = Decomposition{std::move(a), std::move(e), std::move(n), {}};
  return out;
}

}  // namespace tmdecomp

#endif  // TMDECOMP_SYNTHGEN_HPP
