#ifndef TMDECOMP_METRICS_HPP
#define TMDECOMP_METRICS_HPP

// Evaluation of a decomposition: numerical rank, component norms, per-flow
// |Pearson| between low-rank and noise parts, and noise spectral flatness.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmdecomp/common.hpp"
#include "tmdecomp/dataset.hpp"
#include "tmdecomp/spectral.hpp"

namespace tmdecomp {

/// Number of singular values above rel_tol * sigma_max.
inline Index numerical_rank(const Matrix& m, double rel_tol = 1e-8) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > rel_tol * s(0)).count();
}

/// A value together with a flag telling that a degenerate-input convention
/// was applied.
struct FlaggedValue {
  double value = 0.0;
  bool degenerate = false;
};

/// |corr(a, n)|; 0 with the degenerate flag when either vector is constant.
inline FlaggedValue pearson_abs(const Vector& a, const Vector& n) {
  require(a.size() == n.size(), "pearson: length mismatch");
  require(a.size() >= 2, "pearson: need at least two samples");
  const Vector ac = a.array() - a.mean();
  const Vector nc = n.array() - n.mean();
  const double sa = ac.norm();
  const double sn = nc.norm();
  if (sa == 0.0 || sn == 0.0) return {0.0, true};
  return {std::min(1.0, std::abs(ac.dot(nc)) / (sa * sn)), false};
}

/// Geometric over arithmetic mean of a power spectrum (Wiener entropy),
/// over positions 2..T or 1..T. An all-zero spectrum is flagged and reported
/// as 1; any zero entry in a nonzero spectrum gives 0.
inline FlaggedValue spectral_flatness(const SpectralDensity& phi, bool exclude_dc = true) {
  const Index first = exclude_dc ? 1 : 0;
  const Index count = phi.length() - first;
  require(count >= 1, "spectral flatness needs at least one position");
  const auto values = phi.phi.segment(first, count);
  require((values.array() >= 0).all(), "spectral density must be non-negative");
  const double arith = values.mean();
  if (arith == 0.0) return {1.0, true};
  if ((values.array() == 0).any()) return {0.0, false};
  const double log_geo = values.array().log().mean();
  return {std::min(1.0, std::exp(log_geo) / arith), false};
}

struct EvalReport {
  Index T = 0;
  Index P = 0;
  Index rank_A = 0;
  double fro_A = 0, fro_E = 0, fro_N = 0;
  std::vector<double> pearson_abs;
  double spectral_flatness_N = 0;
  /// Aggregate noise density at the penalized positions (1-based).
  std::map<Index, double> peak_spectra;
  SpectralDensity density_N;
};

inline EvalReport evaluate(const Decomposition& d, const std::vector<Index>& peak_positions,
                           double rank_tol = 1e-8) {
  EvalReport r;
  r.T = d.A.rows();
  r.P = d.A.cols();
  r.rank_A = numerical_rank(d.A, rank_tol);
  r.fro_A = d.A.norm();
  r.fro_E = d.E.norm();
  r.fro_N = d.N.norm();
  for (Index j = 0; j < r.P; ++j) r.pearson_abs.push_back(pearson_abs(d.A.col(j), d.N.col(j)).value);
  r.density_N = aggregate_density(d.N);
  r.spectral_flatness_N = spectral_flatness(r.density_N).value;
  for (Index t : peak_positions) r.peak_spectra[t] = r.density_N.at(t);
  return r;
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json peaks = nlohmann::json::object();
  for (const auto& [t, v] : r.peak_spectra) peaks[std::to_string(t)] = v;
  return {{"T", r.T},
          {"P", r.P},
          {"rank_A", r.rank_A},
          {"fro_A", r.fro_A},
          {"fro_E", r.fro_E},
          {"fro_N", r.fro_N},
          {"pearson_abs", r.pearson_abs},
          {"spectral_flatness_N", r.spectral_flatness_N},
          {"peak_spectra", peaks}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.T = j.at("T").get<Index>();
  r.P = j.at("P").get<Index>();
  r.rank_A = j.at("rank_A").get<Index>();
  r.fro_A = j.at("fro_A").get<double>();
  r.fro_E = j.at("fro_E").get<double>();
  r.fro_N = j.at("fro_N").get<double>();
  r.pearson_abs = j.at("pearson_abs").get<std::vector<double>>();
  r.spectral_flatness_N = j.at("spectral_flatness_N").get<double>();
  for (const auto& [key, value] : j.at("peak_spectra").items()) r.peak_spectra[std::stol(key)] = value.get<double>();
  return r;
}

inline double median_of(std::vector<double> v) { return v.empty() ? 0.0 : median(std::move(v)); }

/// Differences between a frequency-regularized run and a plain run on the same input.
struct ComparisonSummary {
  double flatness_gain = 0;        ///< flatness(fdr) - flatness(spcp)
  double rank_ratio = 1;           ///< rank(fdr) / rank(spcp); 1 when both are 0
  double fro_ratio = 1;            ///< ||A_fdr||_F / ||A_spcp||_F
  double pearson_decreased = 0;    ///< fraction of flows with strictly lower |Pearson|
  double median_pearson_fdr = 0;
  double median_pearson_spcp = 0;
  std::map<Index, double> peak_delta;  ///< Phi_fdr(t) - Phi_spcp(t)
};

inline ComparisonSummary compare_reports(const EvalReport& fdr, const EvalReport& spcp) {
  require(fdr.T == spcp.T && fdr.P == spcp.P, "reports describe matrices of different shapes");
  require(fdr.pearson_abs.size() == spcp.pearson_abs.size(), "reports have different flow counts");
  ComparisonSummary s;
  s.flatness_gain = fdr.spectral_flatness_N - spcp.spectral_flatness_N;
  if (spcp.rank_A == 0)
    s.rank_ratio = fdr.rank_A == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  else
    s.rank_ratio = double(fdr.rank_A) / double(spcp.rank_A);
  if (spcp.fro_A == 0)
    s.fro_ratio = fdr.fro_A == 0 ? 1.0 : std::numeric_limits<double>::infinity();
  else
    s.fro_ratio = fdr.fro_A / spcp.fro_A;
  std::size_t decreased = 0;
  for (std::size_t j = 0; j < fdr.pearson_abs.size(); ++j)
    if (fdr.pearson_abs[j] < spcp.pearson_abs[j]) ++decreased;
  s.pearson_decreased = fdr.pearson_abs.empty() ? 0.0 : double(decreased) / double(fdr.pearson_abs.size());
  s.median_pearson_fdr = median_of(fdr.pearson_abs);
  s.median_pearson_spcp = median_of(spcp.pearson_abs);
  for (const auto& [t, v] : fdr.peak_spectra) {
    const auto it = spcp.peak_spectra.find(t);
    if (it != spcp.peak_spectra.end()) s.peak_delta[t] = v - it->second;
  }
  return s;
}

/// Four-decimal rendering used for norm ratios, e.g. "1.0158".
inline std::string format_ratio(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", r);
  return buf;
}

inline nlohmann::json to_json(const ComparisonSummary& s) {
  nlohmann::json peaks = nlohmann::json::object();
  for (const auto& [t, v] : s.peak_delta) peaks[std::to_string(t)] = v;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"flatness_gain", s.flatness_gain},
          {"rank_ratio", finite_or_null(s.rank_ratio)},
          {"fro_ratio", finite_or_null(s.fro_ratio)},
          {"fro_ratio_display", format_ratio(s.fro_ratio)},
          {"pearson_decreased_fraction", s.pearson_decreased},
          {"median_pearson_fdr", s.median_pearson_fdr},
          {"median_pearson_spcp", s.median_pearson_spcp},
          {"peak_delta", peaks}};
}

}  // namespace tmdecomp

#endif  // TMDECOMP_METRICS_HPP
