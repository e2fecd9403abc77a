#ifndef TMDECOMP_PIPELINE_HPP
#define TMDECOMP_PIPELINE_HPP

// End-to-end commands behind the command-line tool. Every command that
// writes an output directory also writes manifest.json there; replaying a
// manifest re-runs the command with identical options and reproduces the
// outputs bit for bit.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tmdecomp/dataset.hpp"
#include "tmdecomp/metrics.hpp"
#include "tmdecomp/solver.hpp"
#include "tmdecomp/spectral.hpp"
#include "tmdecomp/synthgen.hpp"
#include "tmdecomp/weights.hpp"

namespace tmdecomp {

#ifndef TMDECOMP_VERSION
#define TMDECOMP_VERSION "0.1.0"
#endif

inline constexpr const char* kToolVersion = TMDECOMP_VERSION;

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitInputError = 1, kExitNotConverged = 2 };

/// Options describing a weight profile; unset fields take the defaults of
/// WeightSpec::for_series.
struct WeightOptions {
  std::optional<std::vector<Index>> s1a;
  std::optional<std::vector<double>> periods_hours;
  double rho = 2.0;
  double decay_scale = 200.0;
  double amplitude = 4.0;
  double offset = 1.0;

  WeightSpec resolve(Index T, double interval_seconds) const {
    WeightSpec spec = WeightSpec::for_series(T, interval_seconds);
    if (s1a && periods_hours) throw InputError("give either penalized positions or periods, not both");
    if (s1a) spec.s1a = *s1a;
    if (periods_hours) {
      spec.s1a.clear();
      for (double p : *periods_hours) spec.s1a.push_back(position_for_period(p, T, interval_seconds));
    }
    spec.rho = rho;
    spec.decay_scale = decay_scale;
    spec.amplitude = amplitude;
    spec.offset = offset;
    spec.validate();
    return spec;
  }
};

inline nlohmann::json to_json(const WeightOptions& w) {
  nlohmann::json j = {{"rho", w.rho}, {"decay_scale", w.decay_scale}, {"amplitude", w.amplitude}, {"offset", w.offset}};
  j["s1a"] = w.s1a ? nlohmann::json(*w.s1a) : nlohmann::json(nullptr);
  j["periods_hours"] = w.periods_hours ? nlohmann::json(*w.periods_hours) : nlohmann::json(nullptr);
  return j;
}

inline WeightOptions weight_options_from_json(const nlohmann::json& j) {
  WeightOptions w;
  if (!j.at("s1a").is_null()) w.s1a = j.at("s1a").get<std::vector<Index>>();
  if (!j.at("periods_hours").is_null()) w.periods_hours = j.at("periods_hours").get<std::vector<double>>();
  w.rho = j.at("rho").get<double>();
  w.decay_scale = j.at("decay_scale").get<double>();
  w.amplitude = j.at("amplitude").get<double>();
  w.offset = j.at("offset").get<double>();
  return w;
}

inline nlohmann::json to_json(const WeightSpec& s) {
  return {{"T", s.T},         {"s1a", s.s1a},           {"rho", s.rho},
          {"decay_scale", s.decay_scale}, {"amplitude", s.amplitude}, {"offset", s.offset}};
}

enum class Method { spcp, spcp_fdr };

inline std::string to_string(Method m) { return m == Method::spcp ? "spcp" : "spcp-fdr"; }

inline Method method_from_string(const std::string& s) {
  if (s == "spcp") return Method::spcp;
  if (s == "spcp-fdr") return Method::spcp_fdr;
  throw InputError("unknown method '" + s + "' (expected spcp or spcp-fdr)");
}

inline std::string to_string(MatrixFormat f) { return f == MatrixFormat::csv ? "csv" : "binary"; }

inline MatrixFormat format_from_string(const std::string& s) {
  if (s == "csv") return MatrixFormat::csv;
  if (s == "binary") return MatrixFormat::binary;
  throw InputError("unknown matrix format '" + s + "' (expected csv or binary)");
}

struct DecomposeOptions {
  std::filesystem::path input;
  MatrixFormat format = MatrixFormat::csv;
  int interval_seconds = 300;
  Method method = Method::spcp_fdr;
  WeightOptions weights;
  /// "estimate" (MAD of first differences) or "unit" (input already normalized).
  std::string noise = "estimate";
  double sigma_floor = 1e-8;
  std::optional<double> lambda;
  std::optional<double> gamma;
  double eta = 0.9;
  double mu0_factor = 0.99;
  double mu_bar_factor = 1e-5;
  double lipschitz = 3.0;
  int max_iters = 1000;
  double tol = 1e-7;
  std::filesystem::path out;
};

inline nlohmann::json to_json(const DecomposeOptions& o) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"input", o.input.string()},
          {"format", to_string(o.format)},
          {"interval_seconds", o.interval_seconds},
          {"method", to_string(o.method)},
          {"weights", to_json(o.weights)},
          {"noise", o.noise},
          {"sigma_floor", o.sigma_floor},
          {"lambda", opt(o.lambda)},
          {"gamma", opt(o.gamma)},
          {"eta", o.eta},
          {"mu0_factor", o.mu0_factor},
          {"mu_bar_factor", o.mu_bar_factor},
          {"lipschitz", o.lipschitz},
          {"max_iters", o.max_iters},
          {"tol", o.tol},
          {"out", o.out.string()}};
}

inline DecomposeOptions decompose_options_from_json(const nlohmann::json& j) {
  DecomposeOptions o;
  o.input = j.at("input").get<std::string>();
  o.format = format_from_string(j.at("format").get<std::string>());
  o.interval_seconds = j.at("interval_seconds").get<int>();
  o.method = method_from_string(j.at("method").get<std::string>());
  o.weights = weight_options_from_json(j.at("weights"));
  o.noise = j.at("noise").get<std::string>();
  o.sigma_floor = j.at("sigma_floor").get<double>();
  if (!j.at("lambda").is_null()) o.lambda = j.at("lambda").get<double>();
  if (!j.at("gamma").is_null()) o.gamma = j.at("gamma").get<double>();
  o.eta = j.at("eta").get<double>();
  o.mu0_factor = j.at("mu0_factor").get<double>();
  o.mu_bar_factor = j.at("mu_bar_factor").get<double>();
  o.lipschitz = j.at("lipschitz").get<double>();
  o.max_iters = j.at("max_iters").get<int>();
  o.tol = j.at("tol").get<double>();
  o.out = j.at("out").get<std::string>();
  return o;
}

struct SynthOptions {
  SynthSpec spec;
  std::filesystem::path out;
};

struct CompareOptions {
  std::filesystem::path fdr_dir;
  std::filesystem::path spcp_dir;
  std::filesystem::path out;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json make_manifest(const std::string& subcommand, nlohmann::json options, nlohmann::json resolved,
                                    const std::string& started_at) {
  return {{"tool", "tmdecomp"},       {"version", kToolVersion},      {"subcommand", subcommand},
          {"options", std::move(options)}, {"resolved", std::move(resolved)}, {"started_at", started_at},
          {"finished_at", utc_timestamp()}};
}

inline nlohmann::json to_json(const SolverConfig& c) {
  return {{"lambda", c.lambda},   {"gamma", c.gamma},         {"eta", c.eta},
          {"mu0_factor", c.mu0_factor}, {"mu_bar_factor", c.mu_bar_factor}, {"lipschitz", c.lipschitz},
          {"max_iters", c.max_iters},   {"tol", c.tol},           {"beta", c.weights.beta}};
}

/// position, period_hours, phi; the DC row carries "DC" as its period.
inline void write_spectrum_csv(std::ostream& os, const SpectralDensity& phi, double interval_seconds) {
  os << "position,period_hours,phi\n";
  const Index T = phi.length();
  for (Index t = 1; t <= T; ++t) {
    const auto period = position_period_hours(t, T, interval_seconds);
    os << t << ',' << (period ? detail::format_double(*period) : std::string("DC")) << ','
       << detail::format_double(phi.at(t)) << '\n';
  }
}

inline void write_spectrum_csv(const std::filesystem::path& path, const SpectralDensity& phi,
                               double interval_seconds) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write " + path.string());
  write_spectrum_csv(os, phi, interval_seconds);
}

inline void write_weights_csv(std::ostream& os, const WeightVector& w) {
  os << "position,c\n";
  for (Index t = 1; t <= w.length(); ++t) os << t << ',' << detail::format_double(w.at(t)) << '\n';
}

/// Outcome of a decomposition run.
struct DecomposeResult {
  Decomposition normalized;
  NoiseScales scales;
  EvalReport report;
  SolverConfig config;
  WeightSpec weight_spec;
};

/// load -> noise scales -> normalize -> solve -> write outputs into opts.out.
///
/// Files: A.csv, E.csv, N.csv and diagnostics.json (normalized units),
/// scales.csv, report.json, spectrum.csv (noise spectral density), the
/// denormalized/ directory with A/E/N in input units, and manifest.json.
inline DecomposeResult run_decompose(const DecomposeOptions& opts, std::ostream& log = std::cerr) {
  const std::string started = utc_timestamp();
  const TrafficMatrix input = load_matrix(opts.input, opts.format, opts.interval_seconds);
  const Index T = input.samples();
  const Index P = input.flows();

  DecomposeResult r;
  if (opts.noise == "estimate") {
    require(T >= 3, "noise estimation needs at least 3 time samples");
    r.scales = estimate_noise_scales(input, opts.sigma_floor);
    for (Index j : r.scales.floored)
      log << "warning: flow " << input.flow_ids[std::size_t(j)] << " has no measurable noise; sigma clamped to "
          << r.scales.sigma(j) << '\n';
  } else if (opts.noise == "unit") {
    r.scales.sigma = Vector::Ones(P);
  } else {
    throw InputError("unknown noise mode '" + opts.noise + "' (expected estimate or unit)");
  }
  const Matrix x = normalize(input.data, r.scales);

  r.weight_spec = opts.weights.resolve(T, opts.interval_seconds);
  WeightVector weights = opts.method == Method::spcp ? uniform_weights(T) : build_weights(r.weight_spec);
  r.config = SolverConfig::defaults(T, P, std::move(weights));
  if (opts.lambda) r.config.lambda = *opts.lambda;
  if (opts.gamma) r.config.gamma = *opts.gamma;
  r.config.eta = opts.eta;
  r.config.mu0_factor = opts.mu0_factor;
  r.config.mu_bar_factor = opts.mu_bar_factor;
  r.config.lipschitz = opts.lipschitz;
  r.config.max_iters = opts.max_iters;
  r.config.tol = opts.tol;

  r.normalized = solve(x, r.config);
  r.report = evaluate(r.normalized, r.weight_spec.penalized_positions());

  const auto& out = opts.out;
  save_decomposition(r.normalized, out);
  {
    std::ofstream os(out / "scales.csv", std::ios::trunc);
    if (!os) throw Error("cannot write " + (out / "scales.csv").string());
    os << "flow,sigma\n";
    for (Index j = 0; j < P; ++j) os << input.flow_ids[std::size_t(j)] << ',' << detail::format_double(r.scales.sigma(j)) << '\n';
  }
  write_json(out / "report.json", to_json(r.report));
  write_spectrum_csv(out / "spectrum.csv", r.report.density_N, opts.interval_seconds);
  const Decomposition raw = denormalize(r.normalized, r.scales);
  std::filesystem::create_directories(out / "denormalized");
  save_matrix(out / "denormalized" / "A.csv", raw.A, MatrixFormat::csv);
  save_matrix(out / "denormalized" / "E.csv", raw.E, MatrixFormat::csv);
  save_matrix(out / "denormalized" / "N.csv", raw.N, MatrixFormat::csv);

  nlohmann::json resolved = {{"solver", to_json(r.config)}, {"weight_spec", to_json(r.weight_spec)},
                             {"T", T}, {"P", P}};
  write_json(out / "manifest.json", make_manifest("decompose", to_json(opts), resolved, started));
  return r;
}

inline int decompose_exit_code(const DecomposeResult& r) {
  return r.normalized.diagnostics.converged ? kExitOk : kExitNotConverged;
}

/// Writes X.csv, A.csv, E.csv, N.csv, spec.json and manifest.json.
inline SynthResult run_synth(const SynthOptions& opts) {
  const std::string started = utc_timestamp();
  SynthResult r = generate(opts.spec);
  std::filesystem::create_directories(opts.out);
  save_matrix(opts.out / "X.csv", r.x.data, MatrixFormat::csv);
  save_matrix(opts.out / "A.csv", r.truth.A, MatrixFormat::csv);
  save_matrix(opts.out / "E.csv", r.truth.E, MatrixFormat::csv);
  save_matrix(opts.out / "N.csv", r.truth.N, MatrixFormat::csv);
  write_json(opts.out / "spec.json", to_json(opts.spec));
  nlohmann::json options = {{"spec", to_json(opts.spec)}, {"out", opts.out.string()}};
  nlohmann::json resolved = {{"seed", opts.spec.seed}};
  write_json(opts.out / "manifest.json", make_manifest("synth", options, resolved, started));
  return r;
}

/// Compares two decompose output directories (frequency-regularized first).
/// Writes comparison.json, pearson.csv and manifest.json.
inline ComparisonSummary run_compare(const CompareOptions& opts) {
  const std::string started = utc_timestamp();
  const EvalReport fdr = report_from_json(read_json(opts.fdr_dir / "report.json"));
  const EvalReport spcp = report_from_json(read_json(opts.spcp_dir / "report.json"));
  const ComparisonSummary s = compare_reports(fdr, spcp);
  std::filesystem::create_directories(opts.out);
  write_json(opts.out / "comparison.json", to_json(s));
  {
    std::ofstream os(opts.out / "pearson.csv", std::ios::trunc);
    if (!os) throw Error("cannot write " + (opts.out / "pearson.csv").string());
    os << "flow,pearson_fdr,pearson_spcp\n";
    for (std::size_t j = 0; j < fdr.pearson_abs.size(); ++j)
      os << j + 1 << ',' << detail::format_double(fdr.pearson_abs[j]) << ','
         << detail::format_double(spcp.pearson_abs[j]) << '\n';
  }
  nlohmann::json options = {{"fdr_dir", opts.fdr_dir.string()}, {"spcp_dir", opts.spcp_dir.string()},
                            {"out", opts.out.string()}};
  write_json(opts.out / "manifest.json", make_manifest("compare", options, nlohmann::json::object(), started));
  return s;
}

/// Re-runs the command recorded in a manifest, optionally into another
/// directory. Returns the command's exit code.
inline int run_replay(const std::filesystem::path& manifest_path,
                      const std::optional<std::filesystem::path>& out_override, std::ostream& log = std::cerr) {
  const nlohmann::json manifest = read_json(manifest_path);
  const std::string sub = manifest.at("subcommand").get<std::string>();
  const nlohmann::json& options = manifest.at("options");
  try {
    if (sub == "decompose") {
      DecomposeOptions o = decompose_options_from_json(options);
      if (out_override) o.out = *out_override;
      return decompose_exit_code(run_decompose(o, log));
    }
    if (sub == "synth") {
      SynthOptions o{synth_spec_from_json(options.at("spec")), options.at("out").get<std::string>()};
      if (out_override) o.out = *out_override;
      run_synth(o);
      return kExitOk;
    }
    if (sub == "compare") {
      CompareOptions o{options.at("fdr_dir").get<std::string>(), options.at("spcp_dir").get<std::string>(),
                       options.at("out").get<std::string>()};
      if (out_override) o.out = *out_override;
      run_compare(o);
      return kExitOk;
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(manifest_path.string() + ": malformed options: " + e.what());
  }
  throw InputError("manifest names unknown subcommand '" + sub + "'");
}

}  // namespace tmdecomp

#endif  // TMDECOMP_PIPELINE_HPP
