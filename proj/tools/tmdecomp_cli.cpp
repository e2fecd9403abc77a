// tmdecomp: command-line front end.
//
//   tmdecomp decompose --input X.csv --out run/ [--method spcp|spcp-fdr] ...
//   tmdecomp synth --out synth/ [--T 2016 --P 20 --rank 4 --seed 1 ...]
//   tmdecomp spectrum --input X.csv --out spectrum.csv
//   tmdecomp weights --T 2016 [--out weights.csv]
//   tmdecomp compare --fdr run_fdr/ --spcp run_spcp/ --out cmp/
//   tmdecomp replay --manifest run/manifest.json [--out run2/]
//
// Exit codes: 0 success, 1 input error, 2 solver did not converge.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tmdecomp/pipeline.hpp"

namespace fs = std::filesystem;
using namespace tmdecomp;

namespace {

// Option names accept both --kebab-case and --snake_case.
std::string names(const std::string& kebab) {
  std::string snake = kebab;
  for (char& ch : snake)
    if (ch == '-') ch = '_';
  return snake == kebab ? "--" + kebab : "--" + kebab + ",--" + snake;
}

std::vector<Harmonic> parse_harmonics(const std::string& text) {
  std::vector<Harmonic> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    double period = 0, amp = 0;
    if (colon == std::string::npos || !detail::parse_double(item.substr(0, colon), period) ||
        !detail::parse_double(item.substr(colon + 1), amp))
      throw InputError("harmonic '" + item + "' is not of the form period_hours:amplitude");
    out.push_back({period, amp});
  }
  return out;
}

struct WeightFlags {
  std::vector<Index> s1a;
  std::vector<double> periods;
  WeightOptions opts;

  void attach(CLI::App* app) {
    app->add_option(names("s1a"), s1a, "penalized DFT positions (1-based, without duals)")->delimiter(',');
    app->add_option(names("periods"), periods, "penalized periods in hours, converted to positions")->delimiter(',');
    app->add_option(names("rho"), opts.rho, "extra weight at penalized positions");
    app->add_option(names("decay-scale"), opts.decay_scale, "decay scale of the weight profile");
    app->add_option(names("amplitude"), opts.amplitude, "amplitude of the weight profile");
    app->add_option(names("offset"), opts.offset, "offset of the weight profile");
  }

  WeightOptions resolve() const {
    WeightOptions w = opts;
    if (!s1a.empty()) w.s1a = s1a;
    if (!periods.empty()) w.periods_hours = periods;
    return w;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank + sparse + noise decomposition of traffic matrices"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // decompose
  DecomposeOptions dec;
  std::string dec_format = "csv", dec_method = "spcp-fdr";
  std::optional<double> dec_lambda, dec_gamma;
  WeightFlags dec_weights;
  auto* decompose = app.add_subcommand("decompose", "decompose a traffic matrix");
  decompose->add_option(names("input"), dec.input, "input matrix (rows = time, columns = flows)")->required();
  decompose->add_option(names("out"), dec.out, "output directory")->required();
  decompose->add_option(names("format"), dec_format, "csv or binary");
  decompose->add_option(names("interval-seconds"), dec.interval_seconds, "sampling interval in seconds");
  decompose->add_option(names("method"), dec_method, "spcp-fdr (frequency-weighted) or spcp (plain)");
  decompose->add_option(names("noise"), dec.noise, "estimate (per-flow MAD scaling) or unit");
  decompose->add_option(names("sigma-floor"), dec.sigma_floor, "relative floor for noise scales");
  decompose->add_option(names("lambda"), dec_lambda, "sparse weight (default 1/sqrt(max(T,P)))");
  decompose->add_option(names("gamma"), dec_gamma, "noise weight (default from T and P)");
  decompose->add_option(names("eta"), dec.eta, "continuation factor");
  decompose->add_option(names("mu0-factor"), dec.mu0_factor, "mu0 as a multiple of ||X||_2");
  decompose->add_option(names("mu-bar-factor"), dec.mu_bar_factor, "final mu as a multiple of mu0");
  decompose->add_option(names("lipschitz"), dec.lipschitz, "Lipschitz constant of the smooth term");
  decompose->add_option(names("max-iters"), dec.max_iters, "iteration cap");
  decompose->add_option(names("tol"), dec.tol, "relative change tolerance");
  dec_weights.attach(decompose);

  // synth
  SynthOptions syn;
  std::string syn_harmonics;
  auto* synth = app.add_subcommand("synth", "generate a synthetic traffic matrix with ground truth");
  synth->add_option(names("out"), syn.out, "output directory")->required();
  synth->add_option("--T", syn.spec.T, "time samples");
  synth->add_option("--P", syn.spec.P, "flows");
  synth->add_option(names("rank"), syn.spec.rank, "rank of the low-rank part");
  synth->add_option(names("interval-seconds"), syn.spec.interval_seconds, "sampling interval in seconds");
  synth->add_option(names("harmonics"), syn_harmonics, "period_hours:amplitude list, e.g. 24:0.5,12:0.3");
  synth->add_option(names("level"), syn.spec.level, "traffic level in noise-sigma units");
  synth->add_option(names("anomaly-density"), syn.spec.anomaly_density, "fraction of anomalous cells");
  synth->add_option(names("anomaly-magnitude"), syn.spec.anomaly_magnitude, "spike scale in sigma units");
  synth->add_option(names("noise-sigma"), syn.spec.noise_sigma, "one sigma or one per flow")->delimiter(',');
  synth->add_option(names("seed"), syn.spec.seed, "random seed");

  // spectrum
  fs::path spec_input, spec_out;
  std::string spec_format = "csv";
  int spec_interval = 300;
  auto* spectrum = app.add_subcommand("spectrum", "aggregate spectral density of a matrix");
  spectrum->add_option(names("input"), spec_input, "input matrix")->required();
  spectrum->add_option(names("out"), spec_out, "output CSV (stdout if omitted)");
  spectrum->add_option(names("format"), spec_format, "csv or binary");
  spectrum->add_option(names("interval-seconds"), spec_interval, "sampling interval in seconds");

  // weights
  Index w_T = 2016;
  int w_interval = 300;
  fs::path w_out;
  WeightFlags w_flags;
  auto* weights = app.add_subcommand("weights", "print the frequency weights c_t");
  weights->add_option("--T", w_T, "series length");
  weights->add_option(names("interval-seconds"), w_interval, "sampling interval in seconds");
  weights->add_option(names("out"), w_out, "output CSV (stdout if omitted)");
  w_flags.attach(weights);

  // compare
  CompareOptions cmp;
  auto* compare = app.add_subcommand("compare", "compare a spcp-fdr run with a spcp run");
  compare->add_option(names("fdr"), cmp.fdr_dir, "decompose output of the frequency-weighted run")->required();
  compare->add_option(names("spcp"), cmp.spcp_dir, "decompose output of the plain run")->required();
  compare->add_option(names("out"), cmp.out, "output directory")->required();

  // replay
  fs::path rep_manifest;
  std::optional<fs::path> rep_out;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option(names("manifest"), rep_manifest, "manifest.json")->required();
  replay->add_option(names("out"), rep_out, "output directory (default: the recorded one)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (*decompose) {
      dec.input = fs::absolute(dec.input);
      dec.format = format_from_string(dec_format);
      dec.method = method_from_string(dec_method);
      dec.lambda = dec_lambda;
      dec.gamma = dec_gamma;
      dec.weights = dec_weights.resolve();
      const DecomposeResult r = run_decompose(dec);
      const auto& diag = r.normalized.diagnostics;
      std::cout << "iterations " << diag.iterations << (diag.converged ? " converged" : " not converged")
                << ", rank(A) " << r.report.rank_A << ", noise flatness "
                << detail::format_double(r.report.spectral_flatness_N) << '\n';
      return decompose_exit_code(r);
    }
    if (*synth) {
      if (!syn_harmonics.empty()) syn.spec.harmonics = parse_harmonics(syn_harmonics);
      run_synth(syn);
      return kExitOk;
    }
    if (*spectrum) {
      const TrafficMatrix m = load_matrix(spec_input, format_from_string(spec_format), spec_interval);
      const SpectralDensity phi = aggregate_density(m.data);
      if (spec_out.empty())
        write_spectrum_csv(std::cout, phi, spec_interval);
      else
        write_spectrum_csv(spec_out, phi, spec_interval);
      return kExitOk;
    }
    if (*weights) {
      const WeightSpec spec = w_flags.resolve().resolve(w_T, w_interval);
      const WeightVector w = build_weights(spec);
      std::cerr << "beta " << detail::format_double(w.beta) << '\n';
      if (w_out.empty()) {
        write_weights_csv(std::cout, w);
      } else {
        std::ofstream os(w_out, std::ios::trunc);
        if (!os) throw Error("cannot write " + w_out.string());
        write_weights_csv(os, w);
      }
      return kExitOk;
    }
    if (*compare) {
      const ComparisonSummary s = run_compare(cmp);
      std::cout << "flatness gain " << detail::format_double(s.flatness_gain) << ", ||A|| ratio "
                << format_ratio(s.fro_ratio) << '\n';
      return kExitOk;
    }
    if (*replay) return run_replay(rep_manifest, rep_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}
