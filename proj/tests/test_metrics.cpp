#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "tmdecomp/metrics.hpp"

using namespace tmdecomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("numerical rank", "[metrics]") {
  std::mt19937_64 rng(51);
  CHECK(numerical_rank(oracle::gaussian_matrix(30, 3, rng) * oracle::gaussian_matrix(3, 12, rng)) == 3);
  CHECK(numerical_rank(Matrix::Zero(5, 5)) == 0);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  d(1, 1) = 1e-12;
  CHECK(numerical_rank(d) == 1);
  CHECK(numerical_rank(d, 1e-13) == 2);
}

TEST_CASE("pearson is invariant to affine maps and sign", "[metrics]") {
  std::mt19937_64 rng(52);
  const Vector a = oracle::gaussian_matrix(100, 1, rng).col(0);
  const Vector n = 0.3 * a + oracle::gaussian_matrix(100, 1, rng).col(0);
  const double r = pearson_abs(a, n).value;
  CHECK(r > 0);
  CHECK(r <= 1);
  CHECK_THAT(pearson_abs((5.0 * a).array() + 3.0, n).value, WithinRel(r, 1e-12));
  CHECK_THAT(pearson_abs(-a, n).value, WithinRel(r, 1e-12));
  CHECK_THAT(pearson_abs(a, a).value, WithinAbs(1.0, 1e-15));
  const FlaggedValue flat = pearson_abs(Vector::Constant(100, 2.0), n);
  CHECK(flat.value == 0.0);
  CHECK(flat.degenerate);
  CHECK_THROWS_AS(pearson_abs(a, n.head(50)), InputError);
}

TEST_CASE("spectral flatness extremes", "[metrics]") {
  CHECK_THAT(spectral_flatness(SpectralDensity{Vector::Constant(64, 3.0)}).value, WithinAbs(1.0, 1e-12));
  Vector spike = Vector::Constant(64, 1e-6);
  spike(5) = 1.0;
  CHECK(spectral_flatness(SpectralDensity{spike}).value < 0.05);
  // Scale invariance.
  Vector v(64);
  for (Index t = 0; t < 64; ++t) v(t) = 1.0 + t;
  CHECK_THAT(spectral_flatness(SpectralDensity{7.0 * v}).value, WithinRel(spectral_flatness(SpectralDensity{v}).value, 1e-12));
  // DC is excluded by default.
  Vector dc = Vector::Constant(64, 1.0);
  dc(0) = 1e6;
  CHECK_THAT(spectral_flatness(SpectralDensity{dc}).value, WithinAbs(1.0, 1e-12));
  CHECK(spectral_flatness(SpectralDensity{dc}, false).value < 0.1);
  const FlaggedValue zero = spectral_flatness(SpectralDensity{Vector::Zero(8)});
  CHECK(zero.value == 1.0);
  CHECK(zero.degenerate);
}

TEST_CASE("white noise has a flat aggregate spectrum", "[metrics]") {
  std::vector<double> values;
  for (unsigned seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(seed);
    values.push_back(spectral_flatness(aggregate_density(oracle::gaussian_matrix(2016, 121, rng))).value);
    CHECK(values.back() > 0.8);
  }
  double mean = 0, var = 0;
  for (double v : values) mean += v;
  mean /= double(values.size());
  for (double v : values) var += (v - mean) * (v - mean);
  CHECK(std::sqrt(var / double(values.size() - 1)) / mean < 0.2);
}

TEST_CASE("a report compared with itself has no deltas", "[metrics]") {
  std::mt19937_64 rng(53);
  const Decomposition d{oracle::gaussian_matrix(64, 2, rng) * oracle::gaussian_matrix(2, 5, rng),
                        Matrix::Zero(64, 5), oracle::gaussian_matrix(64, 5, rng), {}};
  const EvalReport r = evaluate(d, {5, 61});
  CHECK(r.rank_A == 2);
  CHECK(r.pearson_abs.size() == 5);
  CHECK(r.peak_spectra.size() == 2);
  const ComparisonSummary s = compare_reports(r, r);
  CHECK(s.flatness_gain == 0.0);
  CHECK(s.rank_ratio == 1.0);
  CHECK(s.fro_ratio == 1.0);
  CHECK(s.pearson_decreased == 0.0);
  for (const auto& [t, delta] : s.peak_delta) CHECK(delta == 0.0);

  const EvalReport back = report_from_json(to_json(r));
  CHECK(back.rank_A == r.rank_A);
  CHECK(back.pearson_abs == r.pearson_abs);
  CHECK(back.peak_spectra == r.peak_spectra);

  EvalReport other = r;
  other.P = 6;
  CHECK_THROWS_AS(compare_reports(r, other), InputError);
}

TEST_CASE("norm ratio rendering", "[metrics]") {
  CHECK(format_ratio(1.01583) == "1.0158");
  CHECK(format_ratio(1.0) == "1.0000");
}
