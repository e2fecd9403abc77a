#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <random>
#include <sstream>

#include <unistd.h>

#include "oracles.hpp"
#include "tmdecomp/dataset.hpp"

using namespace tmdecomp;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinRel;

namespace {

TrafficMatrix parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix(in, MatrixFormat::csv);
}

std::string to_binary(const Matrix& m) {
  std::ostringstream os;
  write_binary(os, m);
  return os.str();
}

TrafficMatrix parse_bytes(const std::string& bytes) {
  std::istringstream in(bytes);
  return parse_matrix(in, MatrixFormat::binary);
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tmdecomp_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("csv with and without a header row", "[dataset]") {
  const TrafficMatrix plain = parse_text("1,2\n3,4\n5,6\n");
  CHECK(plain.samples() == 3);
  CHECK(plain.flows() == 2);
  CHECK(plain.flow_ids == std::vector<std::string>{"f1", "f2"});
  CHECK(plain.data(2, 1) == 6.0);

  const TrafficMatrix named = parse_text("ab, cd\n1, 2\n\n3 ,4\n");
  CHECK(named.flow_ids == std::vector<std::string>{"ab", "cd"});
  CHECK(named.data(1, 0) == 3.0);
}

TEST_CASE("malformed csv names the offending cell", "[dataset]") {
  CHECK_THROWS_WITH(parse_text("1,2\n3\n"), ContainsSubstring("line 2"));
  CHECK_THROWS_WITH(parse_text("1,2\n3,x\n"), ContainsSubstring("row 2") && ContainsSubstring("column 2"));
  CHECK_THROWS_WITH(parse_text("1,2\n3,nan\n"), ContainsSubstring("non-finite"));
  CHECK_THROWS_AS(parse_text(""), InputError);
  CHECK_THROWS_AS(parse_text("a,b\n"), InputError);
  CHECK_THROWS_AS(parse_text("a,a\n1,2\n3,4\n"), InputError);
  // One time sample is not a series.
  CHECK_THROWS_AS(parse_text("1,2\n"), InputError);
}

TEST_CASE("csv and binary round trips are bit exact", "[dataset]") {
  std::mt19937_64 rng(31);
  Matrix m = oracle::gaussian_matrix(17, 5, rng, 1e3);
  m(0, 0) = 0.1;
  m(1, 1) = -0.0;
  m(2, 2) = 1e-300;
  m(3, 3) = 123456789.123456789;
  std::ostringstream csv;
  write_csv(csv, m);
  CHECK(parse_text(csv.str()).data == m);
  CHECK(parse_bytes(to_binary(m)).data == m);
}

TEST_CASE("binary reader rejects inconsistent payloads", "[dataset]") {
  const std::string good = to_binary(Matrix::Ones(4, 3));
  CHECK_THROWS_AS(parse_bytes(good.substr(0, good.size() - 1)), InputError);
  CHECK_THROWS_AS(parse_bytes(good + "x"), InputError);
  CHECK_THROWS_AS(parse_bytes(good.substr(0, 6)), InputError);
  std::string huge = good;
  huge[0] = huge[1] = huge[2] = huge[3] = '\xff';
  CHECK_THROWS_AS(parse_bytes(huge), InputError);
  std::string zero = good;
  zero[4] = zero[5] = zero[6] = zero[7] = '\0';
  CHECK_THROWS_AS(parse_bytes(zero), InputError);
}

TEST_CASE("loaders survive a fuzz corpus of mutated files", "[dataset]") {
  std::mt19937_64 rng(32);
  const Matrix m = oracle::gaussian_matrix(6, 3, rng);
  std::ostringstream csv;
  write_csv(csv, m);
  const std::vector<std::string> seeds{csv.str(), "a,b,c\n" + csv.str()};
  const std::string bin = to_binary(m);
  std::uniform_int_distribution<int> byte(0, 255);
  int parsed = 0, rejected = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    const bool binary = trial % 3 == 0;
    std::string s = binary ? bin : seeds[std::size_t(trial) % 2];
    const int edits = 1 + trial % 4;
    for (int e = 0; e < edits && !s.empty(); ++e) {
      const std::size_t pos = std::size_t(rng() % s.size());
      switch (rng() % 3) {
        case 0: s[pos] = char(byte(rng)); break;
        case 1: s.erase(pos, 1); break;
        default: s.insert(pos, 1, char(byte(rng))); break;
      }
    }
    try {
      std::istringstream in(s);
      const TrafficMatrix tm = parse_matrix(in, binary ? MatrixFormat::binary : MatrixFormat::csv);
      CHECK(tm.data.allFinite());
      ++parsed;
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(parsed + rejected == 3000);
  CHECK(rejected > 0);
}

TEST_CASE("MAD noise scale is consistent for Gaussian noise", "[dataset]") {
  std::mt19937_64 rng(33);
  const Index T = 20000;
  Matrix x = oracle::gaussian_matrix(T, 3, rng);
  x.col(0) *= 2.5;
  x.col(1) *= 0.01;
  // A slow trend and sparse spikes should barely move the estimate.
  for (Index t = 0; t < T; ++t) x(t, 2) += 100.0 * std::sin(2.0 * oracle::kPi * t / 5000.0);
  for (Index t = 0; t < T; t += 97) x(t, 2) += 50.0;
  const NoiseScales s = estimate_noise_scales(x);
  CHECK_THAT(s.sigma(0), WithinRel(2.5, 0.03));
  CHECK_THAT(s.sigma(1), WithinRel(0.01, 0.03));
  CHECK_THAT(s.sigma(2), WithinRel(1.0, 0.05));
  CHECK(s.floored.empty());
}

TEST_CASE("noise scale floor for flat columns", "[dataset]") {
  Matrix x(5, 3);
  x.col(0).setZero();
  x.col(1).setConstant(7.0);
  x.col(2) << 1, 2, 3, 4, 5;  // every first difference equals 1, so the MAD is 0
  const NoiseScales s = estimate_noise_scales(x, 1e-6);
  CHECK(s.floored == std::vector<Index>{0, 1, 2});
  CHECK(s.sigma(0) == 1e-6);
  CHECK_THAT(s.sigma(1), WithinRel(7e-6, 1e-12));
  CHECK_THAT(s.sigma(2), WithinRel(5e-6, 1e-12));
}

TEST_CASE("normalize and denormalize are inverse", "[dataset]") {
  std::mt19937_64 rng(34);
  const Matrix x = oracle::gaussian_matrix(10, 4, rng);
  NoiseScales s{Vector(4), {}};
  s.sigma << 0.5, 2.0, 3.0, 1e-3;
  CHECK((denormalize(normalize(x, s), s) - x).cwiseAbs().maxCoeff() <= 1e-12);
  NoiseScales wrong{Vector::Ones(3), {}};
  CHECK_THROWS_AS(normalize(x, wrong), InputError);
}

TEST_CASE("median of odd and even samples", "[dataset]") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 3, 2}) == 2.5);
  CHECK_THROWS_AS(median({}), InputError);
}

TEST_CASE("decomposition save and load round trip", "[dataset]") {
  std::mt19937_64 rng(35);
  Decomposition d{oracle::gaussian_matrix(6, 2, rng), oracle::gaussian_matrix(6, 2, rng),
                  oracle::gaussian_matrix(6, 2, rng), {}};
  d.diagnostics.iterations = 17;
  d.diagnostics.converged = true;
  d.diagnostics.final_mu = 0.125;
  d.diagnostics.residual_fro = 1e-9;
  d.diagnostics.objective_trace = {3.0, 2.0, 1.5};
  d.diagnostics.mu_trace = {1.0, 0.9};
  const auto dir = scratch_dir("roundtrip");
  save_decomposition(d, dir);
  const Decomposition back = load_decomposition(dir);
  CHECK(back.A == d.A);
  CHECK(back.E == d.E);
  CHECK(back.N == d.N);
  CHECK(back.diagnostics.iterations == 17);
  CHECK(back.diagnostics.converged);
  CHECK(back.diagnostics.objective_trace == d.diagnostics.objective_trace);
  CHECK(back.diagnostics.mu_trace == d.diagnostics.mu_trace);
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing files are input errors", "[dataset]") {
  CHECK_THROWS_AS(load_matrix("/nonexistent/x.csv", MatrixFormat::csv), InputError);
}
