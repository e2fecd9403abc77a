#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "tmdecomp/spectral.hpp"

using namespace tmdecomp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("dft matches the direct sum for every length up to 64", "[spectral]") {
  std::mt19937_64 rng(11);
  for (Index T = 1; T <= 64; ++T) {
    const Vector x = oracle::gaussian_matrix(T, 1, rng).col(0);
    const CVector fast = dft(x);
    const CVector slow = oracle::naive_dft(x);
    INFO("T = " << T);
    CHECK((fast - slow).norm() <= 1e-12 * std::max(1.0, x.norm()));
    const CVector back = inverse_dft(fast);
    CHECK((back.real() - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
    CHECK(back.imag().norm() <= 1e-12 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("inverse dft matches the direct sum on complex input", "[spectral]") {
  std::mt19937_64 rng(12);
  for (Index T : {5, 16, 63}) {
    CVector a(T);
    const Matrix re = oracle::gaussian_matrix(T, 2, rng);
    for (Index t = 0; t < T; ++t) a(t) = {re(t, 0), re(t, 1)};
    CHECK((inverse_dft(a) - oracle::naive_idft(a)).norm() <= 1e-12 * a.norm());
  }
}

TEST_CASE("transform is unitary and conjugate symmetric on real input", "[spectral]") {
  std::mt19937_64 rng(13);
  for (Index T : {2, 7, 64, 2016}) {
    const Vector x = oracle::gaussian_matrix(T, 1, rng).col(0);
    const CVector a = dft(x);
    CHECK_THAT(a.squaredNorm(), WithinRel(x.squaredNorm(), 1e-12));
    for (Index t = 2; t <= T; ++t) {
      const Index d = SpectralDensity::dual(t, T);
      CHECK(std::abs(a(d - 1) - std::conj(a(t - 1))) <= 1e-10 * x.norm());
    }
    CHECK(std::abs(a(0).imag()) <= 1e-12 * x.norm());
  }
}

TEST_CASE("dual position is an involution", "[spectral]") {
  for (Index T : {4, 5, 2016})
    for (Index t = 2; t <= T; ++t) CHECK(SpectralDensity::dual(SpectralDensity::dual(t, T), T) == t);
}

TEST_CASE("spectral density of a cosine sits at its position and dual", "[spectral]") {
  const Index T = 2016;
  const Index cycles = 7;
  Vector x(T);
  for (Index k = 0; k < T; ++k) x(k) = 3.0 * std::cos(2.0 * oracle::kPi * cycles * k / double(T));
  const SpectralDensity phi = spectral_density(x);
  // Unitary DFT of A cos puts A^2 T / 4 at each of the two positions.
  CHECK_THAT(phi.at(cycles + 1), WithinRel(9.0 * T / 4.0, 1e-10));
  CHECK_THAT(phi.at(T - cycles + 1), WithinRel(9.0 * T / 4.0, 1e-10));
  CHECK_THAT(phi.phi.sum(), WithinRel(x.squaredNorm(), 1e-12));
  CHECK(phi.phi.maxCoeff() == phi.at(cycles + 1));
}

TEST_CASE("aggregate density sums per-column periodograms", "[spectral]") {
  std::mt19937_64 rng(14);
  const Matrix m = oracle::gaussian_matrix(40, 3, rng);
  Vector sum = Vector::Zero(40);
  for (Index j = 0; j < 3; ++j) sum += oracle::naive_dft(m.col(j)).cwiseAbs2();
  CHECK((aggregate_density(m).phi - sum).norm() <= 1e-12 * sum.norm());
}

TEST_CASE("position periods for a week of 5-minute samples", "[spectral]") {
  CHECK_FALSE(position_period_hours(1, 2016, 300).has_value());
  CHECK_THAT(*position_period_hours(8, 2016, 300), WithinAbs(24.0, 1e-12));
  CHECK_THAT(*position_period_hours(2010, 2016, 300), WithinAbs(24.0, 1e-12));
  CHECK_THAT(*position_period_hours(15, 2016, 300), WithinAbs(12.0, 1e-12));
  CHECK_THAT(*position_period_hours(169, 2016, 300), WithinAbs(1.0, 1e-12));
  CHECK_THAT(*position_period_hours(1009, 2016, 300), WithinAbs(2016.0 / 1008.0 / 12.0, 1e-12));
  for (Index t = 2; t <= 2016; ++t)
    CHECK(*position_period_hours(t, 2016, 300) == *position_period_hours(SpectralDensity::dual(t, 2016), 2016, 300));
}

TEST_CASE("spectral functions reject bad arguments", "[spectral]") {
  CHECK_THROWS_AS(position_period_hours(0, 10, 300), InputError);
  CHECK_THROWS_AS(position_period_hours(11, 10, 300), InputError);
  CHECK_THROWS_AS(position_period_hours(2, 10, 0), InputError);
  CHECK_THROWS_AS(dft(Vector()), InputError);
  CHECK_THROWS_AS(SpectralDensity{Vector::Ones(4)}.at(5), InputError);
  UnitaryFft fft(8);
  CHECK_THROWS_AS(fft.forward(Vector::Ones(7)), InputError);
}
