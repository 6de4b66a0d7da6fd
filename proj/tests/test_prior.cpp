#include <cmath>

#include "doctest.h"
#include "mixreg/prior.hpp"
#include "support/oracles.hpp"

using namespace mixreg;

TEST_SUITE_BEGIN("prior");

namespace {
// Deterministic low-discrepancy-ish sequence for test points, independent of
// the library RNG.
double frac(double x) { return x - std::floor(x); }
double golden(int i) { return frac(0.5 + 0.6180339887498949 * i); }
}  // namespace

TEST_CASE("normalizer and total mass") {
  RobbinsPrior prior;
  CHECK(prior.normalizer() ==
        doctest::Approx(2.0 / std::log(std::log(prior.c()))).epsilon(1e-15));
  CHECK(prior.u_max() == doctest::Approx(0.5 * prior.normalizer()).epsilon(1e-15));
  CHECK(prior.interval_mass(-1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(prior.interval_mass(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(prior.interval_mass(0.3, 0.3) == 0.0);
}

TEST_CASE("interval mass is symmetric and additive") {
  RobbinsPrior prior;
  for (int i = 0; i < 20; ++i) {
    double a = 1e-3 + 0.999 * golden(3 * i);
    double b = 1e-3 + 0.999 * golden(3 * i + 1);
    if (a > b) std::swap(a, b);
    double m = prior.interval_mass(a, b);
    CHECK(prior.interval_mass(-b, -a) == doctest::Approx(m).epsilon(1e-14));
    double mid = 0.5 * (a + b);
    CHECK(prior.interval_mass(a, mid) + prior.interval_mass(mid, b) ==
          doctest::Approx(m).epsilon(1e-12));
    CHECK(m >= 0.0);
  }
}

TEST_CASE("interval mass matches a brute-force grid") {
  RobbinsPrior prior;
  const double c = prior.c();
  // One-sided, negative-side, and spanning intervals.
  for (int i = 0; i < 12; ++i) {
    double a = 1e-3 + 0.999 * golden(5 * i + 2);
    double b = 1e-3 + 0.999 * golden(5 * i + 4);
    if (a > b) std::swap(a, b);
    CHECK(std::fabs(prior.interval_mass(a, b) - oracles::interval_mass(a, b, c, 200000)) <=
          1e-8);
    CHECK(std::fabs(prior.interval_mass(-b, -a) - oracles::interval_mass(-b, -a, c, 200000)) <=
          1e-8);
    CHECK(std::fabs(prior.interval_mass(-a, b) - oracles::interval_mass(-a, b, c, 200000)) <=
          1e-8);
  }
}

TEST_CASE("density integrates locally") {
  RobbinsPrior prior;
  for (double a : {1e-3, 0.01, 0.2, 0.7, 0.99}) {
    const double delta = 1e-6 * a;
    const double mass = prior.interval_mass(a, a + delta);
    const double approx = prior.density(a + 0.5 * delta) * delta;
    CHECK(mass == doctest::Approx(approx).epsilon(1e-6));
  }
  CHECK(prior.density(-0.5) == doctest::Approx(prior.density(0.5)).epsilon(1e-15));
  CHECK(prior.density(1.5) == 0.0);
  CHECK(prior.density(-1.0000001) == 0.0);
}

TEST_CASE("cumulative coordinate round trips") {
  RobbinsPrior prior;
  CHECK(prior.from_eta(1.0) == doctest::Approx(prior.u_max()).epsilon(1e-15));
  CHECK(prior.to_uniform(prior.u_max()) == doctest::Approx(1.0).epsilon(1e-12));

  for (int i = 0; i < 25; ++i) {
    const double eta = 1e-3 + (1.0 - 1e-3) * golden(7 * i + 1);
    const double u = prior.from_eta(eta);
    CHECK(prior.to_uniform(u) == doctest::Approx(eta).epsilon(1e-10));
  }
  for (int i = 0; i < 25; ++i) {
    const double u = 0.2 + (prior.u_max() - 0.2) * golden(11 * i + 3);
    CHECK(prior.from_eta(prior.to_uniform(u)) == doctest::Approx(u).epsilon(1e-10));
  }
}

TEST_CASE("cumulative coordinate underflows harmlessly near zero") {
  RobbinsPrior prior;
  CHECK(prior.to_uniform(0.10) == 0.0);
  CHECK(prior.to_uniform(0.14) == 0.0);
  CHECK(prior.to_uniform(0.2) > 0.0);
  CHECK(prior.to_uniform(0.2) < 1e-60);
}

TEST_CASE("interval mass equals the antiderivative difference") {
  RobbinsPrior prior;
  for (int i = 0; i < 10; ++i) {
    double a = 2e-3 + 0.9 * golden(13 * i);
    double b = 2e-3 + 0.9 * golden(13 * i + 5);
    if (a > b) std::swap(a, b);
    const double via_u = (prior.from_eta(b) - prior.from_eta(a)) / prior.normalizer();
    CHECK(prior.interval_mass(a, b) == doctest::Approx(via_u).epsilon(1e-13));
  }
}

TEST_CASE("domain errors") {
  RobbinsPrior prior;
  CHECK_THROWS_AS(prior.density(0.0), UndefinedAtZero);
  CHECK_THROWS_AS(prior.interval_mass(-1.2, 0.0), OutOfRange);
  CHECK_THROWS_AS(prior.interval_mass(0.0, 1.2), OutOfRange);
  CHECK_THROWS_AS(prior.interval_mass(0.5, 0.4), OutOfRange);
  CHECK_THROWS_AS(prior.from_eta(0.0), OutOfRange);
  CHECK_THROWS_AS(prior.from_eta(1.5), OutOfRange);
  CHECK_THROWS_AS(prior.to_uniform(0.0), OutOfRange);
  CHECK_THROWS_AS(prior.to_uniform(prior.u_max() * 1.01), OutOfRange);
  CHECK_THROWS_AS(RobbinsPrior(5.0), ConfigError);
}

TEST_SUITE_END();
