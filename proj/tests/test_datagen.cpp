#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mixreg/datagen.hpp"
#include "mixreg/wealth.hpp"

using namespace mixreg;

TEST_SUITE_BEGIN("datagen");

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.close();
  return path;
}

}  // namespace

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(RngStream{123, 0});
  Rng b(RngStream{123, 0});
  Rng c(RngStream{123, 1});
  Rng d(RngStream{124, 0});
  bool all_equal_c = true;
  bool all_equal_d = true;
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t va = a.next_u64();
    CHECK(va == b.next_u64());
    const std::uint64_t vc = c.next_u64();
    const std::uint64_t vd = d.next_u64();
    all_equal_c = all_equal_c && (va == vc);
    all_equal_d = all_equal_d && (va == vd);
  }
  CHECK_FALSE(all_equal_c);
  CHECK_FALSE(all_equal_d);
}

TEST_CASE("distribution draws have the right coarse shape") {
  Rng rng(RngStream{99, 0});
  const int n = 100000;
  double usum = 0.0, gsum = 0.0, gsq = 0.0, esum = 0.0;
  int cauchy_neg = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    usum += u;
    const double g = rng.gaussian();
    gsum += g;
    gsq += g * g;
    esum += rng.exponential();
    if (rng.cauchy() < 0.0) ++cauchy_neg;
  }
  CHECK(usum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(gsum / n == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
  CHECK(gsq / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(esum / n == doctest::Approx(1.0).epsilon(0.03));
  CHECK(static_cast<double>(cauchy_neg) / n == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("iid increments respect their contracts") {
  Rng rng(RngStream{99, 1});

  SUBCASE("gaussian recentring") {
    GaussianIID m;
    m.mu = 2.0;
    m.sigma = 0.5;
    m.drift = 0.3;
    double sum = 0.0;
    for (int t = 1; t <= 20000; ++t) {
      const Increment inc = next_increment(DataModel{m}, rng, t);
      CHECK(inc.dV == 0.25);
      CHECK(inc.dS == inc.X - 2.0);
      sum += inc.dS;
    }
    CHECK(sum / 20000 == doctest::Approx(0.3).epsilon(0.1));
  }

  SUBCASE("bounded sub-gaussian stays within its proxy") {
    SubGaussianIID m;
    m.sigma_proxy = 0.7;
    m.drift = 0.1;
    for (int t = 1; t <= 2000; ++t) {
      const Increment inc = next_increment(DataModel{m}, rng, t);
      CHECK(inc.dV == doctest::Approx(0.49).epsilon(1e-15));
      CHECK(std::fabs(inc.dS - 0.1) <= 0.7 + 1e-15);
    }
  }

  SUBCASE("truncated normal stays within three proxies") {
    SubGaussianIID m;
    m.shape = SubGaussianShape::TruncatedNormal;
    m.sigma_proxy = 2.0;
    for (int t = 1; t <= 2000; ++t) {
      const Increment inc = next_increment(DataModel{m}, rng, t);
      CHECK(inc.dV == 4.0);
      CHECK(std::fabs(inc.dS) <= 6.0 + 1e-12);
    }
  }

  SUBCASE("symmetric charges the square") {
    SymmetricIID m;
    m.dist = SymmetricDist::RademacherScale;
    m.scale = 1.5;
    for (int t = 1; t <= 100; ++t) {
      const Increment inc = next_increment(DataModel{m}, rng, t);
      CHECK(std::fabs(inc.dS) == 1.5);
      CHECK(inc.dV == doctest::Approx(2.25).epsilon(1e-15));
      CHECK(inc.dS == inc.X);
    }
  }

  SUBCASE("finite variance budget") {
    FiniteVarianceIID m;
    m.dist = FiniteVarianceDist::CenteredTwoPoint;
    m.a = 2.0;
    m.p = 0.2;
    const double m2 = m.second_moment();
    CHECK(m2 == doctest::Approx(4.0 * 0.2 / 0.8).epsilon(1e-15));
    double mean = 0.0, vmean = 0.0;
    for (int t = 1; t <= 50000; ++t) {
      const Increment inc = next_increment(DataModel{m}, rng, t);
      CHECK(inc.dV == doctest::Approx((inc.X * inc.X + 2.0 * m2) / 3.0).epsilon(1e-15));
      mean += inc.dS;
      vmean += inc.dV;
    }
    CHECK(mean / 50000 == doctest::Approx(0.0).scale(1.0).epsilon(0.05));
    CHECK(vmean / 50000 == doctest::Approx(m2).epsilon(0.05));

    FiniteVarianceIID e;
    e.dist = FiniteVarianceDist::CenteredExponentialShift;
    CHECK(e.second_moment() == 1.0);
  }
}

TEST_CASE("one-step supermartingale property at fixed bets") {
  // E[exp(eta*dS - eta^2*dV/2)] <= 1 for every fixed eta in [-1,1]; checked
  // by Monte Carlo with a three-standard-error allowance.
  const DataModel models[] = {
      DataModel{GaussianIID{}},
      DataModel{SubGaussianIID{}},
      DataModel{SymmetricIID{SymmetricDist::RademacherScale, 1.0}},
      DataModel{SymmetricIID{SymmetricDist::Cauchy, 1.0}},
      DataModel{FiniteVarianceIID{}},
  };
  int stream = 10;
  for (const DataModel& m : models) {
    for (double eta : {-0.9, -0.4, 0.4, 0.9}) {
      Rng rng(RngStream{2024, static_cast<std::uint64_t>(stream++)});
      const int n = 40000;
      double sum = 0.0, sumsq = 0.0;
      for (int i = 0; i < n; ++i) {
        const Increment inc = next_increment(m, rng, i + 1);
        const double z = std::exp(eta * inc.dS - 0.5 * eta * eta * inc.dV);
        sum += z;
        sumsq += z * z;
      }
      const double mean = sum / n;
      const double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
      CHECK(mean <= 1.0 + 3.0 * sd / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("adversarial generators") {
  Rng rng(RngStream{0, 0});

  SUBCASE("drift") {
    const Adversarial a{"drift", {}};
    for (int t = 1; t <= 5; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      CHECK(inc.dS == 0.5);
      CHECK(inc.dV == 1.0);
    }
  }

  SUBCASE("spike hits once") {
    const Adversarial a{"spike", {}};
    for (int t = 1; t <= 10; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      CHECK(inc.dS == (t == 5 ? 1e6 : 0.0));
      CHECK(inc.dV == 1.0);
    }
  }

  SUBCASE("signflip blocks") {
    const Adversarial a{"signflip", {4.0}};
    for (int t = 1; t <= 16; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      const int block = (t - 1) / 4;
      CHECK(inc.dS == (block % 2 == 0 ? 1.0 : -1.0));
      CHECK(inc.dV == 1.0);
    }
  }

  SUBCASE("geometric variance growth") {
    const Adversarial a{"geometric", {2.0}};
    double expected = 2.0;
    for (int t = 1; t <= 8; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      CHECK(inc.dV == doctest::Approx(expected).epsilon(1e-12));
      CHECK(std::fabs(inc.dS) == doctest::Approx(std::sqrt(expected)).epsilon(1e-12));
      expected *= 2.0;
    }
  }

  SUBCASE("pinned ratio") {
    const Adversarial a{"pinned", {1.5}};
    double S = 0.0, V = 0.0;
    for (int t = 1; t <= 50; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      S += inc.dS;
      V += inc.dV;
    }
    CHECK(S / V == doctest::Approx(1.5).epsilon(1e-12));
  }

  SUBCASE("plateau inserts dead rounds") {
    const Adversarial a{"plateau", {2.0, 3.0}};
    for (int t = 1; t <= 10; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng, t);
      const int pos = static_cast<int>((t - 1) % 5);
      if (pos < 2) {
        CHECK(inc.dV == 1.0);
      } else {
        CHECK(inc.dS == 0.0);
        CHECK(inc.dV == 0.0);
      }
    }
  }

  SUBCASE("unknown generator") {
    const Adversarial a{"mystery", {}};
    CHECK_THROWS_AS(validate(DataModel{a}), UnknownGenerator);
  }

  SUBCASE("sequence helper matches step-by-step draws") {
    const Adversarial a{"signflip", {}};
    const auto seq = adversarial_sequence(a, 25);
    REQUIRE(seq.size() == 25);
    Rng rng2(RngStream{0, 1});
    for (int t = 1; t <= 25; ++t) {
      const Increment inc = next_increment(DataModel{a}, rng2, t);
      CHECK(seq[t - 1].first == inc.dS);
      CHECK(seq[t - 1].second == inc.dV);
    }
  }
}

TEST_CASE("model validation") {
  GaussianIID g;
  g.sigma = 0.0;
  CHECK_THROWS_AS(validate(DataModel{g}), ConfigError);
  SubGaussianIID sg;
  sg.sigma_proxy = -1.0;
  CHECK_THROWS_AS(validate(DataModel{sg}), ConfigError);
  SymmetricIID sy;
  sy.scale = 0.0;
  CHECK_THROWS_AS(validate(DataModel{sy}), ConfigError);
  FiniteVarianceIID fv;
  fv.dist = FiniteVarianceDist::CenteredTwoPoint;
  fv.p = 1.0;
  CHECK_THROWS_AS(validate(DataModel{fv}), ConfigError);
  fv.p = 0.5;
  fv.a = 0.0;
  CHECK_THROWS_AS(validate(DataModel{fv}), ConfigError);
  CHECK_NOTHROW(validate(DataModel{GaussianIID{}}));
}

TEST_CASE("mean of the score increment") {
  CHECK(mean_dS(DataModel{GaussianIID{}}) == 0.0);
  GaussianIID g;
  g.drift = 0.25;
  CHECK(mean_dS(DataModel{g}) == 0.25);
  SubGaussianIID sg;
  sg.drift = -0.5;
  CHECK(mean_dS(DataModel{sg}) == -0.5);
  CHECK(mean_dS(DataModel{SymmetricIID{SymmetricDist::RademacherScale, 2.0}}) == 0.0);
  CHECK_FALSE(mean_dS(DataModel{SymmetricIID{SymmetricDist::Cauchy, 1.0}}).has_value());
  CHECK(mean_dS(DataModel{FiniteVarianceIID{}}) == 0.0);
  CHECK_FALSE(mean_dS(DataModel{Adversarial{"drift", {}}}).has_value());

  Schedule uniform;
  uniform.segments = {{GaussianIID{}, 5}, {IidModel{SymmetricIID{SymmetricDist::RademacherScale, 1.0}}, 5}};
  CHECK(mean_dS(DataModel{uniform}) == 0.0);

  Schedule mixed;
  GaussianIID drifted;
  drifted.drift = 1.0;
  mixed.segments = {{GaussianIID{}, 5}, {IidModel{drifted}, 5}};
  CHECK_FALSE(mean_dS(DataModel{mixed}).has_value());
}

TEST_CASE("schedules cycle through their segments") {
  Schedule sched;
  GaussianIID g;
  SymmetricIID rad;
  rad.dist = SymmetricDist::RademacherScale;
  rad.scale = 3.0;
  sched.segments = {{g, 2}, {IidModel{rad}, 3}};
  Rng rng(RngStream{5, 5});
  for (int t = 1; t <= 20; ++t) {
    const Increment inc = next_increment(DataModel{sched}, rng, t);
    const int pos = static_cast<int>((t - 1) % 5);
    if (pos < 2) {
      CHECK(inc.dV == 1.0);  // gaussian segment
    } else {
      CHECK(std::fabs(inc.dS) == 3.0);  // rademacher segment
    }
  }
}

TEST_CASE("replay parsing") {
  SUBCASE("accepts whitespace, commas, and blank lines") {
    const auto path = temp_file("mixreg_replay_ok.txt", "0.5 1\n-0.25,0.5\n\n  0 1 \n");
    const auto rows = load_replay(path.string());
    REQUIRE(rows.size() == 3);
    CHECK(rows[0] == std::pair<double, double>{0.5, 1.0});
    CHECK(rows[1] == std::pair<double, double>{-0.25, 0.5});
    CHECK(rows[2] == std::pair<double, double>{0.0, 1.0});
  }

  SUBCASE("empty file is a zero-round path") {
    const auto path = temp_file("mixreg_replay_empty.txt", "");
    CHECK(load_replay(path.string()).empty());
  }

  SUBCASE("error lines are reported one-based") {
    const auto missing = temp_file("mixreg_replay_m.txt", "0.5 1\n0.25\n");
    try {
      load_replay(missing.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    const auto trailing = temp_file("mixreg_replay_t.txt", "0.5 1 7\n");
    CHECK_THROWS_AS(load_replay(trailing.string()), ParseError);

    const auto negative = temp_file("mixreg_replay_n.txt", "0.5 1\n0.1 -0.5\n");
    try {
      load_replay(negative.string());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::string what = e.what();
      CHECK(what.find("line 2") != std::string::npos);
    }

    const auto nonfinite = temp_file("mixreg_replay_inf.txt", "inf 1\n");
    CHECK_THROWS_AS(load_replay(nonfinite.string()), ParseError);

    const auto broken_zero = temp_file("mixreg_replay_z.txt", "1 0\n");
    CHECK_THROWS_AS(load_replay(broken_zero.string()), ParseError);

    CHECK_THROWS_AS(load_replay("/nonexistent/replay.txt"), ParseError);
  }

  SUBCASE("replay model plays back the file and then stops") {
    const auto path = temp_file("mixreg_replay_gen.txt", "0.5 1\n-0.5 1\n");
    Replay r;
    r.path = path.string();
    PathGenerator gen(DataModel{r}, RngStream{1, 1});
    CHECK(gen.next().dS == 0.5);
    CHECK(gen.next().dS == -0.5);
    CHECK_THROWS_AS(gen.next(), OutOfRange);
  }

  SUBCASE("unloaded replay refuses to generate") {
    Replay r;
    r.path = "somewhere.txt";
    Rng rng(RngStream{1, 2});
    CHECK_THROWS_AS(next_increment(DataModel{r}, rng, 1), ConfigError);
  }
}

TEST_CASE("model strings parse and describe round-trip") {
  const char* texts[] = {
      "gaussian",
      "gaussian:mu=1,sigma=2,drift=0.5",
      "subgaussian:bounded,proxy=0.5",
      "subgaussian:truncnorm,mu=1,proxy=2,drift=-0.1",
      "symmetric:rademacher,scale=2",
      "symmetric:cauchy",
      "symmetric:atom-mixture,scale=0.5",
      "finitevar:twopoint,a=3,p=0.25",
      "finitevar:expshift",
      "adversarial:spike,1000,7",
      "adversarial:plateau",
  };
  for (const char* text : texts) {
    CAPTURE(text);
    const DataModel m = parse_model(text);
    CHECK_NOTHROW(validate(m));
    const std::string described = describe_model(m);
    // Describing, reparsing, and describing again is a fixed point.
    const DataModel again = parse_model(described);
    CHECK(describe_model(again) == described);
    // And both models produce identical increments.
    Rng r1(RngStream{77, 7});
    Rng r2(RngStream{77, 7});
    for (int t = 1; t <= 25; ++t) {
      const Increment i1 = next_increment(m, r1, t);
      const Increment i2 = next_increment(again, r2, t);
      CHECK(i1.dS == i2.dS);
      CHECK(i1.dV == i2.dV);
    }
  }

  CHECK_THROWS_AS(parse_model("gaussian:sigma=zero"), ConfigError);
  CHECK_THROWS_AS(parse_model("gaussian:wat=1"), ConfigError);
  CHECK_THROWS_AS(parse_model("nosuchmodel"), ConfigError);
  CHECK_THROWS_AS(parse_model("symmetric"), ConfigError);
  CHECK_THROWS_AS(parse_model("finitevar:bogus"), ConfigError);
}

TEST_CASE("path generator is deterministic per stream") {
  const DataModel m = parse_model("gaussian:drift=0.1");
  PathGenerator g1(m, RngStream{31, 4});
  PathGenerator g2(m, RngStream{31, 4});
  PathGenerator g3(m, RngStream{31, 5});
  bool differs = false;
  for (int t = 1; t <= 200; ++t) {
    const Increment a = g1.next();
    const Increment b = g2.next();
    CHECK(a.dS == b.dS);
    CHECK(a.dV == b.dV);
    differs = differs || (a.dS != g3.next().dS);
  }
  CHECK(differs);
  CHECK(g1.t() == 200);
}

TEST_SUITE_END();
