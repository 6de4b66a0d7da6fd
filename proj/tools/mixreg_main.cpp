// Command line front end.
//
// Exit codes, used by scripts and CI:
//   0  success
//   1  precondition or runtime failure (bad state, unwritable output, ...)
//   2  usage or input parse error
//   3  a mathematical guarantee was violated numerically
//   4  result could not be verified to tolerance (quadrature did not converge)

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mixreg/bounds.hpp"
#include "mixreg/core.hpp"
#include "mixreg/datagen.hpp"
#include "mixreg/errors.hpp"
#include "mixreg/experiment.hpp"
#include "mixreg/prior.hpp"
#include "mixreg/wealth.hpp"

namespace {

using namespace mixreg;

struct GlobalFlags {
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double rho = 0.1;
  double c = kDefaultRobbinsC;
  double tolerance = kDefaultTolerance;
  std::string prior_text = "robbins";
  std::string out_dir;
  int threads = 1;
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw ParseError("cannot parse " + what + " from '" + text + "'");
  }
  if (pos != text.size()) {
    throw ParseError("trailing characters in " + what + ": '" + text + "'");
  }
  return value;
}

PriorSpec parse_prior_text(const std::string& text, double c_flag) {
  if (text == "robbins") return RobbinsSpec{c_flag};
  if (text.rfind("robbins:", 0) == 0) {
    std::string rest = text.substr(8);
    if (rest.rfind("c=", 0) == 0) rest = rest.substr(2);
    return RobbinsSpec{parse_number(rest, "prior parameter c")};
  }
  if (text == "gaussian") return GaussianSpec{1.0};
  if (text.rfind("gaussian:", 0) == 0) {
    std::string rest = text.substr(9);
    if (rest.rfind("sigma0_sq=", 0) == 0) rest = rest.substr(10);
    return GaussianSpec{parse_number(rest, "prior variance")};
  }
  throw ParseError("unknown prior '" + text + "' (expected robbins[:c=C] or gaussian:SIGMA0_SQ)");
}

// parse_model reports bad model strings as ConfigError; at the CLI boundary
// that is a usage error and must exit 2, so rethrow as ParseError.
DataModel parse_model_cli(const std::string& text) {
  try {
    return parse_model(text);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string quantile_line(const Quantiles& q) {
  if (q.n == 0) return "n/a";
  return "min " + fmt(q.min) + "  q25 " + fmt(q.q25) + "  median " + fmt(q.median) +
         "  q75 " + fmt(q.q75) + "  max " + fmt(q.max);
}

std::string ci_line(const CountWithCI& c) {
  if (c.out_of == 0) return "n/a";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.6f  (%" PRId64 "/%" PRId64 ", 95%% CI [%.6f, %.6f])",
                c.frequency, c.count, c.out_of, c.ci_lo, c.ci_hi);
  return buf;
}

ExperimentConfig make_experiment_config(const GlobalFlags& g, const std::string& model_text,
                                        std::int64_t n_paths, std::int64_t horizon,
                                        bool full_eval, bool trace) {
  ExperimentConfig cfg;
  cfg.model = parse_model_cli(model_text);
  cfg.prior = parse_prior_text(g.prior_text, g.c);
  cfg.alpha = g.alpha;
  cfg.rho = g.rho;
  cfg.n_paths = n_paths;
  cfg.horizon = horizon;
  cfg.seed = g.seed;
  cfg.tolerance = g.tolerance;
  cfg.out_dir = g.out_dir;
  cfg.threads = g.threads;
  cfg.full_eval = full_eval;
  cfg.trace = trace;
  return cfg;
}

int cmd_bound(const GlobalFlags& g, double S, double V) {
  BoundReport pw = pathwise_bound(S, V, g.c, g.rho);
  ConditionalReport cond = conditional_bound(S, V, g.alpha, g.c, g.rho);
  VilleThreshold va = v_alpha(g.alpha, g.rho, g.c);
  const char* branch = pw.branch == BranchId::B1_interior   ? "B1"
                       : pw.branch == BranchId::B2_lil      ? "B2"
                                                            : "B3";

  std::printf("S: %s   V: %s   |S|/V: %s\n", fmt(S).c_str(), fmt(V).c_str(),
              fmt(std::fabs(S) / V).c_str());
  std::printf("branch: %s\n", branch);
  std::printf("pathwise bound (rho=%s, c=%s): %s\n", fmt(g.rho).c_str(), fmt(g.c).c_str(),
              fmt(pw.value).c_str());
  std::printf("conditional bound (alpha=%s): %s\n", fmt(g.alpha).c_str(),
              fmt(cond.value).c_str());
  std::printf("V_alpha: %s\n", fmt(va.value).c_str());
  std::printf("generic envelope: C=%s, value=%s\n", fmt(cond.generic_C).c_str(),
              fmt(cond.generic_value).c_str());

  nlohmann::ordered_json j;
  j["S"] = S;
  j["V"] = V;
  j["alpha"] = g.alpha;
  j["rho"] = g.rho;
  j["c"] = g.c;
  j["branch"] = branch;
  j["pathwise_bound"] = pw.value;
  j["conditional_bound"] = cond.value;
  j["generic_C"] = cond.generic_C;
  j["generic_value"] = cond.generic_value;
  j["V_alpha"] = va.value;
  std::printf("%s\n", j.dump().c_str());
  if (!g.out_dir.empty()) {
    std::filesystem::create_directories(g.out_dir);
    std::ofstream out(std::filesystem::path(g.out_dir) / "bound.json",
                      std::ios::binary | std::ios::trunc);
    out << j.dump(2) << "\n";
    if (!out) throw IOError("cannot write bound.json under " + g.out_dir);
  }
  return 0;
}

int cmd_wealth_state(const GlobalFlags& g, double S, double V) {
  PriorSpec prior = parse_prior_text(g.prior_text, g.c);
  validate(prior);
  LnWealth w{};
  if (std::holds_alternative<RobbinsSpec>(prior)) {
    RobbinsPrior rp(std::get<RobbinsSpec>(prior).c);
    w = ln_wealth_robbins(S, V, rp);
  } else {
    w = LnWealth{ln_wealth_gaussian(S, V, std::get<GaussianSpec>(prior).sigma0_sq), 0.0, true};
  }
  double best = hindsight_optimum(S, V).L_star;
  std::printf("prior: %s\n", describe_prior(prior).c_str());
  std::printf("ln Z: %s   (err bound %s, %s)\n", fmt(w.value).c_str(), fmt(w.err_bound).c_str(),
              w.converged ? "converged" : "NOT CONVERGED");
  std::printf("L*: %s   regret: %s\n", fmt(best).c_str(), fmt(best - w.value).c_str());
  return w.converged ? 0 : 4;
}

int cmd_wealth_path(const GlobalFlags& g, const std::string& model_text, std::int64_t horizon) {
  ExperimentConfig cfg = make_experiment_config(g, model_text, 1, horizon, true, true);
  ExperimentReport rep = run_experiment(cfg);
  const PathResult& p = rep.paths.at(0);

  std::printf("model: %s\n", describe_model(cfg.model).c_str());
  std::printf("prior: %s\n", describe_prior(cfg.prior).c_str());
  std::printf("T: %" PRId64 "   final S: %s   final V: %s\n", horizon, fmt(p.final_S).c_str(),
              fmt(p.final_V).c_str());
  std::printf("final ln Z: %s   final regret: %s\n", fmt(p.final_ln_Z).c_str(),
              fmt(p.final_regret).c_str());
  std::printf("sup ln Z: %s   in E_alpha: %s", fmt(p.ville.sup_ln_Z).c_str(),
              p.ville.in_E_alpha ? "yes" : "no");
  if (p.ville.first_crossing_t) {
    std::printf("   first crossing at t=%" PRId64, *p.ville.first_crossing_t);
  }
  std::printf("\n");
  std::printf("bound violations: %" PRId64 "   unverified: %s\n", p.bound_violations,
              p.unverified ? "yes" : "no");
  if (horizon <= 25) {
    std::printf("%6s %14s %14s %14s %14s %4s %14s\n", "t", "S", "V", "ln_Z", "R", "br", "bound");
    for (const TraceRow& r : rep.trace) {
      const char* br = r.branch == BranchId::B1_interior   ? "B1"
                       : r.branch == BranchId::B2_lil      ? "B2"
                                                           : "B3";
      std::printf("%6" PRId64 " %14.6g %14.6g %14.6g %14.6g %4s %14.6g\n", r.t, r.S, r.V, r.ln_Z,
                  r.regret, br, r.bound);
    }
  }
  if (!g.out_dir.empty()) {
    std::printf("artifacts: %s/report.json, paths.csv, trace.csv\n", g.out_dir.c_str());
  }
  if (p.bound_violations > 0) return 3;
  if (p.unverified) return 4;
  return 0;
}

int run_and_summarize(const ExperimentConfig& cfg) {
  ExperimentReport rep = run_experiment(cfg);

  std::printf("model: %s\n", describe_model(rep.config.model).c_str());
  std::printf("prior: %s\n", describe_prior(rep.config.prior).c_str());
  std::printf("paths x horizon: %" PRId64 " x %" PRId64 "   alpha: %s   seed: %" PRIu64 "\n",
              rep.config.n_paths, rep.config.horizon, fmt(rep.config.alpha).c_str(),
              rep.config.seed);
  std::printf("E_alpha frequency: %s\n", ci_line(rep.ville_frequency).c_str());
  std::printf("bound violations: %" PRId64 " over %" PRId64 " evaluated steps (worst margin %s)\n",
              rep.bound_violations, rep.evaluated_steps,
              rep.evaluated_steps > 0 ? fmt(rep.worst_margin).c_str() : "n/a");
  std::printf("conditional violations on E_alpha: %" PRId64 "   prop-1 violations: %" PRId64 "\n",
              rep.conditional_violations_on_E_alpha, rep.prop1_violations_on_E_alpha);
  if (rep.cs_applicable > 0) {
    std::printf("CS coverage (all t): %s\n", ci_line(rep.cs_coverage).c_str());
  } else {
    std::printf("CS coverage: n/a (model mean undefined)\n");
  }
  std::printf("max lil stat: %s\n", quantile_line(rep.max_lil_stat_distribution).c_str());
  std::printf("final regret: %s\n", quantile_line(rep.final_regret_distribution).c_str());
  std::printf("unverified paths: %" PRId64 "\n", rep.unverified_paths);
  std::printf("wall: %.2f s   (fine evals %" PRId64 ", screen evals %" PRId64 ", threads %d)\n",
              rep.wall_seconds, rep.fine_evals, rep.screen_evals, rep.threads_used);
  if (!rep.config.out_dir.empty()) {
    std::printf("artifacts: %s/report.json, paths.csv%s\n", rep.config.out_dir.c_str(),
                rep.trace.empty() ? "" : ", trace.csv");
  }

  if (rep.bound_violations > 0 || rep.conditional_violations_on_E_alpha > 0 ||
      rep.prop1_violations_on_E_alpha > 0) {
    return 3;
  }
  if (rep.unverified_paths > 0) return 4;
  return 0;
}

int cmd_lil(const GlobalFlags& g, const std::string& model_text, std::int64_t horizon,
            std::int64_t paths, double threshold, int per_decade, double sigma0_sq) {
  LilConfig cfg;
  cfg.model = parse_model_cli(model_text);
  cfg.c = g.c;
  cfg.sigma0_sq = sigma0_sq;
  cfg.alpha = g.alpha;
  cfg.n_paths = paths;
  cfg.horizon = horizon;
  cfg.seed = g.seed;
  cfg.checkpoints_per_decade = per_decade;
  cfg.report_threshold = threshold;
  cfg.threads = g.threads;
  cfg.out_dir = g.out_dir;
  LilReport rep = lil_longrun(cfg);

  std::printf("model: %s   c: %s   horizon: %" PRId64 "   paths: %" PRId64 "\n",
              describe_model(rep.config.model).c_str(), fmt(rep.config.c).c_str(),
              rep.config.horizon, rep.config.n_paths);
  std::printf("paths in E_alpha: %" PRId64 "/%" PRId64 "\n", rep.e_alpha_count,
              rep.config.n_paths);
  std::printf("final R/lnln V on E_alpha: %s\n",
              quantile_line(rep.final_ratio_distribution).c_str());
  std::printf("max |S|/sqrt(2 V lnln V) on E_alpha: %s\n",
              quantile_line(rep.max_lil_stat_distribution).c_str());
  std::printf("final gaussian-vs-robbins gap: %s\n",
              quantile_line(rep.final_gaussian_gap_distribution).c_str());
  std::printf("flagged (final ratio > %s): %" PRId64 "\n", fmt(rep.config.report_threshold).c_str(),
              rep.flagged_count);
  std::printf("unverified paths: %" PRId64 "\n", rep.unverified_paths);
  std::printf("wall: %.2f s   (fine evals %" PRId64 ", screen evals %" PRId64 ")\n",
              rep.wall_seconds, rep.fine_evals, rep.screen_evals);
  if (!rep.config.out_dir.empty()) {
    std::printf("artifacts: %s/lil.json, lil.csv\n", rep.config.out_dir.c_str());
  }
  return rep.unverified_paths > 0 ? 4 : 0;
}

int cmd_verify_replay(const GlobalFlags& g, const std::string& file) {
  std::vector<std::pair<double, double>> data = load_replay(file);
  PriorSpec prior = parse_prior_text(g.prior_text, g.c);
  validate(prior);
  const bool robbins = std::holds_alternative<RobbinsSpec>(prior);

  WealthEngine engine(prior);
  std::int64_t violations = 0;
  bool unverified = false;
  std::int64_t t = 0;
  for (const auto& [dS, dV] : data) {
    ++t;
    LnWealth w = engine.step(dS, dV);
    const PathState& st = engine.state();
    if (st.V <= 0.0) continue;
    double regret = hindsight_optimum(st.S, st.V).L_star - w.value;
    double bound = robbins ? pathwise_bound(st.S, st.V, g.c, g.rho).value
                           : gaussian_regret_exact(st.S, st.V, std::get<GaussianSpec>(prior).sigma0_sq);
    double margin = regret - bound;
    if (margin > g.tolerance + w.err_bound) {
      ++violations;
      std::printf("violation at t=%" PRId64 ": margin=%s (R=%s, bound=%s)\n", t,
                  fmt(margin).c_str(), fmt(regret).c_str(), fmt(bound).c_str());
    }
    if (!w.converged) unverified = true;
  }
  std::printf("steps: %" PRId64 "   violations: %" PRId64 "%s\n", t, violations,
              unverified ? "   (some steps unverified)" : "");
  if (violations > 0) return 3;
  if (unverified) return 4;
  return 0;
}

// Reduced-scale invariant suite, meant to finish in well under a minute.
class SelfTest {
 public:
  explicit SelfTest(std::uint64_t seed) : seed_(seed) {}

  void check(const char* name, bool ok, const std::string& detail = "") {
    std::printf("[%s] %s%s%s\n", ok ? " ok " : "FAIL", name, detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++failures_;
  }

  template <typename F>
  void guarded(const char* name, F&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      check(name, false, std::string("exception: ") + e.what());
    }
  }

  int failures() const { return failures_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  int failures_ = 0;
};

int cmd_selftest(const GlobalFlags& g) {
  SelfTest st(g.seed);

  st.guarded("prior normalization", [&] {
    RobbinsPrior prior(g.c);
    double total = prior.interval_mass(-1.0, 1.0);
    bool ok = std::fabs(total - 1.0) <= 1e-12;

    // One-sided mass against a brute midpoint rule in x = ln(eta).
    double a = 1e-6, b = 1.0;
    const int n = 200000;
    double h = (std::log(b) - std::log(a)) / n;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      double x = std::log(a) + (i + 0.5) * h;
      double eta = std::exp(x);
      acc += prior.density(eta) * eta * h;
    }
    double exact = prior.interval_mass(a, b);
    ok = ok && std::fabs(acc - exact) <= 1e-7;
    st.check("prior normalization", ok,
             "interval(1e-6,1)=" + fmt(exact) + " brute=" + fmt(acc));
  });

  st.guarded("gaussian closed form identity", [&] {
    Rng rng(RngStream{st.seed(), 101});
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      double V = std::exp(rng.uniform01() * std::log(1e4));
      double S = (rng.uniform01() * 2.0 - 1.0) * 5.0 * std::sqrt(V);
      double lhs = gaussian_regret_exact(S, V, 1.0);
      double rhs = hindsight_optimum(S, V).L_star - ln_wealth_gaussian(S, V, 1.0);
      worst = std::max(worst, std::fabs(lhs - rhs));
    }
    st.check("gaussian closed form identity", worst <= 1e-12, "worst=" + fmt(worst));
  });

  st.guarded("quadrature self-consistency", [&] {
    RobbinsPrior prior(g.c);
    QuadratureConfig dense;
    dense.nodes_per_side = 16384;
    double worst = 0.0;
    bool ok = true;
    for (double V : {0.5, 4.0, 100.0, 1e4}) {
      for (double r : {0.0, 0.1, 0.5, 0.9, 1.0, 1.5, 3.0}) {
        LnWealth w1 = ln_wealth_robbins(r * V, V, prior);
        LnWealth w2 = ln_wealth_robbins(r * V, V, prior, dense);
        double gap = std::fabs(w1.value - w2.value);
        worst = std::max(worst, gap);
        ok = ok && gap <= w1.err_bound + w2.err_bound + 1e-12;
      }
    }
    st.check("quadrature self-consistency", ok, "worst gap=" + fmt(worst));
  });

  st.guarded("incremental telescoping", [&] {
    Rng rng(RngStream{st.seed(), 202});
    bool ok = true;
    for (const PriorSpec& prior :
         {PriorSpec{RobbinsSpec{g.c}}, PriorSpec{GaussianSpec{1.0}}}) {
      WealthEngine engine(prior);
      LnWealth w{};
      for (int t = 0; t < 100; ++t) w = engine.step(rng.gaussian(), 1.0);
      LnWealth batch = engine.batch_ln_wealth(engine.state().S, engine.state().V);
      ok = ok && std::fabs(w.value - batch.value) <= 1e-9;
    }
    st.check("incremental telescoping", ok);
  });

  st.guarded("pathwise bound dominance", [&] {
    Rng rng(RngStream{st.seed(), 303});
    RobbinsPrior prior(g.c);
    bool ok = true;
    double worst = -1e300;
    for (int i = 0; i < 1000 && ok; ++i) {
      double V = std::exp(std::log(0.1) + rng.uniform01() * std::log(1e4));
      double r = rng.uniform01() * 5.0;
      double S = (rng.uniform01() < 0.5 ? -1.0 : 1.0) * r * V;
      LnWealth w = ln_wealth_robbins(S, V, prior);
      double regret = hindsight_optimum(S, V).L_star - w.value;
      for (double rho : {0.05, 0.1, 0.2}) {
        double margin = regret - pathwise_bound(S, V, g.c, rho).value;
        worst = std::max(worst, margin);
        ok = ok && margin <= g.tolerance + w.err_bound;
      }
    }
    st.check("pathwise bound dominance", ok, "worst margin=" + fmt(worst));
  });

  st.guarded("one-step supermartingale", [&] {
    Rng rng(RngStream{st.seed(), 404});
    const double S0 = 1.2, V0 = 8.0;
    double base = ln_wealth_gaussian(S0, V0, 1.0);
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      double ratio = std::exp(ln_wealth_gaussian(S0 + rng.gaussian(), V0 + 1.0, 1.0) - base);
      sum += ratio;
      sumsq += ratio * ratio;
    }
    double mean = sum / n;
    double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
    double se = sd / std::sqrt(static_cast<double>(n));
    st.check("one-step supermartingale", mean <= 1.0 + 3.0 * se,
             "mean=" + fmt(mean) + " se=" + fmt(se));
  });

  st.guarded("ville and coverage, null model", [&] {
    GlobalFlags local = g;
    local.out_dir.clear();
    ExperimentConfig cfg = make_experiment_config(local, "gaussian", 400, 200, false, false);
    ExperimentReport rep = run_experiment(cfg);
    double slack = 3.0 * std::sqrt(g.alpha * (1.0 - g.alpha) / 400.0);
    st.check("ville frequency", rep.ville_frequency.frequency >= 1.0 - g.alpha - slack,
             "freq=" + fmt(rep.ville_frequency.frequency));
    st.check("cs coverage", rep.cs_coverage.frequency >= 1.0 - g.alpha - slack,
             "freq=" + fmt(rep.cs_coverage.frequency));
    st.check("no violations on null", rep.bound_violations == 0 &&
                                          rep.conditional_violations_on_E_alpha == 0 &&
                                          rep.prop1_violations_on_E_alpha == 0);
  });

  st.guarded("drift crossing witness", [&] {
    GlobalFlags local = g;
    local.out_dir.clear();
    ExperimentConfig cfg = make_experiment_config(local, "gaussian:drift=0.5", 20, 1000, false, false);
    cfg.alpha = 0.05;
    ExperimentReport rep = run_experiment(cfg);
    std::int64_t crossed = 0;
    for (const PathResult& p : rep.paths) {
      if (!p.ville.in_E_alpha) ++crossed;
    }
    st.check("drift crossing witness", crossed >= 19,
             "crossed=" + std::to_string(crossed) + "/20");
  });

  st.guarded("adversarial streams stay bounded", [&] {
    GlobalFlags local = g;
    local.out_dir.clear();
    bool ok = true;
    for (const char* model : {"adversarial:spike", "adversarial:signflip", "adversarial:geometric"}) {
      ExperimentConfig cfg = make_experiment_config(local, model, 1, 50, true, false);
      ExperimentReport rep = run_experiment(cfg);
      ok = ok && rep.bound_violations == 0;
    }
    st.check("adversarial streams stay bounded", ok);
  });

  std::printf("selftest: %s\n", st.failures() == 0 ? "all checks passed" : "FAILURES PRESENT");
  return st.failures() == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-uniform mixture wealth: regret bounds, confidence sequences, experiments"};
  app.set_version_flag("--version", version_string());
  app.set_config("--config", "", "flat key=value file; explicit flags take precedence");
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--seed", g.seed, "base RNG seed")->envname("MIXREG_SEED");
  app.add_option("--alpha", g.alpha, "error budget in (0,1)")->capture_default_str();
  app.add_option("--rho", g.rho, "third-branch tuning parameter in (0,1/4)")->capture_default_str();
  app.add_option("--c", g.c, "heavy-tail prior scale parameter")->capture_default_str();
  app.add_option("--prior", g.prior_text, "robbins[:c=C] | gaussian:SIGMA0_SQ")
      ->capture_default_str();
  app.add_option("--out", g.out_dir, "directory for machine-readable artifacts");
  app.add_option("--tolerance", g.tolerance, "violation tolerance added to certified error")
      ->capture_default_str();
  app.add_option("--threads", g.threads, "worker threads (0 = hardware)")->capture_default_str();

  auto* bound_cmd = app.add_subcommand("bound", "evaluate regret bounds at a state (S, V)");
  bound_cmd->fallthrough();
  double bound_S = 0.0, bound_V = 0.0;
  bound_cmd->add_option("--S", bound_S, "cumulative sum")->required();
  bound_cmd->add_option("--V", bound_V, "cumulative variance, must be positive")->required();

  auto* wealth_cmd = app.add_subcommand("wealth", "evaluate ln Z at a state or along a path");
  wealth_cmd->fallthrough();
  std::optional<double> wealth_S, wealth_V;
  std::string wealth_model = "gaussian";
  std::int64_t wealth_T = 100;
  wealth_cmd->add_option("--S", wealth_S, "cumulative sum (state mode)");
  wealth_cmd->add_option("--V", wealth_V, "cumulative variance (state mode)");
  wealth_cmd->add_option("--model", wealth_model, "data model (path mode)")->capture_default_str();
  wealth_cmd->add_option("--T", wealth_T, "horizon (path mode)")->capture_default_str();

  auto* sim_cmd = app.add_subcommand("simulate", "run many paths and aggregate guarantees");
  sim_cmd->fallthrough();
  std::string sim_model = "gaussian";
  std::int64_t sim_paths = 1000, sim_T = 1000;
  bool sim_full = false, sim_trace = false;
  sim_cmd->add_option("--model", sim_model, "data model")->capture_default_str();
  sim_cmd->add_option("--n-paths", sim_paths, "number of independent paths")->capture_default_str();
  sim_cmd->add_option("--T", sim_T, "steps per path")->capture_default_str();
  sim_cmd->add_flag("--full-eval", sim_full, "evaluate ln Z at every step of every path");
  sim_cmd->add_flag("--trace", sim_trace, "record a per-step trace of the first path");

  auto* cov_cmd = app.add_subcommand("coverage", "confidence sequence coverage experiment");
  cov_cmd->fallthrough();
  std::string cov_model = "gaussian";
  std::int64_t cov_paths = 10000, cov_T = 1000;
  cov_cmd->add_option("--model", cov_model, "data model")->capture_default_str();
  cov_cmd->add_option("--n-paths", cov_paths, "number of independent paths")->capture_default_str();
  cov_cmd->add_option("--T", cov_T, "steps per path")->capture_default_str();

  auto* lil_cmd = app.add_subcommand("lil", "long-horizon regret growth diagnostics");
  lil_cmd->fallthrough();
  std::string lil_model = "gaussian";
  std::int64_t lil_T = 1000000, lil_paths = 100;
  double lil_threshold = 2.0, lil_sigma0 = 1.0;
  int lil_per_decade = 8;
  lil_cmd->add_option("--model", lil_model, "data model")->capture_default_str();
  lil_cmd->add_option("--T", lil_T, "horizon")->capture_default_str();
  lil_cmd->add_option("--paths", lil_paths, "number of paths")->capture_default_str();
  lil_cmd->add_option("--threshold", lil_threshold, "flag paths with final R/lnln V above this")
      ->capture_default_str();
  lil_cmd->add_option("--checkpoints-per-decade", lil_per_decade, "log-spaced checkpoint density")
      ->capture_default_str();
  lil_cmd->add_option("--sigma0-sq", lil_sigma0, "prior variance for the comparison column")
      ->capture_default_str();

  auto* replay_cmd = app.add_subcommand("verify-replay", "check recorded increments against bounds");
  replay_cmd->fallthrough();
  std::string replay_file;
  replay_cmd->add_option("file", replay_file, "whitespace or comma separated dS dV per line")
      ->required();

  auto* selftest_cmd = app.add_subcommand("selftest", "reduced-scale invariant suite");
  selftest_cmd->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (bound_cmd->parsed()) return cmd_bound(g, bound_S, bound_V);
    if (wealth_cmd->parsed()) {
      if (wealth_S.has_value() != wealth_V.has_value()) {
        throw ParseError("state mode needs both --S and --V");
      }
      if (wealth_S) return cmd_wealth_state(g, *wealth_S, *wealth_V);
      return cmd_wealth_path(g, wealth_model, wealth_T);
    }
    if (sim_cmd->parsed()) {
      return run_and_summarize(
          make_experiment_config(g, sim_model, sim_paths, sim_T, sim_full, sim_trace));
    }
    if (cov_cmd->parsed()) {
      return run_and_summarize(make_experiment_config(g, cov_model, cov_paths, cov_T, false, false));
    }
    if (lil_cmd->parsed()) {
      return cmd_lil(g, lil_model, lil_T, lil_paths, lil_threshold, lil_per_decade, lil_sigma0);
    }
    if (replay_cmd->parsed()) return cmd_verify_replay(g, replay_file);
    if (selftest_cmd->parsed()) return cmd_selftest(g);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnknownGenerator& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
