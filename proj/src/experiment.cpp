#include "mixreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <thread>
#include <variant>

#include <boost/math/distributions/binomial.hpp>

#include "json.hpp"

namespace mixreg {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Gaussian-prior conditional bounds are checked above this variance level.
constexpr double kGaussianCondV0 = 1.0;

// Screening slack: a coarse evaluation certifies "cannot raise the running
// sup" only when it clears by its own error estimate plus this margin.
constexpr double kScreenGuard = 1e-3;

// |S| / sqrt(2 V lnln V) is reported whenever V > e, but the running max
// only accumulates from lnln V >= 1 onward: just above V = e the
// denominator vanishes and a single early step would dominate the path.
const double kLilMaxWindowV = std::exp(std::numbers::e);

QuadratureConfig screen_config(const QuadratureConfig& fine) {
  QuadratureConfig s;
  s.nodes_per_side = 128;
  s.u_min = fine.u_min;
  s.target_rel_err = 5e-3;
  return s;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* branch_name(BranchId b) {
  switch (b) {
    case BranchId::B1_interior: return "B1";
    case BranchId::B2_lil: return "B2";
    case BranchId::B3_boundary: return "B3";
  }
  return "?";
}

// Distributes [0, n) over workers; rethrows the first (lowest-index) worker
// exception after joining.  Returns the worker count actually used.
template <class Fn>
int run_indexed(std::int64_t n, int threads, Fn&& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  if (n < 1) return workers;
  workers = static_cast<int>(std::min<std::int64_t>(workers, n));
  if (workers == 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return 1;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (true) {
        const std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return workers;
}

void accumulate(double& S, double& V, const Increment& inc) {
  if (!(std::isfinite(inc.dS) && std::isfinite(inc.dV))) {
    throw OutOfRange("run_path: non-finite increment");
  }
  if (inc.dV < 0.0) throw NegativeVarianceIncrement("run_path: dV < 0");
  S += inc.dS;
  V += inc.dV;
  if (!(std::isfinite(S) && std::isfinite(V))) {
    throw OutOfRange("run_path: accumulator overflow");
  }
  if (V == 0.0 && S != 0.0) {
    throw BrokenZeroConvention("run_path: S != 0 while V == 0");
  }
}

std::int64_t effective_horizon(const DataModel& model, std::int64_t horizon) {
  if (const auto* r = std::get_if<Replay>(&model)) {
    return std::min<std::int64_t>(horizon, static_cast<std::int64_t>(r->data->size()));
  }
  return horizon;
}

ordered_json quantiles_json(const Quantiles& q) {
  return ordered_json{{"n", q.n},     {"min", q.min}, {"q25", q.q25},
                      {"median", q.median}, {"q75", q.q75}, {"max", q.max}};
}

ordered_json ci_json(const CountWithCI& c) {
  return ordered_json{{"count", c.count},
                      {"out_of", c.out_of},
                      {"frequency", c.frequency},
                      {"ci95_lo", c.ci_lo},
                      {"ci95_hi", c.ci_hi}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.flush();
  if (!out.good()) throw IOError("cannot write " + path.string());
}

}  // namespace

std::string version_string() {
#ifdef MIXREG_GIT_REV
  const std::string rev = MIXREG_GIT_REV;
#else
  const std::string rev = "unknown";
#endif
  std::string v = "mixreg 0.1.0";
  if (rev != "unknown" && !rev.empty()) v += "+g" + rev;
  return v;
}

std::string describe_prior(const PriorSpec& prior) {
  char buf[64];
  if (const auto* r = std::get_if<RobbinsSpec>(&prior)) {
    std::snprintf(buf, sizeof buf, "robbins:c=%.17g", r->c);
    return buf;
  }
  std::snprintf(buf, sizeof buf, "gaussian:sigma0_sq=%.17g",
                std::get<GaussianSpec>(prior).sigma0_sq);
  return buf;
}

void validate(const ExperimentConfig& config) {
  validate(config.model);
  validate(config.prior);
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw OutOfRange("experiment: alpha must lie in (0, 1)");
  }
  if (std::holds_alternative<RobbinsSpec>(config.prior) &&
      !(config.rho > 0.0 && config.rho < 0.25)) {
    throw InvalidRho("experiment: rho must lie in (0, 1/4)");
  }
  if (config.n_paths < 1) throw ConfigError("experiment: n_paths must be >= 1");
  if (config.horizon < 1) throw ConfigError("experiment: horizon must be >= 1");
  if (config.tolerance < 0.0) throw ConfigError("experiment: tolerance must be >= 0");
  if (config.threads < 0) throw ConfigError("experiment: threads must be >= 0");
}

PathResult run_path(const ExperimentConfig& config, std::int64_t path_id,
                    std::vector<TraceRow>* trace_out) {
  const bool robbins = std::holds_alternative<RobbinsSpec>(config.prior);
  const double c = robbins ? std::get<RobbinsSpec>(config.prior).c : kDefaultRobbinsC;
  const double s0 = robbins ? 0.0 : std::get<GaussianSpec>(config.prior).sigma0_sq;
  const double threshold = std::log(1.0 / config.alpha);
  const double prop1_V = robbins ? v_alpha(config.alpha, config.rho, c).value : kInf;
  const std::optional<double> mean = mean_dS(config.model);

  DataModel model = prepare_replay(config.model);
  const std::int64_t T = effective_horizon(model, config.horizon);
  PathGenerator gen(std::move(model), RngStream{config.seed, static_cast<std::uint64_t>(path_id)});

  const bool full = config.full_eval || trace_out != nullptr;
  std::optional<RobbinsPrior> prior;
  if (robbins) prior.emplace(c);
  std::optional<WealthEngine> engine;
  if (full) engine.emplace(config.prior, config.quadrature);
  const QuadratureConfig screen = screen_config(config.quadrature);

  PathResult res;
  res.ville.path_id = path_id;
  res.cs_applicable = mean.has_value();

  double S = 0.0;
  double V = 0.0;
  double sum_X = 0.0;
  double sup = -kInf;
  bool crossed = false;

  for (std::int64_t t = 1; t <= T; ++t) {
    const Increment inc = gen.next();
    LnWealth w;
    bool have_w = false;
    if (full) {
      w = engine->step(inc.dS, inc.dV);
      have_w = true;
      ++res.fine_evals;
      S = engine->state().S;
      V = engine->state().V;
    } else {
      accumulate(S, V, inc);
    }
    sum_X += inc.X;
    const double L_star = V > 0.0 ? S * S / (2.0 * V) : 0.0;

    // O(1) per-step quantities; both bounds are summary functions of (S, V).
    double bound_val = kNaN;
    double cond_val = kNaN;
    BranchId branch = BranchId::B1_interior;
    if (V > 0.0) {
      if (robbins) {
        const BoundReport br = pathwise_bound(S, V, c, config.rho);
        branch = br.branch;
        bound_val = br.value;
        if (!crossed || full) {
          cond_val = conditional_bound(S, V, config.alpha, c, config.rho).value;
        }
      } else {
        branch = classify_branch(S, V);
        bound_val = gaussian_regret_exact(S, V, s0);
        if (V > kGaussianCondV0) {
          cond_val = gaussian_conditional_bound(V, kGaussianCondV0, s0, config.alpha);
        }
      }
    }

    if (!crossed && V >= prop1_V && std::fabs(S) > V) ++res.prop1_violations;

    double cs_r = 0.0;
    bool covered = true;
    if (res.cs_applicable) {
      cs_r = V > 0.0 ? cs_radius(t, V, bound_val, config.alpha) : 0.0;
      covered = std::fabs(S / static_cast<double>(t) - *mean) <= cs_r;
      if (!covered) res.cs_covered_all = false;
    }

    if (!full) {
      if (!robbins) {
        w = LnWealth{ln_wealth_gaussian(S, V, s0), 0.0, true};
        have_w = true;
      } else if (V == 0.0) {
        sup = std::max(sup, 0.0);
        if (t == T) {
          res.final_ln_Z = 0.0;
          res.final_regret = 0.0;
        }
      } else {
        // The conditional bound is certified for free wherever it dominates
        // the pathwise bound; otherwise this step needs the exact value.
        const bool fallback =
            !crossed && !std::isnan(cond_val) && !(cond_val >= bound_val);
        bool candidate = L_star > sup;
        if (candidate && !fallback && t != T) {
          const LnWealth sc = ln_wealth_robbins(S, V, *prior, screen);
          ++res.screen_evals;
          if (sc.value + sc.err_bound + kScreenGuard <= sup) candidate = false;
        }
        if (candidate || fallback || t == T) {
          w = ln_wealth_robbins(S, V, *prior, config.quadrature);
          have_w = true;
          ++res.fine_evals;
        }
      }
    }

    if (have_w) {
      ++res.evaluated_steps;
      if (!w.converged) res.unverified = true;
      res.max_err_bound = std::max(res.max_err_bound, w.err_bound);
      const double regret = L_star - w.value;
      if (!std::isnan(bound_val)) {
        const double margin = regret - bound_val;
        if (margin > res.max_violation_margin) res.max_violation_margin = margin;
        if (margin > config.tolerance + w.err_bound) ++res.bound_violations;
      }
      if (!crossed && !std::isnan(cond_val) &&
          regret - cond_val > config.tolerance + w.err_bound) {
        ++res.conditional_violations;
      }
      if (w.value > sup) sup = w.value;
      if (!crossed && w.value > threshold) {
        crossed = true;
        res.ville.first_crossing_t = t;
      }
      if (t == T) {
        res.final_ln_Z = w.value;
        res.final_regret = regret;
      }
      if (trace_out) {
        const double xbar = sum_X / static_cast<double>(t);
        trace_out->push_back(TraceRow{t, S, V, w.value, regret, branch, bound_val, cond_val,
                                      xbar - cs_r, xbar + cs_r, covered});
      }
    }

    if (V >= kLilMaxWindowV) {
      const double stat = std::fabs(S) / std::sqrt(2.0 * V * std::log(std::log(V)));
      if (stat > res.max_lil_stat) res.max_lil_stat = stat;
    }
  }

  if (sup == -kInf) sup = 0.0;  // zero rounds played
  res.ville.in_E_alpha = !crossed;
  res.ville.sup_ln_Z = sup;
  res.final_S = S;
  res.final_V = V;
  res.final_slln_stat = V > 0.0 ? std::fabs(S) / V : 0.0;
  return res;
}

CountWithCI clopper_pearson(std::int64_t count, std::int64_t out_of) {
  if (out_of < 1) throw OutOfRange("clopper_pearson: out_of must be >= 1");
  if (count < 0 || count > out_of) throw OutOfRange("clopper_pearson: count out of range");
  CountWithCI r;
  r.count = count;
  r.out_of = out_of;
  r.frequency = static_cast<double>(count) / static_cast<double>(out_of);
  using dist = boost::math::binomial_distribution<double>;
  r.ci_lo = dist::find_lower_bound_on_p(static_cast<double>(out_of),
                                        static_cast<double>(count), 0.025);
  r.ci_hi = dist::find_upper_bound_on_p(static_cast<double>(out_of),
                                        static_cast<double>(count), 0.025);
  return r;
}

Quantiles summarize(std::vector<double> values) {
  Quantiles q;
  q.n = static_cast<std::int64_t>(values.size());
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  const auto at = [&](double p) {
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
  };
  q.min = values.front();
  q.q25 = at(0.25);
  q.median = at(0.5);
  q.q75 = at(0.75);
  q.max = values.back();
  return q;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.config = config;
  report.config.model = prepare_replay(config.model);
  report.paths.resize(static_cast<std::size_t>(config.n_paths));

  report.threads_used = run_indexed(config.n_paths, config.threads, [&](std::int64_t i) {
    auto* trace = (config.trace && i == 0) ? &report.trace : nullptr;
    report.paths[static_cast<std::size_t>(i)] = run_path(report.config, i, trace);
  });

  std::int64_t in_count = 0;
  std::int64_t crossed_count = 0;
  std::int64_t max_crossing = 0;
  std::vector<double> lil_stats;
  std::vector<double> final_regrets;
  std::int64_t cs_count = 0;
  lil_stats.reserve(report.paths.size());
  final_regrets.reserve(report.paths.size());
  for (const PathResult& p : report.paths) {
    if (p.ville.in_E_alpha) {
      ++in_count;
      report.conditional_violations_on_E_alpha += p.conditional_violations;
      report.prop1_violations_on_E_alpha += p.prop1_violations;
    } else {
      ++crossed_count;
      max_crossing = std::max(max_crossing, *p.ville.first_crossing_t);
    }
    report.evaluated_steps += p.evaluated_steps;
    report.bound_violations += p.bound_violations;
    report.worst_margin = std::max(report.worst_margin, p.max_violation_margin);
    if (p.cs_covered_all) ++cs_count;
    if (p.unverified) ++report.unverified_paths;
    lil_stats.push_back(p.max_lil_stat);
    final_regrets.push_back(p.final_regret);
    report.fine_evals += p.fine_evals;
    report.screen_evals += p.screen_evals;
  }
  report.ville_frequency = clopper_pearson(in_count, config.n_paths);
  report.cs_applicable = report.paths.front().cs_applicable;
  report.cs_coverage = clopper_pearson(report.cs_applicable ? cs_count : 0, config.n_paths);
  report.max_lil_stat_distribution = summarize(std::move(lil_stats));
  report.final_regret_distribution = summarize(std::move(final_regrets));

  if (crossed_count > 0) {
    for (std::int64_t lo = 1; lo <= max_crossing; lo *= 2) {
      const std::int64_t hi = lo * 2 - 1;
      CrossingBin bin{lo, hi, 0};
      for (const PathResult& p : report.paths) {
        if (!p.ville.in_E_alpha && *p.ville.first_crossing_t >= lo &&
            *p.ville.first_crossing_t <= hi) {
          ++bin.count;
        }
      }
      report.first_crossing_histogram.push_back(bin);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!config.out_dir.empty()) write_report(report, config.out_dir);
  return report;
}

std::string report_json_text(const ExperimentReport& report) {
  const ExperimentConfig& c = report.config;
  ordered_json j;
  j["version"] = version_string();
  j["config"] = ordered_json{
      {"model", describe_model(c.model)},
      {"prior", describe_prior(c.prior)},
      {"alpha", c.alpha},
      {"rho", c.rho},
      {"n_paths", c.n_paths},
      {"horizon", c.horizon},
      {"seed", c.seed},
      {"tolerance", c.tolerance},
      {"quadrature", ordered_json{{"nodes_per_side", c.quadrature.nodes_per_side},
                                  {"u_min", c.quadrature.u_min},
                                  {"target_rel_err", c.quadrature.target_rel_err}}},
      {"threads", c.threads},
      {"full_eval", c.full_eval},
      {"trace", c.trace},
  };

  ordered_json crossing_bins = ordered_json::array();
  std::int64_t crossed = 0;
  for (const CrossingBin& b : report.first_crossing_histogram) {
    crossing_bins.push_back(ordered_json{{"t_lo", b.t_lo}, {"t_hi", b.t_hi}, {"count", b.count}});
    crossed += b.count;
  }

  j["results"] = ordered_json{
      {"n_paths", c.n_paths},
      {"ville_frequency", ci_json(report.ville_frequency)},
      {"first_crossing", ordered_json{{"count", crossed}, {"histogram", crossing_bins}}},
      {"bound_violations", ordered_json{{"count", report.bound_violations},
                                        {"worst_margin", report.worst_margin},
                                        {"evaluated_steps", report.evaluated_steps}}},
      {"conditional_violations_on_E_alpha", report.conditional_violations_on_E_alpha},
      {"prop1_violations_on_E_alpha", report.prop1_violations_on_E_alpha},
      {"cs_coverage", ordered_json{{"applicable", report.cs_applicable},
                                   {"count", report.cs_coverage.count},
                                   {"out_of", report.cs_coverage.out_of},
                                   {"frequency", report.cs_coverage.frequency},
                                   {"ci95_lo", report.cs_coverage.ci_lo},
                                   {"ci95_hi", report.cs_coverage.ci_hi}}},
      {"max_lil_stat_distribution", quantiles_json(report.max_lil_stat_distribution)},
      {"final_regret_distribution", quantiles_json(report.final_regret_distribution)},
      {"unverified_paths", report.unverified_paths},
  };
  j["runtime"] = ordered_json{
      {"wall_seconds", report.wall_seconds},
      {"fine_evals", report.fine_evals},
      {"screen_evals", report.screen_evals},
      {"threads_used", report.threads_used},
  };
  return j.dump(2) + "\n";
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError("cannot create " + dir.string() + ": " + ec.message());

  write_text_file(dir / "report.json", report_json_text(report));

  std::string csv = "path_id,in_E_alpha,sup_ln_Z,max_violation_margin,final_R_t\n";
  for (const PathResult& p : report.paths) {
    csv += std::to_string(p.ville.path_id);
    csv += p.ville.in_E_alpha ? ",1," : ",0,";
    csv += fmt17(p.ville.sup_ln_Z);
    csv += ',';
    csv += fmt17(p.max_violation_margin);
    csv += ',';
    csv += fmt17(p.final_regret);
    csv += '\n';
  }
  write_text_file(dir / "paths.csv", csv);

  if (!report.trace.empty()) {
    std::string tr = "t,S,V,ln_Z,R,branch,bound,cond_bound,cs_lo,cs_hi,covered\n";
    for (const TraceRow& r : report.trace) {
      tr += std::to_string(r.t);
      tr += ',';
      tr += fmt17(r.S);
      tr += ',';
      tr += fmt17(r.V);
      tr += ',';
      tr += fmt17(r.ln_Z);
      tr += ',';
      tr += fmt17(r.regret);
      tr += ',';
      tr += branch_name(r.branch);
      tr += ',';
      tr += fmt17(r.bound);
      tr += ',';
      tr += fmt17(r.cond_bound);
      tr += ',';
      tr += fmt17(r.cs_lo);
      tr += ',';
      tr += fmt17(r.cs_hi);
      tr += r.covered ? ",1\n" : ",0\n";
    }
    write_text_file(dir / "trace.csv", tr);
  }
}

void validate(const LilConfig& config) {
  validate(config.model);
  validate(PriorSpec{RobbinsSpec{config.c}});
  validate(PriorSpec{GaussianSpec{config.sigma0_sq}});
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw OutOfRange("lil: alpha must lie in (0, 1)");
  }
  if (config.n_paths < 1) throw ConfigError("lil: n_paths must be >= 1");
  if (config.horizon < 1) throw ConfigError("lil: horizon must be >= 1");
  if (config.checkpoints_per_decade < 1) {
    throw ConfigError("lil: checkpoints_per_decade must be >= 1");
  }
  if (config.threads < 0) throw ConfigError("lil: threads must be >= 0");
}

std::vector<std::int64_t> lil_checkpoints(std::int64_t horizon, int per_decade) {
  if (horizon < 1) throw ConfigError("lil_checkpoints: horizon must be >= 1");
  if (per_decade < 1) throw ConfigError("lil_checkpoints: per_decade must be >= 1");
  std::vector<std::int64_t> out;
  for (int k = 0;; ++k) {
    const double x = std::pow(10.0, static_cast<double>(k) / per_decade);
    std::int64_t t = x >= static_cast<double>(horizon)
                         ? horizon
                         : std::max<std::int64_t>(1, std::llround(x));
    t = std::min(t, horizon);
    if (out.empty() || out.back() != t) out.push_back(t);
    if (t >= horizon) break;
  }
  return out;
}

namespace {

LilPathResult lil_one(const LilConfig& cfg, std::int64_t path_id,
                      const RobbinsPrior& prior, const DataModel& model,
                      const std::vector<std::int64_t>& cps, std::int64_t T) {
  LilPathResult res;
  res.path_id = path_id;
  PathGenerator gen(model, RngStream{cfg.seed, static_cast<std::uint64_t>(path_id)});
  const double threshold = std::log(1.0 / cfg.alpha);
  const QuadratureConfig screen = screen_config(cfg.quadrature);

  double S = 0.0;
  double V = 0.0;
  double sup = -kInf;
  bool crossed = false;
  std::size_t cpi = 0;
  res.checkpoints.reserve(cps.size());

  for (std::int64_t t = 1; t <= T; ++t) {
    const Increment inc = gen.next();
    accumulate(S, V, inc);
    const double L_star = V > 0.0 ? S * S / (2.0 * V) : 0.0;
    double lil_stat = kNaN;
    if (V > std::numbers::e) {
      lil_stat = std::fabs(S) / std::sqrt(2.0 * V * std::log(std::log(V)));
      if (V >= kLilMaxWindowV && lil_stat > res.max_lil_stat) res.max_lil_stat = lil_stat;
    }
    const bool at_cp = cpi < cps.size() && t == cps[cpi];

    if (V == 0.0) {
      sup = std::max(sup, 0.0);
      if (at_cp) {
        res.checkpoints.push_back(LilCheckpoint{t, 0.0, 0.0, 0.0, kNaN, 0.0, kNaN, 0.0});
        ++cpi;
      }
      continue;
    }

    bool candidate = L_star > sup;
    if (candidate && !at_cp) {
      const LnWealth sc = ln_wealth_robbins(S, V, prior, screen);
      ++res.screen_evals;
      if (sc.value + sc.err_bound + kScreenGuard <= sup) candidate = false;
    }
    if (candidate || at_cp) {
      const LnWealth w = ln_wealth_robbins(S, V, prior, cfg.quadrature);
      ++res.fine_evals;
      if (!w.converged) res.unverified = true;
      if (w.value > sup) sup = w.value;
      if (!crossed && w.value > threshold) crossed = true;
      if (at_cp) {
        const double regret = L_star - w.value;
        const double llv = V > std::numbers::e ? std::log(std::log(V)) : kNaN;
        const double gap =
            gaussian_regret_exact(S, V, cfg.sigma0_sq) - std::log1p(cfg.sigma0_sq * V);
        res.checkpoints.push_back(LilCheckpoint{t, V, w.value, regret, regret / llv,
                                                std::fabs(S) / V, lil_stat, gap});
        ++cpi;
      }
    }
  }

  if (sup == -kInf) sup = 0.0;
  res.in_E_alpha = !crossed;
  res.sup_ln_Z = sup;
  if (res.in_E_alpha && !res.checkpoints.empty()) {
    const double ratio = res.checkpoints.back().regret_over_llv;
    res.flagged = std::isfinite(ratio) && ratio > cfg.report_threshold;
  }
  return res;
}

}  // namespace

LilReport lil_longrun(const LilConfig& config) {
  validate(config);
  const auto t0 = std::chrono::steady_clock::now();

  LilReport report;
  report.config = config;
  report.config.model = prepare_replay(config.model);
  const std::int64_t T = effective_horizon(report.config.model, config.horizon);
  if (T < 1) throw ConfigError("lil: replay data is empty");
  const std::vector<std::int64_t> cps = lil_checkpoints(T, config.checkpoints_per_decade);
  const RobbinsPrior prior(config.c);

  report.paths.resize(static_cast<std::size_t>(config.n_paths));
  run_indexed(config.n_paths, config.threads, [&](std::int64_t i) {
    report.paths[static_cast<std::size_t>(i)] =
        lil_one(report.config, i, prior, report.config.model, cps, T);
  });

  std::vector<double> ratios;
  std::vector<double> stats;
  std::vector<double> gaps;
  for (const LilPathResult& p : report.paths) {
    if (p.unverified) ++report.unverified_paths;
    report.fine_evals += p.fine_evals;
    report.screen_evals += p.screen_evals;
    if (!p.in_E_alpha) continue;
    ++report.e_alpha_count;
    if (p.flagged) ++report.flagged_count;
    if (!p.checkpoints.empty()) {
      const LilCheckpoint& last = p.checkpoints.back();
      if (std::isfinite(last.regret_over_llv)) ratios.push_back(last.regret_over_llv);
      gaps.push_back(last.gaussian_gap);
    }
    stats.push_back(p.max_lil_stat);
  }
  report.final_ratio_distribution = summarize(std::move(ratios));
  report.max_lil_stat_distribution = summarize(std::move(stats));
  report.final_gaussian_gap_distribution = summarize(std::move(gaps));
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!config.out_dir.empty()) write_lil_report(report, config.out_dir);
  return report;
}

std::string lil_json_text(const LilReport& report) {
  const LilConfig& c = report.config;
  ordered_json j;
  j["version"] = version_string();
  j["config"] = ordered_json{
      {"model", describe_model(c.model)},
      {"c", c.c},
      {"sigma0_sq", c.sigma0_sq},
      {"alpha", c.alpha},
      {"n_paths", c.n_paths},
      {"horizon", c.horizon},
      {"seed", c.seed},
      {"checkpoints_per_decade", c.checkpoints_per_decade},
      {"report_threshold", c.report_threshold},
      {"quadrature", ordered_json{{"nodes_per_side", c.quadrature.nodes_per_side},
                                  {"u_min", c.quadrature.u_min},
                                  {"target_rel_err", c.quadrature.target_rel_err}}},
      {"threads", c.threads},
  };
  j["results"] = ordered_json{
      {"e_alpha_count", report.e_alpha_count},
      {"flagged_count", report.flagged_count},
      {"report_threshold", c.report_threshold},
      {"final_ratio_distribution", quantiles_json(report.final_ratio_distribution)},
      {"max_lil_stat_distribution", quantiles_json(report.max_lil_stat_distribution)},
      {"final_gaussian_gap_distribution",
       quantiles_json(report.final_gaussian_gap_distribution)},
      {"unverified_paths", report.unverified_paths},
  };
  j["runtime"] = ordered_json{
      {"wall_seconds", report.wall_seconds},
      {"fine_evals", report.fine_evals},
      {"screen_evals", report.screen_evals},
  };
  return j.dump(2) + "\n";
}

void write_lil_report(const LilReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IOError("cannot create " + dir.string() + ": " + ec.message());

  write_text_file(dir / "lil.json", lil_json_text(report));

  std::string csv =
      "path_id,in_E_alpha,t,V,ln_Z,regret,regret_over_llv,slln_stat,lil_stat,gaussian_gap\n";
  for (const LilPathResult& p : report.paths) {
    const std::string head =
        std::to_string(p.path_id) + (p.in_E_alpha ? ",1," : ",0,");
    for (const LilCheckpoint& cp : p.checkpoints) {
      csv += head;
      csv += std::to_string(cp.t);
      csv += ',';
      csv += fmt17(cp.V);
      csv += ',';
      csv += fmt17(cp.ln_Z);
      csv += ',';
      csv += fmt17(cp.regret);
      csv += ',';
      csv += fmt17(cp.regret_over_llv);
      csv += ',';
      csv += fmt17(cp.slln_stat);
      csv += ',';
      csv += fmt17(cp.lil_stat);
      csv += ',';
      csv += fmt17(cp.gaussian_gap);
      csv += '\n';
    }
  }
  write_text_file(dir / "lil.csv", csv);
}

}  // namespace mixreg
