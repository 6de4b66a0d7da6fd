#include "mixreg/wealth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <utility>

namespace mixreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr int kMaxNodesPerSide = 1 << 20;

void check_summary_state(double S, double V) {
  if (!std::isfinite(S) || !std::isfinite(V) || V < 0.0) {
    throw OutOfRange("wealth: state must be finite with V >= 0");
  }
  if (V == 0.0 && S != 0.0) {
    throw BrokenZeroConvention("wealth: S != 0 while V == 0");
  }
}

int normalize_nodes(int requested) {
  // Multiple of 4 so the half-resolution rule is itself a valid Simpson sum.
  int n = std::max(16, requested);
  n = (n + 3) & ~3;
  if (n > kMaxNodesPerSide) n = kMaxNodesPerSide;
  return n;
}

// Node grid for the heavy-tailed prior: composite Simpson rule per side in
// the cumulative coordinate, one shared analytic stub for the (0, u_min]
// tails.
struct HeavyGrid {
  std::vector<double> eta;
  std::vector<double> eta2h;
  std::vector<double> log_w;
  std::vector<double> cmult;  // embedded half-resolution rule multiplier
  double log_norm;            // ln Z0
  double stub_eta;            // true eta at the stub boundary
  double u_min;
  int nodes_per_side;
};

HeavyGrid build_heavy_grid(const RobbinsPrior& prior, int nodes_per_side, double u_min) {
  const int n = normalize_nodes(nodes_per_side);
  const double u_max = prior.u_max();
  if (!(u_min > 0.0 && u_min < 0.25 * u_max)) {
    throw ConfigError("quadrature: u_min must lie in (0, u_max/4)");
  }
  HeavyGrid g;
  g.nodes_per_side = n;
  g.u_min = u_min;
  g.log_norm = std::log(prior.normalizer());
  g.stub_eta = prior.to_uniform(u_min);

  const std::size_t total = 2 * static_cast<std::size_t>(n + 1) + 1;
  g.eta.reserve(total);
  g.eta2h.reserve(total);
  g.log_w.reserve(total);
  g.cmult.reserve(total);

  const double h = (u_max - u_min) / n;
  const double log_h3 = std::log(h / 3.0);
  for (int side = 0; side < 2; ++side) {
    const double sign = (side == 0) ? 1.0 : -1.0;
    for (int j = 0; j <= n; ++j) {
      const double u = (j == n) ? u_max : u_min + j * h;
      const double e = sign * prior.to_uniform(u);
      g.eta.push_back(e);
      g.eta2h.push_back(0.5 * e * e);
      const double simpson = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
      g.log_w.push_back(log_h3 + std::log(simpson));
      // The half-resolution Simpson rule reuses the even-indexed evaluations;
      // cmult holds its weight divided by the fine weight at that node.
      double cm = 0.0;
      if (j % 2 == 0) {
        const double coarse = (j == 0 || j == n) ? 2.0 : (j % 4 == 2 ? 8.0 : 4.0);
        cm = coarse / simpson;
      }
      g.cmult.push_back(cm);
    }
  }
  // Both tails' stub mass in one eta = 0 node.
  g.eta.push_back(0.0);
  g.eta2h.push_back(0.0);
  g.log_w.push_back(std::log(2.0 * u_min));
  g.cmult.push_back(1.0);
  return g;
}

struct LogSums {
  double ln_fine;
  double ln_coarse;
};

template <class ValueAt>
LogSums log_sum_pair(const std::vector<double>& cmult, std::size_t count, ValueAt v,
                     bool with_coarse) {
  double m = kNegInf;
  for (std::size_t i = 0; i < count; ++i) {
    m = std::max(m, v(i));
  }
  double s = 0.0;
  double sc = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const double d = v(i) - m;
    if (d < -745.0) continue;  // exp underflows to 0
    const double e = std::exp(d);
    s += e;
    if (with_coarse) sc += cmult[i] * e;
  }
  const double ln_fine = m + std::log(s);
  const double ln_coarse =
      with_coarse ? m + std::log(sc) : std::numeric_limits<double>::quiet_NaN();
  return {ln_fine, ln_coarse};
}

// Certified widening of err_bound for the analytic stub: over (0, u_min] the
// integrand exp(f) sits in [exp(-eps), exp(eps)] with
// eps = |S|*stub_eta + V*stub_eta^2/2 (0 at the default u_min, where stub_eta
// underflows to 0).
double stub_slack(double S, double V, double stub_eta, double u_min, double ln_total_u) {
  const double eps = std::fabs(S) * stub_eta + 0.5 * V * stub_eta * stub_eta;
  if (eps == 0.0) return 0.0;
  const double extra = 2.0 * u_min * std::expm1(eps);
  return std::log1p(extra * std::exp(-ln_total_u));
}

LnWealth eval_heavy_grid(const HeavyGrid& g, double S, double V, double target_rel_err) {
  const auto v = [&](std::size_t i) { return g.log_w[i] + g.eta[i] * S - g.eta2h[i] * V; };
  const LogSums sums = log_sum_pair(g.cmult, g.eta.size(), v, true);
  LnWealth out;
  out.value = sums.ln_fine - g.log_norm;
  out.err_bound = std::fabs(sums.ln_fine - sums.ln_coarse) +
                  stub_slack(S, V, g.stub_eta, g.u_min, sums.ln_fine);
  out.converged = out.err_bound <= target_rel_err * std::max(1.0, std::fabs(out.value));
  return out;
}

// Small per-thread cache of prior grids keyed by (c, nodes, u_min); the
// adaptive ladder revisits the same few configurations constantly.
const HeavyGrid& cached_heavy_grid(const RobbinsPrior& prior, int nodes, double u_min) {
  struct Entry {
    double c;
    double u_min;
    int nodes;
    std::unique_ptr<HeavyGrid> grid;
  };
  thread_local std::vector<Entry> cache;
  thread_local std::size_t cached_nodes = 0;
  for (const auto& e : cache) {
    if (e.c == prior.c() && e.u_min == u_min && e.nodes == nodes) return *e.grid;
  }
  // ~48 MB ceiling on cached node storage.
  constexpr std::size_t kMaxCachedNodes = 3u << 19;
  if (cached_nodes + static_cast<std::size_t>(nodes) > kMaxCachedNodes) {
    cache.clear();
    cached_nodes = 0;
  }
  cache.push_back({prior.c(), u_min, nodes,
                   std::make_unique<HeavyGrid>(build_heavy_grid(prior, nodes, u_min))});
  cached_nodes += static_cast<std::size_t>(nodes);
  return *cache.back().grid;
}

}  // namespace

double ln_wealth_gaussian(double S, double V, double sigma0_sq) {
  if (!(sigma0_sq > 0.0)) {
    throw ConfigError("ln_wealth_gaussian: sigma0_sq must be positive");
  }
  check_summary_state(S, V);
  if (V == 0.0) return 0.0;
  const double q = sigma0_sq * V;
  return 0.5 * sigma0_sq * S * S / (1.0 + q) - 0.5 * std::log1p(q);
}

LnWealth ln_wealth_robbins(double S, double V, const RobbinsPrior& prior,
                           const QuadratureConfig& cfg) {
  check_summary_state(S, V);
  if (V == 0.0) return {0.0, 0.0, true};
  int n = normalize_nodes(cfg.nodes_per_side);
  LnWealth best{};
  for (;;) {
    const HeavyGrid& g = cached_heavy_grid(prior, n, cfg.u_min);
    best = eval_heavy_grid(g, S, V, cfg.target_rel_err);
    if (best.converged || n >= kMaxNodesPerSide) return best;
    n = std::min(2 * n, kMaxNodesPerSide);
  }
}

WealthEngine::WealthEngine(PriorSpec prior, QuadratureConfig cfg)
    : prior_(std::move(prior)), cfg_(cfg) {
  validate(prior_);
  if (const auto* r = std::get_if<RobbinsSpec>(&prior_)) {
    robbins_ = true;
    HeavyGrid g = build_heavy_grid(RobbinsPrior(r->c), cfg_.nodes_per_side, cfg_.u_min);
    eta_ = std::move(g.eta);
    eta2h_ = std::move(g.eta2h);
    log_w_ = std::move(g.log_w);
    cmult_ = std::move(g.cmult);
    log_norm_ = g.log_norm;
    stub_eta_ = g.stub_eta;
  } else {
    robbins_ = false;
    sigma0_sq_ = std::get<GaussianSpec>(prior_).sigma0_sq;
    // Midpoint grid over +/- 12 prior standard deviations.  Equally spaced
    // nodes keep the sum spectrally accurate while the posterior bulk stays
    // inside the window; err_bound measures against the closed form, so any
    // state outside that envelope is reported as unconverged rather than
    // silently wrong.
    const std::size_t total = 2 * static_cast<std::size_t>(normalize_nodes(cfg_.nodes_per_side));
    const double sigma0 = std::sqrt(sigma0_sq_);
    const double eta_max = 12.0 * sigma0;
    const double step = 2.0 * eta_max / static_cast<double>(total);
    const double log_cell =
        std::log(step) - 0.5 * std::log(2.0 * std::numbers::pi * sigma0_sq_);
    eta_.resize(total);
    eta2h_.resize(total);
    log_w_.resize(total);
    cmult_.assign(total, 0.0);
    for (std::size_t i = 0; i < total; ++i) {
      eta_[i] = -eta_max + (static_cast<double>(i) + 0.5) * step;
      eta2h_[i] = 0.5 * eta_[i] * eta_[i];
      log_w_[i] = log_cell - eta2h_[i] / sigma0_sq_;
    }
    log_norm_ = 0.0;
  }
  f_.assign(eta_.size(), 0.0);
}

WealthEngine::Eval WealthEngine::evaluate(double S, double V) const {
  const auto v = [&](std::size_t i) { return log_w_[i] + eta_[i] * S - eta2h_[i] * V; };
  const LogSums sums = log_sum_pair(cmult_, eta_.size(), v, robbins_);
  return {sums.ln_fine, sums.ln_coarse};
}

LnWealth WealthEngine::finish(double S, double V, const Eval& e) const {
  LnWealth out;
  out.value = e.ln_fine - log_norm_;
  if (robbins_) {
    out.err_bound = std::fabs(e.ln_fine - e.ln_coarse) +
                    stub_slack(S, V, stub_eta_, cfg_.u_min, e.ln_fine);
  } else {
    out.err_bound = std::fabs(out.value - ln_wealth_gaussian(S, V, sigma0_sq_));
  }
  out.converged = out.err_bound <= cfg_.target_rel_err * std::max(1.0, std::fabs(out.value));
  return out;
}

LnWealth WealthEngine::step(double dS, double dV) {
  state_ = append_increment(std::move(state_), dS, dV);
  if (dS != 0.0 || dV != 0.0) {
    for (std::size_t i = 0; i < f_.size(); ++i) {
      f_[i] += eta_[i] * dS - eta2h_[i] * dV;
    }
  }
  return ln_wealth();
}

LnWealth WealthEngine::ln_wealth() const {
  if (state_.V == 0.0) return {0.0, 0.0, true};
  const auto v = [&](std::size_t i) { return log_w_[i] + f_[i]; };
  const LogSums sums = log_sum_pair(cmult_, eta_.size(), v, robbins_);
  return finish(state_.S, state_.V, {sums.ln_fine, sums.ln_coarse});
}

LnWealth WealthEngine::batch_ln_wealth(double S, double V) const {
  check_summary_state(S, V);
  if (V == 0.0) return {0.0, 0.0, true};
  return finish(S, V, evaluate(S, V));
}

std::vector<double> WealthEngine::posterior_log_weights() const {
  const auto v = [&](std::size_t i) { return log_w_[i] + f_[i]; };
  const LogSums sums = log_sum_pair(cmult_, eta_.size(), v, false);
  std::vector<double> out(eta_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = v(i) - sums.ln_fine;
  }
  return out;
}

LnWealth game_round(WealthEngine& engine, double dS, double dV) {
  return engine.step(dS, dV);
}

}  // namespace mixreg
