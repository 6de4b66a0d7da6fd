#pragma once

#include <cstdint>
#include <vector>

#include "mixreg/core.hpp"
#include "mixreg/prior.hpp"

namespace mixreg {

// Mixture wealth  Z = integral of exp(eta*S - eta^2*V/2) d(prior), reported in
// log scale with a quadrature error estimate.
//
// Heavy-tailed prior: the integral is taken per side in the cumulative
// coordinate u = 1/ln ln(c/eta), where the prior measure is exactly du on
// (0, 1/ln ln c].  A composite trapezoid rule covers [u_min, u_max]; the
// remaining stub (0, u_min] is added analytically as mass u_min at eta = 0+
// (at the default u_min = 1e-8 the true eta there is below 1e-300, so the
// integrand is 1 to double precision and the stub term is exact; for larger
// u_min a certified slack term widens err_bound instead).  The error estimate
// is the difference between the full rule and the embedded half-resolution
// rule, plus the stub slack.
struct QuadratureConfig {
  int nodes_per_side{4096};     // trapezoid intervals per side; >= 16, forced even
  double u_min{1e-8};           // analytic stub boundary in the u coordinate
  double target_rel_err{1e-10}; // convergence target, relative to max(1, |ln Z|)
};

struct LnWealth {
  double value{0.0};
  double err_bound{0.0};
  // False when the adaptive ladder hit its node cap (2^20 per side) without
  // meeting target_rel_err.  The value is still the best one computed.
  bool converged{true};
};

// Closed form for the Gaussian mixing prior N(0, sigma0_sq):
//   ln Z = sigma0_sq*S^2 / (2*(1 + sigma0_sq*V)) - ln(1 + sigma0_sq*V)/2,
// exactly 0 when V == 0.
double ln_wealth_gaussian(double S, double V, double sigma0_sq);

// Adaptive evaluation under the heavy-tailed prior.  Doubles the node count
// until target_rel_err is met or the per-side cap 2^20 is reached.
LnWealth ln_wealth_robbins(double S, double V, const RobbinsPrior& prior,
                           const QuadratureConfig& cfg = {});

// Incremental wealth over a fixed node grid.  Maintains per-node log weights
// ln w_j + f_j where f_j accumulates eta_j*dS - eta_j^2*dV/2 per round, so the
// running normalizer telescopes to the batch integral on the same grid (up to
// rounding).  Single-owner mutable state: not safe for concurrent use; run
// one engine per worker.
class WealthEngine {
 public:
  WealthEngine(PriorSpec prior, QuadratureConfig cfg = {});

  // Advance one round.  Validation (dV >= 0, zero convention) as in
  // append_increment.  Returns the updated ln wealth.
  LnWealth step(double dS, double dV);

  // Current ln wealth from the node weights (exact 0 while V == 0).
  LnWealth ln_wealth() const;

  // Batch integral of an arbitrary summary state over this engine's grid.
  LnWealth batch_ln_wealth(double S, double V) const;

  const PathState& state() const { return state_; }
  const PriorSpec& prior() const { return prior_; }

  // Normalized log posterior over the grid nodes (sums to 1 after exp).
  std::vector<double> posterior_log_weights() const;

 private:
  struct Eval {
    double ln_fine;
    double ln_coarse;  // NaN when no embedded rule (Gaussian nodes)
  };
  Eval evaluate(double S, double V) const;
  LnWealth finish(double S, double V, const Eval& e) const;

  PriorSpec prior_;
  QuadratureConfig cfg_;
  PathState state_;
  bool robbins_{true};
  double sigma0_sq_{1.0};

  std::vector<double> eta_;     // signed node positions (0 for analytic stubs)
  std::vector<double> eta2h_;   // eta^2 / 2
  std::vector<double> log_w_;   // static log quadrature weights
  std::vector<double> cmult_;   // weight multiplier in the embedded coarse rule
  std::vector<double> f_;       // accumulated per-node log payoff
  double log_norm_{0.0};        // subtracted normalizer (ln Z0 for heavy tail)
  double stub_eta_{0.0};        // true eta at the stub boundary (slack term)
};

// Round-for-round form of WealthEngine::step.
LnWealth game_round(WealthEngine& engine, double dS, double dV);

}  // namespace mixreg
