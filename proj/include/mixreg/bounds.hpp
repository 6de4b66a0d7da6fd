#pragma once

#include <cstdint>
#include <optional>

#include "mixreg/core.hpp"

namespace mixreg {

// Regret and confidence machinery for the mixture wealth process.  Branches
// follow the hindsight ratio r = |S|/V:
//
//   B1 (interior):  r <= 1/sqrt(1+V)        -- optimum well inside the support
//   B2 (lil):       1/sqrt(1+V) < r <= 1    -- optimum inside, envelope scale
//   B3 (boundary):  r > 1                   -- optimum clipped at the support edge
//
// Ties resolve toward the smaller branch (<= on both cuts).
enum class BranchId { B1_interior, B2_lil, B3_boundary };

BranchId classify_branch(double S, double V);  // pre: V > 0

struct BoundReport {
  BranchId branch{BranchId::B1_interior};
  double value{0.0};  // upper bound on regret L* - ln Z
  double rho{0.0};
};

// Exact Gaussian-prior regret: ln(1 + sigma0_sq*V)/2 + S^2/(2V(1 + sigma0_sq*V)),
// zero when V == 0.
double gaussian_regret_exact(double S, double V, double sigma0_sq);

// Gaussian-prior regret bound on the capped-wealth event, valid for V > v0:
//   (1/2 + 1/(2*sigma0_sq*v0)) * ln(1 + sigma0_sq*V) + ln(1/alpha)/(sigma0_sq*v0).
// Throws BelowThreshold when V <= v0.
double gaussian_conditional_bound(double V, double v0, double sigma0_sq, double alpha);

// Pathwise (every path, every t with V > 0) regret bound for the heavy-tailed
// prior.  rho in (0, 1/4) shapes only the boundary branch.
BoundReport pathwise_bound(double S, double V, double c, double rho);

// Variance level past which, on the capped-wealth event of level alpha, the
// hindsight optimum must sit inside [-1, 1].
struct VilleThreshold {
  double alpha{0.0};
  double rho{0.0};
  double value{0.0};  // V_alpha
};

VilleThreshold v_alpha(double alpha, double rho, double c);

// Boundary-branch regret bound on the capped-wealth event (V may be anywhere
// below or above the threshold; the bound decays like 1/V).
double third_branch_conditional(double V, const VilleThreshold& thr, double c);

struct ConditionalReport {
  BranchId branch{BranchId::B1_interior};
  double value{0.0};      // branch-wise bound on the capped-wealth event
  double generic_C{0.0};  // constant of the single-formula envelope (informational)
  double generic_value{0.0};
};

ConditionalReport conditional_bound(double S, double V, double alpha, double c, double rho);

// Interior-optimum lemma: for |eta*| <= 1 and a window half-width r in (0,1)
// holding prior mass `mass`, the regret is at most V*r^2/2 - ln(mass).
double lemma_interior_bound(double V, double r, double mass);

// Explicit lower bound on the prior mass of the window of half-width r around
// the hindsight optimum (clipped into the support).
double lemma_window_mass(double eta_star, double r, double c);

// Boundary-optimum lemma (|S|/V > 1, rho in (0,1)); throws WrongRegime in the
// interior.
double lemma_boundary_bound(double S, double V, double rho, double c);

// Branch-wise lower bounds on ln Z itself (the flip side of the regret
// bounds); on the boundary branch also the linear-in-V floor.
struct WealthFloor {
  BranchId branch{BranchId::B1_interior};
  double ln_z_floor{0.0};
  std::optional<double> boundary_linear_floor;
};

WealthFloor eventual_bounds(double S, double V, double c, double rho);

// Time-uniform confidence radius around the running sample mean:
//   sqrt(2*V*(B + ln(1/alpha))) / t.
double cs_radius(std::int64_t t, double V, double B, double alpha);

struct LilStats {
  double slln_stat{0.0};                 // |S|/V (0 when V == 0)
  std::optional<double> lil_stat;        // |S|/sqrt(2 V ln ln V), needs V > e
};

LilStats lil_statistics(double S, double V);

}  // namespace mixreg
