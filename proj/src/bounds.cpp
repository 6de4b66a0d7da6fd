#include "mixreg/bounds.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mixreg {

namespace {

void check_c(double c) {
  if (!(c >= kMinRobbinsC)) {
    throw ConfigError("bounds: c must be >= 6.6e, got " + std::to_string(c));
  }
}

void check_rho_quarter(double rho) {
  if (!(rho > 0.0 && rho < 0.25)) {
    throw InvalidRho("bounds: rho must lie in (0, 1/4)");
  }
}

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw OutOfRange("bounds: alpha must lie in (0, 1)");
  }
}

void check_positive_V(double V) {
  if (!(V > 0.0)) {
    throw OutOfRange("bounds: V must be positive");
  }
}

// Iterated logs with hard domain checks; with c >= 6.6e every argument below
// stays in range, so a throw here means a caller bug, not data.
double ll(double x) {
  const double l = std::log(x);
  if (!(l > 0.0)) throw OutOfRange("ll: argument must exceed 1");
  return std::log(l);
}

double lll(double x) {
  const double v = ll(x);
  if (!(v > 0.0)) throw OutOfRange("lll: argument must exceed e");
  return std::log(v);
}

double sq(double x) { return x * x; }

// ln of the boundary mass term rho * ln ln c / (ln(c/(1-rho)) * (ln ln(c/(1-rho)))^2).
double log_boundary_mass(double rho, double c) {
  const double arg = c / (1.0 - rho);
  return std::log(rho) + std::log(ll(c)) - std::log(std::log(arg)) - 2.0 * std::log(ll(arg));
}

}  // namespace

BranchId classify_branch(double S, double V) {
  check_positive_V(V);
  const double r = std::fabs(S) / V;
  if (r <= 1.0 / std::sqrt(1.0 + V)) return BranchId::B1_interior;
  if (r <= 1.0) return BranchId::B2_lil;
  return BranchId::B3_boundary;
}

double gaussian_regret_exact(double S, double V, double sigma0_sq) {
  if (!(sigma0_sq > 0.0)) {
    throw ConfigError("gaussian_regret_exact: sigma0_sq must be positive");
  }
  if (V < 0.0) throw OutOfRange("gaussian_regret_exact: V < 0");
  if (V == 0.0) {
    if (S != 0.0) throw BrokenZeroConvention("gaussian_regret_exact: S != 0 at V == 0");
    return 0.0;
  }
  const double q = sigma0_sq * V;
  return 0.5 * std::log1p(q) + S * S / (2.0 * V * (1.0 + q));
}

double gaussian_conditional_bound(double V, double v0, double sigma0_sq, double alpha) {
  if (!(v0 > 0.0)) throw OutOfRange("gaussian_conditional_bound: v0 must be positive");
  if (!(sigma0_sq > 0.0)) {
    throw ConfigError("gaussian_conditional_bound: sigma0_sq must be positive");
  }
  check_alpha(alpha);
  if (!(V > v0)) {
    throw BelowThreshold("gaussian_conditional_bound: V <= v0");
  }
  const double k = sigma0_sq * v0;
  return (0.5 + 0.5 / k) * std::log1p(sigma0_sq * V) + std::log(1.0 / alpha) / k;
}

BoundReport pathwise_bound(double S, double V, double c, double rho) {
  check_c(c);
  check_rho_quarter(rho);
  check_positive_V(V);
  BoundReport rep;
  rep.branch = classify_branch(S, V);
  rep.rho = rho;
  const double r = std::fabs(S) / V;
  if (rep.branch == BranchId::B3_boundary) {
    rep.value = 0.5 * V * sq(r - 1.0 + rho) - log_boundary_mass(rho, c);
    return rep;
  }
  const double root = c * std::sqrt(1.0 + V);
  double b = 0.5 + std::log(2.0 / ll(c)) + ll(root) + 2.0 * lll(root);
  if (rep.branch == BranchId::B2_lil) {
    // r * sqrt(1+V) = |S|/sqrt(V) * sqrt(1 + 1/V), in (1, sqrt(1+V)] here.
    b += std::log(r * std::sqrt(1.0 + V));
  }
  rep.value = b;
  return rep;
}

VilleThreshold v_alpha(double alpha, double rho, double c) {
  check_c(c);
  check_rho_quarter(rho);
  check_alpha(alpha);
  const double arg = c / (1.0 - rho);
  VilleThreshold thr;
  thr.alpha = alpha;
  thr.rho = rho;
  thr.value = 2.0 / (1.0 - rho * rho) *
              (std::log(1.0 / alpha) - std::log(0.5 * rho * ll(c)) + ll(arg) + 2.0 * lll(arg));
  return thr;
}

double third_branch_conditional(double V, const VilleThreshold& thr, double c) {
  check_c(c);
  check_rho_quarter(thr.rho);
  check_positive_V(V);
  const double va = thr.value;
  const double rho = thr.rho;
  return sq(1.0 + rho) * va * va / (8.0 * V) + 0.5 * rho * va * (1.0 + 2.0 * rho) -
         log_boundary_mass(rho, c);
}

ConditionalReport conditional_bound(double S, double V, double alpha, double c, double rho) {
  check_c(c);
  check_rho_quarter(rho);
  check_alpha(alpha);
  check_positive_V(V);
  ConditionalReport rep;
  rep.branch = classify_branch(S, V);
  const double la = std::log(1.0 / alpha);
  const double root = c * std::sqrt(1.0 + V);
  switch (rep.branch) {
    case BranchId::B1_interior:
      rep.value = 0.5 + std::log(2.0 / ll(c)) + ll(root) + 2.0 * lll(root);
      break;
    case BranchId::B2_lil:
      rep.value = la + 2.0 * (0.5 + std::log(2.0 / ll(c))) + 2.0 * ll(root) + 0.5 +
                  4.0 * lll(root);
      break;
    case BranchId::B3_boundary:
      rep.value = third_branch_conditional(V, v_alpha(alpha, rho, c), c);
      break;
  }
  const double arg = c / (1.0 - rho);
  const double inner =
      std::log(rho * ll(c)) - ll(arg) - 2.0 * lll(arg) - std::numbers::ln2;
  const double c3 = 3.0 / sq(1.0 - rho) * sq(std::max(1.0, inner));
  rep.generic_C = std::max({4.0, 7.0, c3});
  rep.generic_value = rep.generic_C * (1.0 + (1.0 + sq(la)) / V + la + ll(root));
  return rep;
}

double lemma_interior_bound(double V, double r, double mass) {
  if (!(r > 0.0 && r < 1.0)) throw OutOfRange("lemma_interior_bound: r outside (0,1)");
  if (!(mass > 0.0 && mass <= 1.0)) {
    throw OutOfRange("lemma_interior_bound: mass outside (0,1]");
  }
  if (V < 0.0) throw OutOfRange("lemma_interior_bound: V < 0");
  return 0.5 * V * r * r - std::log(mass);
}

double lemma_window_mass(double eta_star, double r, double c) {
  check_c(c);
  if (!(r > 0.0 && r < 1.0)) throw OutOfRange("lemma_window_mass: r outside (0,1)");
  const double a = std::fabs(eta_star);
  const double L = std::log(c / r);
  const double LL = std::log(L);
  const double base = ll(c) / (2.0 * L * LL * LL);
  return (a <= r) ? base : base * r / a;
}

double lemma_boundary_bound(double S, double V, double rho, double c) {
  check_c(c);
  if (!(rho > 0.0 && rho < 1.0)) throw InvalidRho("lemma_boundary_bound: rho outside (0,1)");
  check_positive_V(V);
  const double r = std::fabs(S) / V;
  if (!(r > 1.0)) {
    throw WrongRegime("lemma_boundary_bound: requires |S|/V > 1");
  }
  return 0.5 * V * sq(r - 1.0 + rho) - log_boundary_mass(rho, c);
}

WealthFloor eventual_bounds(double S, double V, double c, double rho) {
  check_c(c);
  check_rho_quarter(rho);
  check_positive_V(V);
  WealthFloor out;
  out.branch = classify_branch(S, V);
  const double a = std::fabs(S);
  const double root = c * std::sqrt(1.0 + V);
  switch (out.branch) {
    case BranchId::B1_interior:
      out.ln_z_floor = 0.5 * S * S / V -
                       (0.5 + std::log(2.0 / ll(c)) + ll(root) + 2.0 * lll(root));
      break;
    case BranchId::B2_lil:
      out.ln_z_floor = 0.5 * sq(a / std::sqrt(V) - std::sqrt(1.0 + 1.0 / V)) -
                       std::log(2.0 / ll(c)) - 0.5 / V - ll(root) - 2.0 * lll(root);
      break;
    case BranchId::B3_boundary: {
      const double lm = log_boundary_mass(rho, c);
      out.ln_z_floor = 0.5 * S * S / V - 0.5 * V * sq(a / V - 1.0 + rho) + lm;
      out.boundary_linear_floor = 0.5 * V * (1.0 - rho * rho) + lm;
      break;
    }
  }
  return out;
}

double cs_radius(std::int64_t t, double V, double B, double alpha) {
  if (t < 1) throw OutOfRange("cs_radius: t must be >= 1");
  if (V < 0.0) throw OutOfRange("cs_radius: V < 0");
  check_alpha(alpha);
  const double radicand = 2.0 * V * (B + std::log(1.0 / alpha));
  if (radicand < 0.0) {
    throw NegativeRadicand("cs_radius: B + ln(1/alpha) < 0");
  }
  return std::sqrt(radicand) / static_cast<double>(t);
}

LilStats lil_statistics(double S, double V) {
  if (V < 0.0) throw OutOfRange("lil_statistics: V < 0");
  LilStats out;
  if (V == 0.0) {
    if (S != 0.0) throw BrokenZeroConvention("lil_statistics: S != 0 at V == 0");
    return out;
  }
  out.slln_stat = std::fabs(S) / V;
  if (V > std::numbers::e) {
    out.lil_stat = std::fabs(S) / std::sqrt(2.0 * V * ll(V));
  }
  return out;
}

}  // namespace mixreg
