#pragma once

#include "mixreg/core.hpp"

namespace mixreg {

// Heavy-tailed symmetric mixing density on [-1, 1] \ {0}:
//
//   pi(eta) = (1/Z0) / ( |eta| * ln(c/|eta|) * (ln ln(c/|eta|))^2 ),   Z0 = 2 / ln ln c.
//
// The unnormalized one-sided density has the exact antiderivative
//   d/d eta [ 1 / ln ln(c/eta) ] = 1 / ( eta * ln(c/eta) * (ln ln(c/eta))^2 ),
// so interval masses are closed-form and the coordinate u(eta) = 1/ln ln(c/eta)
// pushes the one-sided measure forward to Lebesgue measure on (0, 1/ln ln c].
// That coordinate is what the wealth quadrature integrates in.
class RobbinsPrior {
 public:
  explicit RobbinsPrior(double c = kDefaultRobbinsC);

  double c() const { return c_; }
  double normalizer() const { return Z0_; }   // Z0 = 2 / ln ln c
  double u_max() const { return u_max_; }     // 1 / ln ln c, one side's total u-mass

  // Normalized density.  Zero for |eta| > 1, throws UndefinedAtZero at eta == 0.
  double density(double eta) const;

  // Exact mass of [a, b] under the normalized density.
  // Pre: -1 <= a <= b <= 1 (OutOfRange otherwise).
  double interval_mass(double a, double b) const;

  // u -> eta = c * exp(-exp(1/u)) for u in (0, u_max]; OutOfRange outside.
  // For u below ~0.152 the result underflows to exactly 0.0 in double
  // precision (true eta < 1e-300); callers treat such nodes as eta = 0.
  double to_uniform(double u) const;

  // eta -> u = 1 / ln ln(c/eta) for eta in (0, 1]; OutOfRange outside.
  double from_eta(double eta) const;

 private:
  // One-sided cumulative u(x) = unnormalized mass of (0, x], x in [0, 1].
  double cumulative(double x) const;

  double c_;
  double ln_c_;
  double ln_ln_c_;
  double Z0_;
  double u_max_;
};

}  // namespace mixreg
