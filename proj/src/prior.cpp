#include "mixreg/prior.hpp"

#include <cmath>
#include <string>

namespace mixreg {

RobbinsPrior::RobbinsPrior(double c) : c_(c) {
  if (!(c >= kMinRobbinsC)) {
    throw ConfigError("RobbinsPrior: c must be >= 6.6e, got " + std::to_string(c));
  }
  ln_c_ = std::log(c_);
  ln_ln_c_ = std::log(ln_c_);
  Z0_ = 2.0 / ln_ln_c_;
  u_max_ = 1.0 / ln_ln_c_;
}

double RobbinsPrior::density(double eta) const {
  if (eta == 0.0) {
    throw UndefinedAtZero("RobbinsPrior::density at eta = 0");
  }
  const double a = std::fabs(eta);
  if (a > 1.0) {
    return 0.0;
  }
  const double L = ln_c_ - std::log(a);   // ln(c/|eta|) >= ln c > e
  const double LL = std::log(L);
  return 1.0 / (Z0_ * a * L * LL * LL);
}

double RobbinsPrior::cumulative(double x) const {
  if (x == 0.0) {
    return 0.0;
  }
  return 1.0 / std::log(ln_c_ - std::log(x));
}

double RobbinsPrior::interval_mass(double a, double b) const {
  if (!(a >= -1.0 && b <= 1.0 && a <= b)) {
    throw OutOfRange("interval_mass: need -1 <= a <= b <= 1");
  }
  double one_sided;
  if (a >= 0.0) {
    one_sided = cumulative(b) - cumulative(a);
  } else if (b <= 0.0) {
    one_sided = cumulative(-a) - cumulative(-b);
  } else {
    one_sided = cumulative(-a) + cumulative(b);
  }
  return one_sided / Z0_;
}

double RobbinsPrior::to_uniform(double u) const {
  if (!(u > 0.0 && u <= u_max_)) {
    throw OutOfRange("to_uniform: u outside (0, 1/ln ln c]");
  }
  return c_ * std::exp(-std::exp(1.0 / u));
}

double RobbinsPrior::from_eta(double eta) const {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw OutOfRange("from_eta: eta outside (0, 1]");
  }
  return cumulative(eta);
}

}  // namespace mixreg
