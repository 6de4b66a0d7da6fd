#include "mixreg/core.hpp"

#include <cmath>

namespace mixreg {

PathState append_increment(PathState s, double dS, double dV) {
  if (std::isnan(dS) || std::isnan(dV)) {
    throw OutOfRange("append_increment: NaN increment");
  }
  if (dV < 0.0) {
    throw NegativeVarianceIncrement("append_increment: dV = " + std::to_string(dV));
  }
  const double V_next = s.V + dV;
  const double S_next = s.S + dS;
  if (V_next == 0.0 && S_next != 0.0) {
    throw BrokenZeroConvention("append_increment: S != 0 while V == 0");
  }
  s.t += 1;
  s.S = S_next;
  s.V = V_next;
  if (s.keep_history) {
    s.history.emplace_back(dS, dV);
  }
  return s;
}

HindsightOptimum hindsight_optimum(double S, double V) {
  if (V < 0.0) {
    throw NegativeVarianceIncrement("hindsight_optimum: V < 0");
  }
  if (V == 0.0) {
    if (S != 0.0) {
      throw BrokenZeroConvention("hindsight_optimum: S != 0 while V == 0");
    }
    return {0.0, 0.0};
  }
  const double eta = S / V;
  return {eta, 0.5 * S * eta};
}

HindsightOptimum hindsight_optimum(const PathState& s) {
  return hindsight_optimum(s.S, s.V);
}

void validate(const PriorSpec& prior) {
  if (const auto* r = std::get_if<RobbinsSpec>(&prior)) {
    if (!(r->c >= kMinRobbinsC)) {
      throw ConfigError("prior: c must be >= 6.6e, got " + std::to_string(r->c));
    }
  } else {
    const auto& g = std::get<GaussianSpec>(prior);
    if (!(g.sigma0_sq > 0.0)) {
      throw ConfigError("prior: sigma0_sq must be positive");
    }
  }
}

WealthRecord make_wealth_record(std::int64_t t, double S, double V, double ln_Z) {
  WealthRecord rec;
  rec.t = t;
  rec.optimum = hindsight_optimum(S, V);
  rec.ln_Z = (V == 0.0) ? 0.0 : ln_Z;
  rec.regret = rec.optimum.L_star - rec.ln_Z;
  return rec;
}

}  // namespace mixreg
