#pragma once

#include <cstdint>
#include <numbers>
#include <utility>
#include <variant>
#include <vector>

#include "mixreg/errors.hpp"

namespace mixreg {

// Default absolute tolerance for bound comparisons.
inline constexpr double kDefaultTolerance = 1e-9;

// Smallest admissible c for the heavy-tailed prior: at c = 6.6e the iterated
// logarithms ln ln c and ln ln ln c are both positive, which every bound
// formula below relies on.  Checked at runtime, never clamped.
inline constexpr double kMinRobbinsC = 6.6 * std::numbers::e;
inline constexpr double kDefaultRobbinsC = kMinRobbinsC;

// Accumulated betting state.  S is the running score sum, V the running
// variance sum; V never decreases.  Convention enforced throughout: while
// V == 0 the process has not started, so S must be exactly 0, the wealth is 1
// (ln wealth 0) and the regret is 0.  This is the one place that convention
// lives; downstream modules call through here instead of re-deciding it.
struct PathState {
  std::int64_t t{0};
  double S{0.0};
  double V{0.0};
  // When true, every (dS, dV) increment is retained (diagnostics, replay
  // dumps).  Summary mode keeps O(1) state and is the default.
  bool keep_history{false};
  std::vector<std::pair<double, double>> history;
};

// Value semantics: returns the advanced state, input is not modified.
// Throws NegativeVarianceIncrement for dV < 0, BrokenZeroConvention if the
// step would leave V at 0 with a nonzero score.
PathState append_increment(PathState s, double dS, double dV);

inline bool zero_variance(const PathState& s) { return s.V == 0.0; }

struct HindsightOptimum {
  double eta_star{0.0};  // S / V
  double L_star{0.0};    // S^2 / (2 V)
};

// Best fixed bet in hindsight and its log payoff, with 0/0 := 0.
// Pre: V >= 0, and S == 0 whenever V == 0.
HindsightOptimum hindsight_optimum(double S, double V);
HindsightOptimum hindsight_optimum(const PathState& s);

// Mixing priors over the bet eta.
struct RobbinsSpec {
  double c{kDefaultRobbinsC};
};

struct GaussianSpec {
  double sigma0_sq{1.0};  // prior variance
};

using PriorSpec = std::variant<RobbinsSpec, GaussianSpec>;

// Throws ConfigError on c < 6.6e or sigma0_sq <= 0.
void validate(const PriorSpec& prior);

// One evaluated point of a wealth path.
struct WealthRecord {
  std::int64_t t{0};
  double ln_Z{0.0};
  HindsightOptimum optimum;
  double regret{0.0};  // L_star - ln_Z
};

WealthRecord make_wealth_record(std::int64_t t, double S, double V, double ln_Z);

}  // namespace mixreg
