#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mixreg/core.hpp"

namespace mixreg {

// Identifies one reproducible random stream.  Equal pairs give byte-identical
// sequences on a given build regardless of thread schedule; distinct pairs
// give streams that behave independently.
struct RngStream {
  std::uint64_t seed{0};
  std::uint64_t stream_id{0};
};

// xoshiro256++ seeded through splitmix64 from (seed, stream_id).  All
// distribution draws are hand-rolled from the uniform bits so sequences do
// not depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(RngStream stream);

  std::uint64_t next_u64();
  double uniform01();  // open interval (0, 1)
  double gaussian();   // standard normal (Box-Muller, pairs cached)
  double cauchy();     // standard Cauchy
  double exponential();

 private:
  std::uint64_t s_[4];
  double spare_{0.0};
  bool has_spare_{false};
};

// --- data models ------------------------------------------------------------
//
// Each model emits per-round increments (X, dS, dV) for the betting process:
// dS is the recentred score increment, dV the variance budget charged for it.

// X ~ N(mu + drift, sigma^2); dS = X - mu, dV = sigma^2.  drift = 0 is the
// null; nonzero drift makes the recentring wrong on purpose.
struct GaussianIID {
  double mu{0.0};
  double sigma{1.0};
  double drift{0.0};
};

enum class SubGaussianShape {
  Bounded,           // mu + drift + sigma_proxy * Uniform[-1, 1]
  TruncatedNormal,   // mu + drift + sigma_proxy * (N(0,1) conditioned on [-3, 3])
};

// Centered sub-Gaussian noise with known variance proxy; dV = sigma_proxy^2.
struct SubGaussianIID {
  double mu{0.0};
  double sigma_proxy{1.0};
  SubGaussianShape shape{SubGaussianShape::Bounded};
  double drift{0.0};
};

enum class SymmetricDist {
  RademacherScale,   // +/- scale
  Cauchy,            // scale * standard Cauchy (no mean!)
  GaussMixtureAtom,  // 0 with prob 1/2, else scale * N(0,1)
};

// Symmetric-around-zero data, variance charged per observation: dS = X,
// dV = X^2.  Works without any moment assumptions.
struct SymmetricIID {
  SymmetricDist dist{SymmetricDist::Cauchy};
  double scale{1.0};
};

enum class FiniteVarianceDist {
  CenteredTwoPoint,          // a w.p. p, -a*p/(1-p) otherwise
  CenteredExponentialShift,  // Exp(1) - 1
};

// Mean-zero data with known second moment m2; dS = X, dV = (X^2 + 2*m2)/3.
struct FiniteVarianceIID {
  FiniteVarianceDist dist{FiniteVarianceDist::CenteredExponentialShift};
  double a{2.0};
  double p{0.2};

  double second_moment() const;
};

// Deterministic stress sequences; `generator` is one of
//   drift      params: [dS per step]                    (default 0.5)
//   spike      params: [magnitude, step]                (default 1e6, 5)
//   signflip   params: [block length]                   (default 10)
//   geometric  params: [ratio]                          (default 1.05)
//   pinned     params: [ratio |S|/V to hold]            (default 1.5)
//   plateau    params: [active steps, flat steps]       (default 5, 5)
struct Adversarial {
  std::string generator{"drift"};
  std::vector<double> params;
};

// Increments read from a text file: one "dS dV" pair per line.
struct Replay {
  std::string path;
  std::shared_ptr<const std::vector<std::pair<double, double>>> data;
};

using IidModel = std::variant<GaussianIID, SubGaussianIID, SymmetricIID, FiniteVarianceIID>;

// Concatenated segments (model, length), cycled when the path runs longer.
struct Schedule {
  std::vector<std::pair<IidModel, std::int64_t>> segments;
};

using DataModel =
    std::variant<GaussianIID, SubGaussianIID, SymmetricIID, FiniteVarianceIID, Adversarial,
                 Replay, Schedule>;

struct Increment {
  double X{0.0};
  double dS{0.0};
  double dV{0.0};
};

// Parameter sanity (ConfigError / UnknownGenerator on bad values).
void validate(const DataModel& model);

// True mean of dS, when it exists (nullopt for Cauchy, adversarial, replay,
// mixed schedules).  This is what a confidence sequence for the running mean
// is checked against.
std::optional<double> mean_dS(const DataModel& model);

// Draw the increment for round t (1-based).  Deterministic models ignore rng.
// Replay models must have data loaded (see prepare_replay); reading past the
// end throws OutOfRange.
Increment next_increment(const DataModel& model, Rng& rng, std::int64_t t);

// Loads a replay file into the model (no-op for other variants / already
// loaded).  ParseError carries the offending 1-based line number.
DataModel prepare_replay(DataModel model);
std::vector<std::pair<double, double>> load_replay(const std::string& path);

// First T increments of a deterministic generator.
std::vector<std::pair<double, double>> adversarial_sequence(const Adversarial& a,
                                                            std::int64_t T);

// Stateful per-path generator: owns the rng and the round counter.
class PathGenerator {
 public:
  PathGenerator(DataModel model, RngStream stream);

  Increment next();
  std::int64_t t() const { return t_; }
  const DataModel& model() const { return model_; }

 private:
  DataModel model_;
  Rng rng_;
  std::int64_t t_{0};
};

// CLI/config model syntax, e.g. "gaussian:mu=0,sigma=1,drift=0.5",
// "symmetric:cauchy", "finitevar:twopoint,a=2,p=0.2", "adversarial:spike,1e6,5",
// "replay:increments.txt".  Throws ConfigError on anything it cannot parse.
DataModel parse_model(const std::string& text);
std::string describe_model(const DataModel& model);

}  // namespace mixreg
