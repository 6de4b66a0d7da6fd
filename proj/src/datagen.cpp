#include "mixreg/datagen.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace mixreg {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(RngStream stream) {
  std::uint64_t st = stream.seed ^ (0x632be59bd9b4e019ULL * (stream.stream_id + 1));
  s_[0] = splitmix64(st);
  s_[1] = splitmix64(st);
  s_[2] = splitmix64(st);
  s_[3] = splitmix64(st);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  // 53 uniform bits, shifted into the open interval.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double Rng::cauchy() {
  return std::tan(std::numbers::pi * (uniform01() - 0.5));
}

double Rng::exponential() {
  return -std::log(uniform01());
}

double FiniteVarianceIID::second_moment() const {
  switch (dist) {
    case FiniteVarianceDist::CenteredTwoPoint:
      return a * a * p / (1.0 - p);
    case FiniteVarianceDist::CenteredExponentialShift:
      return 1.0;
  }
  throw ConfigError("FiniteVarianceIID: unknown dist");
}

namespace {

void validate_iid(const IidModel& m) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          if (!(v.sigma > 0.0)) throw ConfigError("gaussian: sigma must be positive");
        } else if constexpr (std::is_same_v<T, SubGaussianIID>) {
          if (!(v.sigma_proxy > 0.0)) throw ConfigError("subgaussian: proxy must be positive");
        } else if constexpr (std::is_same_v<T, SymmetricIID>) {
          if (!(v.scale > 0.0)) throw ConfigError("symmetric: scale must be positive");
        } else if constexpr (std::is_same_v<T, FiniteVarianceIID>) {
          if (v.dist == FiniteVarianceDist::CenteredTwoPoint &&
              !(v.a > 0.0 && v.p > 0.0 && v.p < 1.0)) {
            throw ConfigError("finitevar: need a > 0 and p in (0,1)");
          }
        }
      },
      m);
}

const char* kGenerators[] = {"drift", "spike", "signflip", "geometric", "pinned", "plateau"};

bool known_generator(const std::string& g) {
  for (const char* k : kGenerators) {
    if (g == k) return true;
  }
  return false;
}

double param(const std::vector<double>& p, std::size_t i, double fallback) {
  return i < p.size() ? p[i] : fallback;
}

Increment adversarial_increment(const Adversarial& a, std::int64_t t) {
  Increment inc;
  if (a.generator == "drift") {
    inc.dS = param(a.params, 0, 0.5);
    inc.dV = 1.0;
  } else if (a.generator == "spike") {
    const double mag = param(a.params, 0, 1e6);
    const auto at = static_cast<std::int64_t>(param(a.params, 1, 5));
    inc.dS = (t == at) ? mag : 0.0;
    inc.dV = 1.0;
  } else if (a.generator == "signflip") {
    const auto block = static_cast<std::int64_t>(param(a.params, 0, 10));
    inc.dS = (((t - 1) / std::max<std::int64_t>(1, block)) % 2 == 0) ? 1.0 : -1.0;
    inc.dV = 1.0;
  } else if (a.generator == "geometric") {
    const double g = param(a.params, 0, 1.05);
    inc.dV = std::pow(g, static_cast<double>(t));
    inc.dS = ((t % 2 == 0) ? 1.0 : -1.0) * std::sqrt(inc.dV);
  } else if (a.generator == "pinned") {
    // Holds |S|/V at the given ratio: every step dS = ratio, dV = 1.
    inc.dS = param(a.params, 0, 1.5);
    inc.dV = 1.0;
  } else if (a.generator == "plateau") {
    const auto active = static_cast<std::int64_t>(param(a.params, 0, 5));
    const auto flat = static_cast<std::int64_t>(param(a.params, 1, 5));
    const std::int64_t cycle = std::max<std::int64_t>(1, active + flat);
    const std::int64_t pos = (t - 1) % cycle;
    if (pos < active) {
      inc.dS = (pos % 2 == 0) ? 1.0 : -1.0;
      inc.dV = 1.0;
    }
  } else {
    throw UnknownGenerator("adversarial: unknown generator '" + a.generator + "'");
  }
  inc.X = inc.dS;
  return inc;
}

Increment iid_increment(const IidModel& m, Rng& rng) {
  Increment inc;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          inc.X = v.mu + v.drift + v.sigma * rng.gaussian();
          inc.dS = inc.X - v.mu;
          inc.dV = v.sigma * v.sigma;
        } else if constexpr (std::is_same_v<T, SubGaussianIID>) {
          double z;
          if (v.shape == SubGaussianShape::Bounded) {
            z = 2.0 * rng.uniform01() - 1.0;
          } else {
            do {
              z = rng.gaussian();
            } while (std::fabs(z) > 3.0);
          }
          inc.X = v.mu + v.drift + v.sigma_proxy * z;
          inc.dS = inc.X - v.mu;
          inc.dV = v.sigma_proxy * v.sigma_proxy;
        } else if constexpr (std::is_same_v<T, SymmetricIID>) {
          switch (v.dist) {
            case SymmetricDist::RademacherScale:
              inc.X = (rng.uniform01() < 0.5) ? -v.scale : v.scale;
              break;
            case SymmetricDist::Cauchy:
              inc.X = v.scale * rng.cauchy();
              break;
            case SymmetricDist::GaussMixtureAtom:
              inc.X = (rng.uniform01() < 0.5) ? 0.0 : v.scale * rng.gaussian();
              break;
          }
          inc.dS = inc.X;
          inc.dV = inc.X * inc.X;
        } else if constexpr (std::is_same_v<T, FiniteVarianceIID>) {
          if (v.dist == FiniteVarianceDist::CenteredTwoPoint) {
            inc.X = (rng.uniform01() < v.p) ? v.a : -v.a * v.p / (1.0 - v.p);
          } else {
            inc.X = rng.exponential() - 1.0;
          }
          inc.dS = inc.X;
          inc.dV = (inc.X * inc.X + 2.0 * v.second_moment()) / 3.0;
        }
      },
      m);
  return inc;
}

const IidModel& schedule_segment(const Schedule& s, std::int64_t t) {
  std::int64_t total = 0;
  for (const auto& seg : s.segments) total += seg.second;
  std::int64_t pos = (t - 1) % total;
  for (const auto& seg : s.segments) {
    if (pos < seg.second) return seg.first;
    pos -= seg.second;
  }
  return s.segments.back().first;
}

}  // namespace

void validate(const DataModel& model) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Adversarial>) {
          if (!known_generator(v.generator)) {
            throw UnknownGenerator("adversarial: unknown generator '" + v.generator + "'");
          }
        } else if constexpr (std::is_same_v<T, Replay>) {
          if (v.path.empty() && !v.data) throw ConfigError("replay: no path given");
        } else if constexpr (std::is_same_v<T, Schedule>) {
          if (v.segments.empty()) throw ConfigError("schedule: needs at least one segment");
          for (const auto& seg : v.segments) {
            if (seg.second <= 0) throw ConfigError("schedule: segment length must be positive");
            validate_iid(seg.first);
          }
        } else {
          validate_iid(IidModel{v});
        }
      },
      model);
}

std::optional<double> mean_dS(const DataModel& model) {
  if (const auto* g = std::get_if<GaussianIID>(&model)) return g->drift;
  if (const auto* s = std::get_if<SubGaussianIID>(&model)) return s->drift;
  if (const auto* s = std::get_if<SymmetricIID>(&model)) {
    if (s->dist == SymmetricDist::Cauchy) return std::nullopt;
    return 0.0;
  }
  if (std::holds_alternative<FiniteVarianceIID>(model)) return 0.0;
  if (const auto* sch = std::get_if<Schedule>(&model)) {
    std::optional<double> common;
    for (const auto& seg : sch->segments) {
      const auto mi =
          mean_dS(std::visit([](const auto& v) { return DataModel{v}; }, seg.first));
      if (!mi || (common && *common != *mi)) return std::nullopt;
      common = mi;
    }
    return common;
  }
  return std::nullopt;
}

Increment next_increment(const DataModel& model, Rng& rng, std::int64_t t) {
  if (const auto* a = std::get_if<Adversarial>(&model)) {
    return adversarial_increment(*a, t);
  }
  if (const auto* r = std::get_if<Replay>(&model)) {
    if (!r->data) throw ConfigError("replay: data not loaded (call prepare_replay)");
    if (t < 1 || t > static_cast<std::int64_t>(r->data->size())) {
      throw OutOfRange("replay: step index past end of file");
    }
    const auto& [dS, dV] = (*r->data)[static_cast<std::size_t>(t - 1)];
    return {dS, dS, dV};
  }
  if (const auto* s = std::get_if<Schedule>(&model)) {
    return iid_increment(schedule_segment(*s, t), rng);
  }
  return std::visit(
      [&](const auto& v) -> Increment {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianIID> || std::is_same_v<T, SubGaussianIID> ||
                      std::is_same_v<T, SymmetricIID> || std::is_same_v<T, FiniteVarianceIID>) {
          return iid_increment(IidModel{v}, rng);
        } else {
          throw ConfigError("next_increment: unhandled model");
        }
      },
      model);
}

std::vector<std::pair<double, double>> load_replay(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("replay: cannot open '" + path + "'");
  std::vector<std::pair<double, double>> out;
  std::string line;
  std::size_t lineno = 0;
  double S = 0.0, V = 0.0;
  while (std::getline(in, line)) {
    ++lineno;
    // Commas are treated as whitespace so "dS, dV" files load too.
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream ls(line);
    double dS, dV;
    if (!(ls >> dS)) {
      std::string probe;
      std::istringstream(line) >> probe;
      if (probe.empty()) continue;  // blank line
      throw ParseError("replay line " + std::to_string(lineno) + ": expected two numbers");
    }
    if (!(ls >> dV)) {
      throw ParseError("replay line " + std::to_string(lineno) + ": missing dV");
    }
    std::string extra;
    if (ls >> extra) {
      throw ParseError("replay line " + std::to_string(lineno) + ": trailing content");
    }
    if (!std::isfinite(dS) || !std::isfinite(dV)) {
      throw ParseError("replay line " + std::to_string(lineno) + ": non-finite value");
    }
    if (dV < 0.0) {
      throw ParseError("replay line " + std::to_string(lineno) +
                       ": negative variance increment");
    }
    S += dS;
    V += dV;
    if (V == 0.0 && S != 0.0) {
      throw ParseError("replay line " + std::to_string(lineno) +
                       ": score nonzero while variance is still zero");
    }
    out.emplace_back(dS, dV);
  }
  return out;
}

DataModel prepare_replay(DataModel model) {
  if (auto* r = std::get_if<Replay>(&model)) {
    if (!r->data) {
      r->data = std::make_shared<const std::vector<std::pair<double, double>>>(
          load_replay(r->path));
    }
  }
  return model;
}

std::vector<std::pair<double, double>> adversarial_sequence(const Adversarial& a,
                                                            std::int64_t T) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(T));
  for (std::int64_t t = 1; t <= T; ++t) {
    const Increment inc = adversarial_increment(a, t);
    out.emplace_back(inc.dS, inc.dV);
  }
  return out;
}

PathGenerator::PathGenerator(DataModel model, RngStream stream)
    : model_(prepare_replay(std::move(model))), rng_(stream) {
  validate(model_);
}

Increment PathGenerator::next() {
  ++t_;
  return next_increment(model_, rng_, t_);
}

namespace {

// "name:k=v,k=v" / "name:variant,k=v" splitting for parse_model.
std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("model: bad numeric value for " + what + ": '" + s + "'");
  }
}

void apply_kv(const std::string& item, const std::string& model,
              const std::vector<std::pair<std::string, double*>>& slots) {
  const std::size_t eq = item.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("model " + model + ": expected key=value, got '" + item + "'");
  }
  const std::string key = item.substr(0, eq);
  for (const auto& [name, target] : slots) {
    if (key == name) {
      *target = parse_num(item.substr(eq + 1), key);
      return;
    }
  }
  throw ConfigError("model " + model + ": unknown parameter '" + key + "'");
}

}  // namespace

DataModel parse_model(const std::string& text) {
  const std::size_t colon = text.find(':');
  const std::string name = text.substr(0, colon);
  const std::string rest = (colon == std::string::npos) ? "" : text.substr(colon + 1);
  std::vector<std::string> items = rest.empty() ? std::vector<std::string>{} : split(rest, ',');

  DataModel model;
  if (name == "gaussian") {
    GaussianIID m;
    for (const auto& it : items) {
      apply_kv(it, name, {{"mu", &m.mu}, {"sigma", &m.sigma}, {"drift", &m.drift}});
    }
    model = m;
  } else if (name == "subgaussian") {
    SubGaussianIID m;
    for (const auto& it : items) {
      if (it == "bounded") {
        m.shape = SubGaussianShape::Bounded;
      } else if (it == "truncnorm") {
        m.shape = SubGaussianShape::TruncatedNormal;
      } else {
        apply_kv(it, name, {{"mu", &m.mu}, {"proxy", &m.sigma_proxy}, {"drift", &m.drift}});
      }
    }
    model = m;
  } else if (name == "symmetric") {
    SymmetricIID m;
    if (items.empty()) throw ConfigError("model symmetric: needs a variant");
    if (items[0] == "rademacher") {
      m.dist = SymmetricDist::RademacherScale;
    } else if (items[0] == "cauchy") {
      m.dist = SymmetricDist::Cauchy;
    } else if (items[0] == "atom-mixture") {
      m.dist = SymmetricDist::GaussMixtureAtom;
    } else {
      throw ConfigError("model symmetric: unknown variant '" + items[0] + "'");
    }
    for (std::size_t i = 1; i < items.size(); ++i) {
      apply_kv(items[i], name, {{"scale", &m.scale}});
    }
    model = m;
  } else if (name == "finitevar") {
    FiniteVarianceIID m;
    if (items.empty()) throw ConfigError("model finitevar: needs a variant");
    if (items[0] == "twopoint") {
      m.dist = FiniteVarianceDist::CenteredTwoPoint;
    } else if (items[0] == "expshift") {
      m.dist = FiniteVarianceDist::CenteredExponentialShift;
    } else {
      throw ConfigError("model finitevar: unknown variant '" + items[0] + "'");
    }
    for (std::size_t i = 1; i < items.size(); ++i) {
      apply_kv(items[i], name, {{"a", &m.a}, {"p", &m.p}});
    }
    model = m;
  } else if (name == "adversarial") {
    Adversarial m;
    if (items.empty()) throw ConfigError("model adversarial: needs a generator");
    m.generator = items[0];
    for (std::size_t i = 1; i < items.size(); ++i) {
      m.params.push_back(parse_num(items[i], "adversarial param"));
    }
    if (!known_generator(m.generator)) {
      throw ConfigError("model adversarial: unknown generator '" + m.generator + "'");
    }
    model = m;
  } else if (name == "replay") {
    if (rest.empty()) throw ConfigError("model replay: needs a file path");
    model = Replay{rest, nullptr};
  } else {
    throw ConfigError("model: unknown family '" + name + "'");
  }
  validate(model);
  return model;
}

std::string describe_model(const DataModel& model) {
  char buf[160];
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GaussianIID>) {
          std::snprintf(buf, sizeof buf, "gaussian:mu=%g,sigma=%g,drift=%g", v.mu, v.sigma,
                        v.drift);
          return buf;
        } else if constexpr (std::is_same_v<T, SubGaussianIID>) {
          std::snprintf(buf, sizeof buf, "subgaussian:%s,mu=%g,proxy=%g,drift=%g",
                        v.shape == SubGaussianShape::Bounded ? "bounded" : "truncnorm", v.mu,
                        v.sigma_proxy, v.drift);
          return buf;
        } else if constexpr (std::is_same_v<T, SymmetricIID>) {
          const char* d = v.dist == SymmetricDist::RademacherScale ? "rademacher"
                          : v.dist == SymmetricDist::Cauchy        ? "cauchy"
                                                                   : "atom-mixture";
          std::snprintf(buf, sizeof buf, "symmetric:%s,scale=%g", d, v.scale);
          return buf;
        } else if constexpr (std::is_same_v<T, FiniteVarianceIID>) {
          if (v.dist == FiniteVarianceDist::CenteredTwoPoint) {
            std::snprintf(buf, sizeof buf, "finitevar:twopoint,a=%g,p=%g", v.a, v.p);
            return buf;
          }
          return "finitevar:expshift";
        } else if constexpr (std::is_same_v<T, Adversarial>) {
          std::string s = "adversarial:" + v.generator;
          for (double p : v.params) {
            std::snprintf(buf, sizeof buf, ",%g", p);
            s += buf;
          }
          return s;
        } else if constexpr (std::is_same_v<T, Replay>) {
          return "replay:" + v.path;
        } else {
          std::string s = "schedule[";
          bool first = true;
          for (const auto& seg : v.segments) {
            if (!first) s += ";";
            first = false;
            s += describe_model(std::visit([](const auto& b) { return DataModel{b}; },
                                           seg.first));
            std::snprintf(buf, sizeof buf, "x%lld", static_cast<long long>(seg.second));
            s += buf;
          }
          return s + "]";
        }
      },
      model);
}

}  // namespace mixreg
