#include "isophase/chain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "isophase/errors.hpp"

namespace isophase {

using nlohmann::json;

namespace {

constexpr double kMagnitudeTol = 1e-12;

bool is_regular(const TransformationFunction& fn) {
  return std::holds_alternative<RegularB>(fn) || std::holds_alternative<RegularA>(fn);
}

bool is_singular(const TransformationFunction& fn) {
  return std::holds_alternative<SingularDecaying>(fn) || std::holds_alternative<SingularMixed>(fn);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

// --- PoleSet ---------------------------------------------------------------

int PoleSet::n_minus() const {
  return (int)std::count_if(a.begin(), a.end(), [](double v) { return v < 0.0; });
}

int PoleSet::n_plus() const {
  return (int)(std::count_if(a.begin(), a.end(), [](double v) { return v > 0.0; }) +
               (long)b.size());
}

void PoleSet::check() const {
  for (double v : a)
    if (v == 0.0 || !std::isfinite(v)) throw ValidationError("PoleSet: a poles must be finite and nonzero");
  for (double v : b)
    if (v <= 0.0 || !std::isfinite(v)) throw ValidationError("PoleSet: b poles must be finite and positive");
  std::vector<double> mags;
  for (double v : a) mags.push_back(std::abs(v));
  for (double v : b) mags.push_back(v);
  std::sort(mags.begin(), mags.end());
  for (std::size_t i = 1; i < mags.size(); ++i)
    if (mags[i] - mags[i - 1] < kMagnitudeTol)
      throw ValidationError("PoleSet: pole magnitudes must be pairwise distinct");
}

// --- ChainSpec ---------------------------------------------------------------

int ChainSpec::regular_count() const {
  return (int)std::count_if(functions.begin(), functions.end(), is_regular);
}

int ChainSpec::singular_count() const {
  return (int)std::count_if(functions.begin(), functions.end(), is_singular);
}

int ChainSpec::pair_count() const {
  return (int)std::count_if(functions.begin(), functions.end(), [](const auto& f) {
    return std::holds_alternative<SameEnergyPair>(f);
  });
}

int ChainSpec::nu() const { return regular_count() - singular_count() - 2 * pair_count(); }

int ChainSpec::n_bound() const {
  int n = pair_count();
  for (const auto& f : functions)
    if (std::holds_alternative<SingularMixed>(f)) ++n;
  return n;
}

std::size_t ChainSpec::order() const { return functions.size() + (std::size_t)pair_count(); }

std::vector<double> ChainSpec::bound_state_energies() const {
  std::vector<double> es;
  for (const auto& f : functions) {
    if (const auto* m = std::get_if<SingularMixed>(&f)) es.push_back(-m->a * m->a);
    if (const auto* p = std::get_if<SameEnergyPair>(&f)) es.push_back(-p->kappa * p->kappa);
  }
  std::sort(es.begin(), es.end());
  return es;
}

PoleSet ChainSpec::pole_set() const {
  PoleSet ps;
  for (const auto& f : functions) {
    if (const auto* rb = std::get_if<RegularB>(&f)) ps.b.push_back(rb->b);
    else if (const auto* ra = std::get_if<RegularA>(&f)) ps.a.push_back(ra->a);
    else if (const auto* sd = std::get_if<SingularDecaying>(&f)) ps.a.push_back(sd->a);
    else if (const auto* sm = std::get_if<SingularMixed>(&f)) ps.a.push_back(sm->a);
    // pairs cancel in every phase-relevant quantity
  }
  std::sort(ps.a.begin(), ps.a.end());
  std::sort(ps.b.begin(), ps.b.end());
  return ps;
}

std::string ChainSpec::digest() const {
  std::ostringstream hex;
  hex << std::hex << fnv1a(to_json_string(*this));
  return hex.str();
}

ChainSpec canonicalized(ChainSpec chain) {
  auto rank = [](const TransformationFunction& f) {
    if (is_regular(f)) return 0;
    if (is_singular(f)) return 1;
    return 2;
  };
  std::stable_sort(chain.functions.begin(), chain.functions.end(),
                   [&](const TransformationFunction& x, const TransformationFunction& y) {
                     if (rank(x) != rank(y)) return rank(x) < rank(y);
                     return pole_magnitude(x) < pole_magnitude(y);
                   });
  return chain;
}

// --- validate ----------------------------------------------------------------

namespace {

void collect_structural(const ChainSpec& chain, std::vector<std::string>& out) {
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };
  for (const auto& f : chain.functions) {
    if (const auto* rb = std::get_if<RegularB>(&f)) {
      if (!(rb->b > 0.0)) fail("regular_b requires b > 0");
    } else if (const auto* ra = std::get_if<RegularA>(&f)) {
      if (!(ra->a > 0.0)) fail("regular_a requires a > 0");
    } else if (const auto* sd = std::get_if<SingularDecaying>(&f)) {
      if (!(sd->a < 0.0)) fail("singular_decaying requires a < 0");
    } else if (const auto* sm = std::get_if<SingularMixed>(&f)) {
      if (!(sm->a > 0.0)) fail("singular_mixed requires a > 0");
      if (sm->ratio && *sm->ratio == -1.0)
        fail("singular_mixed ratio -1 is the regular collapse limit");
    } else if (const auto* p = std::get_if<SameEnergyPair>(&f)) {
      if (!(p->kappa < 0.0)) fail("pair requires kappa < 0");
      if (p->x0_at_infinity && p->c > 0.0) fail("pair with x0 at infinity requires c <= 0");
      if (!p->x0_at_infinity && p->c < 0.0) fail("pair with x0 at the origin requires c >= 0");
    }
  }

  // distinct factorization energies (pairs included through |kappa|)
  std::vector<double> mags;
  for (const auto& f : chain.functions) mags.push_back(pole_magnitude(f));
  std::sort(mags.begin(), mags.end());
  for (std::size_t i = 1; i < mags.size(); ++i)
    if (mags[i] - mags[i - 1] < kMagnitudeTol) {
      fail("coinciding factorization constants outside a declared pair");
      break;
    }
}

void collect_family(const ChainSpec& chain, std::vector<std::string>& out) {
  auto fail = [&out](std::string msg) { out.push_back(std::move(msg)); };
  if (chain.singular_count() > chain.regular_count())
    fail("singular functions exceed regular ones");
  if (chain.nu() < 0) fail("pair insertions drove the singularity strength negative");

  // each pair level must lie below every mixed-function level
  for (const auto& f : chain.functions) {
    const auto* p = std::get_if<SameEnergyPair>(&f);
    if (!p) continue;
    for (const auto& g : chain.functions)
      if (const auto* sm = std::get_if<SingularMixed>(&g))
        if (std::abs(p->kappa) < sm->a)
          fail("pair level must lie below the existing bound states");
  }
}

ValidationReport finish_report(const ChainSpec& chain, std::vector<std::string> violations) {
  ValidationReport rep;
  rep.violations = std::move(violations);
  rep.nu = chain.nu();
  rep.n_bound = chain.n_bound();
  rep.order = chain.order();
  rep.ok = rep.violations.empty();
  return rep;
}

}  // namespace

ValidationReport validate(const ChainSpec& chain) {
  std::vector<std::string> violations;
  collect_structural(chain, violations);
  collect_family(chain, violations);
  return finish_report(chain, std::move(violations));
}

ValidationReport validate_structural(const ChainSpec& chain) {
  std::vector<std::string> violations;
  collect_structural(chain, violations);
  return finish_report(chain, std::move(violations));
}

// --- enumerate_configurations -------------------------------------------------

const char* to_string(ConfigurationKind kind) {
  switch (kind) {
    case ConfigurationKind::shallow: return "shallow";
    case ConfigurationKind::deep: return "deep";
    default: return "intermediate";
  }
}

std::vector<ChainConfiguration> enumerate_configurations(const PoleSet& poles) {
  poles.check();
  if (poles.n_minus() > poles.n_plus())
    throw ValidationError("unsupported configuration: more negative than positive poles");

  std::vector<double> pos, neg;
  for (double v : poles.a) (v > 0.0 ? pos : neg).push_back(v);
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  const int n_minus = (int)neg.size();
  const int n_b = (int)poles.b.size();
  const int p = (int)pos.size();

  std::vector<ChainConfiguration> out;
  int max_levels = 0;
  std::vector<unsigned> masks;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    const int s = __builtin_popcount(mask);
    // singular family: decaying negatives plus the selected positives
    if (n_minus + s > n_b + p - s) continue;
    masks.push_back(mask);
    max_levels = std::max(max_levels, s);
  }
  std::sort(masks.begin(), masks.end(), [](unsigned x, unsigned y) {
    const int sx = __builtin_popcount(x), sy = __builtin_popcount(y);
    return sx != sy ? sx < sy : x < y;
  });

  for (unsigned mask : masks) {
    ChainSpec chain;
    for (double v : poles.b) chain.functions.push_back(RegularB{v});
    for (int i = 0; i < p; ++i) {
      if (mask & (1u << i))
        chain.functions.push_back(SingularMixed{pos[(std::size_t)i], std::nullopt});
      else
        chain.functions.push_back(RegularA{pos[(std::size_t)i]});
    }
    for (double v : neg) chain.functions.push_back(SingularDecaying{v});
    const int s = __builtin_popcount(mask);
    ConfigurationKind kind = ConfigurationKind::intermediate;
    if (s == max_levels) kind = ConfigurationKind::deep;
    else if (s == 0) kind = ConfigurationKind::shallow;
    out.push_back({canonicalized(std::move(chain)), kind});
  }
  return out;
}

// --- extend_with_pair ----------------------------------------------------------

ChainSpec extend_with_pair(const ChainSpec& chain, double kappa, double c) {
  const auto rep = validate(chain);
  if (!rep.ok) throw ValidationError("extend_with_pair: input chain invalid: " + rep.violations.front());
  if (rep.nu < 2)
    throw ValidationError(
        "extend_with_pair: no phase-preserving level insertion below singularity strength 2");
  if (!(kappa < 0.0)) throw ValidationError("extend_with_pair: kappa must be negative");
  const double level = -kappa * kappa;
  for (double e : chain.bound_state_energies())
    if (level >= e) throw ValidationError("extend_with_pair: new level must lie below existing ones");
  for (const auto& f : chain.functions)
    if (std::abs(pole_magnitude(f) - std::abs(kappa)) < kMagnitudeTol)
      throw ValidationError("extend_with_pair: kappa collides with an existing pole magnitude");

  ChainSpec out = chain;
  out.functions.push_back(SameEnergyPair{kappa, c, true});
  out = canonicalized(std::move(out));
  const auto rep2 = validate(out);
  if (!rep2.ok) throw ValidationError("extend_with_pair: result invalid: " + rep2.violations.front());
  return out;
}

// --- basis assembly -------------------------------------------------------------

ExpSum basis_function(const TransformationFunction& fn) {
  if (const auto* rb = std::get_if<RegularB>(&fn)) return ExpSum::sinh_of(rb->b);
  if (const auto* ra = std::get_if<RegularA>(&fn)) return ExpSum::sinh_of(ra->a);
  if (const auto* sd = std::get_if<SingularDecaying>(&fn)) return ExpSum::exponential(sd->a);
  if (const auto* sm = std::get_if<SingularMixed>(&fn)) {
    const double ratio = sm->ratio.value_or(0.0);
    if (ratio == 0.0) return ExpSum::exponential(sm->a);
    return ExpSum({{1.0, sm->a}, {ratio, -sm->a}});
  }
  throw ValidationError("basis_function: a same-energy pair has no single basis function");
}

double factorization_energy(const TransformationFunction& fn) {
  const double m = pole_magnitude(fn);
  return -m * m;
}

double pole_magnitude(const TransformationFunction& fn) {
  return std::visit(
      [](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, RegularB>) return std::abs(f.b);
        else if constexpr (std::is_same_v<T, RegularA>) return std::abs(f.a);
        else if constexpr (std::is_same_v<T, SingularDecaying>) return std::abs(f.a);
        else if constexpr (std::is_same_v<T, SingularMixed>) return std::abs(f.a);
        else return std::abs(f.kappa);
      },
      fn);
}

// --- JSON ------------------------------------------------------------------------

namespace {

json function_to_json(const TransformationFunction& fn) {
  json j;
  if (const auto* rb = std::get_if<RegularB>(&fn)) {
    j["type"] = "regular_b";
    j["b"] = rb->b;
  } else if (const auto* ra = std::get_if<RegularA>(&fn)) {
    j["type"] = "regular_a";
    j["a"] = ra->a;
  } else if (const auto* sd = std::get_if<SingularDecaying>(&fn)) {
    j["type"] = "singular_decaying";
    j["a"] = sd->a;
  } else if (const auto* sm = std::get_if<SingularMixed>(&fn)) {
    j["type"] = "singular_mixed";
    j["a"] = sm->a;
    if (sm->ratio) j["ratio"] = *sm->ratio;
  } else if (const auto* p = std::get_if<SameEnergyPair>(&fn)) {
    j["type"] = "pair";
    j["kappa"] = p->kappa;
    j["c"] = p->c;
    if (!p->x0_at_infinity) j["x0_at_infinity"] = false;
  }
  return j;
}

TransformationFunction function_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "regular_b") return RegularB{j.at("b").get<double>()};
  if (type == "regular_a") return RegularA{j.at("a").get<double>()};
  if (type == "singular_decaying") return SingularDecaying{j.at("a").get<double>()};
  if (type == "singular_mixed") {
    SingularMixed sm{j.at("a").get<double>(), std::nullopt};
    if (j.contains("ratio")) sm.ratio = j.at("ratio").get<double>();
    return sm;
  }
  if (type == "pair") {
    SameEnergyPair p{j.at("kappa").get<double>(), j.at("c").get<double>(), true};
    if (j.contains("x0_at_infinity")) p.x0_at_infinity = j.at("x0_at_infinity").get<bool>();
    return p;
  }
  throw IoError("chain.json: unknown function type \"" + type + "\"");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
}

}  // namespace

std::string to_json_string(const PoleSet& poles) {
  json j;
  j["a"] = poles.a;
  j["b"] = poles.b;
  return j.dump(2) + "\n";
}

std::string to_json_string(const ChainSpec& chain) {
  json j = json::array();
  for (const auto& f : chain.functions) j.push_back(function_to_json(f));
  return j.dump(2) + "\n";
}

PoleSet pole_set_from_json_string(const std::string& text) {
  try {
    const json j = json::parse(text);
    PoleSet ps;
    ps.a = j.at("a").get<std::vector<double>>();
    ps.b = j.at("b").get<std::vector<double>>();
    return ps;
  } catch (const json::exception& e) {
    throw IoError(std::string("poles.json: ") + e.what());
  }
}

ChainSpec chain_from_json_string(const std::string& text) {
  try {
    const json j = json::parse(text);
    ChainSpec chain;
    for (const auto& item : j) chain.functions.push_back(function_from_json(item));
    return chain;
  } catch (const json::exception& e) {
    throw IoError(std::string("chain.json: ") + e.what());
  }
}

PoleSet load_pole_set(const std::string& path) { return pole_set_from_json_string(read_file(path)); }

void save_pole_set(const PoleSet& poles, const std::string& path) {
  write_file(path, to_json_string(poles));
}

ChainSpec load_chain(const std::string& path) { return chain_from_json_string(read_file(path)); }

void save_chain(const ChainSpec& chain, const std::string& path) {
  write_file(path, to_json_string(chain));
}

}  // namespace isophase
