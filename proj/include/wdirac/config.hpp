#pragma once

// Strict JSON experiment configuration. Every object rejects unknown keys;
// errors name the offending key path.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wdirac/analysis.hpp"

namespace wdirac {

using json = nlohmann::json;

enum class ExperimentKind { Spectrum, Minmax, Continuity, Compare, Wave };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::Spectrum: return "spectrum";
    case ExperimentKind::Minmax: return "minmax";
    case ExperimentKind::Continuity: return "continuity";
    case ExperimentKind::Compare: return "compare";
    case ExperimentKind::Wave: return "wave";
  }
  return "?";
}

inline const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds{ExperimentKind::Spectrum, ExperimentKind::Minmax,
                                                 ExperimentKind::Continuity, ExperimentKind::Compare,
                                                 ExperimentKind::Wave};
  return kinds;
}

/// Grid-independent description of a weight field.
struct WeightSpec {
  struct Term {
    double amplitude = 0.0;
    int frequency = 1;
    bool cosine = false;
    int axis = 0;
  };
  std::string kind = "identity";  // identity | constant | diagonal | trig | random-spd
  double value = 1.0;              // constant
  std::vector<double> values;      // diagonal
  double mean = 1.0;               // trig
  std::vector<Term> terms;         // trig
  bool exponentiate = false;       // trig: rho = exp(mean + sum terms)
  double amplitude = 0.5;          // random-spd
  std::uint64_t seed = 0;          // random-spd
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::OscillatorySine;
  std::optional<double> amplitude;
  double frequency_scale = 1.0;
  std::optional<std::uint64_t> seed;
  std::optional<WeightSpec> base;
  std::vector<int> members{1, 2, 4, 8};
};

struct CompareSpec {
  int pairs = 20;
  std::optional<WeightSpec> upper;
  std::optional<WeightSpec> lower;
  std::vector<double> scalings{0.5, 2.0, 3.0};
};

struct SolverSpec {
  int k_max = 8;
  int ell_max = 3;
  int minmax_k_max = 4;
  int n_samples = 64;
  int dictionary_size = 2;
  int wave_index_max = 3;
  int wave_pairs = 20;
  double tol = 1.0e-7;
  double p = 4.0;
  double alpha = 0.5;
  std::vector<double> times{0.5, 1.0, 2.0};
  SolveOptions solve;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::Spectrum;
  std::uint64_t seed = 0;
  std::string output_dir;
  Geometry geometry;
  std::optional<WeightSpec> weight;
  std::optional<FamilySpec> family;
  std::optional<CompareSpec> compare;
  SolverSpec solver;
  bool dump_binary = true;
  std::string source;  // canonical text used for the config hash
};

namespace detail {

// Wraps a JSON object, tracking which keys were read.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& at(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key + ": required key is missing");
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const json& v = at(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path_ + "." + key + ": wrong type (" + v.dump() + ")");
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  std::string child(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!used_.count(item.key())) {
        throw ConfigError(path_ + "." + item.key() + ": unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline double positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(what + ": must be positive");
  return v;
}

inline Geometry parse_geometry(const json& j, const std::string& path) {
  StrictObject o(j, path);
  const std::string kind = o.get<std::string>("kind");
  const double two_pi = 2.0 * std::numbers::pi;
  Geometry g;
  if (kind == "circle") {
    g = Geometry::circle(o.get_or("length", two_pi), o.get<int>("resolution"),
                         o.get_or("twist", 0.0));
  } else if (kind == "interval") {
    g = Geometry::interval(o.get_or("length", std::numbers::pi), o.get<int>("resolution"),
                           o.get_or("chirality", 1));
  } else if (kind == "torus") {
    const auto lengths = o.get_or("lengths", std::vector<double>{two_pi, two_pi});
    const auto twist = o.get_or("twist", std::vector<double>{0.0, 0.0});
    if (lengths.size() != 2 || twist.size() != 2) {
      throw ConfigError(path + ": torus lengths and twist need two entries");
    }
    g = Geometry::torus(lengths[0], lengths[1], o.get<int>("resolution"), twist[0], twist[1]);
  } else {
    throw ConfigError(path + ".kind: unknown geometry '" + kind + "'");
  }
  o.finish();
  try {
    g.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return g;
}

inline WeightSpec parse_weight(const json& j, const std::string& path) {
  StrictObject o(j, path);
  WeightSpec w;
  w.kind = o.get<std::string>("kind");
  if (w.kind == "identity") {
  } else if (w.kind == "constant") {
    w.value = positive(o.get<double>("value"), o.child("value"));
  } else if (w.kind == "diagonal") {
    w.values = o.get<std::vector<double>>("values");
    for (double v : w.values) positive(v, o.child("values"));
  } else if (w.kind == "trig") {
    w.mean = o.get_or("mean", 1.0);
    w.exponentiate = o.get_or("exponentiate", false);
    if (o.has("terms")) {
      const json& terms = o.at("terms");
      if (!terms.is_array()) throw ConfigError(o.child("terms") + ": expected an array");
      for (std::size_t i = 0; i < terms.size(); ++i) {
        StrictObject t(terms[i], o.child("terms") + "[" + std::to_string(i) + "]");
        WeightSpec::Term term;
        term.amplitude = t.get<double>("amplitude");
        term.frequency = t.get<int>("frequency");
        const std::string fn = t.get_or<std::string>("function", "sin");
        if (fn != "sin" && fn != "cos") {
          throw ConfigError(t.child("function") + ": expected 'sin' or 'cos'");
        }
        term.cosine = fn == "cos";
        term.axis = t.get_or("axis", 0);
        if (term.axis != 0 && term.axis != 1) throw ConfigError(t.child("axis") + ": must be 0 or 1");
        t.finish();
        w.terms.push_back(term);
      }
    }
  } else if (w.kind == "random-spd") {
    w.amplitude = o.get_or("amplitude", 0.5);
    w.seed = o.get_or<std::uint64_t>("seed", 0);
  } else {
    throw ConfigError(o.child("kind") + ": unknown weight kind '" + w.kind + "'");
  }
  o.finish();
  return w;
}

inline FamilySpec parse_family(const json& j, const std::string& path) {
  StrictObject o(j, path);
  FamilySpec f;
  f.kind = family_kind_from_string(o.get<std::string>("kind"));
  if (o.has("amplitude")) f.amplitude = o.get<double>("amplitude");
  f.frequency_scale = o.get_or("frequency_scale", 1.0);
  if (o.has("seed")) f.seed = o.get<std::uint64_t>("seed");
  if (o.has("base")) f.base = parse_weight(o.at("base"), o.child("base"));
  f.members = o.get_or("members", f.members);
  o.finish();
  if (f.members.empty()) throw ConfigError(path + ".members: must not be empty");
  for (std::size_t i = 0; i < f.members.size(); ++i) {
    if (f.members[i] < 1 || (i > 0 && f.members[i] <= f.members[i - 1])) {
      throw ConfigError(path + ".members: must be positive and strictly ascending");
    }
  }
  return f;
}

inline CompareSpec parse_compare(const json& j, const std::string& path) {
  StrictObject o(j, path);
  CompareSpec c;
  c.pairs = o.get_or("pairs", c.pairs);
  if (o.has("upper")) c.upper = parse_weight(o.at("upper"), o.child("upper"));
  if (o.has("lower")) c.lower = parse_weight(o.at("lower"), o.child("lower"));
  c.scalings = o.get_or("scalings", c.scalings);
  o.finish();
  if (c.upper.has_value() != c.lower.has_value()) {
    throw ConfigError(path + ": 'upper' and 'lower' must be given together");
  }
  if (c.pairs < 0) throw ConfigError(path + ".pairs: must be >= 0");
  return c;
}

inline SolverSpec parse_solver(const json& j, const std::string& path) {
  StrictObject o(j, path);
  SolverSpec s;
  s.k_max = o.get_or("k_max", s.k_max);
  s.ell_max = o.get_or("ell_max", s.ell_max);
  s.minmax_k_max = o.get_or("minmax_k_max", s.minmax_k_max);
  s.n_samples = o.get_or("n_samples", s.n_samples);
  s.dictionary_size = o.get_or("dictionary_size", s.dictionary_size);
  s.wave_index_max = o.get_or("wave_index_max", s.wave_index_max);
  s.wave_pairs = o.get_or("wave_pairs", s.wave_pairs);
  s.tol = o.get_or("tol", s.tol);
  s.p = o.get_or("p", s.p);
  s.alpha = o.get_or("alpha", s.alpha);
  s.times = o.get_or("times", s.times);
  s.solve.kernel_tol = o.get_or("kernel_tol", s.solve.kernel_tol);
  s.solve.reliable_fraction = o.get_or("reliable_fraction", s.solve.reliable_fraction);
  s.solve.cluster_tol_rel = o.get_or("cluster_tol_rel", s.solve.cluster_tol_rel);
  s.solve.cluster_tol_abs = o.get_or("cluster_tol_abs", s.solve.cluster_tol_abs);
  o.finish();
  if (s.k_max < 1 || s.ell_max < 1 || s.minmax_k_max < 1 || s.n_samples < 0 ||
      s.dictionary_size < 0 || s.wave_index_max < 1 || s.wave_pairs < 0) {
    throw ConfigError(path + ": counts must be positive");
  }
  if (!(s.alpha > 0.0 && s.alpha < 1.0)) throw ConfigError(path + ".alpha: must lie in (0, 1)");
  if (!(s.tol > 0.0)) throw ConfigError(path + ".tol: must be positive");
  if (!(s.solve.reliable_fraction > 0.0 && s.solve.reliable_fraction <= 1.0)) {
    throw ConfigError(path + ".reliable_fraction: must lie in (0, 1]");
  }
  return s;
}

}  // namespace detail

inline ExperimentKind experiment_kind_from_string(const std::string& name) {
  for (ExperimentKind k : all_experiment_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("experiment: unknown kind '" + name + "'");
}

inline ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  detail::StrictObject o(j, "config");
  ExperimentConfig c;
  c.experiment = experiment_kind_from_string(o.get<std::string>("experiment"));
  c.seed = o.get_or<std::uint64_t>("seed", 0);
  c.output_dir = o.get_or<std::string>("output_dir", "");
  c.dump_binary = o.get_or("dump_binary", true);
  c.geometry = detail::parse_geometry(o.at("geometry"), "config.geometry");
  if (o.has("weight")) c.weight = detail::parse_weight(o.at("weight"), "config.weight");
  if (o.has("family")) c.family = detail::parse_family(o.at("family"), "config.family");
  if (o.has("compare")) c.compare = detail::parse_compare(o.at("compare"), "config.compare");
  if (o.has("solver")) c.solver = detail::parse_solver(o.at("solver"), "config.solver");
  o.finish();

  switch (c.experiment) {
    case ExperimentKind::Spectrum:
    case ExperimentKind::Minmax:
      if (!c.weight) c.weight = WeightSpec{};
      if (c.family) throw ConfigError("config.family: not used by this experiment");
      break;
    case ExperimentKind::Continuity:
      if (!c.family) throw ConfigError("config.family: required key is missing");
      if (c.weight) throw ConfigError("config.weight: continuity takes its limit from the family");
      break;
    case ExperimentKind::Compare:
      if (!c.compare) c.compare = CompareSpec{};
      break;
    case ExperimentKind::Wave:
      if (c.weight && c.family) throw ConfigError("config: wave takes either weight or family");
      if (!c.weight && !c.family) c.weight = WeightSpec{};
      break;
  }
  if (c.experiment != ExperimentKind::Compare && c.compare) {
    throw ConfigError("config.compare: only used by the compare experiment");
  }
  c.source = j.dump();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

/// Samples a weight description on a grid.
inline WeightField make_weight(const WeightSpec& spec, const Grid& grid) {
  const int k = grid.fiber_dim;
  if (spec.kind == "identity") return WeightField::identity(grid);
  if (spec.kind == "constant") return WeightField::identity(grid).scaled(spec.value);
  if (spec.kind == "diagonal") {
    if (static_cast<int>(spec.values.size()) != k) {
      throw ConfigError("weight.values: expected " + std::to_string(k) + " entries");
    }
    Mat block = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) block(i, i) = spec.values[static_cast<std::size_t>(i)];
    return WeightField::constant(grid, block);
  }
  if (spec.kind == "trig") {
    const Geometry& g = grid.geometry;
    for (const auto& t : spec.terms) {
      if (t.axis >= g.dimension()) throw ConfigError("weight.terms: axis exceeds the dimension");
      if (std::abs(t.frequency) >= g.resolution / 4) {
        throw ConfigError("weight.terms: frequency above the Nyquist guard (resolution/4)");
      }
    }
    WeightField w = WeightField::scalar(grid, [&](const std::array<double, 2>& x) {
      double v = spec.mean;
      for (const auto& t : spec.terms) {
        const auto a = static_cast<std::size_t>(t.axis);
        const double ph = 2.0 * std::numbers::pi * t.frequency * x[a] / g.lengths[a];
        v += t.amplitude * (t.cosine ? std::cos(ph) : std::sin(ph));
      }
      return spec.exponentiate ? std::exp(v) : v;
    });
    require_spd(w, "weight");
    return w;
  }
  if (spec.kind == "random-spd") {
    FamilyParams p;
    p.amplitude = spec.amplitude;
    p.seed = spec.seed;
    return WeightFamily(FamilyKind::RandomSpdPerturbation, p, grid).member(1);
  }
  throw ConfigError("unknown weight kind '" + spec.kind + "'");
}

inline WeightFamily make_family(const FamilySpec& spec, const Grid& grid, std::uint64_t seed) {
  FamilyParams p;
  p.amplitude = spec.amplitude;
  p.frequency_scale = spec.frequency_scale;
  p.seed = spec.seed.value_or(seed);
  if (spec.base) p.base = make_weight(*spec.base, grid);
  return WeightFamily(spec.kind, std::move(p), grid);
}

}  // namespace wdirac
