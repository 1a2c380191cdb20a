#pragma once

// Experiment configuration: one JSON document, complex numbers as [re, im].
// Every rejection names the offending field path or the line and column.

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lelong/current.hpp"
#include "lelong/foliation.hpp"
#include "lelong/kernel.hpp"
#include "lelong/mass_profile.hpp"
#include "lelong/quadrature.hpp"
#include "lelong/recurrence.hpp"

#ifndef LELONG_VERSION
#define LELONG_VERSION "0.0.0"
#endif

namespace lelong {

using json = nlohmann::json;

inline constexpr const char* kVersion = LELONG_VERSION;

struct ExperimentConfig {
  cplx mu{1.0, 0.0};
  cplx lambda{0.0, 1.0};
  json current_doc;  // kept for hashing and for rebuilding against another singularity
  CurrentSpec current;
  std::vector<double> r_grid = default_r_grid();
  std::vector<double> s_grid = default_s_grid();
  std::vector<double> y_grid = default_y_grid();
  std::vector<double> R_grid;  // horizons for the pushforward mass checks; empty means {5, 10, horizon}
  Tolerance tol{1e-6, 1e-12};
  std::optional<std::uint64_t> seed;
  RegimeThresholds thresholds;
  std::size_t regime_samples = 10000;
  VisibilityOptions visibility;
  std::vector<RecurrenceTarget> targets{{"origin", {0.0, 0.0}}, {"(0.5,0)", {0.5, 0.0}}};
  HalfPlanePoint recurrence_base{0.0, 1.0};
  std::string out_dir;
  std::string format = "csv";

  Singularity singularity() const { return normalize_singularity(mu, lambda); }
  /// Canonical document the run is reproducible from.
  json canonical() const;
};

namespace detail {

[[noreturn]] inline void field_error(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) field_error(path, "expected a number");
  const double x = j.get<double>();
  if (!std::isfinite(x)) field_error(path, "must be finite");
  return x;
}

inline double get_number(const json& obj, const char* key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return get_number(obj.at(key), path + "." + key);
}

inline cplx get_complex(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) field_error(path, "expected a complex number [re, im]");
  return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

inline std::vector<double> get_grid(const json& j, const std::string& path) {
  if (!j.is_array()) field_error(path, "expected an array of numbers");
  if (j.empty()) field_error(path, "grid must be nonempty");
  std::vector<double> g;
  for (std::size_t i = 0; i < j.size(); ++i) g.push_back(get_number(j[i], path + "[" + std::to_string(i) + "]"));
  return g;
}

inline void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) field_error(path, "expected an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || k == a;
    if (!ok) field_error(path + "." + k, "unknown field");
  }
}

inline BoundaryProfile parse_profile(const json& j, const std::string& path) {
  check_keys(j, path, {"kind", "centre", "width", "height", "beta", "edge"});
  if (!j.contains("kind") || !j.at("kind").is_string()) field_error(path + ".kind", "expected a profile kind string");
  const std::string kind = j.at("kind").get<std::string>();
  const double height = get_number(j, "height", path, 1.0);
  try {
    if (kind == "zero") return BoundaryProfile::zero();
    if (kind == "constant") return BoundaryProfile::constant(height);
    if (kind == "triangle") {
      return BoundaryProfile::triangle(get_number(j, "centre", path, 0.0), get_number(j, "width", path, 1.0), height);
    }
    if (kind == "cauchy") {
      return BoundaryProfile::cauchy(get_number(j, "centre", path, 0.0), get_number(j, "width", path, 1.0), height);
    }
    if (kind == "algebraic") {
      if (!j.contains("beta")) field_error(path + ".beta", "required for algebraic profiles");
      return BoundaryProfile::algebraic(get_number(j, "beta", path, 0.0), height);
    }
    if (kind == "step") return BoundaryProfile::step(get_number(j, "edge", path, 0.0), height);
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind(path, 0) == 0) throw;
    field_error(path, e.what());
  }
  field_error(path + ".kind", "unknown profile kind '" + kind + "' (zero, constant, triangle, cauchy, algebraic, step)");
}

inline std::function<double(double)> parse_density(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "uniform") return [](double) { return 1.0; };
  if (j.is_object()) {
    check_keys(j, path, {"power"});
    const double p = get_number(j, "power", path, 0.0);
    return [p](double r) { return std::pow(r, p); };
  }
  field_error(path, "expected \"uniform\" or {\"power\": p}");
}

}  // namespace detail

/// Builds the current described by `doc` for `sing`. Absent labels default to the mid-annulus.
inline CurrentSpec parse_current(const json& doc, const Singularity& sing, const std::string& path = "current") {
  detail::check_keys(doc, path, {"atoms", "radial", "aggregate"});
  CurrentSpec c;
  if (doc.contains("aggregate")) {
    if (!doc.at("aggregate").is_boolean()) detail::field_error(path + ".aggregate", "expected a boolean");
    c.aggregate = doc.at("aggregate").get<bool>();
  }
  if (doc.contains("atoms")) {
    const auto& atoms = doc.at("atoms");
    if (!atoms.is_array()) detail::field_error(path + ".atoms", "expected an array");
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const std::string ap = path + ".atoms[" + std::to_string(i) + "]";
      detail::check_keys(atoms[i], ap, {"alpha", "weight", "profile"});
      Atom a;
      a.alpha = atoms[i].contains("alpha") ? detail::get_complex(atoms[i].at("alpha"), ap + ".alpha")
                                           : cplx(sing.annulus_mid(), 0.0);
      a.weight = detail::get_number(atoms[i], "weight", ap, 1.0);
      if (!atoms[i].contains("profile")) detail::field_error(ap + ".profile", "required");
      a.profile = detail::parse_profile(atoms[i].at("profile"), ap + ".profile");
      c.atoms.push_back(a);
    }
  }
  if (doc.contains("radial")) {
    const auto& r = doc.at("radial");
    const std::string rp = path + ".radial";
    detail::check_keys(r, rp, {"density", "profile"});
    if (!r.contains("profile")) detail::field_error(rp + ".profile", "required");
    c.radial = RadialMeasure{detail::parse_density(r.value("density", json("uniform")), rp + ".density"),
                             detail::parse_profile(r.at("profile"), rp + ".profile")};
  }
  c.validate(sing);
  return c;
}

/// Built-in currents, each a unit atom at the mid-annulus label: a compact
/// bump, a Cauchy tail and an algebraic tail between the two.
inline std::vector<std::pair<std::string, json>> builtin_current_docs() {
  return {
      {"bump", json{{"atoms", json::array({json{{"profile", json{{"kind", "triangle"}, {"centre", 0.0}, {"width", 1.0}}}}})}}},
      {"cauchy", json{{"atoms", json::array({json{{"profile", json{{"kind", "cauchy"}, {"centre", 0.0}, {"width", 1.0}}}}})}}},
      {"algebraic", json{{"atoms", json::array({json{{"profile", json{{"kind", "algebraic"}, {"beta", 1.5}}}}})}}},
  };
}

inline ExperimentConfig parse_config(const json& doc) {
  using detail::field_error;
  detail::check_keys(doc, "config",
                     {"singularity", "current", "grids", "tolerance", "seed", "regimes", "recurrence", "outputs"});
  ExperimentConfig cfg;
  if (doc.contains("singularity")) {
    const auto& s = doc.at("singularity");
    detail::check_keys(s, "singularity", {"mu", "lambda"});
    if (s.contains("mu")) cfg.mu = detail::get_complex(s.at("mu"), "singularity.mu");
    if (s.contains("lambda")) cfg.lambda = detail::get_complex(s.at("lambda"), "singularity.lambda");
  }
  Singularity sing;
  try {
    sing = cfg.singularity();
  } catch (const std::exception& e) {
    field_error("singularity", e.what());
  }
  cfg.current_doc = doc.contains("current") ? doc.at("current") : builtin_current_docs().front().second;
  cfg.current = parse_current(cfg.current_doc, sing);
  if (doc.contains("grids")) {
    const auto& g = doc.at("grids");
    detail::check_keys(g, "grids", {"r", "s", "y", "R"});
    if (g.contains("r")) cfg.r_grid = detail::get_grid(g.at("r"), "grids.r");
    if (g.contains("s")) cfg.s_grid = detail::get_grid(g.at("s"), "grids.s");
    if (g.contains("y")) cfg.y_grid = detail::get_grid(g.at("y"), "grids.y");
    if (g.contains("R")) cfg.R_grid = detail::get_grid(g.at("R"), "grids.R");
  }
  for (std::size_t i = 0; i < cfg.r_grid.size(); ++i) {
    const double r = cfg.r_grid[i];
    if (!(r > 0.0 && r < 1.0)) field_error("grids.r[" + std::to_string(i) + "]", "must lie in (0, 1)");
    if (i > 0 && !(r < cfg.r_grid[i - 1])) field_error("grids.r[" + std::to_string(i) + "]", "r grid must be strictly decreasing");
  }
  for (std::size_t i = 0; i < cfg.s_grid.size(); ++i) {
    if (!(cfg.s_grid[i] > 0.0)) field_error("grids.s[" + std::to_string(i) + "]", "must be positive");
  }
  for (std::size_t i = 0; i < cfg.R_grid.size(); ++i) {
    if (!(cfg.R_grid[i] > 0.0 && cfg.R_grid[i] <= 25.0)) field_error("grids.R[" + std::to_string(i) + "]", "must lie in (0, 25]");
  }
  if (doc.contains("tolerance")) {
    const auto& t = doc.at("tolerance");
    detail::check_keys(t, "tolerance", {"rel", "abs", "max_evals"});
    cfg.tol.rel = detail::get_number(t, "rel", "tolerance", cfg.tol.rel);
    cfg.tol.abs = detail::get_number(t, "abs", "tolerance", cfg.tol.abs);
    const double me = detail::get_number(t, "max_evals", "tolerance", static_cast<double>(cfg.tol.max_evals));
    if (!(me >= 1000.0)) field_error("tolerance.max_evals", "must be at least 1000");
    cfg.tol.max_evals = static_cast<std::size_t>(me);
    try {
      cfg.tol.validate();
    } catch (const std::exception& e) {
      field_error("tolerance", e.what());
    }
  }
  if (doc.contains("seed")) {
    const auto& s = doc.at("seed");
    if (!s.is_number_unsigned()) {
      field_error("seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("regimes")) {
    const auto& r = doc.at("regimes");
    detail::check_keys(r, "regimes", {"c2", "c3", "samples"});
    cfg.thresholds.c2 = detail::get_number(r, "c2", "regimes", cfg.thresholds.c2);
    cfg.thresholds.c3 = detail::get_number(r, "c3", "regimes", cfg.thresholds.c3);
    const double n = detail::get_number(r, "samples", "regimes", static_cast<double>(cfg.regime_samples));
    if (!(n >= 100.0)) field_error("regimes.samples", "must be at least 100");
    cfg.regime_samples = static_cast<std::size_t>(n);
    try {
      cfg.thresholds.validate();
    } catch (const std::exception& e) {
      field_error("regimes", e.what());
    }
  }
  if (doc.contains("recurrence")) {
    const auto& r = doc.at("recurrence");
    detail::check_keys(r, "recurrence", {"horizon", "n_t", "n_theta", "replicas", "base", "targets"});
    auto& v = cfg.visibility;
    v.horizon = detail::get_number(r, "horizon", "recurrence", v.horizon);
    v.n_t = static_cast<std::size_t>(detail::get_number(r, "n_t", "recurrence", static_cast<double>(v.n_t)));
    v.n_theta = static_cast<std::size_t>(detail::get_number(r, "n_theta", "recurrence", static_cast<double>(v.n_theta)));
    v.replicas = static_cast<std::size_t>(detail::get_number(r, "replicas", "recurrence", static_cast<double>(v.replicas)));
    try {
      v.validate();
    } catch (const std::exception& e) {
      field_error("recurrence", e.what());
    }
    if (r.contains("base")) {
      const cplx b = detail::get_complex(r.at("base"), "recurrence.base");
      if (!(b.imag() > 0.0)) field_error("recurrence.base", "half-plane base point needs a positive imaginary part");
      cfg.recurrence_base = {b.real(), b.imag()};
    }
    if (r.contains("targets")) {
      const auto& ts = r.at("targets");
      if (!ts.is_array() || ts.empty()) field_error("recurrence.targets", "expected a nonempty array");
      cfg.targets.clear();
      for (std::size_t i = 0; i < ts.size(); ++i) {
        const std::string tp = "recurrence.targets[" + std::to_string(i) + "]";
        detail::check_keys(ts[i], tp, {"label", "z", "w"});
        RecurrenceTarget t;
        t.label = ts[i].value("label", "target" + std::to_string(i));
        t.x.z = ts[i].contains("z") ? detail::get_complex(ts[i].at("z"), tp + ".z") : cplx(0.0, 0.0);
        t.x.w = ts[i].contains("w") ? detail::get_complex(ts[i].at("w"), tp + ".w") : cplx(0.0, 0.0);
        cfg.targets.push_back(t);
      }
    }
  }
  if (cfg.seed) cfg.visibility.seed = *cfg.seed;
  if (doc.contains("outputs")) {
    const auto& o = doc.at("outputs");
    detail::check_keys(o, "outputs", {"dir", "format"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) field_error("outputs.dir", "expected a string");
      cfg.out_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("format")) {
      if (!o.at("format").is_string()) field_error("outputs.format", "expected a string");
      cfg.format = o.at("format").get<std::string>();
      if (cfg.format != "csv" && cfg.format != "json") field_error("outputs.format", "must be csv or json");
    }
  }
  return cfg;
}

/// Parses JSON text; syntax errors report line and column.
inline ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
  return parse_config(doc);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline json ExperimentConfig::canonical() const {
  auto cj = [](cplx z) { return json::array({z.real(), z.imag()}); };
  json targets_doc = json::array();
  for (const auto& t : targets) targets_doc.push_back({{"label", t.label}, {"z", cj(t.x.z)}, {"w", cj(t.x.w)}});
  json doc{
      {"singularity", {{"mu", cj(mu)}, {"lambda", cj(lambda)}}},
      {"current", current_doc},
      {"grids", {{"r", r_grid}, {"s", s_grid}, {"y", y_grid}}},
      {"tolerance", {{"rel", tol.rel}, {"abs", tol.abs}, {"max_evals", tol.max_evals}}},
      {"regimes", {{"c2", thresholds.c2}, {"c3", thresholds.c3}, {"samples", regime_samples}}},
      {"recurrence",
       {{"horizon", visibility.horizon},
        {"n_t", visibility.n_t},
        {"n_theta", visibility.n_theta},
        {"replicas", visibility.replicas},
        {"base", json::array({recurrence_base.U, recurrence_base.V})},
        {"targets", targets_doc}}},
  };
  if (!R_grid.empty()) doc["grids"]["R"] = R_grid;
  if (seed) doc["seed"] = *seed;
  return doc;
}

/// FNV-1a over the canonical serialization; stable across platforms.
inline std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = cfg.canonical().dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace lelong
