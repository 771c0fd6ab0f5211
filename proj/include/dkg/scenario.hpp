#pragma once

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dkg/checkpoint.hpp"
#include "dkg/diagnostics.hpp"
#include "dkg/equilibria.hpp"
#include "dkg/evolution.hpp"
#include "dkg/resolution.hpp"

namespace dkg {

// ---------------------------------------------------------------------------
// Key table
// ---------------------------------------------------------------------------

struct ConfigKey {
  const char* name;  // section.key
  const char* fallback;
};

// Every recognized key with its default, in echo order.
inline constexpr ConfigKey kConfigKeys[] = {
    {"scenario.name", "scenario"},
    {"scenario.seed", "0"},
    {"model.dim", "1"},
    {"model.p", "3"},
    {"model.alpha", "0.1"},
    {"grid.n", "256"},
    {"grid.half_length", "20"},
    {"time.dt", "0.001"},
    {"time.final_time", "10"},
    {"time.stride", "100"},
    {"time.blowup_threshold", "1000000"},
    {"time.dealias", "true"},
    {"time.nonlinear", "true"},
    {"initial.kind", "equilibrium"},
    {"initial.center", "0"},
    {"initial.sign", "1"},
    {"initial.nodes", "0"},
    {"initial.bumps", ""},
    {"initial.amplitude", "1"},
    {"initial.width", "1"},
    {"initial.eps", "0.01"},
    {"initial.mode", "bump"},
    {"initial.path", ""},
    {"diagnostics.mu", "0.1 0.01 0.001 0.0001 1e-05"},
    {"diagnostics.detection_cutoff", "0"},
    {"diagnostics.tail_cutoff", "0"},
    {"diagnostics.exterior_radius", "10"},
    {"diagnostics.decompose_stride", "1"},
    {"classify.tol_v", "0.001"},
    {"classify.tol_r", "0.01"},
    {"classify.growth_slope", "0.01"},
    {"sweep.parameter", ""},
    {"sweep.values", ""},
};

inline bool known_key(const std::string& key) {
  return std::any_of(std::begin(kConfigKeys), std::end(kConfigKeys), [&](const ConfigKey& k) { return key == k.name; });
}

/// KGR_ + upper-cased key with the dot as underscore: model.alpha -> KGR_MODEL_ALPHA.
inline std::string env_name(const std::string& key) {
  std::string out = "KGR_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// ---------------------------------------------------------------------------
// Value parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(sep, start);
    const auto end = pos == std::string_view::npos ? s.size() : pos;
    out.push_back(trim(s.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream is{std::string(s)};
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

inline double to_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto* first = t.data();
  const auto* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto r = std::from_chars(first, last, v);
  if (t.empty() || r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
    throw UsageError(key + ": expected a finite number, got '" + t + "'");
  return v;
}

inline long to_integer(const std::string& key, const std::string& text) {
  long v = 0;
  const auto t = trim(text);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw UsageError(key + ": expected an integer, got '" + t + "'");
  return v;
}

inline std::uint64_t to_u64(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto t = trim(text);
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size())
    throw UsageError(key + ": expected an unsigned 64-bit integer, got '" + t + "'");
  return v;
}

inline bool to_bool(const std::string& key, const std::string& text) {
  auto t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw UsageError(key + ": expected true or false, got '" + t + "'");
}

inline Point to_point(const std::string& key, const std::string& text) {
  const auto w = words(text);
  if (w.empty() || w.size() > 3) throw UsageError(key + ": expected 1 to 3 coordinates, got '" + text + "'");
  Point p{};
  for (std::size_t a = 0; a < w.size(); ++a) p[a] = to_double(key, w[a]);
  return p;
}

inline std::string point_text(const Point& p, int dim) {
  std::string s;
  for (int a = 0; a < dim; ++a) s += (a ? " " : "") + format_number(p[a]);
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

enum class InitialKind { Equilibrium, MultiBump, Gaussian, PerturbedEquilibrium, FromCheckpoint };

inline const char* to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Equilibrium:
      return "equilibrium";
    case InitialKind::MultiBump:
      return "multi-bump";
    case InitialKind::Gaussian:
      return "gaussian";
    case InitialKind::PerturbedEquilibrium:
      return "perturbed-equilibrium";
    case InitialKind::FromCheckpoint:
      return "from-checkpoint";
  }
  return "equilibrium";
}

struct Bump {
  int nodes = 0;
  int sign = 1;
  Point center{};
};

/// "ground+ @ -20; nodal1- @ 3 4" -> bumps.
inline std::vector<Bump> parse_bumps(const std::string& key, const std::string& text) {
  std::vector<Bump> out;
  if (detail::trim(text).empty()) return out;
  for (const auto& item : detail::split(text, ';')) {
    const auto at = item.find('@');
    if (at == std::string::npos) throw UsageError(key + ": bump '" + item + "' needs 'label @ center'");
    const auto label = detail::trim(item.substr(0, at));
    Bump b;
    b.center = detail::to_point(key, item.substr(at + 1));
    if (label.size() < 2 || (label.back() != '+' && label.back() != '-'))
      throw UsageError(key + ": bump label '" + label + "' must end in + or -");
    b.sign = label.back() == '+' ? 1 : -1;
    const auto base = label.substr(0, label.size() - 1);
    if (base == "ground") {
      b.nodes = 0;
    } else if (base.rfind("nodal", 0) == 0 && base.size() > 5) {
      b.nodes = static_cast<int>(detail::to_integer(key, base.substr(5)));
      if (b.nodes < 1) throw UsageError(key + ": nodal label needs a positive node count");
    } else {
      throw UsageError(key + ": unknown profile label '" + label + "' (ground+/-, nodal<k>+/-)");
    }
    out.push_back(b);
  }
  return out;
}

struct ScenarioSpec {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  int dim = 1;
  double p = 3.0;
  double alpha = 0.1;
  int n = 256;
  double half_length = 20.0;
  EvolutionConfig evolution{};
  double final_time = 10.0;  // absolute end time

  InitialKind kind = InitialKind::Equilibrium;
  Point center{};
  int sign = 1;
  int nodes = 0;
  std::vector<Bump> bumps;
  std::string bumps_text;
  double amplitude = 1.0;
  double width = 1.0;
  double eps = 0.01;
  std::string mode = "bump";
  std::string path;

  DiagnosticsConfig diagnostics{};
  int decompose_stride = 1;
  ClassifyThresholds thresholds{};

  std::string sweep_parameter;
  std::vector<std::string> sweep_values;

  std::map<std::string, std::string> raw;  // text of every key, defaults included

  ScenarioSpec() {
    for (const auto& k : kConfigKeys) set(k.name, k.fallback);
  }

  /// Assign one key from text; unknown keys and malformed values name the key.
  void set(const std::string& key, const std::string& text) {
    using namespace detail;
    if (!known_key(key)) throw UsageError("unknown configuration key '" + key + "'");
    const auto v = trim(text);
    if (key == "scenario.name") {
      if (v.empty()) throw UsageError("scenario.name must not be empty");
      name = v;
    } else if (key == "scenario.seed") {
      seed = to_u64(key, v);
    } else if (key == "model.dim") {
      dim = static_cast<int>(to_integer(key, v));
    } else if (key == "model.p") {
      p = to_double(key, v);
    } else if (key == "model.alpha") {
      alpha = to_double(key, v);
    } else if (key == "grid.n") {
      n = static_cast<int>(to_integer(key, v));
    } else if (key == "grid.half_length") {
      half_length = to_double(key, v);
    } else if (key == "time.dt") {
      evolution.dt = to_double(key, v);
    } else if (key == "time.final_time") {
      final_time = to_double(key, v);
    } else if (key == "time.stride") {
      evolution.stride = static_cast<int>(to_integer(key, v));
    } else if (key == "time.blowup_threshold") {
      evolution.blowup_threshold = to_double(key, v);
    } else if (key == "time.dealias") {
      evolution.dealias = to_bool(key, v);
    } else if (key == "time.nonlinear") {
      evolution.nonlinear = to_bool(key, v);
    } else if (key == "initial.kind") {
      if (v == "equilibrium") kind = InitialKind::Equilibrium;
      else if (v == "multi-bump") kind = InitialKind::MultiBump;
      else if (v == "gaussian") kind = InitialKind::Gaussian;
      else if (v == "perturbed-equilibrium") kind = InitialKind::PerturbedEquilibrium;
      else if (v == "from-checkpoint") kind = InitialKind::FromCheckpoint;
      else
        throw UsageError("initial.kind: expected equilibrium, multi-bump, gaussian, perturbed-equilibrium or "
                         "from-checkpoint, got '" + v + "'");
    } else if (key == "initial.center") {
      center = to_point(key, v);
    } else if (key == "initial.sign") {
      const long s = to_integer(key, v);
      if (s != 1 && s != -1) throw UsageError("initial.sign must be 1 or -1");
      sign = static_cast<int>(s);
    } else if (key == "initial.nodes") {
      nodes = static_cast<int>(to_integer(key, v));
    } else if (key == "initial.bumps") {
      bumps = parse_bumps(key, v);
      bumps_text = v;
    } else if (key == "initial.amplitude") {
      amplitude = to_double(key, v);
    } else if (key == "initial.width") {
      width = to_double(key, v);
    } else if (key == "initial.eps") {
      eps = to_double(key, v);
    } else if (key == "initial.mode") {
      if (v != "bump" && v != "random") throw UsageError("initial.mode: expected bump or random, got '" + v + "'");
      mode = v;
    } else if (key == "initial.path") {
      path = v;
    } else if (key == "diagnostics.mu") {
      const auto w = words(v);
      if (w.size() != 5) throw UsageError("diagnostics.mu: expected 5 thresholds, got " + std::to_string(w.size()));
      for (int i = 0; i < 5; ++i) diagnostics.mu[i] = to_double(key, w[i]);
    } else if (key == "diagnostics.detection_cutoff") {
      diagnostics.detection_cutoff = to_double(key, v);
    } else if (key == "diagnostics.tail_cutoff") {
      diagnostics.tail_cutoff = to_double(key, v);
    } else if (key == "diagnostics.exterior_radius") {
      diagnostics.exterior_radius = to_double(key, v);
    } else if (key == "diagnostics.decompose_stride") {
      decompose_stride = static_cast<int>(to_integer(key, v));
    } else if (key == "classify.tol_v") {
      thresholds.tol_v = to_double(key, v);
    } else if (key == "classify.tol_r") {
      thresholds.tol_r = to_double(key, v);
    } else if (key == "classify.growth_slope") {
      thresholds.growth_slope = to_double(key, v);
    } else if (key == "sweep.parameter") {
      sweep_parameter = v;
    } else if (key == "sweep.values") {
      sweep_values = words(v);
    }
    raw[key] = v;
  }

  SpectralGrid grid() const { return SpectralGrid(dim, n, half_length); }

  /// Run length from the initial time t0 to final_time.
  EvolutionConfig evolution_config(double t0) const {
    EvolutionConfig c = evolution;
    c.final_time = final_time - t0;
    return c;
  }

  /// Cross-key checks; messages name the offending key and constraint.
  void validate() const {
    if (dim < 1 || dim > 3) throw UsageError("model.dim = " + std::to_string(dim) + " must be 1, 2 or 3");
    if (!admissible(dim, p))
      throw UsageError("model.p = " + format_number(p) + " is not admissible for model.dim = " + std::to_string(dim) +
                       " (need 1 < p < " + format_number(max_exponent(dim)) + ")");
    if (alpha < 0.0) throw UsageError("model.alpha must be nonnegative");
    try {
      (void)grid();
    } catch (const UsageError& e) {
      throw UsageError(std::string("grid.n / grid.half_length: ") + e.what());
    }
    const auto g = grid();
    if (!(evolution.dt > 0.0)) throw UsageError("time.dt must be positive");
    if (stability_number(g, evolution.dt) > kStabilityLimit)
      throw UsageError("time.dt = " + format_number(evolution.dt) + " violates dt*sqrt(1+k_max^2) <= " +
                       format_number(kStabilityLimit) + "; bound for grid.n = " + std::to_string(n) +
                       ", grid.half_length = " + format_number(half_length) + " is dt <= " +
                       format_number(max_stable_dt(g)));
    if (evolution.stride < 1) throw UsageError("time.stride must be at least 1");
    if (!(evolution.blowup_threshold > 0.0)) throw UsageError("time.blowup_threshold must be positive");
    if (kind != InitialKind::FromCheckpoint) {
      if (final_time < 0.0) throw UsageError("time.final_time must be nonnegative");
      try {
        (void)step_count(evolution_config(0.0));
      } catch (const UsageError&) {
        throw UsageError("time.final_time = " + format_number(final_time) + " is not a whole number of time.dt = " +
                         format_number(evolution.dt));
      }
    }
    const auto check_center = [&](const Point& c, const std::string& key) {
      for (int a = dim; a < 3; ++a)
        if (c[a] != 0.0) throw UsageError(key + " has more coordinates than model.dim = " + std::to_string(dim));
    };
    switch (kind) {
      case InitialKind::Equilibrium:
      case InitialKind::PerturbedEquilibrium:
        check_center(center, "initial.center");
        if (nodes < 0) throw UsageError("initial.nodes must be nonnegative");
        break;
      case InitialKind::MultiBump:
        if (bumps.empty()) throw UsageError("initial.bumps must list at least one profile for multi-bump data");
        for (const auto& b : bumps) check_center(b.center, "initial.bumps");
        break;
      case InitialKind::Gaussian:
        check_center(center, "initial.center");
        if (!(width > 0.0)) throw UsageError("initial.width must be positive");
        break;
      case InitialKind::FromCheckpoint:
        if (path.empty()) throw UsageError("initial.path is required for from-checkpoint data");
        break;
    }
    try {
      diagnostics.validate();
    } catch (const UsageError& e) {
      throw UsageError(std::string("diagnostics: ") + e.what());
    }
    if (diagnostics.detection_cutoff > g.nyquist() || diagnostics.tail_cutoff > g.nyquist())
      throw UsageError("diagnostics cutoffs must not exceed the Nyquist wavenumber " + format_number(g.nyquist()));
    if (decompose_stride < 0) throw UsageError("diagnostics.decompose_stride must be nonnegative (0: final only)");
    if (!(thresholds.tol_v > 0.0) || !(thresholds.tol_r > 0.0))
      throw UsageError("classify.tol_v and classify.tol_r must be positive");
    if (!sweep_parameter.empty()) {
      if (!known_key(sweep_parameter) || sweep_parameter.rfind("sweep.", 0) == 0)
        throw UsageError("sweep.parameter '" + sweep_parameter + "' is not a sweepable key");
    }
  }

  /// Every key with the value in use, grouped by section.
  std::string echo() const {
    std::ostringstream os;
    std::string section;
    for (const auto& k : kConfigKeys) {
      const std::string key = k.name;
      const auto dot = key.find('.');
      const auto sec = key.substr(0, dot);
      if (sec != section) {
        os << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
        section = sec;
      }
      os << key.substr(dot + 1) << " = " << raw.at(key) << '\n';
    }
    return os.str();
  }
};

/// Parse `key = value` text with [section] headers, then apply KGR_* environment
/// overrides. Validation is left to the caller so overrides can still follow.
inline ScenarioSpec parse_config_text(const std::string& text, bool use_environment = true) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::ini_parser::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw UsageError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ScenarioSpec spec;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw UsageError("key '" + section + "' must sit inside a [section]");
    for (const auto& [key, value] : body) spec.set(section + "." + key, value.data());
  }
  if (use_environment)
    for (const auto& k : kConfigKeys)
      if (const char* v = std::getenv(env_name(k.name).c_str())) spec.set(k.name, v);
  return spec;
}

inline ScenarioSpec parse_config_file(const std::filesystem::path& path, bool use_environment = true) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str(), use_environment);
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

struct InitialData {
  FieldState state;
  std::vector<std::string> warnings;
};

namespace detail {

inline EquilibriumProfile profile_for(int dim, double p, int nodes) {
  if (nodes == 0) return ground_state(dim, p);
  return radial_shoot(dim, p, nodes);
}

inline RealField embed_checked(const EquilibriumProfile& q, const SpectralGrid& g, const Point& c) {
  try {
    return embed_on_grid(q, g, c).field;
  } catch (const UsageError& e) {
    throw UsageError(std::string("grid.half_length: ") + e.what());
  }
}

}  // namespace detail

/// Adopt d, n, L, p, alpha, dt and the start time from the checkpoint named
/// by initial.path; the echo records the values in use.
inline Checkpoint adopt_checkpoint(ScenarioSpec& spec) {
  auto ck = read_checkpoint(std::filesystem::path(spec.path));
  const auto& g = ck.state.grid;
  spec.set("model.dim", std::to_string(g.dim()));
  spec.set("grid.n", std::to_string(g.n()));
  spec.set("grid.half_length", format_number(g.half_length()));
  spec.set("model.p", format_number(ck.state.p));
  spec.set("model.alpha", format_number(ck.state.alpha));
  spec.set("time.dt", format_number(ck.dt));
  if (spec.final_time < ck.state.t)
    throw UsageError("time.final_time = " + format_number(spec.final_time) + " precedes the checkpoint time " +
                     format_number(ck.state.t));
  return ck;
}

/// Build the initial state of a validated spec. from-checkpoint specs must
/// already have gone through adopt_checkpoint.
inline InitialData make_initial_data(const ScenarioSpec& spec) {
  const auto g = spec.grid();
  InitialData out{FieldState::zero(g, spec.p, spec.alpha), {}};
  auto& s = out.state;
  switch (spec.kind) {
    case InitialKind::Equilibrium:
    case InitialKind::PerturbedEquilibrium: {
      const auto q = detail::profile_for(spec.dim, spec.p, spec.nodes);
      s.u = detail::embed_checked(q, g, spec.center);
      for (auto& v : s.u) v *= spec.sign;
      if (spec.kind == InitialKind::Equilibrium) break;
      RealField phi(g.size());
      if (spec.mode == "bump") {
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double r = g.periodic_distance(g.point(i), spec.center);
          phi[i] = std::exp(-r * r);
        }
      } else {
        // Seeded white noise kept to |m| <= n/8 per axis, scaled to unit sup norm.
        std::mt19937_64 rng(spec.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (auto& v : phi) v = normal(rng);
        auto spec_phi = forward_transform(g, phi);
        g.for_each_mode([&](std::size_t k, const ModeInfo& m) {
          bool keep = !m.nyquist;
          for (int a = 0; a < g.dim(); ++a) keep = keep && std::abs(m.m[a]) <= g.n() / 8;
          if (!keep) spec_phi[k] = 0.0;
        });
        phi = inverse_transform(g, spec_phi);
        const double peak = sup_norm(phi);
        if (peak > 0.0)
          for (auto& v : phi) v /= peak;
      }
      for (std::size_t i = 0; i < g.size(); ++i) s.u[i] += spec.eps * phi[i];
      break;
    }
    case InitialKind::MultiBump: {
      std::map<int, EquilibriumProfile> cache;
      for (const auto& b : spec.bumps) {
        if (!cache.count(b.nodes)) cache.emplace(b.nodes, detail::profile_for(spec.dim, spec.p, b.nodes));
        const auto f = detail::embed_checked(cache.at(b.nodes), g, b.center);
        for (std::size_t i = 0; i < g.size(); ++i) s.u[i] += b.sign * f[i];
      }
      break;
    }
    case InitialKind::Gaussian: {
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g.periodic_distance(g.point(i), spec.center);
        s.u[i] = spec.amplitude * std::exp(-r * r / (spec.width * spec.width));
      }
      const double edge = std::abs(spec.amplitude) * std::exp(-std::pow(g.half_length() / spec.width, 2));
      if (edge > kEmbeddingTailLimit)
        out.warnings.push_back("gaussian data reaches " + format_number(edge) + " at the box edge (limit " +
                               format_number(kEmbeddingTailLimit) + ")");
      break;
    }
    case InitialKind::FromCheckpoint: {
      auto ck = read_checkpoint(std::filesystem::path(spec.path));
      if (!(ck.state.grid == g) || ck.state.p != spec.p || ck.state.alpha != spec.alpha)
        throw UsageError("initial.path: checkpoint does not match the scenario grid and model");
      out.state = std::move(ck.state);
      break;
    }
  }
  return out;
}

}  // namespace dkg
