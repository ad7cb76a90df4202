#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "viana/fibered.hpp"
#include "viana/skew.hpp"
#include "viana/util.hpp"

namespace viana::config {

using nlohmann::json;

inline json load_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config: cannot open " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded())
    throw ConfigError("config: " + path.string() + " is not valid JSON");
  return j;
}

/// Canonical single-line form (keys are sorted by the json object itself),
/// hashed into every summary so outputs are traceable to their inputs.
inline std::string canonical(const json& j) { return j.dump(); }

inline double get_num(const json& j, const std::string& key, double dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return j.at(key).get<double>();
}

inline std::int64_t get_int(const json& j, const std::string& key, std::int64_t dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_number_integer())
    throw ConfigError("config: '" + key + "' must be an integer");
  return j.at(key).get<std::int64_t>();
}

inline std::string get_str(const json& j, const std::string& key, const std::string& dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_string()) throw ConfigError("config: '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

inline std::vector<int> get_int_list(const json& j, const std::string& key,
                                     std::vector<int> dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_array()) throw ConfigError("config: '" + key + "' must be an array");
  std::vector<int> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer()) throw ConfigError("config: '" + key + "' must hold integers");
    out.push_back(v.get<int>());
  }
  return out;
}

inline std::vector<double> get_num_list(const json& j, const std::string& key,
                                        std::vector<double> dflt) {
  if (!j.contains(key)) return dflt;
  if (!j.at(key).is_array()) throw ConfigError("config: '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw ConfigError("config: '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

/// Base map from config.  kinds: uniform_linear (d, optional branch_count
/// truncation), perturbed_linear (d, perturbation {amplitude, frequency}),
/// quadratic_uniform (d, q), custom_breakpoints (breakpoints).
inline BaseMap base_from_json(const json& j) {
  if (j.is_null() || j.empty()) return BaseMap::uniform_linear(16);
  std::string kind = get_str(j, "kind", "uniform_linear");
  int d = int(get_int(j, "d", 16));
  if (kind == "uniform_linear") {
    int retained = int(get_int(j, "branch_count", d));
    if (retained < 2 || retained > d)
      throw ConfigError("config: branch_count must lie in [2, d]");
    if (retained == d) return BaseMap::uniform_linear(d);
    std::vector<double> b;
    for (int i = 0; i <= retained; ++i) b.push_back(double(i) / double(d));
    return BaseMap::linear(MarkovPartition::from_breakpoints(std::move(b)));
  }
  if (kind == "perturbed_linear") {
    double amp = 0.0;
    int freq = 1;
    if (j.contains("perturbation")) {
      const json& p = j.at("perturbation");
      amp = get_num(p, "amplitude", 0.0);
      freq = int(get_int(p, "frequency", 1));
    }
    return BaseMap::perturbed_linear(d, amp, freq);
  }
  if (kind == "quadratic_uniform") {
    double q = get_num(j, "q", 0.1);
    return BaseMap::quadratic_uniform(d, q);
  }
  if (kind == "custom_breakpoints") {
    std::vector<double> b = get_num_list(j, "breakpoints", {});
    if (b.empty()) throw ConfigError("config: custom_breakpoints needs 'breakpoints'");
    return BaseMap::linear(MarkovPartition::from_breakpoints(std::move(b)), 16.0);
  }
  throw ConfigError("config: unknown base kind '" + kind + "'");
}

inline std::optional<BumpSpec> bump_from_json(const json& j) {
  if (!j.contains("bump") || j.at("bump").is_null()) return std::nullopt;
  const json& b = j.at("bump");
  BumpSpec s;
  s.center = get_num(b, "center", 0.5);
  s.width = get_num(b, "width", 0.03125);
  s.amplitude = get_num(b, "amplitude", 0.0);
  if (s.width <= 0 || s.width >= 0.5) throw ConfigError("config: bump width out of range");
  if (s.center <= 0 || s.center >= 1) throw ConfigError("config: bump center out of range");
  return s;
}

/// Quadratic skew product from config; a0 accepts a number or the string
/// "misiurewicz:crit_to_period2" (solve for the preperiodic parameter).
inline SkewSystem skew_from_json(const json& j) {
  VianaParams p{base_from_json(j.contains("base") ? j.at("base") : json()),
                0.0, 0.0, std::nullopt};
  if (j.contains("a0") && j.at("a0").is_string()) {
    std::string tag = j.at("a0").get<std::string>();
    if (tag != "misiurewicz:crit_to_period2")
      throw ConfigError("config: unknown a0 tag '" + tag + "'");
    p.a0 = find_misiurewicz();
  } else {
    p.a0 = get_num(j, "a0", find_misiurewicz());
  }
  p.alpha = get_num(j, "alpha", 0.01);
  if (p.alpha < 0) throw ConfigError("config: alpha must be >= 0");
  p.bump = bump_from_json(j);
  int gt = 10000, gx = 1000;
  if (j.contains("trapping")) {
    gt = int(get_int(j.at("trapping"), "grid_theta", gt));
    gx = int(get_int(j.at("trapping"), "grid_x", gx));
    if (gt < 16 || gx < 16) throw ConfigError("config: trapping grids too coarse");
  }
  return SkewSystem::make(std::move(p), gt, gx);
}

inline Coupling coupling_from_json(const json& j, double dflt_eps) {
  if (!j.contains("coupling")) {
    return dflt_eps == 0.0 ? Coupling::none() : Coupling::sine(dflt_eps);
  }
  const json& c = j.at("coupling");
  std::string kind = get_str(c, "kind", "sine");
  double amp = get_num(c, "amplitude", dflt_eps);
  int freq = int(get_int(c, "frequency", 1));
  if (kind == "none") return Coupling::none();
  if (kind == "constant") return Coupling::constant(amp);
  if (kind == "sine") return Coupling::sine(amp, freq);
  if (kind == "bump") return Coupling::bump(amp);
  throw ConfigError("config: unknown coupling kind '" + kind + "'");
}

inline FiberedSystem fibered_from_json(const json& j) {
  FiberedSystem fs{base_from_json(j.contains("base") ? j.at("base") : json()),
                   get_num(j, "c", 0.5),
                   coupling_from_json(j, get_num(j, "epsilon", 0.0))};
  return fs;
}

}  // namespace viana::config
