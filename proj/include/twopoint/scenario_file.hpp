#pragma once

// Flat sectioned key = value scenario format.
//
//   # comment
//   [track.segment.0]
//   type = line
//   start_x_m = -10
//   ...
//
// Units are part of the key names. Parsing reports line numbers; schema
// checks (missing, unknown or out-of-range keys) raise ValidationError.

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "twopoint/errors.hpp"
#include "twopoint/sim.hpp"

namespace twopoint {

struct OutputConfig {
  std::string directory = "out";
  bool emit_csv = true;
  bool emit_svg = false;
};

struct ScenarioConfig {
  Scenario scenario;
  OutputConfig output;
};

struct RawEntry {
  std::string value;
  int line = 0;  // 0 for overrides
};

// section -> key -> entry, sections kept in file order.
struct RawScenario {
  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, RawEntry>> sections;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return s.front() != '.' && s.back() != '.';
}

}  // namespace detail

inline RawScenario parse_scenario_text(const std::string& text) {
  RawScenario raw;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(where + "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      if (!detail::valid_name(section)) throw ParseError(where + "bad section name '" + section + "'");
      if (raw.sections.count(section)) throw ParseError(where + "section [" + section + "] repeated");
      raw.order.push_back(section);
      raw.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(where + "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (section.empty()) throw ParseError(where + "key '" + key + "' outside any section");
    if (!detail::valid_name(key) || key.find('.') != std::string::npos) {
      throw ParseError(where + "bad key '" + key + "'");
    }
    if (value.empty()) throw ParseError(where + "key '" + key + "' has no value");
    auto& keys = raw.sections[section];
    if (keys.count(key)) throw ParseError(where + "key '" + section + "." + key + "' repeated");
    keys[key] = {value, lineno};
  }
  return raw;
}

/// Applies "section.key=value" overrides. The key is the part after the
/// last dot, so nested sections work: sim.initial_state.y_m=1.
inline void apply_overrides(RawScenario& raw, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw ParseError("override '" + o + "' is not key=value");
    const std::string path = detail::trim(o.substr(0, eq));
    const std::string value = detail::trim(o.substr(eq + 1));
    const auto dot = path.rfind('.');
    if (dot == std::string::npos || !detail::valid_name(path) || value.empty()) {
      throw ParseError("override '" + o + "' must look like section.key=value");
    }
    const std::string section = path.substr(0, dot);
    if (!raw.sections.count(section)) raw.order.push_back(section);
    raw.sections[section][path.substr(dot + 1)] = {value, 0};
  }
}

namespace detail {

class SectionReader {
 public:
  SectionReader(const RawScenario& raw, std::string name) : name_(std::move(name)) {
    auto it = raw.sections.find(name_);
    if (it != raw.sections.end()) entries_ = &it->second;
  }

  bool present() const { return entries_ != nullptr; }

  bool has(const std::string& key) {
    used_.insert(key);
    return entries_ && entries_->count(key);
  }

  std::string text(const std::string& key) {
    if (!has(key)) throw ValidationError("missing required key '" + full(key) + "'");
    return entries_->at(key).value;
  }

  double number(const std::string& key) {
    const std::string s = text(key);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0' || errno == ERANGE) {
      throw ParseError(location(key) + "key '" + full(key) + "' expects a number, got '" + s + "'");
    }
    return v;
  }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string s = text(key);
    if (s == "true") return true;
    if (s == "false") return false;
    throw ParseError(location(key) + "key '" + full(key) + "' expects true or false");
  }

  int integer(const std::string& key) {
    const double v = number(key);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
      throw ValidationError("key '" + full(key) + "' must be an integer");
    }
    return static_cast<int>(v);
  }

  void reject_unknown() const {
    if (!entries_) return;
    for (const auto& [key, entry] : *entries_) {
      if (!used_.count(key)) {
        throw ValidationError(location(key) + "unknown key '" + full(key) + "'");
      }
    }
  }

  std::string full(const std::string& key) const { return name_ + "." + key; }

  std::string location(const std::string& key) const {
    if (!entries_ || !entries_->count(key)) return {};
    const int line = entries_->at(key).line;
    return line > 0 ? "line " + std::to_string(line) + ": " : std::string("override: ");
  }

 private:
  std::string name_;
  const std::map<std::string, RawEntry>* entries_ = nullptr;
  std::set<std::string> used_;
};

inline void require_positive(double v, const std::string& key) {
  if (!(v > 0.0 && std::isfinite(v))) throw ValidationError("key '" + key + "' must be positive");
}

}  // namespace detail

inline ScenarioConfig build_scenario(const RawScenario& raw) {
  using detail::SectionReader;
  ScenarioConfig cfg;
  Scenario& sc = cfg.scenario;

  std::set<std::string> known = {"vehicle", "planner", "sim", "sim.initial_state", "output"};
  std::size_t n_segments = 0;
  while (raw.sections.count("track.segment." + std::to_string(n_segments))) {
    known.insert("track.segment." + std::to_string(n_segments));
    ++n_segments;
  }
  for (const auto& name : raw.order) {
    if (!known.count(name)) throw ValidationError("unknown section [" + name + "]");
  }
  if (n_segments == 0) throw ValidationError("missing required section [track.segment.0]");

  // Track
  std::vector<SegmentSpec> specs;
  Vec2 start = Vec2::Zero();
  double heading = 0.0;
  for (std::size_t i = 0; i < n_segments; ++i) {
    SectionReader seg(raw, "track.segment." + std::to_string(i));
    const std::string type = seg.text("type");
    SegmentSpec spec;
    spec.length = seg.number("length_m");
    detail::require_positive(spec.length, seg.full("length_m"));
    if (type == "line") {
      spec.kind = SegmentKind::kLine;
    } else if (type == "arc") {
      spec.kind = SegmentKind::kArc;
      spec.curvature = seg.number("curvature_per_m");
      if (!(spec.curvature != 0.0 && std::isfinite(spec.curvature))) {
        throw ValidationError("key '" + seg.full("curvature_per_m") + "' must be nonzero");
      }
    } else {
      throw ValidationError("key '" + seg.full("type") + "' must be line or arc");
    }
    if (i == 0) {
      start = {seg.number("start_x_m"), seg.number("start_y_m")};
      heading = seg.number("start_heading_rad");
    }
    seg.reject_unknown();
    specs.push_back(spec);
  }
  try {
    sc.track = ReferenceLine::from_pose(start, heading, specs);
  } catch (const DomainError& e) {
    throw ValidationError(std::string("track: ") + e.what());
  }

  // Vehicle
  SectionReader veh(raw, "vehicle");
  sc.geometry.l_f = veh.number("l_f_m");
  sc.geometry.l_r = veh.number("l_r_m");
  detail::require_positive(sc.geometry.l_f, veh.full("l_f_m"));
  detail::require_positive(sc.geometry.l_r, veh.full("l_r_m"));
  if (auto v = veh.maybe_number("delta_max_rad")) sc.limits.delta_max = *v;
  if (auto v = veh.maybe_number("u_max_rad_s")) sc.limits.u_max = *v;
  veh.reject_unknown();

  // Planner
  SectionReader pl(raw, "planner");
  PlannerParams& p = sc.params;
  p.k = pl.number("k");
  p.lambda = pl.number("lambda");
  p.v_s = pl.number("v_s_m_s");
  p.lane_width = pl.number("lane_width_m");
  if (auto v = pl.maybe_number("alpha")) p.alpha = *v;
  if (auto v = pl.maybe_number("delta_d0")) p.delta_d0 = *v;
  if (auto v = pl.maybe_number("C1")) p.C1 = *v;
  if (auto v = pl.maybe_number("C2")) p.C2 = *v;
  if (auto v = pl.maybe_number("C3")) p.C3 = *v;
  p.refresh_gamma();
  if (auto v = pl.maybe_number("lambda0")) {
    p.lambda0 = *v;
    sc.lambda0_implied = false;
  } else {
    p.lambda0 = p.k * p.v_s * std::sqrt(p.lambda);
    sc.lambda0_implied = true;
  }
  std::optional<int> divisor;
  if (pl.has("control_divisor_N")) divisor = pl.integer("control_divisor_N");
  pl.reject_unknown();

  // Sim
  SectionReader sim(raw, "sim");
  const std::string kind = sim.text("scenario");
  if (kind == "lane_keep") sc.kind = ScenarioKind::kLaneKeep;
  else if (kind == "lane_change") sc.kind = ScenarioKind::kLaneChange;
  else if (kind == "corner") sc.kind = ScenarioKind::kCorner;
  else throw ValidationError("key 'sim.scenario' must be lane_keep, lane_change or corner");
  if (auto v = sim.maybe_number("h_s")) sc.h = *v;
  sc.duration = sim.number("duration_s");
  if (auto v = sim.maybe_number("abort_time_s")) sc.abort_time = *v;
  if (sim.has("control_divisor_N")) {
    if (divisor) {
      throw ValidationError("control_divisor_N given in both [planner] and [sim]");
    }
    divisor = sim.integer("control_divisor_N");
  }
  if (divisor) sc.control_divisor = *divisor;
  sim.reject_unknown();

  SectionReader init(raw, "sim.initial_state");
  sc.initial.x = init.number("x_m");
  sc.initial.y = init.number("y_m");
  sc.initial.psi = init.number("psi_rad");
  if (auto v = init.maybe_number("delta_rad")) sc.initial.delta = *v;
  init.reject_unknown();

  // Output
  SectionReader out(raw, "output");
  if (out.has("directory")) cfg.output.directory = out.text("directory");
  cfg.output.emit_csv = out.boolean("emit_csv", true);
  cfg.output.emit_svg = out.boolean("emit_svg", false);
  out.reject_unknown();

  try {
    sc.validate();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  return cfg;
}

inline ScenarioConfig load_scenario_text(const std::string& text,
                                         const std::vector<std::string>& overrides = {}) {
  RawScenario raw = parse_scenario_text(text);
  apply_overrides(raw, overrides);
  return build_scenario(raw);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig load_scenario_file(const std::string& path,
                                         const std::vector<std::string>& overrides = {}) {
  return load_scenario_text(read_text_file(path), overrides);
}

}  // namespace twopoint
