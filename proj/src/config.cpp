#include "sidiff/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sidiff/error.hpp"

namespace sidiff {

using nlohmann::json;

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::anneal_to_pi0: return "anneal_to_pi0";
    case ExperimentKind::freeze_subcritical: return "freeze_subcritical";
    case ExperimentKind::constant_g_mean: return "constant_g_mean";
    case ExperimentKind::landscape_spectrum: return "landscape_spectrum";
    case ExperimentKind::free_energy_decay: return "free_energy_decay";
  }
  return "unknown";
}

namespace {

std::optional<ExperimentKind> parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::anneal_to_pi0, ExperimentKind::freeze_subcritical, ExperimentKind::constant_g_mean,
                 ExperimentKind::landscape_spectrum, ExperimentKind::free_energy_decay})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

/// Keys each experiment kind reads at top level.
std::set<std::string> allowed_keys(ExperimentKind kind) {
  std::set<std::string> keys{"experiment", "seed", "output_dir", "potential", "thresholds"};
  auto add = [&](std::initializer_list<const char*> more) { keys.insert(more.begin(), more.end()); };
  switch (kind) {
    case ExperimentKind::anneal_to_pi0:
    case ExperimentKind::freeze_subcritical:
      add({"schedule", "r", "z0", "paths", "workers", "horizon", "dt", "observe_every", "bins", "checkpoints",
           "window_fraction", "final_window_fraction"});
      break;
    case ExperimentKind::free_energy_decay:
      add({"schedule", "r", "z0", "paths", "workers", "horizon", "dt", "bins", "checkpoints"});
      break;
    case ExperimentKind::constant_g_mean:
      add({"r", "y0", "mu0", "z0", "paths", "workers", "horizon", "dt", "observe_every", "coupled"});
      break;
    case ExperimentKind::landscape_spectrum:
      add({"schedule", "r", "landscape"});
      break;
  }
  return keys;
}

class Reader {
 public:
  explicit Reader(std::vector<ValidationIssue>& issues) : issues_(issues) {}

  void error(const std::string& key, const std::string& message) {
    issues_.push_back({ValidationIssue::Severity::error, key, message});
  }

  bool number(const json& obj, const char* key, const std::string& path, double& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      error(path + key, "must be a number");
      return false;
    }
    out = v.get<double>();
    if (!std::isfinite(out)) {
      error(path + key, "must be finite");
      return false;
    }
    return true;
  }

  bool count(const json& obj, const char* key, const std::string& path, std::size_t& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      error(path + key, "must be a nonnegative integer");
      return false;
    }
    out = v.get<std::size_t>();
    return true;
  }

  bool point(const json& obj, const char* key, std::optional<Vec>& out) {
    if (!obj.contains(key)) return false;
    const json& v = obj.at(key);
    Vec p{0.0, 0.0};
    if (v.is_number()) {
      p[0] = v.get<double>();
    } else if (v.is_array() && !v.empty() && v.size() <= 2 &&
               std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); })) {
      for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i].get<double>();
    } else {
      error(key, "must be a number or an array of 1 or 2 numbers");
      return false;
    }
    if (!all_finite(p)) {
      error(key, "must be finite");
      return false;
    }
    out = p;
    return true;
  }

  void unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path,
                    const std::string& context) {
    for (const auto& [k, v] : obj.items())
      if (!allowed.count(k)) error(path + k, "unknown key" + context);
  }

 private:
  std::vector<ValidationIssue>& issues_;
};

void parse_potential(Reader& rd, const json& v, const std::string& path, PotentialSpec& out) {
  if (!v.is_object()) {
    rd.error(path, "must be an object with an id");
    return;
  }
  rd.unknown_keys(v, {"id", "params"}, path + ".", "");
  if (!v.contains("id") || !v.at("id").is_string()) {
    rd.error(path + ".id", "missing potential id");
  } else {
    out.id = v.at("id").get<std::string>();
  }
  if (v.contains("params")) {
    const json& p = v.at("params");
    if (!p.is_object()) {
      rd.error(path + ".params", "must be an object of numbers");
    } else {
      for (const auto& [k, x] : p.items()) {
        if (!x.is_number() || !std::isfinite(x.get<double>()))
          rd.error(path + ".params." + k, "must be a finite number");
        else
          out.params[k] = x.get<double>();
      }
    }
  }
}

void parse_thresholds(Reader& rd, const json& v, Thresholds& t) {
  if (!v.is_object()) {
    rd.error("thresholds", "must be an object");
    return;
  }
  rd.unknown_keys(v,
                  {"basin_tolerance", "occupation_tv", "pinsker_slack", "freeze_fraction", "min_decreases",
                   "ratio_tolerance", "flatten_fraction", "gap_decay_factor", "blowup_fraction", "m_tolerance",
                   "ou_tolerance", "jacquot_tolerance", "z0_tolerance"},
                  "thresholds.", "");
  const std::string p = "thresholds.";
  rd.number(v, "basin_tolerance", p, t.basin_tolerance);
  rd.number(v, "occupation_tv", p, t.occupation_tv);
  rd.number(v, "pinsker_slack", p, t.pinsker_slack);
  rd.number(v, "freeze_fraction", p, t.freeze_fraction);
  rd.count(v, "min_decreases", p, t.min_decreases);
  rd.number(v, "ratio_tolerance", p, t.ratio_tolerance);
  rd.number(v, "flatten_fraction", p, t.flatten_fraction);
  rd.number(v, "gap_decay_factor", p, t.gap_decay_factor);
  rd.number(v, "blowup_fraction", p, t.blowup_fraction);
  rd.number(v, "m_tolerance", p, t.m_tolerance);
  rd.number(v, "ou_tolerance", p, t.ou_tolerance);
  rd.number(v, "jacquot_tolerance", p, t.jacquot_tolerance);
  rd.number(v, "z0_tolerance", p, t.z0_tolerance);
}

void parse_grid(Reader& rd, const json& v, const char* key, std::vector<double>& out) {
  if (!v.contains(key)) return;
  const json& g = v.at(key);
  const std::string path = std::string("landscape.") + key;
  if (!g.is_array() || g.empty()) {
    rd.error(path, "must be a nonempty array of positive numbers");
    return;
  }
  out.clear();
  for (const auto& e : g) {
    if (!e.is_number() || !(e.get<double>() > 0.0) || !std::isfinite(e.get<double>())) {
      rd.error(path, "must be a nonempty array of positive numbers");
      return;
    }
    out.push_back(e.get<double>());
  }
}

void parse_landscape(Reader& rd, const json& v, LandscapeSpec& l) {
  if (!v.is_object()) {
    rd.error("landscape", "must be an object");
    return;
  }
  rd.unknown_keys(v, {"h", "t_grid", "eps2_grid", "spectrum_h_fraction", "ou_h", "reference"}, "landscape.", "");
  rd.number(v, "h", "landscape.", l.h);
  rd.number(v, "spectrum_h_fraction", "landscape.", l.spectrum_h_fraction);
  rd.number(v, "ou_h", "landscape.", l.ou_h);
  parse_grid(rd, v, "t_grid", l.t_grid);
  parse_grid(rd, v, "eps2_grid", l.eps2_grid);
  if (v.contains("reference")) {
    l.reference = {};
    parse_potential(rd, v.at("reference"), "landscape.reference", l.reference);
  }
  if (!(l.h > 0.0)) rd.error("landscape.h", "must be positive");
  if (!(l.ou_h > 0.0)) rd.error("landscape.ou_h", "must be positive");
  if (!(l.spectrum_h_fraction > 0.0 && l.spectrum_h_fraction < 0.2))
    rd.error("landscape.spectrum_h_fraction", "must lie in (0, 0.2) so that h < eps / 5");
}

void parse_schedule(Reader& rd, const json& v, ScheduleSpec& s) {
  if (!v.is_object()) {
    rd.error("schedule", "must be an object");
    return;
  }
  if (v.contains("family") && v.at("family").is_string()) s.family = v.at("family").get<std::string>();
  if (s.family == "logarithmic") {
    rd.unknown_keys(v, {"family", "k", "k_threshold_multiple", "shift"}, "schedule.", " for the logarithmic family");
    double x = 0.0;
    if (rd.number(v, "k", "schedule.", x)) s.k = x;
    if (rd.number(v, "k_threshold_multiple", "schedule.", x)) s.k_threshold_multiple = x;
    rd.number(v, "shift", "schedule.", s.shift);
    if (s.k && s.k_threshold_multiple) rd.error("schedule", "give either k or k_threshold_multiple, not both");
    if (!s.k && !s.k_threshold_multiple) rd.error("schedule.k", "missing (or give k_threshold_multiple)");
    if (s.k && !(*s.k > 0.0)) rd.error("schedule.k", "must be positive");
    if (s.k_threshold_multiple && !(*s.k_threshold_multiple > 0.0))
      rd.error("schedule.k_threshold_multiple", "must be positive");
    if (!(s.shift >= std::exp(1.0) - 1e-12)) rd.error("schedule.shift", "must be at least e");
  } else if (s.family == "constant") {
    rd.unknown_keys(v, {"family", "g0"}, "schedule.", " for the constant family");
    rd.number(v, "g0", "schedule.", s.g0);
    if (!(s.g0 > 0.0)) rd.error("schedule.g0", "must be positive");
  } else {
    rd.error("schedule.family", "must be \"logarithmic\" or \"constant\"");
  }
}

}  // namespace

ParsedConfig parse_config(const std::string& json_text) {
  ParsedConfig out;
  Reader rd(out.issues);
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    rd.error("", std::string("invalid JSON: ") + e.what());
    return out;
  }
  if (!doc.is_object()) {
    rd.error("", "top level must be an object");
    return out;
  }

  ExperimentConfig c;
  c.canonical = doc.dump();
  if (!doc.contains("experiment") || !doc.at("experiment").is_string()) {
    rd.error("experiment", "missing experiment kind");
    return out;
  }
  const auto kind = parse_kind(doc.at("experiment").get<std::string>());
  if (!kind) {
    rd.error("experiment", "unknown experiment kind \"" + doc.at("experiment").get<std::string>() + "\"");
    return out;
  }
  c.kind = *kind;
  rd.unknown_keys(doc, allowed_keys(c.kind), "", std::string(" for experiment ") + to_string(c.kind));

  if (!doc.contains("seed")) {
    rd.error("seed", "missing; a seed must be given explicitly");
  } else if (!doc.at("seed").is_number_unsigned()) {
    rd.error("seed", "must be a nonnegative integer");
  } else {
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("output_dir")) {
    if (doc.at("output_dir").is_string())
      c.output_dir = doc.at("output_dir").get<std::string>();
    else
      rd.error("output_dir", "must be a string");
  }
  if (!doc.contains("potential"))
    rd.error("potential", "missing potential");
  else
    parse_potential(rd, doc.at("potential"), "potential", c.potential);
  if (doc.contains("schedule")) parse_schedule(rd, doc.at("schedule"), c.schedule);
  else if (c.kind != ExperimentKind::constant_g_mean) rd.error("schedule", "missing schedule");
  if (doc.contains("thresholds")) parse_thresholds(rd, doc.at("thresholds"), c.thresholds);
  if (doc.contains("landscape")) parse_landscape(rd, doc.at("landscape"), c.landscape);

  rd.number(doc, "r", "", c.r);
  rd.point(doc, "z0", c.z0);
  rd.point(doc, "y0", c.y0);
  rd.point(doc, "mu0", c.mu0);
  rd.count(doc, "paths", "", c.paths);
  std::size_t workers = 0;
  if (rd.count(doc, "workers", "", workers)) c.workers = static_cast<unsigned>(workers);
  rd.number(doc, "horizon", "", c.horizon);
  rd.number(doc, "dt", "", c.dt);
  rd.count(doc, "observe_every", "", c.observe_every);
  rd.count(doc, "bins", "", c.bins);
  rd.count(doc, "checkpoints", "", c.checkpoints);
  rd.number(doc, "window_fraction", "", c.window_fraction);
  rd.number(doc, "final_window_fraction", "", c.final_window_fraction);
  if (doc.contains("coupled")) {
    if (doc.at("coupled").is_boolean())
      c.coupled = doc.at("coupled").get<bool>();
    else
      rd.error("coupled", "must be true or false");
  }

  if (!(c.r > 0.0)) rd.error("r", "must be positive");
  if (c.kind != ExperimentKind::landscape_spectrum) {
    if (c.paths == 0) rd.error("paths", "must be at least 1");
    if (!(c.dt > 0.0)) rd.error("dt", "must be positive");
    if (!(c.horizon > 0.0)) rd.error("horizon", "must be positive");
    if (c.dt > 0.0 && c.dt >= c.horizon) rd.error("dt", "must be smaller than the horizon");
    if (c.dt > 0.0 && c.horizon / c.dt >= 1e9) rd.error("horizon", "horizon / dt must stay below 1e9");
    if (c.observe_every == 0) rd.error("observe_every", "must be at least 1");
  }
  if (c.bins < 2) rd.error("bins", "must be at least 2");
  if (c.checkpoints < 2) rd.error("checkpoints", "must be at least 2");
  if (!(c.window_fraction > 0.0 && c.window_fraction < 1.0)) rd.error("window_fraction", "must lie in (0, 1)");
  if (!(c.final_window_fraction > 0.0 && c.final_window_fraction < 1.0))
    rd.error("final_window_fraction", "must lie in (0, 1)");

  if (c.kind == ExperimentKind::freeze_subcritical && !c.z0) rd.error("z0", "freeze_subcritical needs z0");

  bool has_error = false;
  for (const auto& i : out.issues) has_error = has_error || i.severity == ValidationIssue::Severity::error;
  if (has_error) return out;

  // Semantic checks need a buildable potential and schedule.
  auto semantic = validate(c);
  for (auto& i : semantic) {
    has_error = has_error || i.severity == ValidationIssue::Severity::error;
    out.issues.push_back(std::move(i));
  }
  if (!has_error) out.config = std::move(c);
  return out;
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ParsedConfig out;
    out.issues.push_back({ValidationIssue::Severity::error, "", "cannot read config file " + path});
    return out;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

Potential build_potential(const PotentialSpec& spec) { return make_potential(spec.id, spec.params); }

Schedule build_schedule(const ExperimentConfig& config, const Potential& potential) {
  if (config.kind == ExperimentKind::constant_g_mean) return Schedule::constant(1.0);
  const ScheduleSpec& s = config.schedule;
  if (s.family == "constant") return Schedule::constant(s.g0);
  double k = s.k.value_or(0.0);
  if (s.k_threshold_multiple) {
    const double threshold = std::max(2.0 * osc_chi(potential), potential.dimension() / 4.0);
    k = *s.k_threshold_multiple * threshold;
  }
  return Schedule::logarithmic(k, s.shift);
}

std::vector<ValidationIssue> validate(const ExperimentConfig& c) {
  std::vector<ValidationIssue> issues;
  auto error = [&](const std::string& key, const std::string& msg) {
    issues.push_back({ValidationIssue::Severity::error, key, msg});
  };
  auto warning = [&](const std::string& key, const std::string& msg) {
    issues.push_back({ValidationIssue::Severity::warning, key, msg});
  };

  std::optional<Potential> potential;
  try {
    potential = build_potential(c.potential);
  } catch (const Error& e) {
    error("potential", e.what());
  }
  if (c.kind == ExperimentKind::landscape_spectrum) {
    try {
      build_potential(c.landscape.reference);
    } catch (const Error& e) {
      error("landscape.reference", e.what());
    }
  }
  if (!potential) return issues;

  const int dim = potential->dimension();
  auto check_dim = [&](const std::optional<Vec>& p, const char* key) {
    if (p && dim == 1 && (*p)[1] != 0.0) error(key, "has two components but the potential is 1D");
  };
  check_dim(c.z0, "z0");
  check_dim(c.y0, "y0");
  check_dim(c.mu0, "mu0");

  if (dim != 1 && c.kind != ExperimentKind::landscape_spectrum)
    error("potential", std::string(to_string(c.kind)) + " is implemented for 1D potentials");
  if (dim != 1 && c.kind == ExperimentKind::landscape_spectrum)
    warning("potential", "the generator spectrum is skipped for 2D potentials");

  if (c.kind == ExperimentKind::constant_g_mean) return issues;
  try {
    const Schedule schedule = build_schedule(c, *potential);
    const ThresholdReport t = threshold_check(schedule, *potential);
    std::ostringstream msg;
    msg << "k = " << (t.k_effective ? *t.k_effective : 0.0) << " against max{2 osc(chi), d/4} = " << t.threshold;
    const bool expects_convergence =
        c.kind == ExperimentKind::anneal_to_pi0 || c.kind == ExperimentKind::free_energy_decay;
    if (expects_convergence && t.verdict == ThresholdVerdict::may_freeze)
      warning("schedule.k", "schedule may freeze: " + msg.str());
    if (c.kind == ExperimentKind::freeze_subcritical && t.verdict == ThresholdVerdict::converges_to_global_minima)
      warning("schedule.k", "schedule is above the annealing threshold: " + msg.str());
  } catch (const Error& e) {
    error("schedule", e.what());
  }
  return issues;
}

std::string config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace sidiff
