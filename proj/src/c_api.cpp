#include "sidiff/sidiff.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "sidiff/config.hpp"
#include "sidiff/error.hpp"
#include "sidiff/experiments.hpp"
#include "sidiff/gibbs.hpp"
#include "sidiff/landscape.hpp"
#include "sidiff/oracles.hpp"
#include "sidiff/potential.hpp"
#include "sidiff/rng.hpp"
#include "sidiff/schedule.hpp"

struct sidiff_potential {
  sidiff::Potential value;
};

struct sidiff_schedule {
  sidiff::Schedule value;
};

struct sidiff_gibbs {
  // The measure keeps a reference to its potential, so the handle owns a copy.
  std::unique_ptr<sidiff::Potential> potential;
  std::unique_ptr<sidiff::GibbsMeasure> measure;
};

struct sidiff_config {
  sidiff::ParsedConfig parsed;
};

struct sidiff_result {
  sidiff::ExperimentResult value;
  std::string verdict;
};

namespace {

thread_local std::string last_error;

sidiff_status fail(sidiff_status status, const char* message) {
  last_error = message;
  return status;
}

// Runs `body`, translating each library exception into its status code.
template <class F>
sidiff_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SIDIFF_OK;
  } catch (const sidiff::DomainError& e) {
    return fail(SIDIFF_E_DOMAIN, e.what());
  } catch (const sidiff::ConfigError& e) {
    return fail(SIDIFF_E_CONFIG, e.what());
  } catch (const sidiff::ResolutionError& e) {
    return fail(SIDIFF_E_RESOLUTION, e.what());
  } catch (const sidiff::ConvergenceError& e) {
    return fail(SIDIFF_E_CONVERGENCE, e.what());
  } catch (const sidiff::UnsupportedError& e) {
    return fail(SIDIFF_E_UNSUPPORTED, e.what());
  } catch (const sidiff::InsufficientDataError& e) {
    return fail(SIDIFF_E_INSUFFICIENT_DATA, e.what());
  } catch (const sidiff::IoError& e) {
    return fail(SIDIFF_E_IO, e.what());
  } catch (const sidiff::Error& e) {
    return fail(SIDIFF_E_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(SIDIFF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SIDIFF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(SIDIFF_E_INTERNAL, "unknown exception");
  }
}

sidiff_status null_argument() { return fail(SIDIFF_E_INVALID_ARGUMENT, "null handle or output pointer"); }

sidiff_status copy_text(const std::string& text, char* buffer, std::size_t capacity, std::size_t* required) {
  if (required) *required = text.size() + 1;
  if (!buffer || capacity < text.size() + 1) {
    if (!buffer && required) {
      last_error.clear();
      return SIDIFF_OK;
    }
    return fail(SIDIFF_E_BUFFER_TOO_SMALL, "buffer too small");
  }
  std::memcpy(buffer, text.c_str(), text.size() + 1);
  last_error.clear();
  return SIDIFF_OK;
}

std::string catalog_json() {
  nlohmann::ordered_json potentials = nlohmann::ordered_json::array();
  for (const auto& entry : sidiff::potential_catalog()) {
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [name, value] : entry.parameters) params[name] = value;
    potentials.push_back({{"id", entry.id}, {"formula", entry.formula}, {"parameters", params}});
  }
  nlohmann::ordered_json schedules = nlohmann::ordered_json::array();
  schedules.push_back({{"family", "logarithmic"},
                       {"formula", "g(t) = log(shift + t) / k"},
                       {"parameters", {{"k", nullptr}, {"k_threshold_multiple", nullptr}, {"shift", std::exp(1.0)}}}});
  schedules.push_back({{"family", "constant"}, {"formula", "g(t) = g0"}, {"parameters", {{"g0", 1.0}}}});
  nlohmann::ordered_json doc;
  doc["potentials"] = potentials;
  doc["schedules"] = schedules;
  return doc.dump(2) + "\n";
}

}  // namespace

extern "C" {

const char* sidiff_version(void) { return sidiff::version(); }

const char* sidiff_status_name(sidiff_status status) {
  switch (status) {
    case SIDIFF_OK: return "ok";
    case SIDIFF_E_INVALID_ARGUMENT: return "invalid_argument";
    case SIDIFF_E_DOMAIN: return "domain";
    case SIDIFF_E_CONFIG: return "config";
    case SIDIFF_E_RESOLUTION: return "resolution";
    case SIDIFF_E_CONVERGENCE: return "convergence";
    case SIDIFF_E_UNSUPPORTED: return "unsupported";
    case SIDIFF_E_INSUFFICIENT_DATA: return "insufficient_data";
    case SIDIFF_E_IO: return "io";
    case SIDIFF_E_BUFFER_TOO_SMALL: return "buffer_too_small";
    case SIDIFF_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* sidiff_last_error(void) { return last_error.c_str(); }

sidiff_status sidiff_catalog_json(char* buffer, size_t capacity, size_t* required) {
  std::string text;
  const sidiff_status s = guarded([&] { text = catalog_json(); });
  return s == SIDIFF_OK ? copy_text(text, buffer, capacity, required) : s;
}

sidiff_status sidiff_oracles_json(char* buffer, size_t capacity, size_t* required) {
  // The oracles take a few seconds; cache them for the size-query protocol.
  const std::string* text = nullptr;
  const sidiff_status s = guarded([&] {
    static const std::string cached = sidiff::run_oracles();
    text = &cached;
  });
  return s == SIDIFF_OK ? copy_text(*text, buffer, capacity, required) : s;
}

sidiff_status sidiff_potential_create(const char* id, const char* const* param_names, const double* param_values,
                                      size_t param_count, sidiff_potential** out) {
  if (!id || !out || (param_count > 0 && (!param_names || !param_values))) return null_argument();
  return guarded([&] {
    sidiff::ParamMap params;
    for (size_t i = 0; i < param_count; ++i) {
      if (!param_names[i]) throw sidiff::ConfigError("null parameter name");
      params[param_names[i]] = param_values[i];
    }
    *out = new sidiff_potential{sidiff::make_potential(id, params)};
  });
}

void sidiff_potential_destroy(sidiff_potential* potential) { delete potential; }

int sidiff_potential_dimension(const sidiff_potential* potential) {
  return potential ? potential->value.dimension() : 0;
}

sidiff_status sidiff_potential_eval(const sidiff_potential* potential, const double* x, double* value,
                                    double* gradient, double* hessian) {
  if (!potential || !x) return null_argument();
  return guarded([&] {
    const sidiff::Vec p{x[0], potential->value.dimension() == 2 ? x[1] : 0.0};
    const auto e = sidiff::eval_all(potential->value, p);
    if (value) *value = e.value;
    if (gradient) {
      gradient[0] = e.gradient[0];
      gradient[1] = e.gradient[1];
    }
    if (hessian) {
      hessian[0] = e.hessian.xx;
      hessian[1] = e.hessian.xy;
      hessian[2] = e.hessian.yy;
    }
  });
}

sidiff_status sidiff_potential_osc_chi(const sidiff_potential* potential, double* out) {
  if (!potential || !out) return null_argument();
  return guarded([&] { *out = sidiff::osc_chi(potential->value); });
}

sidiff_status sidiff_potential_critical_points(const sidiff_potential* potential, sidiff_critical_point* points,
                                               size_t capacity, size_t* count) {
  if (!potential || !count) return null_argument();
  const auto& cps = potential->value.critical_points().points;
  *count = cps.size();
  if (!points) {
    last_error.clear();
    return SIDIFF_OK;
  }
  if (capacity < cps.size()) return fail(SIDIFF_E_BUFFER_TOO_SMALL, "buffer too small");
  for (size_t i = 0; i < cps.size(); ++i) {
    const auto& c = cps[i];
    points[i].x[0] = c.location[0];
    points[i].x[1] = c.location[1];
    points[i].value = c.value;
    points[i].kind = c.kind == sidiff::CriticalKind::local_min   ? SIDIFF_LOCAL_MIN
                     : c.kind == sidiff::CriticalKind::local_max ? SIDIFF_LOCAL_MAX
                                                                 : SIDIFF_SADDLE;
    points[i].hessian_det = c.hessian_det;
    points[i].min_eigenvalue = c.min_eigenvalue;
    points[i].is_global_min = c.is_global_min ? 1 : 0;
  }
  last_error.clear();
  return SIDIFF_OK;
}

sidiff_status sidiff_schedule_constant(double g0, sidiff_schedule** out) {
  if (!out) return null_argument();
  return guarded([&] { *out = new sidiff_schedule{sidiff::Schedule::constant(g0)}; });
}

sidiff_status sidiff_schedule_logarithmic(double k, double shift, sidiff_schedule** out) {
  if (!out) return null_argument();
  return guarded([&] { *out = new sidiff_schedule{sidiff::Schedule::logarithmic(k, shift)}; });
}

void sidiff_schedule_destroy(sidiff_schedule* schedule) { delete schedule; }

sidiff_status sidiff_schedule_G(const sidiff_schedule* schedule, double t, double* out) {
  if (!schedule || !out) return null_argument();
  return guarded([&] { *out = schedule->value.G(t); });
}

sidiff_status sidiff_schedule_g_inverse(const sidiff_schedule* schedule, double u, double* out) {
  if (!schedule || !out) return null_argument();
  return guarded([&] { *out = sidiff::g_inverse(schedule->value, u); });
}

sidiff_status sidiff_annealing_state(const sidiff_schedule* schedule, double r, double t, double* eps2, double* a) {
  if (!schedule || !eps2 || !a) return null_argument();
  return guarded([&] {
    const auto s = sidiff::annealing_state(schedule->value, r, t);
    *eps2 = s.eps2;
    *a = s.a;
  });
}

sidiff_status sidiff_gibbs_create(const sidiff_potential* potential, double eps2, double a, sidiff_gibbs** out) {
  if (!potential || !out) return null_argument();
  return guarded([&] {
    auto handle = std::make_unique<sidiff_gibbs>();
    handle->potential = std::make_unique<sidiff::Potential>(potential->value);
    handle->measure = std::make_unique<sidiff::GibbsMeasure>(*handle->potential, eps2, a);
    *out = handle.release();
  });
}

void sidiff_gibbs_destroy(sidiff_gibbs* measure) { delete measure; }

sidiff_status sidiff_gibbs_log_normalizer(const sidiff_gibbs* measure, double* out) {
  if (!measure || !out) return null_argument();
  *out = measure->measure->log_normalizer();
  last_error.clear();
  return SIDIFF_OK;
}

sidiff_status sidiff_gibbs_mass(const sidiff_gibbs* measure, double lo, double hi, double* out) {
  if (!measure || !out) return null_argument();
  return guarded([&] { *out = measure->measure->mass(lo, hi); });
}

sidiff_status sidiff_gibbs_sample(const sidiff_gibbs* measure, uint64_t seed, uint64_t stream, size_t n,
                                  double* out) {
  if (!measure || (n > 0 && !out)) return null_argument();
  return guarded([&] {
    sidiff::RngStream rng(seed, stream);
    const auto xs = sidiff::gibbs_sample(*measure->measure, rng, n);
    std::copy(xs.begin(), xs.end(), out);
  });
}

sidiff_status sidiff_maximal_height(const sidiff_potential* potential, double a, double h, double* out) {
  if (!potential || !out) return null_argument();
  return guarded([&] { *out = sidiff::maximal_height(potential->value, a, h).m; });
}

sidiff_status sidiff_spectral_gap(const sidiff_potential* potential, double eps2, double a, double h,
                                  double* lambda2) {
  if (!potential || !lambda2) return null_argument();
  return guarded([&] { *lambda2 = sidiff::generator_spectrum_1d(potential->value, eps2, a, h).lambda2; });
}

sidiff_status sidiff_config_load(const char* path, sidiff_config** out) {
  if (!path || !out) return null_argument();
  return guarded([&] { *out = new sidiff_config{sidiff::load_config(path)}; });
}

sidiff_status sidiff_config_parse(const char* json_text, sidiff_config** out) {
  if (!json_text || !out) return null_argument();
  return guarded([&] { *out = new sidiff_config{sidiff::parse_config(json_text)}; });
}

void sidiff_config_destroy(sidiff_config* config) { delete config; }

int sidiff_config_valid(const sidiff_config* config) {
  return config && config->parsed.config.has_value() ? 1 : 0;
}

size_t sidiff_config_issue_count(const sidiff_config* config) {
  return config ? config->parsed.issues.size() : 0;
}

sidiff_status sidiff_config_issue(const sidiff_config* config, size_t index, int* severity, const char** key,
                                  const char** message) {
  if (!config) return null_argument();
  if (index >= config->parsed.issues.size()) return fail(SIDIFF_E_INVALID_ARGUMENT, "issue index out of range");
  const auto& issue = config->parsed.issues[index];
  if (severity) *severity = issue.severity == sidiff::ValidationIssue::Severity::error ? 0 : 1;
  if (key) *key = issue.key.c_str();
  if (message) *message = issue.message.c_str();
  last_error.clear();
  return SIDIFF_OK;
}

sidiff_status sidiff_config_set_output_dir(sidiff_config* config, const char* dir) {
  if (!config || !dir) return null_argument();
  if (!config->parsed.config) return fail(SIDIFF_E_CONFIG, "config has errors");
  config->parsed.config->output_dir = dir;
  last_error.clear();
  return SIDIFF_OK;
}

sidiff_status sidiff_config_set_workers(sidiff_config* config, unsigned workers) {
  if (!config) return null_argument();
  if (!config->parsed.config) return fail(SIDIFF_E_CONFIG, "config has errors");
  config->parsed.config->workers = workers;
  last_error.clear();
  return SIDIFF_OK;
}

sidiff_status sidiff_run(const sidiff_config* config, sidiff_result** out) {
  if (!config || !out) return null_argument();
  if (!config->parsed.config) return fail(SIDIFF_E_CONFIG, "config has errors");
  return guarded([&] {
    auto result = std::make_unique<sidiff_result>();
    result->value = sidiff::run_experiment(*config->parsed.config);
    result->verdict = sidiff::verdict_json(*config->parsed.config, result->value);
    *out = result.release();
  });
}

void sidiff_result_destroy(sidiff_result* result) { delete result; }

int sidiff_result_all_pass(const sidiff_result* result) { return result && result->value.all_pass() ? 1 : 0; }

size_t sidiff_result_criterion_count(const sidiff_result* result) {
  return result ? result->value.criteria.size() : 0;
}

sidiff_status sidiff_result_criterion(const sidiff_result* result, size_t index, const char** id, int* pass) {
  if (!result) return null_argument();
  if (index >= result->value.criteria.size()) return fail(SIDIFF_E_INVALID_ARGUMENT, "criterion index out of range");
  const auto& c = result->value.criteria[index];
  if (id) *id = c.id.c_str();
  if (pass) *pass = c.pass ? 1 : 0;
  last_error.clear();
  return SIDIFF_OK;
}

const char* sidiff_result_verdict_json(const sidiff_result* result) {
  return result ? result->verdict.c_str() : "";
}

}  // extern "C"
