#include "krf/krf.h"

#include "krf/error.hpp"
#include "krf/experiment.hpp"

#include <cmath>
#include <exception>
#include <filesystem>
#include <new>
#include <sstream>
#include <string>

struct krf_experiment {
  krf::config::ExperimentConfig cfg;
  std::string validation_text;
  std::string singular_time;
  std::string run_message;
  std::string report_text;
};

namespace {

thread_local std::string g_last_error;

krf_status fail(krf_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body` and maps the library's exception hierarchy onto status codes.
template <class F>
krf_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return KRF_OK;
  } catch (const krf::ConfigError& e) {
    return fail(KRF_E_CONFIG, e.what());
  } catch (const krf::InvalidInput& e) {
    return fail(KRF_E_INVALID_INPUT, e.what());
  } catch (const krf::GeometryError& e) {
    return fail(KRF_E_GEOMETRY, e.what());
  } catch (const krf::FitError& e) {
    return fail(KRF_E_FIT, e.what());
  } catch (const krf::SchemaError& e) {
    return fail(KRF_E_SCHEMA, e.what());
  } catch (const krf::SolverError& e) {
    return fail(KRF_E_SOLVER, e.what());
  } catch (const krf::IoError& e) {
    return fail(KRF_E_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(KRF_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(KRF_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(KRF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(KRF_E_INTERNAL, "unknown exception");
  }
}

krf_termination to_c(krf::flow::Termination t) {
  using T = krf::flow::Termination;
  switch (t) {
    case T::ReachedStop: return KRF_TERM_REACHED_STOP;
    case T::AlreadyPastStop: return KRF_TERM_ALREADY_PAST_STOP;
    case T::StepUnderflow: return KRF_TERM_STEP_UNDERFLOW;
    case T::PositivityFailure: return KRF_TERM_POSITIVITY_FAILURE;
    case T::StoppedByHook: return KRF_TERM_STOPPED_BY_MONITOR;
  }
  return KRF_TERM_STOPPED_BY_MONITOR;
}

std::string report_string(const krf::rates::Report& rep) {
  std::ostringstream os;
  krf::rates::write_report(os, rep);
  return os.str();
}

}  // namespace

extern "C" {

const char* krf_version(void) {
  static const std::string v = krf::experiment::version();
  return v.c_str();
}

const char* krf_last_error(void) { return g_last_error.c_str(); }

const char* krf_status_name(krf_status status) {
  switch (status) {
    case KRF_OK: return "ok";
    case KRF_E_ARGUMENT: return "argument error";
    case KRF_E_CONFIG: return "configuration error";
    case KRF_E_INVALID_INPUT: return "invalid input";
    case KRF_E_GEOMETRY: return "geometry error";
    case KRF_E_FIT: return "fit error";
    case KRF_E_SCHEMA: return "schema error";
    case KRF_E_SOLVER: return "solver error";
    case KRF_E_IO: return "i/o error";
    case KRF_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

krf_status krf_experiment_load(const char* path, krf_experiment** out) {
  if (!path || !out) return fail(KRF_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* exp = new krf_experiment;
    try {
      exp->cfg = krf::config::load_experiment(path);
    } catch (...) {
      delete exp;
      throw;
    }
    *out = exp;
  });
}

krf_status krf_experiment_parse(const char* text, const char* origin, krf_experiment** out) {
  if (!text || !out) return fail(KRF_E_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* exp = new krf_experiment;
    try {
      exp->cfg = krf::config::parse_experiment(text, origin ? origin : "<string>");
    } catch (...) {
      delete exp;
      throw;
    }
    *out = exp;
  });
}

void krf_experiment_free(krf_experiment* exp) { delete exp; }

const char* krf_experiment_output_dir(const krf_experiment* exp) {
  return exp ? exp->cfg.output_dir.c_str() : nullptr;
}

krf_status krf_validate(krf_experiment* exp, int* ok) {
  if (!exp || !ok) return fail(KRF_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto v = krf::experiment::validate(exp->cfg);
    exp->validation_text = v.text;
    *ok = v.ok ? 1 : 0;
  });
}

const char* krf_validation_text(const krf_experiment* exp) { return exp ? exp->validation_text.c_str() : nullptr; }

krf_status krf_singular_time(krf_experiment* exp, const char** exact, double* value) {
  if (!exp || !exact || !value) return fail(KRF_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto v = krf::experiment::validate(exp->cfg);
    if (v.report.T.finite()) {
      exp->singular_time = krf::to_string(*v.report.T.time);
      *value = krf::to_double(*v.report.T.time);
    } else {
      exp->singular_time = "inf";
      *value = HUGE_VAL;
    }
    *exact = exp->singular_time.c_str();
  });
}

krf_status krf_run(krf_experiment* exp, const char* out_dir, size_t cadence, krf_run_info* info) {
  if (!exp || !info) return fail(KRF_E_ARGUMENT, "null argument");
  return guarded([&] {
    krf::experiment::RunOptions opts;
    if (out_dir) opts.out_dir = std::filesystem::path(out_dir);
    if (cadence > 0) opts.cadence = cadence;
    const auto r = krf::experiment::run(exp->cfg, opts);
    exp->run_message = r.message;
    info->termination = to_c(r.termination);
    info->completed = r.completed() ? 1 : 0;
    info->accepted_steps = r.accepted;
    info->rejected_steps = r.rejected;
    info->records = r.records.size();
    info->positivity_checks = r.positivity_checks;
    info->positivity_failures = r.positivity_failures;
    info->has_violation = r.first_violation ? 1 : 0;
    info->first_violation = r.first_violation.value_or(0.0);
    info->A = r.A;
    info->wall_seconds = r.wall_seconds;
  });
}

const char* krf_run_message(const krf_experiment* exp) { return exp ? exp->run_message.c_str() : nullptr; }

krf_status krf_report(krf_experiment* exp, const char* out_dir, int* pass) {
  if (!exp || !pass) return fail(KRF_E_ARGUMENT, "null argument");
  return guarded([&] {
    const std::filesystem::path dir = out_dir ? std::filesystem::path(out_dir) : std::filesystem::path(exp->cfg.output_dir);
    const auto rep = krf::experiment::report(exp->cfg, dir);
    exp->report_text = report_string(rep);
    *pass = rep.pass ? 1 : 0;
  });
}

krf_status krf_report_file(krf_experiment* exp, const char* trajectory_csv, int* pass) {
  if (!exp || !trajectory_csv || !pass) return fail(KRF_E_ARGUMENT, "null argument");
  return guarded([&] {
    const auto rep = krf::experiment::report_file(exp->cfg, trajectory_csv);
    exp->report_text = report_string(rep);
    *pass = rep.pass ? 1 : 0;
  });
}

const char* krf_report_text(const krf_experiment* exp) { return exp ? exp->report_text.c_str() : nullptr; }

}  // extern "C"
