#ifndef KRF_KRF_H
#define KRF_KRF_H

/* C interface to the Kähler-Ricci flow lab. An experiment handle owns a parsed
 * configuration together with the text and results of the last operation on
 * it. Every call returns a krf_status; krf_last_error() holds the message of
 * the most recent failure on the calling thread. Strings returned by the
 * library stay valid until the next call on the same handle (or thread, for
 * krf_last_error). */

#include <stddef.h>

#if defined(_WIN32)
#define KRF_API __declspec(dllexport)
#elif defined(__GNUC__)
#define KRF_API __attribute__((visibility("default")))
#else
#define KRF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum krf_status {
  KRF_OK = 0,
  KRF_E_ARGUMENT = 1,      /* null pointer or out-of-range argument */
  KRF_E_CONFIG = 2,        /* parse error or inconsistent configuration */
  KRF_E_INVALID_INPUT = 3, /* failed validation, infinite T, bad window */
  KRF_E_GEOMETRY = 4,      /* Kähler positivity lost */
  KRF_E_FIT = 5,
  KRF_E_SCHEMA = 6,        /* CSV columns do not match */
  KRF_E_SOLVER = 7,
  KRF_E_IO = 8,
  KRF_E_INTERNAL = 9
} krf_status;

typedef enum krf_termination {
  KRF_TERM_REACHED_STOP = 0,
  KRF_TERM_ALREADY_PAST_STOP = 1,
  KRF_TERM_STEP_UNDERFLOW = 2,
  KRF_TERM_POSITIVITY_FAILURE = 3,
  KRF_TERM_STOPPED_BY_MONITOR = 4 /* positivity check or monitor evaluation failed */
} krf_termination;

typedef struct krf_experiment krf_experiment;

typedef struct krf_run_info {
  krf_termination termination;
  int completed; /* reached T - eps_stop with every accepted state positive */
  size_t accepted_steps;
  size_t rejected_steps;
  size_t records;
  size_t positivity_checks;
  size_t positivity_failures;
  int has_violation;      /* Ricci lower bound failed at some record */
  double first_violation; /* time of the first failing record */
  double A;
  double wall_seconds;
} krf_run_info;

KRF_API const char* krf_version(void);
KRF_API const char* krf_last_error(void);
KRF_API const char* krf_status_name(krf_status status);

KRF_API krf_status krf_experiment_load(const char* path, krf_experiment** out);
KRF_API krf_status krf_experiment_parse(const char* text, const char* origin, krf_experiment** out);
KRF_API void krf_experiment_free(krf_experiment* exp);

/* Output directory named by the configuration. */
KRF_API const char* krf_experiment_output_dir(const krf_experiment* exp);

/* Class checks. *ok is 1 when T is finite, omega0 lies in the cone and the
 * collapsing residual vanishes. */
KRF_API krf_status krf_validate(krf_experiment* exp, int* ok);
KRF_API const char* krf_validation_text(const krf_experiment* exp);

/* Singular time as an exact fraction "p/q" (or "inf") and as a double. */
KRF_API krf_status krf_singular_time(krf_experiment* exp, const char** exact, double* value);

/* Runs the flow and writes the artifacts. out_dir may be NULL (config value);
 * cadence 0 keeps the configured cadence. A solver abort still writes the
 * artifacts and returns KRF_OK with info->completed == 0. */
KRF_API krf_status krf_run(krf_experiment* exp, const char* out_dir, size_t cadence, krf_run_info* info);
KRF_API const char* krf_run_message(const krf_experiment* exp);

/* Rate report from out_dir/trajectory.csv, written to out_dir/report.txt. */
KRF_API krf_status krf_report(krf_experiment* exp, const char* out_dir, int* pass);
/* Rate report for an explicit trajectory file; nothing is written. */
KRF_API krf_status krf_report_file(krf_experiment* exp, const char* trajectory_csv, int* pass);
KRF_API const char* krf_report_text(const krf_experiment* exp);

#ifdef __cplusplus
}
#endif

#endif
