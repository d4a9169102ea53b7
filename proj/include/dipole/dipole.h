#ifndef DIPOLE_H
#define DIPOLE_H

/* C interface to the dipole lattice toolkit. Objects are opaque handles;
 * every call returns a status code, and the message of the last failure on
 * the calling thread is available from dp_last_error(). */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define DP_API __declspec(dllexport)
#else
#define DP_API __attribute__((visibility("default")))
#endif

typedef enum dp_status {
  DP_OK = 0,
  DP_ERR_INVALID_ARGUMENT = 1,
  DP_ERR_NUMERICAL = 2,
  DP_ERR_IO = 3,
  DP_ERR_CORRUPT = 4,
  DP_ERR_NOT_FOUND = 5,
  DP_ERR_INTERNAL = 6,
  DP_ERR_BUFFER_TOO_SMALL = 7
} dp_status;

typedef enum dp_verdict { DP_PASS = 0, DP_WARN = 1, DP_FAIL = 2 } dp_verdict;

typedef struct dp_config dp_config;
typedef struct dp_report dp_report;
typedef struct dp_kernel dp_kernel;

DP_API const char* dp_version(void);
DP_API const char* dp_status_name(dp_status status);
DP_API const char* dp_last_error(void);

/* Configuration: defaults on creation; a file replaces the whole
 * configuration; single keys override ("tol.NAME" for tolerances). */
DP_API dp_status dp_config_create(dp_config** out);
DP_API void dp_config_destroy(dp_config* cfg);
DP_API dp_status dp_config_load(dp_config* cfg, const char* path);
DP_API dp_status dp_config_parse(dp_config* cfg, const char* text);
DP_API dp_status dp_config_set(dp_config* cfg, const char* key, const char* value);
/* Fails with every semantic problem listed in the error message. */
DP_API dp_status dp_config_validate(const dp_config* cfg);
/* Text form. Strings are copied with a terminating NUL; *needed receives
 * the required capacity and DP_ERR_BUFFER_TOO_SMALL is returned if cap is
 * insufficient. */
DP_API dp_status dp_config_text(const dp_config* cfg, char* buf, size_t cap, size_t* needed);

/* Subcommands: kernel, spectrum, constants, bounds, verify-rp,
 * groundstate, simulate, report. */
DP_API size_t dp_subcommand_count(void);
DP_API const char* dp_subcommand_name(size_t index);
/* Runs a subcommand; progress goes to stderr when verbose is nonzero. */
DP_API dp_status dp_run(const dp_config* cfg, const char* subcommand, int verbose, dp_report** out);

DP_API void dp_report_destroy(dp_report* report);
DP_API size_t dp_report_size(const dp_report* report);
DP_API size_t dp_report_count(const dp_report* report, dp_verdict verdict);
DP_API int dp_report_passed(const dp_report* report);
DP_API dp_status dp_report_check(const dp_report* report, size_t index, const char** name, dp_verdict* verdict,
                                 double* margin);
DP_API dp_status dp_report_json(const dp_report* report, int timings, char* buf, size_t cap, size_t* needed);
DP_API dp_status dp_report_table(const dp_report* report, char* buf, size_t cap, size_t* needed);

/* Periodized dipole kernel. epsilon <= 0 selects epsilon = 1/(2L). */
DP_API dp_status dp_kernel_build(int dim, int half_side, double epsilon, double tol, dp_kernel** out);
DP_API dp_status dp_kernel_load(const char* path, dp_kernel** out);
DP_API dp_status dp_kernel_save(const dp_kernel* kernel, const char* path);
DP_API void dp_kernel_destroy(dp_kernel* kernel);
DP_API dp_status dp_kernel_info(const dp_kernel* kernel, int* dim, int* half_side, double* epsilon, int* cutoff,
                                double* tail_bound);
/* W(x) for integer coordinates x (any representatives), row-major d x d. */
DP_API dp_status dp_kernel_entry(const dp_kernel* kernel, const int* site, double* out);
/* Staggered ground-state energy per site. */
DP_API dp_status dp_kernel_e0(const dp_kernel* kernel, double* e0);

#ifdef __cplusplus
}
#endif

#endif
