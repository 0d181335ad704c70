/* tpi - two-photon interference simulator, C API.
 *
 * The shared library wraps the C++ core behind opaque handles and integer
 * status codes. Status values double as process exit codes in the CLI:
 * 0 success, 2 configuration parse error, 3 validation error, 4 numerical
 * guard tripped. tpi_last_error() returns a thread-local message for the most
 * recent failure.
 */

#ifndef TPI_H
#define TPI_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef struct tpi_config tpi_config;
typedef struct tpi_result tpi_result;

typedef enum tpi_status {
  TPI_OK = 0,
  TPI_ERROR = 1,
  TPI_PARSE_ERROR = 2,
  TPI_VALIDATION_ERROR = 3,
  TPI_NUMERICAL_GUARD = 4,
  TPI_IO_ERROR = 5,
  TPI_INVALID_ARGUMENT = 6
} tpi_status;

const char* tpi_version(void);

/* Newline-separated list of scenario names. */
const char* tpi_scenario_list(void);

/* Thread-local message describing the most recent error; empty on success. */
const char* tpi_last_error(void);

tpi_status tpi_config_load(const char* path, tpi_config** out_config);
tpi_status tpi_config_parse(const char* text, tpi_config** out_config);
const char* tpi_config_scenario(const tpi_config* config);
void tpi_config_free(tpi_config* config);

/* Runs the configured scan; n_threads <= 0 selects one worker. */
tpi_status tpi_run(const tpi_config* config, int n_threads, tpi_result** out_result);

size_t tpi_result_rows(const tpi_result* result);
tpi_status tpi_result_row(const tpi_result* result, size_t index, double* parameter,
                          double* rate, double* direct_part, double* exchange_part);
const char* tpi_result_parameter_name(const tpi_result* result);

/* Re-runs the rowwise invariant suite (rate >= -1e-12, rate = direct +
 * exchange) on an existing result. */
tpi_status tpi_result_check(const tpi_result* result);

tpi_status tpi_result_write_csv(const tpi_result* result, const char* path);
void tpi_result_free(tpi_result* result);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TPI_H */
