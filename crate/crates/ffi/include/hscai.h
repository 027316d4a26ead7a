#ifndef HSCAI_H
#define HSCAI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HscaiAlgorithm {
  HSCAI_ALGORITHM_HS_CAI = 0,
  HSCAI_ALGORITHM_HS_AI = 1,
  HSCAI_ALGORITHM_HS_CAI_NO_EVAL = 2,
  HSCAI_ALGORITHM_DPOP = 3,
  HSCAI_ALGORITHM_BRUTE = 4,
} HscaiAlgorithm;

typedef enum HscaiStatus {
  HSCAI_STATUS_OK = 0,
  HSCAI_STATUS_NULL_ARGUMENT = 1,
  HSCAI_STATUS_INVALID_UTF8 = 2,
  HSCAI_STATUS_INVALID_PROBLEM = 3,
  HSCAI_STATUS_BAD_CONFIG = 4,
  HSCAI_STATUS_TOO_LARGE = 5,
  HSCAI_STATUS_LIVELOCK = 6,
  HSCAI_STATUS_SOLVER_ERROR = 7,
  HSCAI_STATUS_BUFFER_TOO_SMALL = 8,
  HSCAI_STATUS_PANIC = 9,
} HscaiStatus;

/**
 * Opaque problem instance.
 */
typedef struct HscaiProblem HscaiProblem;

/**
 * Opaque solver outcome.
 */
typedef struct HscaiResult HscaiResult;

/**
 * Solver settings. A finite `t` wins over `rho`; NaN in both picks the
 * default ρ for `k`. `root` 0 picks the highest-degree agent.
 */
typedef struct HscaiOptions {
  enum HscaiAlgorithm algorithm;
  uint32_t k;
  double rho;
  double t;
  uint32_t root;
  bool trace;
} HscaiOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *hscai_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hscai_version(void);

/**
 * HS-CAI with k = 6 and the default threshold.
 */
struct HscaiOptions hscai_default_options(void);

/**
 * Parses a problem from its JSON text.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HscaiStatus hscai_problem_from_json(const char *json, struct HscaiProblem **out);

/**
 * Generates a random connected problem.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HscaiStatus hscai_problem_generate(size_t agents,
                                        double density,
                                        size_t domain_size,
                                        uint64_t max_cost,
                                        uint64_t seed,
                                        struct HscaiProblem **out);

/**
 * Number of agents, 0 for NULL.
 *
 * # Safety
 * `problem` must be NULL or a live handle.
 */
size_t hscai_problem_agent_count(const struct HscaiProblem *problem);

/**
 * # Safety
 * `problem` must be NULL or a handle not yet freed.
 */
void hscai_problem_free(struct HscaiProblem *problem);

/**
 * Solves `problem`; `options` may be NULL for the defaults.
 *
 * # Safety
 * `problem` must be a live handle, `options` NULL or valid, `out` valid.
 */
enum HscaiStatus hscai_solve(const struct HscaiProblem *problem,
                             const struct HscaiOptions *options,
                             struct HscaiResult **out);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t hscai_result_cost(const struct HscaiResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t hscai_result_messages(const struct HscaiResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t hscai_result_network_load(const struct HscaiResult *result);

/**
 * # Safety
 * `result` must be a live handle.
 */
uint64_t hscai_result_nclo(const struct HscaiResult *result);

/**
 * Copies the value of agent i into `values[i - 1]`. `len` must be at
 * least the agent count; `written` (optional) receives the agent count.
 *
 * # Safety
 * `result` must be a live handle and `values` valid for `len` writes.
 */
enum HscaiStatus hscai_result_assignment(const struct HscaiResult *result,
                                         size_t *values,
                                         size_t len,
                                         size_t *written);

/**
 * TSV message trace owned by `result`, or NULL when tracing was off.
 *
 * # Safety
 * `result` must be a live handle; the string dies with it.
 */
const char *hscai_result_trace(const struct HscaiResult *result);

/**
 * # Safety
 * `result` must be NULL or a handle not yet freed.
 */
void hscai_result_free(struct HscaiResult *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HSCAI_H */
