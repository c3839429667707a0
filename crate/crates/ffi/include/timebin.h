/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef TIMEBIN_H
#define TIMEBIN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  TB_STATUS_OK = 0,
  TB_STATUS_INVALID_ARGUMENT = 1,
  TB_STATUS_NULL_POINTER = 2,
  TB_STATUS_BUFFER_TOO_SMALL = 3,
  TB_STATUS_PARSE = 4,
  TB_STATUS_FRAME_OVERFLOW = 5,
  TB_STATUS_RAIL_OCCUPIED = 6,
  TB_STATUS_SCHEDULE_INFEASIBLE = 7,
  TB_STATUS_RESOURCE_LIMIT = 8,
  TB_STATUS_UNSUPPORTED_INSTANCE = 9,
  TB_STATUS_ORDER_NOT_FOUND = 10,
  TB_STATUS_PANIC = 11,
} TbStatus;

/**
 * Parsed qubit circuit.
 */
typedef struct TbCircuit TbCircuit;

/**
 * Compiled primitive schedule.
 */
typedef struct TbSchedule TbSchedule;

/**
 * Photon state over a frame of time bins.
 */
typedef struct TbState TbState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to fit, into `buf`. Returns the full message length in bytes
 * excluding the terminator. `buf` may be null when `len` is 0.
 *
 * # Safety
 * `buf` must be valid for `len` bytes of writes.
 */
size_t tb_last_error(char *buf, size_t len);

/**
 * Photon in bin `bin` of an `n_bins` frame, H polarization.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
TbStatus tb_state_basis(size_t n_bins, size_t bin, TbState **out);

/**
 * Equal amplitudes on every bin of an `n_bins` frame, H polarization.
 *
 * # Safety
 * `out` must be valid for one pointer write.
 */
TbStatus tb_state_uniform(size_t n_bins, TbState **out);

/**
 * # Safety
 * `state` must be null or a live handle; it is invalid afterwards.
 */
void tb_state_free(TbState *state);

/**
 * Number of bins, or 0 for a null handle.
 *
 * # Safety
 * `state` must be null or a live handle.
 */
size_t tb_state_n_bins(const TbState *state);

/**
 * Total photon probability; below 1 after loss.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for one write.
 */
TbStatus tb_state_norm_sqr(const TbState *state, double *out);

/**
 * Writes the per-bin probability (both rails) into `out[0..n_bins]`.
 *
 * # Safety
 * `state` must be a live handle and `out` valid for `len` writes.
 */
TbStatus tb_state_probabilities(const TbState *state, double *out, size_t len);

/**
 * Parses the circuit text format from a NUL-terminated UTF-8 string.
 *
 * # Safety
 * `text` must be a valid C string and `out` valid for one pointer write.
 */
TbStatus tb_circuit_parse(const char *text, TbCircuit **out);

/**
 * # Safety
 * `circuit` must be null or a live handle.
 */
size_t tb_circuit_n_qubits(const TbCircuit *circuit);

/**
 * # Safety
 * `circuit` must be null or a live handle; it is invalid afterwards.
 */
void tb_circuit_free(TbCircuit *circuit);

/**
 * Compiles onto a frame of `n_bins` bins (0 for the register size),
 * charging the default insertion-loss table when `lossy` is set.
 *
 * # Safety
 * `circuit` must be a live handle and `out` valid for one pointer write.
 */
TbStatus tb_compile(const TbCircuit *circuit, size_t n_bins, bool lossy, TbSchedule **out);

/**
 * Number of primitives, or 0 for a null handle.
 *
 * # Safety
 * `schedule` must be null or a live handle.
 */
size_t tb_schedule_len(const TbSchedule *schedule);

/**
 * # Safety
 * `schedule` must be null or a live handle; it is invalid afterwards.
 */
void tb_schedule_free(TbSchedule *schedule);

/**
 * Runs a schedule on a copy of `state`; the input is left untouched.
 *
 * # Safety
 * Handles must be live and `out` valid for one pointer write.
 */
TbStatus tb_run(const TbSchedule *schedule, const TbState *state, bool loss_on, TbState **out);

/**
 * Normalized argument marginal of the built-in N = 15, a = 2 run, written
 * to `out[0..8]` in natural `y` order.
 *
 * # Safety
 * `out` must be valid for `len` writes.
 */
TbStatus tb_shor15_marginal(bool wave_packet,
                            bool loss_on,
                            bool compiled_qft,
                            double *out,
                            size_t len);

/**
 * Order from measured samples, plus the factor pair when the gcd step
 * succeeds (`p = q = 0` otherwise).
 *
 * # Safety
 * `samples` must be valid for `n_samples` reads; outputs valid for one
 * write each.
 */
TbStatus tb_extract_order(const uint64_t *samples,
                          size_t n_samples,
                          size_t n_arg,
                          uint64_t base,
                          uint64_t modulus,
                          uint64_t *order,
                          uint64_t *p,
                          uint64_t *q);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TIMEBIN_H */
