#ifndef QEDPEC_H
#define QEDPEC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QedpecModel {
  QEDPEC_MODEL_IDEAL = 0,
  QEDPEC_MODEL_READOUT_FLIP = 1,
  QEDPEC_MODEL_CAT_EXTRACTION = 2,
} QedpecModel;

typedef enum QedpecNormalization {
  QEDPEC_NORMALIZATION_RESCALED = 0,
  QEDPEC_NORMALIZATION_SERIES = 1,
} QedpecNormalization;

typedef enum QedpecStatus {
  QEDPEC_STATUS_OK = 0,
  QEDPEC_STATUS_NULL_POINTER = 1,
  QEDPEC_STATUS_INVALID_ARGUMENT = 2,
  QEDPEC_STATUS_OUT_OF_RANGE = 3,
  QEDPEC_STATUS_VALIDITY = 4,
  QEDPEC_STATUS_SIZE_LIMIT = 5,
  QEDPEC_STATUS_NO_DATA = 6,
  QEDPEC_STATUS_BUFFER_TOO_SMALL = 7,
  QEDPEC_STATUS_INTERNAL = 8,
  QEDPEC_STATUS_PANIC = 9,
} QedpecStatus;

// Opaque compiled protocol.
typedef struct QedpecProtocol QedpecProtocol;

// Protocol description; start from `qedpec_options_default`.
typedef struct QedpecOptions {
  uint32_t n;
  uint32_t t;
  uint32_t order;
  double p1;
  double p2;
  enum QedpecNormalization normalization;
  double max_block_weight;
  enum QedpecModel model;
  double p_m;
  uint32_t m_ancilla;
  // 0 disables the tables (detection only).
  int pec;
  double r_max;
  uint64_t drift_seed;
} QedpecOptions;

typedef struct QedpecCost {
  double total;
  double postselect;
  double gamma2;
} QedpecCost;

typedef struct QedpecRunResult {
  double estimate;
  double stderr;
  double p_accept;
  double p_accept_stderr;
  double gamma_total;
  double cost_observed;
  uint64_t n_attempted;
  uint64_t n_accepted;
} QedpecRunResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Standard settings: `p1 = 1e-4`, `p2 = 1e-3`, `K = 1`, ideal rounds.
struct QedpecOptions qedpec_options_default(uint32_t n, uint32_t t);

// Builds the benchmark circuit and compiles one table per block.
//
// # Safety
// `options` must point to a valid `QedpecOptions`; `out` must be writable.
enum QedpecStatus qedpec_compile(const struct QedpecOptions *options, struct QedpecProtocol **out);

// Releases a handle from `qedpec_compile`; null is ignored.
//
// # Safety
// `p` must come from `qedpec_compile` and not be used afterwards.
void qedpec_protocol_free(struct QedpecProtocol *p);

// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_num_blocks(const struct QedpecProtocol *p, size_t *out);

// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_block_gamma(const struct QedpecProtocol *p, size_t block, double *out);

// Order-K acceptance probability of one block.
//
// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_block_p_success(const struct QedpecProtocol *p, size_t block, double *out);

// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_block_num_entries(const struct QedpecProtocol *p,
                                           size_t block,
                                           size_t *out);

// Copies entry `index` of a block table: its Pauli as a NUL-terminated
// `IXYZ` string (needs `n + 1` bytes), probability and sign.
//
// # Safety
// `p` must be a live handle; `pauli` must hold `pauli_len` bytes; `prob`
// and `sign` writable.
enum QedpecStatus qedpec_block_entry(const struct QedpecProtocol *p,
                                     size_t block,
                                     size_t index,
                                     char *pauli,
                                     size_t pauli_len,
                                     double *prob,
                                     int8_t *sign);

// `prod_k gamma_k^2 / p_k` over the compiled tables.
//
// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_total_cost(const struct QedpecProtocol *p, struct QedpecCost *out);

// Monte Carlo estimate of the mitigated GHZ fidelity.
//
// # Safety
// `p` must be a live handle; `out` writable.
enum QedpecStatus qedpec_run(const struct QedpecProtocol *p,
                             uint64_t shots,
                             uint64_t seed,
                             struct QedpecRunResult *out);

// Unencoded PEC cost of the benchmark on `n - 2` qubits.
//
// # Safety
// `out` must be writable.
enum QedpecStatus qedpec_pure_pec_cost(uint32_t n, double p1, double p2, double *out);

// # Safety
// `out` must be writable.
enum QedpecStatus qedpec_perturbative_bound_b1(uint32_t n,
                                               uint32_t t,
                                               double p1,
                                               double p2,
                                               double *out);

double qedpec_toy_b_single_shot(double gamma_t);

double qedpec_zeno_separation(double levels, double gamma_t);

// Copies the calling thread's last error message (NUL-terminated,
// truncated to fit). Returns the full message length without the NUL.
//
// # Safety
// `buf` must hold `len` bytes, or be null with `len == 0`.
size_t qedpec_last_error(char *buf, size_t len);

// Static description of a status code.
const char *qedpec_status_str(enum QedpecStatus s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QEDPEC_H */
