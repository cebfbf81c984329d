#ifndef QCM_H
#define QCM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  QCM_STATUS_OK = 0,
  QCM_STATUS_NULL_POINTER = 1,
  QCM_STATUS_INVALID_ARGUMENT = 2,
  QCM_STATUS_CAPACITY = 3,
  QCM_STATUS_VALIDATION = 4,
  QCM_STATUS_DEGENERATE_PROJECTION = 5,
  QCM_STATUS_NORM_DRIFT = 6,
  QCM_STATUS_PRECONDITION = 7,
  QCM_STATUS_FIT = 8,
  QCM_STATUS_NON_CONVERGENCE = 9,
  QCM_STATUS_IO = 10,
  QCM_STATUS_BUFFER_TOO_SMALL = 11,
  QCM_STATUS_PANIC = 12,
} qcm_status;

/**
 * Opaque circuit handle.
 */
typedef struct qcm_circuit qcm_circuit;

/**
 * Opaque statevector handle.
 */
typedef struct qcm_statevector qcm_statevector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated,
 * truncated to `cap`) into `buf`. Returns the full message length.
 *
 * # Safety
 * `buf` is null or valid for `cap` writes.
 */
size_t qcm_last_error(char *buf, size_t cap);

/**
 * Allocates `|0...0>` on `num_qubits` qubits.
 *
 * # Safety
 * `out` is null or valid for one write.
 */
qcm_status qcm_statevector_new(size_t num_qubits, qcm_statevector **out);

/**
 * # Safety
 * `s` is null or a handle from `qcm_statevector_new` not yet freed.
 */
void qcm_statevector_free(qcm_statevector *s);

/**
 * Number of amplitudes, `2^n`; 0 for a null handle.
 *
 * # Safety
 * `s` is null or a live handle.
 */
size_t qcm_statevector_len(const qcm_statevector *s);

/**
 * Copies the amplitudes into `re` and `im`, each of length `len`, which
 * must be at least the state's amplitude count.
 *
 * # Safety
 * `s` is a live handle; `re`, `im` are valid for `len` writes.
 */
qcm_status qcm_statevector_amplitudes(const qcm_statevector *s, double *re, double *im, size_t len);

/**
 * Born probability of basis label `k`.
 *
 * # Safety
 * `s` is a live handle; `out` is valid for one write.
 */
qcm_status qcm_statevector_probability(const qcm_statevector *s, size_t k, double *out);

/**
 * Applies every gate of `c`; the circuit must fit the register.
 *
 * # Safety
 * `s` and `c` are live handles.
 */
qcm_status qcm_statevector_apply_circuit(qcm_statevector *s, const qcm_circuit *c);

/**
 * Empty circuit on `num_qubits` qubits.
 *
 * # Safety
 * `out` is valid for one write.
 */
qcm_status qcm_circuit_new(size_t num_qubits, qcm_circuit **out);

/**
 * QFT (or its inverse when `inverse` is nonzero) on `num_qubits` qubits.
 *
 * # Safety
 * `out` is valid for one write.
 */
qcm_status qcm_circuit_qft(size_t num_qubits, int32_t inverse, qcm_circuit **out);

/**
 * # Safety
 * `c` is null or a live handle not yet freed.
 */
void qcm_circuit_free(qcm_circuit *c);

/**
 * Gate count; 0 for a null handle.
 *
 * # Safety
 * `c` is null or a live handle.
 */
size_t qcm_circuit_len(const qcm_circuit *c);

/**
 * Appends a gate. `kind` is a name such as `"H"`, `"RY"` or `"U3"`;
 * `polarities[i]` is 1 for a control on `|1>` and 0 for one on `|0>`.
 *
 * # Safety
 * `c` is a live handle; `kind` is a NUL-terminated string; each array is
 * valid for its length.
 */
qcm_status qcm_circuit_push(qcm_circuit *c,
                            const char *kind,
                            const double *params,
                            size_t num_params,
                            const size_t *targets,
                            size_t num_targets,
                            const size_t *controls,
                            const uint8_t *polarities,
                            size_t num_controls);

/**
 * Transpiled `{CNOT, U3}` counts of `c`.
 *
 * # Safety
 * `c` is a live handle; `u3`, `cnot` are valid for one write each.
 */
qcm_status qcm_circuit_gate_counts(const qcm_circuit *c, size_t *u3, size_t *cnot);

/**
 * Quantum solve of `-v'' = f` on a periodic grid of `len` cells (a power
 * of two) and the given length, with the default symbol fit. `f` must have
 * zero mean. Writes `len` values to `out`.
 *
 * # Safety
 * `f` is valid for `len` reads and `out` for `len` writes.
 */
qcm_status qcm_poisson1d_solve(const double *f, size_t len, double length, double *out);

/**
 * Quantum RVE fixed point: `steps` iterations for the modulus field `mu`
 * (`len` cells, a power of two), reference `mu0` and mean strain
 * `gamma_bar`. Writes the last strain iterate to `strain` and the
 * effective modulus to `mu_eff`.
 *
 * # Safety
 * `mu` is valid for `len` reads, `strain` for `len` writes and `mu_eff`
 * for one write.
 */
qcm_status qcm_rve_solve(const double *mu,
                         size_t len,
                         double mu0,
                         double gamma_bar,
                         size_t steps,
                         double *strain,
                         double *mu_eff);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QCM_H */
