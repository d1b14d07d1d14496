#ifndef DICKE_H
#define DICKE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes shared by every call.
typedef enum DickeStatus {
  DICKE_STATUS_OK = 0,
  DICKE_STATUS_NULL_POINTER = 1,
  DICKE_STATUS_INVALID_UTF8 = 2,
  DICKE_STATUS_PARSE = 3,
  DICKE_STATUS_DOMAIN = 4,
  DICKE_STATUS_NUMERIC = 5,
  DICKE_STATUS_RESOURCE = 6,
  DICKE_STATUS_DEGENERATE_FRAME = 7,
  DICKE_STATUS_UNSUPPORTED = 8,
  DICKE_STATUS_BUFFER_TOO_SMALL = 9,
  DICKE_STATUS_PANIC = 10,
} DickeStatus;

// Collective observables for [`dicke_state_expval`].
typedef enum DickeObservable {
  DICKE_OBSERVABLE_JX = 0,
  DICKE_OBSERVABLE_JY = 1,
  DICKE_OBSERVABLE_JZ = 2,
  DICKE_OBSERVABLE_J_PLUS = 3,
  DICKE_OBSERVABLE_J_MINUS = 4,
  DICKE_OBSERVABLE_JX2 = 5,
  DICKE_OBSERVABLE_JY2 = 6,
  DICKE_OBSERVABLE_JZ2 = 7,
  DICKE_OBSERVABLE_J_PLUS2 = 8,
  DICKE_OBSERVABLE_J_MINUS2 = 9,
} DickeObservable;

// A validated circuit.
typedef struct DickeCircuit DickeCircuit;

// A block-diagonal collective density matrix.
typedef struct DickeState DickeState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or NULL. The pointer
// stays valid until the next call into this library from the same thread.
const char *dicke_last_error(void);

// Library version as a static NUL-terminated string.
const char *dicke_version(void);

// Parse and validate a circuit from NUL-terminated JSON.
//
// # Safety
// `json` must be a valid C string and `out` a writable pointer.
enum DickeStatus dicke_circuit_from_json(const char *json, struct DickeCircuit **out);

// # Safety
// `circuit` must come from this library or be NULL.
void dicke_circuit_free(struct DickeCircuit *circuit);

// # Safety
// `circuit` must be a live handle and `n` writable.
enum DickeStatus dicke_circuit_particles(const struct DickeCircuit *circuit, uint32_t *n);

// Run the circuit from the ground state.
//
// # Safety
// `circuit` must be a live handle and `out` writable.
enum DickeStatus dicke_circuit_run(const struct DickeCircuit *circuit, struct DickeState **out);

// All particles down.
//
// # Safety
// `out` must be writable.
enum DickeStatus dicke_state_ground(uint32_t n, struct DickeState **out);

// # Safety
// `state` must come from this library or be NULL.
void dicke_state_free(struct DickeState *state);

// Apply a circuit to an existing state, producing a new handle.
//
// # Safety
// Both handles must be live and `out` writable.
enum DickeStatus dicke_state_apply(const struct DickeState *state,
                                   const struct DickeCircuit *circuit,
                                   struct DickeState **out);

// Collective depolarizing channel with probability `epsilon`.
//
// # Safety
// `state` must be live and `out` writable.
enum DickeStatus dicke_state_depolarize(const struct DickeState *state,
                                        double epsilon,
                                        struct DickeState **out);

// Number of `(j, m)` entries [`dicke_state_probabilities`] will write.
//
// # Safety
// `state` must be live and `len` writable.
enum DickeStatus dicke_state_probability_count(const struct DickeState *state, size_t *len);

// Write `2j`, `2m` and `P(j, m)` for every active entry, descending `j`
// then `m`. `capacity` is the length of each output array.
//
// # Safety
// The three arrays must each hold at least `capacity` elements.
enum DickeStatus dicke_state_probabilities(const struct DickeState *state,
                                           uint32_t *two_j,
                                           int64_t *two_m,
                                           double *p,
                                           size_t capacity);

// `tr(rho O)` as real and imaginary parts.
//
// # Safety
// `state` must be live; `re` and `im` writable.
enum DickeStatus dicke_state_expval(const struct DickeState *state,
                                    enum DickeObservable observable,
                                    double *re,
                                    double *im);

// Kitagawa–Ueda and Wineland squeezing parameters.
//
// # Safety
// `state` must be live; `xi2_s` and `xi2_r` writable.
enum DickeStatus dicke_state_xi2(const struct DickeState *state, double *xi2_s, double *xi2_r);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DICKE_H */
