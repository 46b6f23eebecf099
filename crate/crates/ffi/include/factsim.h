#ifndef FACTSIM_H
#define FACTSIM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

// Result of every fallible call.
typedef enum FactsimStatus {
  FACTSIM_STATUS_OK = 0,
  FACTSIM_STATUS_NULL_ARGUMENT = 1,
  FACTSIM_STATUS_INVALID_UTF8 = 2,
  FACTSIM_STATUS_INVALID_INPUT = 3,
  FACTSIM_STATUS_PROVIDER = 4,
  FACTSIM_STATUS_PARSE = 5,
  FACTSIM_STATUS_EMPTY_EXTRACTION = 6,
  FACTSIM_STATUS_IO = 7,
  // A Rust panic was caught at the boundary.
  FACTSIM_STATUS_INTERNAL = 8,
} FactsimStatus;

typedef enum FactsimTau {
  FACTSIM_TAU_A = 0,
  FACTSIM_TAU_B = 1,
} FactsimTau;

// Opaque sentence encoder.
typedef struct FactsimEncoder FactsimEncoder;

// Opaque set of fact tuples with provenance.
typedef struct FactsimFactSet FactsimFactSet;

// Opaque score report.
typedef struct FactsimReport FactsimReport;

typedef struct FactsimRouge {
  double r1;
  double r2;
  double rl;
} FactsimRouge;

typedef struct FactsimScores {
  double coverage;
  double consistency;
  double factsim;
} FactsimScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *factsim_last_error(void);

// Library version as a static NUL-terminated string.
const char *factsim_version(void);

// # Safety
// `s` must be NULL or a string returned by this library, not yet freed.
void factsim_string_free(char *s);

// ROUGE-1/2/L F1 of `candidate` against `reference`.
//
// # Safety
// String arguments must be valid NUL-terminated strings; `out` must be
// writable.
enum FactsimStatus factsim_rouge(const char *reference,
                                 const char *candidate,
                                 struct FactsimRouge *out);

// Kendall's tau between two arrays of `len` values.
//
// # Safety
// `x` and `y` must point to `len` readable doubles; `out` must be writable.
enum FactsimStatus factsim_kendall_tau(const double *x,
                                       const double *y,
                                       size_t len,
                                       enum FactsimTau variant,
                                       double *out);

// Cosine similarity with negative values mapped to 0.
//
// # Safety
// `a` and `b` must point to `len` readable doubles; `out` must be writable.
enum FactsimStatus factsim_clamped_cosine(const double *a,
                                          const double *b,
                                          size_t len,
                                          double *out);

// Creates an empty fact set over `documents` source documents.
//
// # Safety
// `out` must be writable.
enum FactsimStatus factsim_factset_new(size_t documents, struct FactsimFactSet **out);

// Parses a model completion into a fact set with a single source document.
//
// # Safety
// `raw` must be a valid NUL-terminated string; `out` must be writable.
enum FactsimStatus factsim_parse_tuples(const char *raw, struct FactsimFactSet **out);

// Reads a fact set from its JSON form.
//
// # Safety
// `json` must be a valid NUL-terminated string; `out` must be writable.
enum FactsimStatus factsim_factset_from_json(const char *json, struct FactsimFactSet **out);

// Appends a tuple from document `source`.
//
// # Safety
// `set` must be a live handle; strings must be valid NUL-terminated strings.
enum FactsimStatus factsim_factset_push(struct FactsimFactSet *set,
                                        const char *subject,
                                        const char *description,
                                        size_t source);

// Number of tuples, or 0 for NULL.
//
// # Safety
// `set` must be NULL or a live handle.
size_t factsim_factset_len(const struct FactsimFactSet *set);

// # Safety
// `set` must be a live handle; `out` must be writable.
enum FactsimStatus factsim_factset_to_json(const struct FactsimFactSet *set, char **out);

// # Safety
// `set` must be NULL or a handle from this library, not yet freed.
void factsim_factset_free(struct FactsimFactSet *set);

// The deterministic offline trigram encoder.
//
// # Safety
// `out` must be writable.
enum FactsimStatus factsim_encoder_test(struct FactsimEncoder **out);

// An OpenAI-compatible embeddings endpoint. `api_key` may be NULL.
//
// # Safety
// String arguments must be NULL (where allowed) or valid NUL-terminated
// strings; `out` must be writable.
enum FactsimStatus factsim_encoder_remote(const char *base_url,
                                          const char *api_key,
                                          const char *model,
                                          struct FactsimEncoder **out);

// # Safety
// `encoder` must be NULL or a handle from this library, not yet freed.
void factsim_encoder_free(struct FactsimEncoder *encoder);

// Embeds both sets and scores the summary against the reviews.
//
// # Safety
// Handles must be live; `out` must be writable.
enum FactsimStatus factsim_score(const struct FactsimEncoder *encoder,
                                 const struct FactsimFactSet *reviews,
                                 const struct FactsimFactSet *summary,
                                 struct FactsimReport **out);

// # Safety
// `report` must be a live handle; `out` must be writable.
enum FactsimStatus factsim_report_scores(const struct FactsimReport *report,
                                         struct FactsimScores *out);

// Full report as JSON.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum FactsimStatus factsim_report_to_json(const struct FactsimReport *report, char **out);

// Labeled similarity matrix as CSV.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum FactsimStatus factsim_report_matrix_csv(const struct FactsimReport *report, char **out);

// # Safety
// `report` must be NULL or a handle from this library, not yet freed.
void factsim_report_free(struct FactsimReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FACTSIM_H */
