#ifndef KGREC_H
#define KGREC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KgrecStatus {
  KGREC_STATUS_OK = 0,
  KGREC_STATUS_NULL_POINTER = 1,
  KGREC_STATUS_INVALID_UTF8 = 2,
  KGREC_STATUS_NOT_FOUND = 3,
  KGREC_STATUS_INVALID_ARGUMENT = 4,
  KGREC_STATUS_MISSING_ARTIFACT = 5,
  KGREC_STATUS_IO = 6,
  KGREC_STATUS_PARSE = 7,
  KGREC_STATUS_INTERNAL = 8,
} KgrecStatus;

// Loaded fused records plus feature vectors for every movie.
typedef struct KgrecEngine KgrecEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next call.
const char *kgrec_last_error_message(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void kgrec_string_free(char *s);

// Edit distance between two UTF-8 strings, counted in characters.
//
// # Safety
// `a` and `b` must be null or NUL-terminated; `out` must be writable.
enum KgrecStatus kgrec_levenshtein(const char *a, const char *b, size_t *out);

// Opens the artifacts written by the pipeline stages in `work_dir`.
//
// # Safety
// `work_dir` must be NUL-terminated; `out` must be writable. Free the handle with
// [`kgrec_engine_free`].
enum KgrecStatus kgrec_engine_open(const char *work_dir, struct KgrecEngine **out);

// # Safety
// `engine` must be null or a handle from [`kgrec_engine_open`] not yet freed.
void kgrec_engine_free(struct KgrecEngine *engine);

// # Safety
// `engine` must be a live handle; `out` must be writable.
enum KgrecStatus kgrec_engine_movie_count(const struct KgrecEngine *engine, size_t *out);

// Top-`k` recommendations for `movie` as a JSON array of `{"movie", "score"}` objects.
// `weights` points at five feature weights (text, director, producer, actors, genre),
// or is null for equal weights.
//
// # Safety
// `engine` must be a live handle, `movie` NUL-terminated, `weights` null or five readable
// doubles, `out_json` writable.
enum KgrecStatus kgrec_engine_recommend_json(const struct KgrecEngine *engine,
                                             const char *movie,
                                             size_t k,
                                             const double *weights,
                                             char **out_json);

// Weighted similarity of two movies in the engine.
//
// # Safety
// As for [`kgrec_engine_recommend_json`]; `out` must be writable.
enum KgrecStatus kgrec_engine_similarity(const struct KgrecEngine *engine,
                                         const char *a,
                                         const char *b,
                                         const double *weights,
                                         double *out);

// Harmonic mean of precision and recall; 0 when both are 0.
double kgrec_f1(double precision, double recall);

// Percentage of the catalogue that was ever recommended.
double kgrec_coverage(size_t recommended_ever, size_t catalog_size);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KGREC_H */
