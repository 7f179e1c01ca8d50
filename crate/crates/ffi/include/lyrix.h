#ifndef LYRIX_H
#define LYRIX_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum LyrixStatus {
  LYRIX_STATUS_OK = 0,
  LYRIX_STATUS_NULL_POINTER = 1,
  LYRIX_STATUS_INVALID_UTF8 = 2,
  LYRIX_STATUS_IO = 3,
  LYRIX_STATUS_PARSE = 4,
  LYRIX_STATUS_INVALID_ARGUMENT = 5,
  LYRIX_STATUS_PRECONDITION = 6,
  LYRIX_STATUS_OUT_OF_RANGE = 7,
  LYRIX_STATUS_PANIC = 8,
} LyrixStatus;

/*
 Slang and base pronouncing dictionaries.
 */
typedef struct LyrixDictionaries LyrixDictionaries;

/*
 Result of one rhyme detection call.
 */
typedef struct LyrixRhymeAnalysis LyrixRhymeAnalysis;

/*
 One detected rhyme. Line indices are 0-based; internal rhymes have
 `line_i == line_j`.
 */
typedef struct LyrixRhymePair {
  size_t line_i;
  size_t line_j;
  double score;
  size_t span;
  bool end_rhyme;
  bool internal;
} LyrixRhymePair;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. Valid until the
 next call into the library from the same thread.
 */
const char *lyrix_last_error_message(void);

/*
 Library version as a static string.
 */
const char *lyrix_version(void);

/*
 Releases a string returned by the library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed already.
 */
void lyrix_string_free(char *s);

/*
 Loads the base dictionary and, when `slang_path` is non-null, the slang
 dictionary layered over it. Malformed lines are skipped.

 # Safety
 Paths must be valid C strings; `out` must be writable.
 */
enum LyrixStatus lyrix_dictionaries_load(const char *base_path,
                                         const char *slang_path,
                                         struct LyrixDictionaries **out);

/*
 # Safety
 `dicts` must come from `lyrix_dictionaries_load` and not be freed yet.
 */
void lyrix_dictionaries_free(struct LyrixDictionaries *dicts);

/*
 Syllables of one lowercase token via slang, base, then the estimator.

 # Safety
 `dicts` must be a live handle, `token` a valid C string, `out` writable.
 */
enum LyrixStatus lyrix_syllable_count(const struct LyrixDictionaries *dicts,
                                      const char *token,
                                      size_t *out);

/*
 Detects rhymes over `n_lines` cleaned lines. `config_toml` may be null
 for the defaults or hold `[rhyme]`-section keys (threshold, window,
 max_span, equivalence_classes, final_consonant_deletion).

 # Safety
 `dicts` must be a live handle; `lines` must point to `n_lines` valid C
 strings; `out` must be writable.
 */
enum LyrixStatus lyrix_detect_rhymes(const struct LyrixDictionaries *dicts,
                                     const char *const *lines,
                                     size_t n_lines,
                                     const char *config_toml,
                                     struct LyrixRhymeAnalysis **out);

/*
 # Safety
 `analysis` must come from `lyrix_detect_rhymes` and not be freed yet.
 */
void lyrix_rhyme_analysis_free(struct LyrixRhymeAnalysis *analysis);

/*
 Number of pairs, cross-line and internal. Zero for a null handle.

 # Safety
 `analysis` must be a live handle or null.
 */
size_t lyrix_rhyme_pair_count(const struct LyrixRhymeAnalysis *analysis);

/*
 # Safety
 `analysis` must be a live handle; `out` must be writable.
 */
enum LyrixStatus lyrix_rhyme_pair(const struct LyrixRhymeAnalysis *analysis,
                                  size_t index,
                                  struct LyrixRhymePair *out);

/*
 Cross-line pairs per line and matched syllables per line.

 # Safety
 `analysis` must be a live handle; both out-pointers must be writable.
 */
enum LyrixStatus lyrix_rhyme_density(const struct LyrixRhymeAnalysis *analysis,
                                     double *out_pairs,
                                     double *out_syllables);

/*
 Full analysis as JSON; release with `lyrix_string_free`.

 # Safety
 `analysis` must be a live handle; `out` must be writable.
 */
enum LyrixStatus lyrix_rhyme_analysis_json(const struct LyrixRhymeAnalysis *analysis, char **out);

/*
 Mean type-token ratio over `window`-token segments.

 # Safety
 `tokens` must point to `n_tokens` valid C strings; `out` must be writable.
 */
enum LyrixStatus lyrix_windowed_ttr(const char *const *tokens,
                                    size_t n_tokens,
                                    size_t window,
                                    double *out);

/*
 Shannon entropy in nats of a probability vector.

 # Safety
 `dist` must point to `n` doubles; `out` must be writable.
 */
enum LyrixStatus lyrix_topic_entropy(const double *dist, size_t n, double *out);

/*
 Changepoint detection over a series; the report (detections and
 per-step probabilities) comes back as JSON. `config_toml` may be null
 or hold `[bocpd]`-section keys.

 # Safety
 `series` must point to `n` doubles; `out` must be writable.
 */
enum LyrixStatus lyrix_bocpd_json(const double *series,
                                  size_t n,
                                  const char *config_toml,
                                  char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LYRIX_H */
