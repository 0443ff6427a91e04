#ifndef COMMENTREL_H
#define COMMENTREL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Label encoding used across the ABI.
 */
typedef enum CrelLabel {
  CREL_LABEL_NOT_USEFUL = 0,
  CREL_LABEL_USEFUL = 1,
} CrelLabel;

typedef enum CrelStatus {
  CREL_STATUS_OK = 0,
  CREL_STATUS_NULL_ARGUMENT = 1,
  CREL_STATUS_INVALID_UTF8 = 2,
  CREL_STATUS_INVALID_ARGUMENT = 3,
  CREL_STATUS_DATA_ERROR = 4,
  CREL_STATUS_IO_ERROR = 5,
  CREL_STATUS_MISSING_COMPONENT = 6,
  CREL_STATUS_PANIC = 7,
} CrelStatus;

/*
 Opaque handle to a fitted pipeline.
 */
typedef struct CrelPipeline CrelPipeline;

typedef struct CrelMetrics {
  double accuracy;
  double precision;
  double recall;
  double f1;
  size_t true_positives;
  size_t false_positives;
  size_t false_negatives;
  size_t true_negatives;
} CrelMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Library version as a static NUL-terminated string.
 */
const char *crel_version(void);

/*
 Message for the last failed call on this thread, or NULL. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *crel_last_error_message(void);

/*
 Trains a pipeline on a labeled CSV (`comment`, optional `code`, `label`
 columns). `run_name` selects a bag-of-words registry run; NULL uses TF-IDF
 with logistic regression.

 # Safety
 String arguments must be NULL or NUL-terminated; `out` must be writable.
 */
enum CrelStatus crel_pipeline_train(const char *train_csv,
                                    const char *run_name,
                                    struct CrelPipeline **out);

/*
 Loads a pipeline saved by `crel_pipeline_save` or the command-line tool.

 # Safety
 `path` must be NUL-terminated; `out` must be writable.
 */
enum CrelStatus crel_pipeline_load(const char *path, struct CrelPipeline **out);

/*
 # Safety
 `pipeline` must come from this library; `path` must be NUL-terminated.
 */
enum CrelStatus crel_pipeline_save(const struct CrelPipeline *pipeline, const char *path);

/*
 Classifies one comment. `code` may be NULL for comments-only pipelines.

 # Safety
 `pipeline` must come from this library; strings must be NULL or
 NUL-terminated; `out_label` must be writable.
 */
enum CrelStatus crel_pipeline_predict(const struct CrelPipeline *pipeline,
                                      const char *comment,
                                      const char *code,
                                      int *out_label);

/*
 Decision score for one comment; the label is Useful when the score exceeds
 the model's threshold (0 for linear models, 0.5 for forests).

 # Safety
 As for `crel_pipeline_predict`.
 */
enum CrelStatus crel_pipeline_score(const struct CrelPipeline *pipeline,
                                    const char *comment,
                                    const char *code,
                                    double *out_score);

/*
 Labels every row of `test_csv` and writes an `id,predicted_label` file.

 # Safety
 `pipeline` must come from this library; paths must be NUL-terminated.
 */
enum CrelStatus crel_pipeline_predict_csv(const struct CrelPipeline *pipeline,
                                          const char *test_csv,
                                          const char *out_csv);

/*
 # Safety
 `pipeline` must be NULL or come from this library and not be used again.
 */
void crel_pipeline_free(struct CrelPipeline *pipeline);

/*
 Metrics for Useful as the positive class. Labels use the `CrelLabel`
 encoding.

 # Safety
 `predicted` and `gold` must point to `len` readable ints; `out` must be
 writable.
 */
enum CrelStatus crel_compute_metrics(const int *predicted,
                                     const int *gold,
                                     size_t len,
                                     struct CrelMetrics *out);

/*
 Registry listing, one run per line. Release with `crel_string_free`.
 */
char *crel_runs_list(void);

/*
 # Safety
 `s` must be NULL or a string returned by this library.
 */
void crel_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMMENTREL_H */
