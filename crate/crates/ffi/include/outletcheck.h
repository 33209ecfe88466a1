#ifndef OUTLETCHECK_H
#define OUTLETCHECK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum OcStatus {
  OC_STATUS_OK = 0,
  OC_STATUS_NULL_POINTER = 1,
  OC_STATUS_INVALID_UTF8 = 2,
  OC_STATUS_INVALID_ARGUMENT = 3,
  OC_STATUS_NOT_FOUND = 4,
  OC_STATUS_IO = 5,
  OC_STATUS_DATA = 6,
  OC_STATUS_INTERNAL = 7,
} OcStatus;

/**
 * Opaque engine handle.
 */
typedef struct OcEngine OcEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads an engine from a TOML config file.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out` must be writable.
 */
enum OcStatus oc_engine_open(const char *config_path, struct OcEngine **out);

/**
 * Releases an engine. Null is ignored.
 *
 * # Safety
 * `engine` must come from [`oc_engine_open`] and not be used afterwards.
 */
void oc_engine_free(struct OcEngine *engine);

/**
 * Builds and stores profiles for every outlet; writes the run report.
 *
 * # Safety
 * `engine` must be a live handle; `out_json` must be writable.
 */
enum OcStatus oc_profile_all_json(const struct OcEngine *engine, char **out_json);

/**
 * Writes the claim verdict as JSON.
 *
 * # Safety
 * `engine` must be a live handle; `claim` NUL-terminated; `out_json` writable.
 */
enum OcStatus oc_score_claim_json(const struct OcEngine *engine,
                                  const char *claim,
                                  char **out_json);

/**
 * Writes the stored profile of `domain` as JSON.
 *
 * # Safety
 * `engine` must be a live handle; `domain` NUL-terminated; `out_json` writable.
 */
enum OcStatus oc_profile_json(const struct OcEngine *engine, const char *domain, char **out_json);

/**
 * Writes the score of a corpus article as JSON.
 *
 * # Safety
 * `engine` must be a live handle; `article_id` NUL-terminated; `out_json` writable.
 */
enum OcStatus oc_score_article_json(const struct OcEngine *engine,
                                    const char *article_id,
                                    char **out_json);

/**
 * `lambda * r_lang + (1 - lambda) * r_site`, clamped to [0,1].
 *
 * # Safety
 * `out` must be writable.
 */
enum OcStatus oc_article_factuality(double r_lang, double r_site, double lambda, double *out);

/**
 * Σ reliability·stance over `n` pairs. Stances must be -1, 0 or 1.
 *
 * # Safety
 * Both arrays must hold `n` values (they may be null when `n` is 0);
 * `out` must be writable.
 */
enum OcStatus oc_claim_raw_score(const double *reliabilities,
                                 const double *stances,
                                 size_t n,
                                 double *out);

/**
 * Canonical domain of a URL or host.
 *
 * # Safety
 * `url` must be NUL-terminated; `out` must be writable.
 */
enum OcStatus oc_normalize_domain(const char *url, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void oc_string_free(char *s);

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *oc_last_error_message(void);

/**
 * Library version, statically allocated.
 */
const char *oc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OUTLETCHECK_H */
