#ifndef PICLANG_H
#define PICLANG_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PiclangStatus {
  PICLANG_STATUS_OK = 0,
  PICLANG_STATUS_NULL_ARGUMENT = 1,
  PICLANG_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed picture, tiling, automaton or sentence text.
   */
  PICLANG_STATUS_PARSE = 3,
  /**
   * Arguments of the wrong shape, e.g. a 1-picture given to a 2-D system.
   */
  PICLANG_STATUS_CONTRACT = 4,
  PICLANG_STATUS_CAP = 5,
  /**
   * Input outside the fragment an operation supports.
   */
  PICLANG_STATUS_FRAGMENT = 6,
  PICLANG_STATUS_PANIC = 7,
} PiclangStatus;

typedef enum PiclangEncoding {
  PICLANG_ENCODING_PIXEL = 0,
  PICLANG_ENCODING_COORDINATE = 1,
} PiclangEncoding;

typedef struct PiclangAutomaton PiclangAutomaton;

typedef struct PiclangPicture PiclangPicture;

typedef struct PiclangSentence PiclangSentence;

typedef struct PiclangTiling PiclangTiling;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *piclang_last_error(void);

/**
 * # Safety
 * `s` is null or was returned by this library and not yet freed.
 */
void piclang_string_free(char *s);

/**
 * Parses the text format `"d n\nalphabet\nrows"`.
 *
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum PiclangStatus piclang_picture_parse(const char *text, struct PiclangPicture **out);

/**
 * # Safety
 * `p` is null or a live handle.
 */
void piclang_picture_free(struct PiclangPicture *p);

/**
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum PiclangStatus piclang_tiling_from_json(const char *text, struct PiclangTiling **out);

/**
 * # Safety
 * `t` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_tiling_to_json(const struct PiclangTiling *t, char **out);

/**
 * # Safety
 * `t` is null or a live handle.
 */
void piclang_tiling_free(struct PiclangTiling *t);

/**
 * # Safety
 * Handles are live; `out` is writable.
 */
enum PiclangStatus piclang_tiling_recognizes(const struct PiclangTiling *t,
                                             const struct PiclangPicture *p,
                                             bool *out);

/**
 * # Safety
 * `text` is a NUL-terminated string; `out` is writable.
 */
enum PiclangStatus piclang_automaton_from_json(const char *text, struct PiclangAutomaton **out);

/**
 * # Safety
 * `a` is null or a live handle.
 */
void piclang_automaton_free(struct PiclangAutomaton *a);

/**
 * Acceptance in time c·n + c′; c = 1, c′ = 1 is real time.
 *
 * # Safety
 * Handles are live; `out` is writable.
 */
enum PiclangStatus piclang_automaton_accepts(const struct PiclangAutomaton *a,
                                             const struct PiclangPicture *p,
                                             size_t c,
                                             int64_t c_prime,
                                             bool *out);

/**
 * Parses a sentence over the signature (encoding, d, alphabet); `alphabet`
 * lists the letters separated by commas.
 *
 * # Safety
 * Strings are NUL-terminated; `out` is writable.
 */
enum PiclangStatus piclang_sentence_parse(const char *text,
                                          enum PiclangEncoding encoding,
                                          size_t d,
                                          const char *alphabet,
                                          struct PiclangSentence **out);

/**
 * # Safety
 * `s` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_sentence_render(const struct PiclangSentence *s, char **out);

/**
 * # Safety
 * `s` is null or a live handle.
 */
void piclang_sentence_free(struct PiclangSentence *s);

/**
 * Model checking over the encoding named by the sentence signature.
 *
 * # Safety
 * Handles are live; `out` is writable.
 */
enum PiclangStatus piclang_sentence_check(const struct PiclangSentence *s,
                                          const struct PiclangPicture *p,
                                          bool *out);

/**
 * # Safety
 * `t` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_tiling_to_sentence(const struct PiclangTiling *t,
                                              struct PiclangSentence **out);

/**
 * # Safety
 * `s` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_sentence_to_tiling(const struct PiclangSentence *s,
                                              struct PiclangTiling **out);

/**
 * # Safety
 * `a` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_automaton_to_sentence(const struct PiclangAutomaton *a,
                                                 struct PiclangSentence **out);

/**
 * Membership in Mirror (`sym` false) or Sym (`sym` true).
 *
 * # Safety
 * `p` is a live handle; `out` is writable.
 */
enum PiclangStatus piclang_oracle_member(const struct PiclangPicture *p, bool sym, bool *out);

/**
 * The permutation tree T_d, one line per node.
 *
 * # Safety
 * `out` is writable.
 */
enum PiclangStatus piclang_perm_tree(size_t d, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PICLANG_H */
