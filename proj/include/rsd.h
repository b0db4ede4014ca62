// Copyright 2026 The rsd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the rsd retrieval speculative decoding engine.
 *
 * All functions return an rsd_status; on failure rsd_last_error() holds a
 * thread-local message until the next call on the same thread. Handles are
 * opaque and owned by the caller; free them with the matching *_free.
 * Harness entry points take their configuration as a JSON document string
 * (see README for the schema); NULL means all defaults.
 */
#ifndef RSD_H_
#define RSD_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RSD_BUILDING_LIBRARY)
#    define RSD_API __declspec(dllexport)
#  else
#    define RSD_API __declspec(dllimport)
#  endif
#else
#  define RSD_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsd_status {
  RSD_OK = 0,
  RSD_ERR_INVALID_ARGUMENT = 1,
  RSD_ERR_CONFIG = 2,
  RSD_ERR_DATA = 3,
  RSD_ERR_IO = 4,
  RSD_ERR_STRUCTURE = 5,
  RSD_ERR_BUFFER_TOO_SMALL = 6,
  RSD_ERR_INTERNAL = 7
} rsd_status;

typedef enum rsd_policy_mode {
  RSD_POLICY_GREEDY = 0,
  RSD_POLICY_TOPK = 1,
  RSD_POLICY_TOPP = 2,
  RSD_POLICY_RELAXED = 3
} rsd_policy_mode;

typedef struct rsd_model rsd_model;
typedef struct rsd_pool rsd_pool;

typedef struct rsd_decode_options {
  int speculative;              /* 0: autoregressive baseline */
  rsd_policy_mode policy;
  uint32_t k;
  double p;
  uint32_t draft_max;           /* K */
  uint32_t prefix_max;
  uint32_t prefix_min;
  double backoff_retry_fraction;
  uint32_t overlay_depth;
  uint32_t max_new_tokens;
  int32_t eos;
} rsd_decode_options;

typedef struct rsd_decode_stats {
  uint64_t tokens_generated;
  uint64_t model_calls;
  uint64_t fallback_steps;
  uint64_t accepted_draft_tokens;
  double aal;
  double retrieval_seconds;
  double wall_seconds;
  double gen_speed_tokens_per_second;
} rsd_decode_stats;

RSD_API const char* rsd_version(void);
RSD_API const char* rsd_last_error(void);
RSD_API const char* rsd_status_name(rsd_status status);

/* ---- reference model ---------------------------------------------------- */

/* `tokens` holds n_sequences sequences back to back; lengths[i] is the
 * length of sequence i. */
RSD_API rsd_status rsd_model_fit(const int32_t* tokens, const size_t* lengths, size_t n_sequences,
                                 uint32_t order, double alpha, uint32_t vocab_size, rsd_model** out);
/* JSON Lines corpus, one token array per line. */
RSD_API rsd_status rsd_model_fit_file(const char* path, uint32_t order, double alpha, uint32_t vocab_size,
                                      rsd_model** out);
RSD_API rsd_status rsd_model_save(const rsd_model* model, const char* path);
RSD_API rsd_status rsd_model_load(const char* path, rsd_model** out);
RSD_API void rsd_model_free(rsd_model* model);
RSD_API size_t rsd_model_vocab_size(const rsd_model* model);
RSD_API rsd_status rsd_model_next_distribution(const rsd_model* model, const int32_t* context, size_t n,
                                               double* probs, size_t probs_len);

/* ---- retrieval pools ---------------------------------------------------- */

RSD_API rsd_status rsd_pool_create(const char* group_id, uint32_t vocab_size, uint32_t max_branch_depth,
                                   rsd_pool** out);
/* Inserts a knowledge text as all of its depth-capped suffixes. */
RSD_API rsd_status rsd_pool_insert_text(rsd_pool* pool, const int32_t* tokens, size_t n);
/* Inserts one root-anchored sequence. */
RSD_API rsd_status rsd_pool_insert_sequence(rsd_pool* pool, const int32_t* tokens, size_t n);
RSD_API rsd_status rsd_pool_save(const rsd_pool* pool, const char* path);
RSD_API rsd_status rsd_pool_load(const char* path, rsd_pool** out);
RSD_API void rsd_pool_free(rsd_pool* pool);
RSD_API uint64_t rsd_pool_entries(const rsd_pool* pool);
RSD_API uint64_t rsd_pool_nodes(const rsd_pool* pool);
/* Writes up to max_tokens (token, frequency) pairs of the pruned subtree
 * under `prefix` in DFS order with depths; *out_len receives the count. */
RSD_API rsd_status rsd_pool_retrieve(const rsd_pool* pool, const int32_t* prefix, size_t prefix_len,
                                     uint32_t max_tokens, int32_t* tokens, uint64_t* frequencies,
                                     uint32_t* depths, size_t capacity, size_t* out_len);

/* ---- decoding ------------------------------------------------------------ */

RSD_API void rsd_decode_options_init(rsd_decode_options* options);
/* `pool` may be NULL. If `out_tokens` is too small, *out_len is set to the
 * needed size and RSD_ERR_BUFFER_TOO_SMALL is returned. */
RSD_API rsd_status rsd_decode(const rsd_model* model, const rsd_pool* pool, const int32_t* prompt,
                              size_t prompt_len, const rsd_decode_options* options, int32_t* out_tokens,
                              size_t capacity, size_t* out_len, rsd_decode_stats* stats);

/* ---- harness -------------------------------------------------------------- */

/* Synthetic corpus -> JSON Lines at out_path (seed from config "seeds"[0]). */
RSD_API rsd_status rsd_synth(const char* config_json, const char* out_path);
/* Fits the model and builds the pools of the first configured scheme and
 * pool cap. Writes model.bin and manifest.json next to one .trie per group. */
RSD_API rsd_status rsd_build_pools(const char* config_json, const char* corpus_path, const char* out_dir);
/* Decodes every record of corpus_path (or the first config "eval_records")
 * with the pools in pools_dir; writes a JSON document to out_path. */
RSD_API rsd_status rsd_decode_corpus(const char* config_json, const char* pools_dir, const char* corpus_path,
                                     const char* out_path);
/* Runs the experiment grid and writes the report JSON to report_path. */
RSD_API rsd_status rsd_run_experiment(const char* config_json, const char* report_path);

#ifdef __cplusplus
}
#endif

#endif /* RSD_H_ */
