/* Copyright 2026 The Aloe Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C API of the aloe shared library: opaque handles and error codes.
 * Every function returns ALOE_OK (0) on success; on failure it returns a
 * nonzero code and the message is available via aloe_last_error() on the
 * calling thread.
 */

#ifndef ALOE_C_H
#define ALOE_C_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aloe_status {
  ALOE_OK = 0,
  ALOE_ERR_INVALID_ARGUMENT = 1,
  ALOE_ERR_IO = 2,
  ALOE_ERR_INTERNAL = 3
} aloe_status;

typedef enum aloe_pool_format {
  ALOE_POOL_BINARY = 0,
  ALOE_POOL_TEXT = 1
} aloe_pool_format;

typedef struct aloe_pool aloe_pool; /* opaque */

/* Message of the last failing call on this thread ("" if none). The pointer
 * stays valid until the next failing call on the same thread. */
const char* aloe_last_error(void);

/* ---- pools ---- */

/* Synthesize a long-tail pool: n_classes exponentially decaying classes of
 * top size n0 with imbalance alpha, dim-dimensional Gaussian blob embeddings
 * placed `separation` apart in expectation. Deterministic given seed. */
aloe_status aloe_pool_synth(int32_t n_classes, int32_t n0, double alpha,
                            int32_t dim, double separation, uint64_t seed,
                            aloe_pool** out);

aloe_status aloe_pool_load(const char* path, aloe_pool_format format,
                           aloe_pool** out);
aloe_status aloe_pool_save(const aloe_pool* pool, const char* path,
                           aloe_pool_format format);
void aloe_pool_free(aloe_pool* pool);

int32_t aloe_pool_size(const aloe_pool* pool);
int32_t aloe_pool_dim(const aloe_pool* pool);
int32_t aloe_pool_num_classes(const aloe_pool* pool);

/* ---- end-to-end runs ---- */

/* Synthesize the pool described by the pool.* keys of a config file and
 * write it to out_path (binary format). */
aloe_status aloe_gen_data(const char* config_path, const char* out_path);

/* Run every (strategy x seed) trial of a config file; write per-trial logs,
 * report tables, and SVG charts into out_dir. Trials run in parallel up to
 * the ALOE_WORKERS environment variable; outputs are byte-identical
 * regardless of the worker count. */
aloe_status aloe_run(const char* config_path, const char* out_dir);

/* Re-aggregate trial_*.tsv logs found in log_dir into out_dir. */
aloe_status aloe_report(const char* log_dir, const char* out_dir);

/* Score the unlabeled pool with an OOD scorer ("energy", "margin",
 * "gradnorm", "mahalanobis", "gradproj"). state_path lists the labeled
 * example ids, one per line; a linear head is trained on them first. The
 * score sheet (tau header + id/score/flagged rows) goes to out_path, or to
 * stdout when out_path is "-". */
aloe_status aloe_score(const char* pool_path, const char* state_path,
                       const char* ood_kind, const char* out_path);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* ALOE_C_H */
