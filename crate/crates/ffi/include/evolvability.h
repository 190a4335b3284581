#ifndef EVOLVABILITY_H
#define EVOLVABILITY_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every exported function.
 */
typedef enum EvoStatus {
  EVO_STATUS_OK = 0,
  EVO_STATUS_NULL_POINTER = 1,
  EVO_STATUS_INVALID_ARGUMENT = 2,
  EVO_STATUS_OUT_OF_RANGE = 3,
  EVO_STATUS_CONFIG = 4,
  EVO_STATUS_EVALUATION = 5,
  EVO_STATUS_INTEGRITY = 6,
  EVO_STATUS_IO = 7,
  EVO_STATUS_FORMAT = 8,
  /**
   * Some runs of a battery failed; see the output manifest.
   */
  EVO_STATUS_RUNS_FAILED = 9,
  EVO_STATUS_PANIC = 10,
} EvoStatus;

typedef enum EvoAbstractVariant {
  EVO_ABSTRACT_VARIANT_DRIFT = 0,
  EVO_ABSTRACT_VARIANT_NICHED = 1,
} EvoAbstractVariant;

/**
 * Statistics of one run.
 */
typedef struct EvoRecord EvoRecord;

/**
 * A loaded lookup table.
 */
typedef struct EvoTable EvoTable;

/**
 * Pearson correlation; `defined` is 0 when either sample has zero variance.
 */
typedef struct EvoCorrelation {
  uint8_t defined;
  uint64_t n;
  double r;
  double p;
  double slope;
  double intercept;
} EvoCorrelation;

typedef struct EvoAbstractParams {
  double init_evolvability;
  double evo_mut_prob;
  double evo_mut_halfwidth;
  uint64_t pop_size;
  /**
   * Zero selects the variant's default length.
   */
  uint64_t generations;
  uint64_t niche_capacity;
  uint64_t offspring_per_parent;
  /**
   * 0 independent lineages, 1 resampling.
   */
  uint8_t resampling;
  uint64_t checkpoint_interval;
} EvoAbstractParams;

typedef struct EvoCheckpoint {
  uint64_t checkpoint;
  uint64_t pop_size;
  double pop_mean_evolvability;
  double niche_mean_evolvability;
  uint64_t occupied_niches;
  uint64_t cumulative_individuals;
} EvoCheckpoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next
 * call into this library from the same thread.
 */
const char *evo_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *evo_version(void);

/**
 * Number of connection genes in a fixed-topology genome.
 */
size_t evo_genome_length(void);

/**
 * Genotype id of `len` trits (0 neutral, 1 inhibitory, 2 excitatory).
 *
 * # Safety
 * `trits` must point to `len` readable bytes; `out_id` must be writable.
 */
enum EvoStatus evo_genotype_encode(const uint8_t *trits, size_t len, uint64_t *out_id);

/**
 * Writes the 18 trits of genotype `id` into `out_trits`.
 *
 * # Safety
 * `out_trits` must point to `len` writable bytes.
 */
enum EvoStatus evo_genotype_decode(uint64_t id, uint8_t *out_trits, size_t len);

/**
 * # Safety
 * `x` and `y` must each point to `n` doubles; `out` must be writable.
 */
enum EvoStatus evo_pearson(const double *x, const double *y, size_t n, struct EvoCorrelation *out);

/**
 * Opens a table from its manifest, verifying it against the maze file at
 * `maze_path` (null for the built-in maze).
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be writable.
 */
enum EvoStatus evo_table_open(const char *manifest_path,
                              const char *maze_path,
                              struct EvoTable **out);

/**
 * # Safety
 * `table` must be null or a handle from [`evo_table_open`] not yet freed.
 */
void evo_table_free(struct EvoTable *table);

/**
 * # Safety
 * `table` must be a live handle; `out_len` must be writable.
 */
enum EvoStatus evo_table_len(const struct EvoTable *table, uint64_t *out_len);

/**
 * Niche and evolvability of the genotype with compact index `compact`.
 *
 * # Safety
 * `table` must be a live handle; outputs must be writable.
 */
enum EvoStatus evo_table_lookup(const struct EvoTable *table,
                                uint64_t compact,
                                uint16_t *out_niche,
                                uint8_t *out_evolvability);

/**
 * Parent-offspring evolvability correlation over `samples` random pairs.
 *
 * # Safety
 * `table` must be a live handle; `out` must be writable.
 */
enum EvoStatus evo_table_heritability(const struct EvoTable *table,
                                      size_t samples,
                                      uint64_t seed,
                                      struct EvoCorrelation *out);

/**
 * Fills `out` with the default abstract-model parameters.
 *
 * # Safety
 * `out` must be writable.
 */
enum EvoStatus evo_abstract_params_default(struct EvoAbstractParams *out);

/**
 * Runs one abstract-model simulation.
 *
 * # Safety
 * `params` must be readable and `out` writable.
 */
enum EvoStatus evo_abstract_run(enum EvoAbstractVariant variant,
                                const struct EvoAbstractParams *params,
                                uint64_t seed,
                                struct EvoRecord **out);

/**
 * # Safety
 * `record` must be a live handle; `out_len` must be writable.
 */
enum EvoStatus evo_record_len(const struct EvoRecord *record, size_t *out_len);

/**
 * # Safety
 * `record` must be a live handle; `out` must be writable.
 */
enum EvoStatus evo_record_row(const struct EvoRecord *record,
                              size_t index,
                              struct EvoCheckpoint *out);

/**
 * # Safety
 * `record` must be null or a handle from [`evo_abstract_run`] not yet freed.
 */
void evo_record_free(struct EvoRecord *record);

/**
 * Runs the experiment battery described by a JSON config file. Returns
 * `RunsFailed` when the battery completed with failed runs.
 *
 * # Safety
 * `config_path` must be a NUL-terminated string.
 */
enum EvoStatus evo_run_experiment(const char *config_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EVOLVABILITY_H */
