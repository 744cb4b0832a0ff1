/* C interface to the linksched library.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an ls_status; on
 * failure ls_last_error() describes the problem (thread-local, valid until the
 * next failing call on the same thread). Status values match the CLI exit
 * codes.
 */
#ifndef LINKSCHED_H_
#define LINKSCHED_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(LINKSCHED_BUILDING_DLL)
#    define LINKSCHED_API __declspec(dllexport)
#  else
#    define LINKSCHED_API __declspec(dllimport)
#  endif
#else
#  define LINKSCHED_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ls_status {
  LS_OK = 0,
  LS_ERR_INTERNAL = 1,
  LS_ERR_CONFIG = 2,
  LS_ERR_INPUT = 3,
  LS_ERR_NUMERICAL = 4,
  LS_ERR_COMPAT = 5,
  LS_ERR_STATE = 6
} ls_status;

typedef struct ls_dataset ls_dataset;
typedef struct ls_model ls_model;

typedef struct ls_layout_config {
  int num_pairs;
  double area_edge; /* meters */
  double d_min;     /* meters */
  double d_max;     /* meters */
} ls_layout_config;

typedef struct ls_channel_config {
  double noise_psd_dbm_hz;
  double bandwidth_hz;
  double carrier_freq_hz;
  double antenna_height_m;
  double tx_power_dbm;
  double shadowing_std_db; /* overridden per record by the dataset's shadowing_std */
} ls_channel_config;

typedef struct ls_train_config {
  int unsupervised; /* 0: cross entropy on labels, 1: reciprocal sum rate */
  int epochs_max;
  int batch_size;
  double lr;
  double beta1;
  double beta2;
  double eps;
  int patience;
  double val_fraction;
  double omega_loss;
  int tune_omega; /* unsupervised: retune omega when the model activates > 95% of links */
  uint64_t seed;
  int embed_dim;
  int iterations;
  int quant_bits;
  int hidden;
  int knn_k; /* 0: fully connected */
} ls_train_config;

typedef struct ls_eval_summary {
  double accuracy;
  double ratio;
  double mean_active_fraction;
  double runtime_s;
  size_t num_layouts;
} ls_eval_summary;

typedef struct ls_repro_options {
  size_t n_train;
  size_t n_test;
  uint64_t seed;
  int big;
  ls_train_config train;
} ls_repro_options;

LINKSCHED_API const char* ls_last_error(void);
LINKSCHED_API const char* ls_version(void);

LINKSCHED_API void ls_layout_config_default(ls_layout_config* cfg);
LINKSCHED_API void ls_channel_config_default(ls_channel_config* cfg);
LINKSCHED_API void ls_train_config_default(ls_train_config* cfg);
LINKSCHED_API void ls_repro_options_default(ls_repro_options* opts);

/* Datasets. Layout i is generated from a seed derived from (seed, i). */
LINKSCHED_API ls_status ls_dataset_generate(const ls_layout_config* cfg, size_t count, uint64_t seed,
                                            double shadowing_std, ls_dataset** out);
LINKSCHED_API ls_status ls_dataset_load(const char* path, ls_dataset** out);
LINKSCHED_API ls_status ls_dataset_save(const ls_dataset* data, const char* path);
LINKSCHED_API size_t ls_dataset_size(const ls_dataset* data);
LINKSCHED_API ls_status ls_dataset_num_pairs(const ls_dataset* data, size_t index, int* num_pairs);
/* oracle: "brute" or "greedy". */
LINKSCHED_API ls_status ls_dataset_label(ls_dataset* data, const ls_channel_config* ch, const char* oracle);
/* Copies the label of record index into out (capacity cap); LS_ERR_INPUT if unlabeled. */
LINKSCHED_API ls_status ls_dataset_get_label(const ls_dataset* data, size_t index, uint8_t* out, size_t cap);
/* Weighted sum rate (bits/s) of schedule rho on record index. */
LINKSCHED_API ls_status ls_dataset_sum_rate(const ls_dataset* data, size_t index, const ls_channel_config* ch,
                                            const uint8_t* rho, size_t len, double* total);
/* Writes the interference graph of record index as a text edge list.
 * topology: "full" or "knn:K". */
LINKSCHED_API ls_status ls_dataset_dump_graph(const ls_dataset* data, size_t index, int quant_bits,
                                              const char* topology, const char* path);
LINKSCHED_API void ls_dataset_free(ls_dataset* data);

/* Models. */
LINKSCHED_API ls_status ls_model_train(const ls_dataset* data, const ls_channel_config* ch,
                                       const ls_train_config* cfg, ls_model** out);
LINKSCHED_API ls_status ls_model_save(const ls_model* model, const char* path);
LINKSCHED_API ls_status ls_model_load(const char* path, ls_model** out);
LINKSCHED_API ls_status ls_model_arch(const ls_model* model, int* embed_dim, int* iterations, int* quant_bits,
                                      int* hidden, int* knn_k);
/* LS_ERR_COMPAT when quant_bits (if > 0) or topology (if non-null) differ from the checkpoint. */
LINKSCHED_API ls_status ls_model_check_compatible(const ls_model* model, int quant_bits, const char* topology);
/* Per-epoch history of a model trained in this process, as CSV. */
LINKSCHED_API ls_status ls_model_write_history(const ls_model* model, const char* path);
LINKSCHED_API ls_status ls_model_best_epoch(const ls_model* model, int* best_epoch, double* best_val_ratio);
/* Eval-mode activation probabilities and hard decisions for record index. */
LINKSCHED_API ls_status ls_model_predict(const ls_model* model, const ls_dataset* data, size_t index, double* probs,
                                         uint8_t* rho, size_t cap);
LINKSCHED_API void ls_model_free(ls_model* model);

/* Evaluates model (scheduler "learned") or a baseline scheduler ("greedy",
 * "brute", "all", "random:P", "strongest:F"; model may then be NULL) against
 * oracle. report_path may be NULL; otherwise a per-layout CSV is written. */
LINKSCHED_API ls_status ls_evaluate(const ls_model* model, const char* scheduler, const ls_dataset* test,
                                    const ls_channel_config* ch, const char* oracle, const char* report_path,
                                    ls_eval_summary* out);

/* Runs one reproduction table (T, q, K, L, dist, shadow, algos, size) and writes
 * <out_dir>/<table>.csv and <out_dir>/<table>_history.csv. */
LINKSCHED_API ls_status ls_repro(const char* table, const ls_repro_options* opts, const ls_channel_config* ch,
                                 const char* out_dir);

/* Lower-case hex SHA-256 of a file; out must hold 65 bytes. */
LINKSCHED_API ls_status ls_sha256_file(const char* path, char* out, size_t cap);

#ifdef __cplusplus
}
#endif

#endif /* LINKSCHED_H_ */
