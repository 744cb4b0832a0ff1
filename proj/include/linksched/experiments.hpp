#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "linksched/trainer.hpp"

namespace linksched {

struct DataSpec {
  LayoutConfig layout;
  double shadowing_std = 0.0;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  std::string key() const;
};

struct TrainSpec {
  DataSpec data;
  TrainConfig train;
  OracleKind label_oracle = OracleKind::greedy();
  bool tune_omega = false;  // unsupervised only: train_unsupervised_tuned

  std::string key() const;
};

/// One cell of a sweep table: a scheduler evaluated on a test set.
struct SweepCell {
  enum class Kind { kLearned, kBaseline, kStrongestTuned };

  std::string table;
  std::string row;      // e.g. "supervised", "greedy"
  std::string setting;  // e.g. "T=2"
  Kind kind = Kind::kLearned;
  std::optional<TrainSpec> train;  // learned cells; also the tuning set for kStrongestTuned
  OracleKind baseline = OracleKind::all_active();
  DataSpec test;
  std::optional<OracleKind> normalizer;  // unset: automatic by test size
};

struct SweepRow {
  SweepCell cell;
  bool ok = false;
  std::string error;
  EvalReport report;
  int best_epoch = 0;
  int epochs_run = 0;
  double omega_loss = 0.0;
  double strongest_fraction = 0.0;
  double train_s = 0.0;
  std::vector<EpochRecord> history;
};

// Runs generate -> label -> train -> evaluate for every cell. Datasets and
// trained models are cached by key, so cells that share a training spec share
// one model. A failing cell records its error and the sweep continues.
std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const ChannelConfig& ch_cfg);

struct ReproOptions {
  std::string table;  // T, q, K, L, dist, shadow, algos, size
  std::size_t n_train = 500;
  std::size_t n_test = 1000;
  std::uint64_t seed = 1;
  bool big = false;  // adds the L = 500 scenario to the L table
  TrainConfig train;
};

std::vector<std::string> repro_tables();
std::vector<SweepCell> repro_cells(const ReproOptions& opts);

// Header: table,row,setting,scheduler,normalizer,status,accuracy,ratio,active_fraction,
//         best_epoch,epochs_run,omega_loss,strongest_f,train_s,eval_s,mean_inference_s,error
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
// Long-format training curves: table,row,setting,epoch,train_loss,train_accuracy,val_ratio,val_accuracy,val_active_fraction
void write_sweep_history_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace linksched
