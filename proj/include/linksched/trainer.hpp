#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "linksched/baselines.hpp"
#include "linksched/dataset_io.hpp"
#include "linksched/embednn.hpp"

namespace linksched {

enum class TrainMode { kSupervised, kUnsupervised };

struct TrainConfig {
  TrainMode mode = TrainMode::kSupervised;
  int epochs_max = 100;
  int batch_size = 16;  // layouts per optimizer step
  AdamConfig adam;
  int patience = 10;
  double val_fraction = 0.1;
  double omega_loss = 0.0;
  std::uint64_t seed = 1;
  Architecture arch;
  ChannelConfig channel;
  // Normalizer for the validation ratio when records carry no labels;
  // unset means BruteForce up to 12 links, Greedy beyond.
  std::optional<OracleKind> val_oracle;

  void validate() const;
  // Stable text form; its SHA-256 is stored in checkpoints.
  std::string canonical() const;
  std::string hash() const;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;  // NaN when unlabeled
  double val_ratio = 0.0;
  double val_accuracy = 0.0;
  double val_active_fraction = 0.0;
  bool improved = false;
};

struct TrainResult {
  ModelParams model;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val_ratio = 0.0;
  double best_val_active_fraction = 0.0;
  double omega_loss = 0.0;
};

/// Hold-out split, seeded shuffling, mini-batch Adam, early stopping on the
/// validation sum-rate ratio. Returns the parameters of the best epoch.
/// Throws InputError on an empty dataset or missing labels in supervised mode,
/// NumericalError on a non-finite loss.
TrainResult train(const Dataset& data, const TrainConfig& cfg);

// Trains with cfg.omega_loss; if that model activates more than 95% of
// validation links, retrains with each candidate and keeps the best validation ratio.
TrainResult train_unsupervised_tuned(const Dataset& data, const TrainConfig& cfg,
                                     const std::vector<double>& candidates = {0.005, 0.01, 0.02});

// Trains once per candidate omega and keeps the best validation ratio.
TrainResult train_omega_sweep(const Dataset& data, const TrainConfig& cfg, const std::vector<double>& candidates);

struct LayoutEval {
  double rate = 0.0;
  double oracle_rate = 0.0;
  double ratio = 0.0;
  double accuracy = 0.0;
  std::size_t active = 0;
  std::size_t num_links = 0;
  double inference_s = 0.0;
};

struct EvalReport {
  double classifier_accuracy = 0.0;
  double avg_sum_rate_ratio = 0.0;
  double mean_active_fraction = 0.0;
  std::string oracle;
  std::string scheduler;
  std::vector<LayoutEval> per_layout;
  double runtime_s = 0.0;
  double mean_inference_s = 0.0;
};

using Scheduler = std::function<ScheduleVector(const DatasetRecord&, const ChannelMatrix&, std::size_t index)>;

// Oracle schedule for a record; reuses the stored label when its provenance matches.
ScheduleVector oracle_schedule(const DatasetRecord& record, const ChannelMatrix& ch, const OracleKind& oracle);

EvalReport evaluate_scheduler(const Scheduler& scheduler, const std::string& name, const Dataset& test,
                              const ChannelConfig& ch_cfg, const OracleKind& oracle);

// Builds each graph with the model's q and topology and runs eval-mode inference.
EvalReport evaluate(const ModelParams& model, const Dataset& test, const ChannelConfig& ch_cfg,
                    const OracleKind& oracle);

// Baseline (Greedy, StrongestFraction, RandomActive, AllActive, BruteForce) as a scheduler.
// RandomActive draws use mix_seed(seed, index).
Scheduler baseline_scheduler(const OracleKind& kind, std::uint64_t seed);

SchedGraph graph_for(const NetworkLayout& layout, const Architecture& arch);

// Delimiter-separated tables with a header row.
void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);
void write_report_csv(std::ostream& os, const EvalReport& report);

}  // namespace linksched
