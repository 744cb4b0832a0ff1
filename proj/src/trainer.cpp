#include "linksched/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "linksched/error.hpp"
#include "linksched/hash.hpp"
#include "linksched/parallel.hpp"

namespace linksched {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double safe_ratio(double rate, double oracle_rate) {
  return oracle_rate > 0.0 ? rate / oracle_rate : 1.0;
}

double agreement(const Schedule& a, const Schedule& b) {
  if (a.empty()) return 1.0;
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

// Everything per layout that stays fixed through training.
struct Prepared {
  SchedGraph graph;
  ChannelMatrix channel;
  Schedule oracle;
  double oracle_rate = 0.0;
};

struct Validation {
  double ratio = 0.0;
  double accuracy = 0.0;
  double active_fraction = 0.0;
};

Validation validate_model(const ModelParams& model, const std::vector<Prepared>& prep,
                          const std::vector<std::size_t>& idx) {
  std::vector<Validation> per(idx.size());
  parallel_for(idx.size(), [&](std::size_t i) {
    const auto& p = prep[idx[i]];
    const auto sched = predict(model, p.graph);
    per[i].ratio = safe_ratio(sum_rate_total(p.channel, sched.rho), p.oracle_rate);
    per[i].accuracy = agreement(sched.rho, p.oracle);
    per[i].active_fraction =
        static_cast<double>(sched.active_count()) / static_cast<double>(std::max<std::size_t>(1, sched.rho.size()));
  });
  Validation v;
  for (const auto& x : per) {
    v.ratio += x.ratio;
    v.accuracy += x.accuracy;
    v.active_fraction += x.active_fraction;
  }
  const double n = static_cast<double>(std::max<std::size_t>(1, per.size()));
  v.ratio /= n;
  v.accuracy /= n;
  v.active_fraction /= n;
  return v;
}

void copy_parameters(const ModelParams& from, ModelParams& to) {
  to.embed = from.embed;
  to.clf = from.clf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs_max < 1) throw ConfigError("epochs_max must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) throw ConfigError("val_fraction must lie in (0, 1)");
  if (!(omega_loss >= 0.0)) throw ConfigError("omega_loss must be >= 0");
  if (!(adam.lr > 0.0)) throw ConfigError("learning rate must be positive");
  arch.validate();
  channel.validate();
  if (val_oracle) val_oracle->validate();
}

std::string TrainConfig::canonical() const {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "mode=" << (mode == TrainMode::kSupervised ? "sup" : "unsup") << ";epochs=" << epochs_max
     << ";batch=" << batch_size << ";lr=" << adam.lr << ";beta1=" << adam.beta1 << ";beta2=" << adam.beta2
     << ";eps=" << adam.eps << ";patience=" << patience << ";val=" << val_fraction << ";omega=" << omega_loss
     << ";seed=" << seed << ";p=" << arch.embed_dim << ";T=" << arch.iterations << ";q=" << arch.quant_bits
     << ";H=" << arch.hidden << ";topology=" << arch.topology.name() << ";noise=" << channel.noise_psd_dbm_hz
     << ";B=" << channel.bandwidth_hz << ";fc=" << channel.carrier_freq_hz << ";h=" << channel.antenna_height_m
     << ";ptx=" << channel.tx_power_dbm << ";val_oracle=" << (val_oracle ? val_oracle->name() : "auto");
  return os.str();
}

std::string TrainConfig::hash() const { return sha256_hex(canonical()); }

SchedGraph graph_for(const NetworkLayout& layout, const Architecture& arch) {
  return build_graph(layout, QuantizerSpec::for_layout(layout.config, arch.quant_bits), arch.topology);
}

TrainResult train(const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw InputError("training dataset is empty");
  const bool supervised = cfg.mode == TrainMode::kSupervised;
  if (supervised && !all_labeled(data)) throw InputError("supervised training requires labels on every record");

  // Fixed per-layout inputs.
  std::vector<Prepared> prep(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    const auto& rec = data[i];
    auto& p = prep[i];
    p.graph = graph_for(rec.layout, cfg.arch);
    p.channel = record_channel(rec, cfg.channel);
    if (rec.label) {
      p.oracle = *rec.label;
    } else {
      const auto oracle = cfg.val_oracle.value_or(OracleKind::automatic(rec.layout.size()));
      p.oracle = heuristic_schedule(p.channel, oracle, 0).rho;
    }
    p.oracle_rate = sum_rate_total(p.channel, p.oracle);
  });

  // Hold-out split; with too few layouts, validate on the training set.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(mix_seed(cfg.seed, 2));
  std::shuffle(order.begin(), order.end(), split_rng);
  const auto n_val = static_cast<std::size_t>(std::ceil(cfg.val_fraction * static_cast<double>(data.size())));
  std::vector<std::size_t> val_idx, train_idx;
  if (n_val < data.size()) {
    val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  } else {
    train_idx = order;
    val_idx = order;
  }

  TrainResult result;
  result.omega_loss = cfg.omega_loss;
  result.model = init_model(cfg.arch, mix_seed(cfg.seed, 1));
  result.model.config_hash = cfg.hash();
  ModelParams& model = result.model;
  ModelParams best = model;
  AdamState adam = make_adam_state(model);
  result.best_val_ratio = -std::numeric_limits<double>::infinity();

  int since_improvement = 0;
  BatchForward state;
  for (int epoch = 1; epoch <= cfg.epochs_max; ++epoch) {
    std::mt19937_64 rng(mix_seed(cfg.seed, 100 + static_cast<std::uint64_t>(epoch)));
    std::vector<std::size_t> shuffled = train_idx;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    double loss_sum = 0.0;
    double correct = 0.0;
    double labeled_nodes = 0.0;
    const auto bs = static_cast<std::size_t>(cfg.batch_size);
    for (std::size_t start = 0; start < shuffled.size(); start += bs) {
      const std::size_t stop = std::min(shuffled.size(), start + bs);
      std::vector<const SchedGraph*> graphs;
      for (std::size_t i = start; i < stop; ++i) graphs.push_back(&prep[shuffled[i]].graph);

      model.zero_grad();
      const Matrix& probs = forward_batch(model, graphs, Mode::kTrain, state);
      Matrix dlogits(probs.rows(), 2);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < graphs.size(); ++b) {
        const std::size_t idx = shuffled[start + b];
        const std::size_t off = state.offsets[b];
        const std::size_t n = graphs[b]->num_nodes;
        Matrix slice(n, 2);
        for (std::size_t v = 0; v < n; ++v) {
          slice(v, 0) = probs(off + v, 0);
          slice(v, 1) = probs(off + v, 1);
        }
        LossResult lr = supervised ? supervised_loss(slice, *data[idx].label)
                                   : unsupervised_loss(slice, prep[idx].channel, cfg.omega_loss);
        batch_loss += lr.value;
        for (std::size_t v = 0; v < n; ++v) {
          dlogits(off + v, 0) = lr.dlogits(v, 0);
          dlogits(off + v, 1) = lr.dlogits(v, 1);
        }
        if (data[idx].label) {
          const auto& lab = *data[idx].label;
          for (std::size_t v = 0; v < n; ++v) correct += (slice(v, 1) > 0.5 ? 1 : 0) == lab[v];
          labeled_nodes += static_cast<double>(n);
        }
      }
      if (!std::isfinite(batch_loss)) {
        std::ostringstream os;
        os << "non-finite training loss " << batch_loss << " at epoch " << epoch << ", batch starting at " << start
           << " (mode=" << (supervised ? "sup" : "unsup") << ", lr=" << cfg.adam.lr << ", omega=" << cfg.omega_loss
           << ")";
        throw NumericalError(os.str());
      }
      loss_sum += batch_loss;
      backward_batch(model, state, dlogits);
      adam_step(model, adam, cfg.adam);
    }

    const Validation val = validate_model(model, prep, val_idx);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_idx.size());
    rec.train_accuracy = labeled_nodes > 0 ? correct / labeled_nodes : std::numeric_limits<double>::quiet_NaN();
    rec.val_ratio = val.ratio;
    rec.val_accuracy = val.accuracy;
    rec.val_active_fraction = val.active_fraction;
    rec.improved = val.ratio > result.best_val_ratio;
    result.history.push_back(rec);

    if (rec.improved) {
      result.best_val_ratio = val.ratio;
      result.best_val_active_fraction = val.active_fraction;
      result.best_epoch = epoch;
      copy_parameters(model, best);
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      break;
    }
  }
  copy_parameters(best, model);
  model.zero_grad();
  return result;
}

TrainResult train_omega_sweep(const Dataset& data, const TrainConfig& cfg, const std::vector<double>& candidates) {
  if (candidates.empty()) throw ConfigError("omega sweep needs at least one candidate");
  std::optional<TrainResult> best;
  for (double omega : candidates) {
    TrainConfig c = cfg;
    c.omega_loss = omega;
    TrainResult r = train(data, c);
    if (!best || r.best_val_ratio > best->best_val_ratio) best = std::move(r);
  }
  return std::move(*best);
}

TrainResult train_unsupervised_tuned(const Dataset& data, const TrainConfig& cfg,
                                     const std::vector<double>& candidates) {
  TrainResult first = train(data, cfg);
  if (first.best_val_active_fraction <= 0.95 || candidates.empty()) return first;
  return train_omega_sweep(data, cfg, candidates);
}

ScheduleVector oracle_schedule(const DatasetRecord& record, const ChannelMatrix& ch, const OracleKind& oracle) {
  if (record.label && record.oracle && *record.oracle == oracle) return {*record.label, std::nullopt};
  return heuristic_schedule(ch, oracle, 0);
}

Scheduler baseline_scheduler(const OracleKind& kind, std::uint64_t seed) {
  kind.validate();
  return [kind, seed](const DatasetRecord&, const ChannelMatrix& ch, std::size_t index) {
    return heuristic_schedule(ch, kind, mix_seed(seed, index));
  };
}

EvalReport evaluate_scheduler(const Scheduler& scheduler, const std::string& name, const Dataset& test,
                              const ChannelConfig& ch_cfg, const OracleKind& oracle) {
  const auto t0 = Clock::now();
  EvalReport report;
  report.oracle = oracle.name();
  report.scheduler = name;
  report.per_layout.resize(test.size());
  parallel_for(test.size(), [&](std::size_t i) {
    const auto ch = record_channel(test[i], ch_cfg);
    const auto ref = oracle_schedule(test[i], ch, oracle);
    const auto ti = Clock::now();
    const auto sched = scheduler(test[i], ch, i);
    auto& e = report.per_layout[i];
    e.inference_s = seconds_since(ti);
    if (sched.rho.size() != ch.num_links) throw StateError("scheduler returned a schedule of the wrong length");
    e.rate = sum_rate_total(ch, sched.rho);
    e.oracle_rate = sum_rate_total(ch, ref.rho);
    e.ratio = safe_ratio(e.rate, e.oracle_rate);
    e.accuracy = agreement(sched.rho, ref.rho);
    e.active = sched.active_count();
    e.num_links = ch.num_links;
  });
  for (const auto& e : report.per_layout) {
    report.avg_sum_rate_ratio += e.ratio;
    report.classifier_accuracy += e.accuracy;
    report.mean_active_fraction += static_cast<double>(e.active) / static_cast<double>(std::max<std::size_t>(1, e.num_links));
    report.mean_inference_s += e.inference_s;
  }
  if (!test.empty()) {
    const double n = static_cast<double>(test.size());
    report.avg_sum_rate_ratio /= n;
    report.classifier_accuracy /= n;
    report.mean_active_fraction /= n;
    report.mean_inference_s /= n;
  }
  report.runtime_s = seconds_since(t0);
  return report;
}

EvalReport evaluate(const ModelParams& model, const Dataset& test, const ChannelConfig& ch_cfg,
                    const OracleKind& oracle) {
  const Scheduler learned = [&model](const DatasetRecord& rec, const ChannelMatrix&, std::size_t) {
    return predict(model, graph_for(rec.layout, model.arch));
  };
  return evaluate_scheduler(learned, "learned", test, ch_cfg, oracle);
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
  os << "epoch,train_loss,train_accuracy,val_ratio,val_accuracy,val_active_fraction,improved\n";
  os << std::setprecision(10);
  for (const auto& h : history) {
    os << h.epoch << ',' << h.train_loss << ',';
    if (std::isnan(h.train_accuracy)) os << "nan";
    else os << h.train_accuracy;
    os << ',' << h.val_ratio << ',' << h.val_accuracy << ',' << h.val_active_fraction << ',' << (h.improved ? 1 : 0)
       << '\n';
  }
}

void write_report_csv(std::ostream& os, const EvalReport& report) {
  os << "layout,rate_bps,oracle_rate_bps,ratio,accuracy,active,num_links,inference_s\n";
  os << std::setprecision(12);
  for (std::size_t i = 0; i < report.per_layout.size(); ++i) {
    const auto& e = report.per_layout[i];
    os << i << ',' << e.rate << ',' << e.oracle_rate << ',' << e.ratio << ',' << e.accuracy << ',' << e.active << ','
       << e.num_links << ',' << e.inference_s << '\n';
  }
}

}  // namespace linksched
