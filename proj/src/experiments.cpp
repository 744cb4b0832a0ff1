#include "linksched/experiments.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "linksched/error.hpp"
#include "linksched/hash.hpp"

namespace linksched {
namespace {

using Clock = std::chrono::steady_clock;

LayoutConfig layout_with(int pairs, double d_min, double d_max) {
  LayoutConfig c;
  c.num_pairs = pairs;
  c.d_min = d_min;
  c.d_max = d_max;
  return c;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class SweepRunner {
 public:
  explicit SweepRunner(const ChannelConfig& ch) : ch_(ch) {}

  const Dataset& data(const DataSpec& spec, const std::optional<OracleKind>& label) {
    const std::string key = spec.key() + "|label=" + (label ? label->name() : "none");
    auto it = data_.find(key);
    if (it != data_.end()) return it->second;
    Dataset d = generate_dataset(spec.layout, spec.count, spec.seed, spec.shadowing_std);
    if (label) label_records(d, ch_, *label);
    return data_.emplace(key, std::move(d)).first->second;
  }

  const TrainResult& model(const TrainSpec& spec, double* train_s) {
    const std::string key = spec.key();
    auto it = models_.find(key);
    if (it != models_.end()) {
      *train_s = 0.0;
      return it->second;
    }
    const bool sup = spec.train.mode == TrainMode::kSupervised;
    const Dataset& d = data(spec.data, sup ? std::optional(spec.label_oracle) : std::nullopt);
    TrainConfig cfg = spec.train;
    cfg.channel = ch_;
    if (!cfg.val_oracle) cfg.val_oracle = spec.label_oracle;
    const auto t0 = Clock::now();
    TrainResult r = (!sup && spec.tune_omega) ? train_unsupervised_tuned(d, cfg) : train(d, cfg);
    *train_s = std::chrono::duration<double>(Clock::now() - t0).count();
    return models_.emplace(key, std::move(r)).first->second;
  }

  SweepRow run(const SweepCell& cell) {
    SweepRow row;
    row.cell = cell;
    try {
      const Dataset& test = data(cell.test, std::nullopt);
      const OracleKind norm =
          cell.normalizer.value_or(OracleKind::automatic(static_cast<std::size_t>(cell.test.layout.num_pairs)));
      switch (cell.kind) {
        case SweepCell::Kind::kLearned: {
          if (!cell.train) throw ConfigError("learned cell needs a training spec");
          const TrainResult& tr = model(*cell.train, &row.train_s);
          row.report = evaluate(tr.model, test, ch_, norm);
          row.best_epoch = tr.best_epoch;
          row.epochs_run = static_cast<int>(tr.history.size());
          row.omega_loss = tr.omega_loss;
          row.history = tr.history;
          break;
        }
        case SweepCell::Kind::kBaseline:
          row.report = evaluate_scheduler(baseline_scheduler(cell.baseline, cell.test.seed), cell.baseline.name(), test,
                                          ch_, norm);
          break;
        case SweepCell::Kind::kStrongestTuned: {
          if (!cell.train) throw ConfigError("strongest-link tuning needs a validation spec");
          DataSpec val = cell.train->data;
          val.count = static_cast<std::size_t>(std::ceil(cell.train->train.val_fraction * static_cast<double>(val.count)));
          const Dataset& vset = data(val, std::nullopt);
          double best_ratio = -1.0;
          for (double f : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            const auto k = OracleKind::strongest_fraction(f);
            const double r = evaluate_scheduler(baseline_scheduler(k, 0), k.name(), vset, ch_, norm).avg_sum_rate_ratio;
            if (r > best_ratio) {
              best_ratio = r;
              row.strongest_fraction = f;
            }
          }
          const auto k = OracleKind::strongest_fraction(row.strongest_fraction);
          row.report = evaluate_scheduler(baseline_scheduler(k, 0), k.name(), test, ch_, norm);
          break;
        }
      }
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    return row;
  }

 private:
  ChannelConfig ch_;
  std::map<std::string, Dataset> data_;
  std::map<std::string, TrainResult> models_;
};

}  // namespace

std::string DataSpec::key() const {
  std::ostringstream os;
  os << std::setprecision(17) << "L=" << layout.num_pairs << ";area=" << layout.area_edge << ";dmin=" << layout.d_min
     << ";dmax=" << layout.d_max << ";shadow=" << shadowing_std << ";n=" << count << ";seed=" << seed;
  return os.str();
}

std::string TrainSpec::key() const {
  return data.key() + "|" + train.canonical() + "|labels=" + label_oracle.name() + (tune_omega ? "|tuned" : "");
}

std::vector<SweepRow> sweep(const std::vector<SweepCell>& cells, const ChannelConfig& ch_cfg) {
  ch_cfg.validate();
  SweepRunner runner(ch_cfg);
  std::vector<SweepRow> rows;
  rows.reserve(cells.size());
  for (const auto& c : cells) rows.push_back(runner.run(c));
  return rows;
}

std::vector<std::string> repro_tables() { return {"T", "q", "K", "L", "dist", "shadow", "algos", "size"}; }

std::vector<SweepCell> repro_cells(const ReproOptions& opts) {
  const auto train_seed = mix_seed(opts.seed, 11);
  const auto test_seed = mix_seed(opts.seed, 12);

  auto data_spec = [&](const LayoutConfig& layout, double shadow, std::size_t n, std::uint64_t seed) {
    return DataSpec{layout, shadow, n, seed};
  };
  auto train_spec = [&](const LayoutConfig& layout, double shadow, const TrainConfig& cfg, std::size_t n) {
    TrainSpec s;
    s.data = data_spec(layout, shadow, n, train_seed);
    s.train = cfg;
    s.label_oracle = OracleKind::automatic(static_cast<std::size_t>(layout.num_pairs));
    s.tune_omega = cfg.mode == TrainMode::kUnsupervised;
    return s;
  };
  auto learned = [&](const std::string& row, const std::string& setting, const TrainSpec& ts,
                     const LayoutConfig& test_layout, double test_shadow) {
    SweepCell c;
    c.table = opts.table;
    c.row = row;
    c.setting = setting;
    c.kind = SweepCell::Kind::kLearned;
    c.train = ts;
    c.test = data_spec(test_layout, test_shadow, opts.n_test, test_seed);
    return c;
  };

  const LayoutConfig base = layout_with(50, 2.0, 65.0);
  TrainConfig sup = opts.train;
  sup.mode = TrainMode::kSupervised;
  TrainConfig unsup = opts.train;
  unsup.mode = TrainMode::kUnsupervised;
  auto with_arch = [](TrainConfig c, auto&& mutate) {
    mutate(c.arch);
    return c;
  };

  std::vector<SweepCell> cells;
  const std::string& t = opts.table;
  if (t == "T") {
    for (int iters = 1; iters <= 5; ++iters) {
      auto cfg = with_arch(sup, [&](Architecture& a) { a.iterations = iters; });
      cells.push_back(learned("supervised", "T=" + std::to_string(iters), train_spec(base, 0, cfg, opts.n_train), base, 0));
    }
  } else if (t == "q") {
    for (int bits = 2; bits <= 6; ++bits) {
      auto cfg = with_arch(sup, [&](Architecture& a) { a.quant_bits = bits; });
      cells.push_back(learned("supervised", "q=" + std::to_string(bits), train_spec(base, 0, cfg, opts.n_train), base, 0));
    }
  } else if (t == "K") {
    for (int k : {10, 20, 30, 40}) {
      auto cfg = with_arch(sup, [&](Architecture& a) { a.topology = Topology::knn(k); });
      cells.push_back(learned("knn", "K=" + std::to_string(k), train_spec(base, 0, cfg, opts.n_train), base, 0));
    }
    auto cfg = with_arch(sup, [&](Architecture& a) { a.topology = Topology::full(); });
    cells.push_back(learned("full", "K=49", train_spec(base, 0, cfg, opts.n_train), base, 0));
  } else if (t == "L") {
    std::vector<int> sizes = {10, 30, 50, 80, 100};
    if (opts.big) sizes.push_back(500);
    const auto knn_cfg = with_arch(sup, [](Architecture& a) { a.topology = Topology::knn(10); });
    const auto general = train_spec(base, 0, sup, opts.n_train);
    for (int l : sizes) {
      const LayoutConfig layout = layout_with(l, 2.0, 65.0);
      const std::string setting = "L=" + std::to_string(l);
      cells.push_back(learned("supervised", setting, train_spec(layout, 0, sup, opts.n_train), layout, 0));
      cells.push_back(learned("unsupervised", setting, train_spec(layout, 0, unsup, opts.n_train), layout, 0));
      if (l > 10) cells.push_back(learned("knn10", setting, train_spec(layout, 0, knn_cfg, opts.n_train), layout, 0));
      cells.push_back(learned("generalization", setting, general, layout, 0));
    }
  } else if (t == "dist") {
    const auto knn_cfg = with_arch(sup, [](Architecture& a) { a.topology = Topology::knn(10); });
    for (auto [lo, hi] : {std::pair{2.0, 65.0}, {10.0, 50.0}, {30.0, 70.0}, {30.0, 30.0}}) {
      const LayoutConfig layout = layout_with(50, lo, hi);
      std::ostringstream setting;
      setting << "d=" << lo << "-" << hi;
      cells.push_back(learned("supervised", setting.str(), train_spec(layout, 0, sup, opts.n_train), layout, 0));
      cells.push_back(learned("unsupervised", setting.str(), train_spec(layout, 0, unsup, opts.n_train), layout, 0));
      cells.push_back(learned("knn10", setting.str(), train_spec(layout, 0, knn_cfg, opts.n_train), layout, 0));
    }
  } else if (t == "shadow") {
    const auto general = train_spec(base, 0, sup, opts.n_train);
    for (double s : {0.0, 3.0, 5.0, 8.0, 10.0}) {
      std::ostringstream setting;
      setting << "std=" << s;
      cells.push_back(learned("full-training", setting.str(), train_spec(base, s, sup, opts.n_train), base, s));
      cells.push_back(learned("generalization", setting.str(), general, base, s));
    }
  } else if (t == "algos") {
    const auto ts = train_spec(base, 0, sup, opts.n_train);
    cells.push_back(learned("learned", "L=50", ts, base, 0));
    auto baseline = [&](const std::string& row, const OracleKind& k) {
      SweepCell c;
      c.table = t;
      c.row = row;
      c.setting = "L=50";
      c.kind = SweepCell::Kind::kBaseline;
      c.baseline = k;
      c.test = data_spec(base, 0, opts.n_test, test_seed);
      return c;
    };
    cells.push_back(baseline("greedy", OracleKind::greedy()));
    SweepCell strongest = baseline("strongest", OracleKind::strongest_fraction(0.2));
    strongest.kind = SweepCell::Kind::kStrongestTuned;
    strongest.train = ts;
    cells.push_back(strongest);
    cells.push_back(baseline("random", OracleKind::random_active(0.5)));
    cells.push_back(baseline("all-active", OracleKind::all_active()));
    cells.push_back(baseline("oracle", OracleKind::automatic(50)));
  } else if (t == "size") {
    for (std::size_t n : {200, 500, 1000, 1500, 2000}) {
      cells.push_back(learned("supervised", "N=" + std::to_string(n), train_spec(base, 0, sup, n), base, 0));
    }
  } else {
    throw ConfigError("unknown repro table '" + t + "' (expected T, q, K, L, dist, shadow, algos or size)");
  }
  return cells;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "table,row,setting,scheduler,normalizer,status,accuracy,ratio,active_fraction,best_epoch,epochs_run,"
        "omega_loss,strongest_f,train_s,eval_s,mean_inference_s,error\n";
  os << std::setprecision(8);
  for (const auto& r : rows) {
    os << csv_escape(r.cell.table) << ',' << csv_escape(r.cell.row) << ',' << csv_escape(r.cell.setting) << ','
       << csv_escape(r.report.scheduler) << ',' << csv_escape(r.report.oracle) << ',' << (r.ok ? "ok" : "failed") << ','
       << r.report.classifier_accuracy << ',' << r.report.avg_sum_rate_ratio << ',' << r.report.mean_active_fraction
       << ',' << r.best_epoch << ',' << r.epochs_run << ',' << r.omega_loss << ',' << r.strongest_fraction << ','
       << r.train_s << ',' << r.report.runtime_s << ',' << r.report.mean_inference_s << ',' << csv_escape(r.error)
       << '\n';
  }
}

void write_sweep_history_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "table,row,setting,epoch,train_loss,train_accuracy,val_ratio,val_accuracy,val_active_fraction\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    for (const auto& h : r.history) {
      os << csv_escape(r.cell.table) << ',' << csv_escape(r.cell.row) << ',' << csv_escape(r.cell.setting) << ','
         << h.epoch << ',' << h.train_loss << ',';
      if (std::isnan(h.train_accuracy)) os << "nan";
      else os << h.train_accuracy;
      os << ',' << h.val_ratio << ',' << h.val_accuracy << ',' << h.val_active_fraction << '\n';
    }
  }
}

}  // namespace linksched
