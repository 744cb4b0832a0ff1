#include "linksched/linksched.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <string>

#include "linksched/checkpoint.hpp"
#include "linksched/dataset_io.hpp"
#include "linksched/error.hpp"
#include "linksched/experiments.hpp"
#include "linksched/hash.hpp"
#include "linksched/trainer.hpp"

struct ls_dataset {
  linksched::Dataset data;
};

struct ls_model {
  linksched::ModelParams model;
  std::vector<linksched::EpochRecord> history;
  int best_epoch = 0;
  double best_val_ratio = 0.0;
};

namespace {

using namespace linksched;

thread_local std::string g_last_error;

template <typename F>
ls_status guarded(F&& body) {
  try {
    body();
    return LS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<ls_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return LS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return LS_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return LS_ERR_INTERNAL;
  }
}

template <typename T>
const T& require(const T* p, const char* what) {
  if (!p) throw StateError(std::string(what) + " is null");
  return *p;
}

LayoutConfig to_core(const ls_layout_config& c) {
  LayoutConfig out;
  out.num_pairs = c.num_pairs;
  out.area_edge = c.area_edge;
  out.d_min = c.d_min;
  out.d_max = c.d_max;
  return out;
}

ChannelConfig to_core(const ls_channel_config& c) {
  ChannelConfig out;
  out.noise_psd_dbm_hz = c.noise_psd_dbm_hz;
  out.bandwidth_hz = c.bandwidth_hz;
  out.carrier_freq_hz = c.carrier_freq_hz;
  out.antenna_height_m = c.antenna_height_m;
  out.tx_power_dbm = c.tx_power_dbm;
  out.shadowing_std_db = c.shadowing_std_db;
  return out;
}

TrainConfig to_core(const ls_train_config& c, const ChannelConfig& ch) {
  TrainConfig out;
  out.mode = c.unsupervised ? TrainMode::kUnsupervised : TrainMode::kSupervised;
  out.epochs_max = c.epochs_max;
  out.batch_size = c.batch_size;
  out.adam = {c.lr, c.beta1, c.beta2, c.eps};
  out.patience = c.patience;
  out.val_fraction = c.val_fraction;
  out.omega_loss = c.omega_loss;
  out.seed = c.seed;
  out.arch.embed_dim = c.embed_dim;
  out.arch.iterations = c.iterations;
  out.arch.quant_bits = c.quant_bits;
  out.arch.hidden = c.hidden;
  out.arch.topology = c.knn_k > 0 ? Topology::knn(c.knn_k) : Topology::full();
  out.channel = ch;
  return out;
}

const DatasetRecord& record_at(const ls_dataset* data, std::size_t index) {
  const auto& d = require(data, "dataset").data;
  if (index >= d.size()) throw InputError("record index " + std::to_string(index) + " out of range");
  return d[index];
}

}  // namespace

extern "C" {

const char* ls_last_error(void) { return g_last_error.c_str(); }

const char* ls_version(void) { return "1.0.0"; }

void ls_layout_config_default(ls_layout_config* cfg) {
  if (!cfg) return;
  const LayoutConfig d;
  *cfg = {d.num_pairs, d.area_edge, d.d_min, d.d_max};
}

void ls_channel_config_default(ls_channel_config* cfg) {
  if (!cfg) return;
  const ChannelConfig d;
  *cfg = {d.noise_psd_dbm_hz, d.bandwidth_hz, d.carrier_freq_hz, d.antenna_height_m, d.tx_power_dbm,
          d.shadowing_std_db};
}

void ls_train_config_default(ls_train_config* cfg) {
  if (!cfg) return;
  const TrainConfig d;
  cfg->unsupervised = 0;
  cfg->epochs_max = d.epochs_max;
  cfg->batch_size = d.batch_size;
  cfg->lr = d.adam.lr;
  cfg->beta1 = d.adam.beta1;
  cfg->beta2 = d.adam.beta2;
  cfg->eps = d.adam.eps;
  cfg->patience = d.patience;
  cfg->val_fraction = d.val_fraction;
  cfg->omega_loss = d.omega_loss;
  cfg->tune_omega = 1;
  cfg->seed = d.seed;
  cfg->embed_dim = d.arch.embed_dim;
  cfg->iterations = d.arch.iterations;
  cfg->quant_bits = d.arch.quant_bits;
  cfg->hidden = d.arch.hidden;
  cfg->knn_k = 0;
}

void ls_repro_options_default(ls_repro_options* opts) {
  if (!opts) return;
  const ReproOptions d;
  opts->n_train = d.n_train;
  opts->n_test = d.n_test;
  opts->seed = d.seed;
  opts->big = 0;
  ls_train_config_default(&opts->train);
}

ls_status ls_dataset_generate(const ls_layout_config* cfg, size_t count, uint64_t seed, double shadowing_std,
                              ls_dataset** out) {
  return guarded([&] {
    require(out, "output handle");
    auto ds = std::make_unique<ls_dataset>();
    ds->data = generate_dataset(to_core(require(cfg, "layout config")), count, seed, shadowing_std);
    *out = ds.release();
  });
}

ls_status ls_dataset_load(const char* path, ls_dataset** out) {
  return guarded([&] {
    require(out, "output handle");
    auto ds = std::make_unique<ls_dataset>();
    ds->data = read_dataset(std::filesystem::path(&require(path, "path")));
    *out = ds.release();
  });
}

ls_status ls_dataset_save(const ls_dataset* data, const char* path) {
  return guarded([&] { write_dataset(std::filesystem::path(&require(path, "path")), require(data, "dataset").data); });
}

size_t ls_dataset_size(const ls_dataset* data) { return data ? data->data.size() : 0; }

ls_status ls_dataset_num_pairs(const ls_dataset* data, size_t index, int* num_pairs) {
  return guarded([&] {
    require(num_pairs, "num_pairs");
    *num_pairs = static_cast<int>(record_at(data, index).layout.size());
  });
}

ls_status ls_dataset_label(ls_dataset* data, const ls_channel_config* ch, const char* oracle) {
  return guarded([&] {
    if (!data) throw StateError("dataset is null");
    label_records(data->data, to_core(require(ch, "channel config")), OracleKind::parse(&require(oracle, "oracle")));
  });
}

ls_status ls_dataset_get_label(const ls_dataset* data, size_t index, uint8_t* out, size_t cap) {
  return guarded([&] {
    const auto& rec = record_at(data, index);
    if (!rec.label) throw InputError("record " + std::to_string(index) + " has no label");
    if (!out || cap < rec.label->size()) throw StateError("label buffer too small");
    std::memcpy(out, rec.label->data(), rec.label->size());
  });
}

ls_status ls_dataset_sum_rate(const ls_dataset* data, size_t index, const ls_channel_config* ch, const uint8_t* rho,
                              size_t len, double* total) {
  return guarded([&] {
    const auto& rec = record_at(data, index);
    require(total, "total");
    if (!rho) throw StateError("schedule is null");
    const auto channel = record_channel(rec, to_core(require(ch, "channel config")));
    *total = sum_rate_total(channel, std::span(rho, len));
  });
}

ls_status ls_dataset_dump_graph(const ls_dataset* data, size_t index, int quant_bits, const char* topology,
                                const char* path) {
  return guarded([&] {
    const auto& rec = record_at(data, index);
    const auto g = build_graph(rec.layout, QuantizerSpec::for_layout(rec.layout.config, quant_bits),
                               Topology::parse(&require(topology, "topology")));
    std::ofstream os(&require(path, "path"));
    if (!os) throw InputError(std::string("cannot write ") + path);
    write_edge_list(os, g);
  });
}

void ls_dataset_free(ls_dataset* data) { delete data; }

ls_status ls_model_train(const ls_dataset* data, const ls_channel_config* ch, const ls_train_config* cfg,
                         ls_model** out) {
  return guarded([&] {
    require(out, "output handle");
    const auto& c = require(cfg, "train config");
    const TrainConfig tc = to_core(c, to_core(require(ch, "channel config")));
    const auto& d = require(data, "dataset").data;
    TrainResult r = (tc.mode == TrainMode::kUnsupervised && c.tune_omega) ? train_unsupervised_tuned(d, tc)
                                                                          : train(d, tc);
    auto m = std::make_unique<ls_model>();
    m->model = std::move(r.model);
    m->history = std::move(r.history);
    m->best_epoch = r.best_epoch;
    m->best_val_ratio = r.best_val_ratio;
    *out = m.release();
  });
}

ls_status ls_model_save(const ls_model* model, const char* path) {
  return guarded([&] { save_checkpoint(&require(path, "path"), require(model, "model").model); });
}

ls_status ls_model_load(const char* path, ls_model** out) {
  return guarded([&] {
    require(out, "output handle");
    auto m = std::make_unique<ls_model>();
    m->model = load_checkpoint(&require(path, "path"));
    *out = m.release();
  });
}

ls_status ls_model_arch(const ls_model* model, int* embed_dim, int* iterations, int* quant_bits, int* hidden,
                        int* knn_k) {
  return guarded([&] {
    const auto& a = require(model, "model").model.arch;
    if (embed_dim) *embed_dim = a.embed_dim;
    if (iterations) *iterations = a.iterations;
    if (quant_bits) *quant_bits = a.quant_bits;
    if (hidden) *hidden = a.hidden;
    if (knn_k) *knn_k = a.topology.kind == Topology::Kind::kKnn ? a.topology.k : 0;
  });
}

ls_status ls_model_check_compatible(const ls_model* model, int quant_bits, const char* topology) {
  return guarded([&] {
    const auto& a = require(model, "model").model.arch;
    if (quant_bits > 0 && quant_bits != a.quant_bits) {
      throw CompatibilityError("checkpoint was trained with q=" + std::to_string(a.quant_bits) + ", requested q=" +
                               std::to_string(quant_bits));
    }
    if (topology) {
      const Topology t = Topology::parse(topology);
      if (!(t == a.topology)) {
        throw CompatibilityError("checkpoint was trained with topology " + a.topology.name() + ", requested " +
                                 t.name());
      }
    }
  });
}

ls_status ls_model_write_history(const ls_model* model, const char* path) {
  return guarded([&] {
    const auto& m = require(model, "model");
    if (m.history.empty()) throw StateError("model has no training history (loaded from a checkpoint?)");
    std::ofstream os(&require(path, "path"));
    if (!os) throw InputError(std::string("cannot write ") + path);
    write_history_csv(os, m.history);
  });
}

ls_status ls_model_best_epoch(const ls_model* model, int* best_epoch, double* best_val_ratio) {
  return guarded([&] {
    const auto& m = require(model, "model");
    if (best_epoch) *best_epoch = m.best_epoch;
    if (best_val_ratio) *best_val_ratio = m.best_val_ratio;
  });
}

ls_status ls_model_predict(const ls_model* model, const ls_dataset* data, size_t index, double* probs, uint8_t* rho,
                           size_t cap) {
  return guarded([&] {
    const auto& m = require(model, "model").model;
    const auto& rec = record_at(data, index);
    if (cap < rec.layout.size()) throw StateError("output buffers too small");
    const auto p = predict_probs(m, graph_for(rec.layout, m.arch));
    const auto s = ScheduleVector::from_soft(p);
    for (std::size_t l = 0; l < p.size(); ++l) {
      if (probs) probs[l] = p[l];
      if (rho) rho[l] = s.rho[l];
    }
  });
}

void ls_model_free(ls_model* model) { delete model; }

ls_status ls_evaluate(const ls_model* model, const char* scheduler, const ls_dataset* test, const ls_channel_config* ch,
                      const char* oracle, const char* report_path, ls_eval_summary* out) {
  return guarded([&] {
    const auto& data = require(test, "test dataset").data;
    const ChannelConfig channel = to_core(require(ch, "channel config"));
    const std::string which = scheduler ? scheduler : "learned";
    const std::string oracle_name = oracle ? oracle : "auto";
    OracleKind norm = oracle_name == "auto"
                          ? OracleKind::automatic(data.empty() ? 0 : data.front().layout.size())
                          : OracleKind::parse(oracle_name);
    EvalReport report;
    if (which == "learned") {
      report = evaluate(require(model, "model").model, data, channel, norm);
    } else {
      const auto kind = OracleKind::parse(which);
      report = evaluate_scheduler(baseline_scheduler(kind, 0), kind.name(), data, channel, norm);
    }
    if (report_path) {
      std::ofstream os(report_path);
      if (!os) throw InputError(std::string("cannot write ") + report_path);
      write_report_csv(os, report);
    }
    if (out) *out = {report.classifier_accuracy, report.avg_sum_rate_ratio, report.mean_active_fraction,
                     report.runtime_s, data.size()};
  });
}

ls_status ls_repro(const char* table, const ls_repro_options* opts, const ls_channel_config* ch, const char* out_dir) {
  return guarded([&] {
    const auto& o = require(opts, "repro options");
    const ChannelConfig channel = to_core(require(ch, "channel config"));
    ReproOptions ro;
    ro.table = &require(table, "table");
    ro.n_train = o.n_train;
    ro.n_test = o.n_test;
    ro.seed = o.seed;
    ro.big = o.big != 0;
    ro.train = to_core(o.train, channel);
    const auto rows = sweep(repro_cells(ro), channel);
    const std::filesystem::path dir(&require(out_dir, "output directory"));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream results(dir / (ro.table + ".csv"));
    std::ofstream history(dir / (ro.table + "_history.csv"));
    if (!results || !history) throw InputError("cannot write results into " + dir.string());
    write_sweep_csv(results, rows);
    write_sweep_history_csv(history, rows);
  });
}

ls_status ls_sha256_file(const char* path, char* out, size_t cap) {
  return guarded([&] {
    const std::string h = sha256_file(&require(path, "path"));
    if (!out || cap < h.size() + 1) throw StateError("hash buffer too small");
    std::memcpy(out, h.c_str(), h.size() + 1);
  });
}

}  // extern "C"
