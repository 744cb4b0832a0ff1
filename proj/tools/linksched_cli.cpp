// linksched command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "linksched/linksched.h"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Failure {
  ls_status status;
  std::string message;
};

void check(ls_status s, const char* what) {
  if (s != LS_OK) throw Failure{s, std::string(what) + ": " + ls_last_error()};
}

// Owning wrappers for the opaque handles.
struct Dataset {
  ls_dataset* h = nullptr;
  ~Dataset() { ls_dataset_free(h); }
};
struct Model {
  ls_model* h = nullptr;
  ~Model() { ls_model_free(h); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string file_hash(const std::string& path) {
  char buf[65];
  check(ls_sha256_file(path.c_str(), buf, sizeof buf), "hash");
  return buf;
}

json channel_json(const ls_channel_config& c) {
  return {{"noise_psd_dbm_hz", c.noise_psd_dbm_hz}, {"bandwidth_hz", c.bandwidth_hz},
          {"carrier_freq_hz", c.carrier_freq_hz},   {"antenna_height_m", c.antenna_height_m},
          {"tx_power_dbm", c.tx_power_dbm}};
}

json train_json(const ls_train_config& c) {
  return {{"mode", c.unsupervised ? "unsup" : "sup"},
          {"epochs_max", c.epochs_max},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"patience", c.patience},
          {"val_fraction", c.val_fraction},
          {"omega_loss", c.omega_loss},
          {"tune_omega", c.tune_omega != 0},
          {"seed", c.seed},
          {"p", c.embed_dim},
          {"T", c.iterations},
          {"q", c.quant_bits},
          {"hidden", c.hidden},
          {"topology", c.knn_k > 0 ? "knn:" + std::to_string(c.knn_k) : std::string("full")}};
}

// Collects what a command did and writes <primary output>.manifest.json.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv) : t0_(std::chrono::steady_clock::now()) {
    doc_["command"] = std::move(command);
    doc_["argv"] = std::move(argv);
    doc_["version"] = ls_version();
    doc_["config"] = json::object();
    doc_["seeds"] = json::object();
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
    doc_["timings_s"] = json::object();
  }
  json& config() { return doc_["config"]; }
  json& seeds() { return doc_["seeds"]; }
  void input(const std::string& path) { doc_["inputs"].push_back({{"path", path}, {"sha256", file_hash(path)}}); }
  void output(const std::string& path) { doc_["outputs"].push_back({{"path", path}, {"sha256", file_hash(path)}}); }
  void timing(const std::string& name, double s) { doc_["timings_s"][name] = s; }

  void write(const std::string& path) {
    doc_["timings_s"]["total"] = seconds_since(t0_);
    std::ofstream os(path);
    if (!os) throw Failure{LS_ERR_INPUT, "cannot write manifest " + path};
    os << doc_.dump(2) << '\n';
  }

 private:
  json doc_;
  std::chrono::steady_clock::time_point t0_;
};

void add_channel_options(CLI::App* cmd, ls_channel_config& ch) {
  cmd->add_option("--noise-psd", ch.noise_psd_dbm_hz, "noise power spectral density (dBm/Hz)")->capture_default_str();
  cmd->add_option("--bandwidth", ch.bandwidth_hz, "bandwidth (Hz)")->capture_default_str();
  cmd->add_option("--carrier", ch.carrier_freq_hz, "carrier frequency (Hz)")->capture_default_str();
  cmd->add_option("--antenna-height", ch.antenna_height_m, "antenna height (m)")->capture_default_str();
  cmd->add_option("--tx-power", ch.tx_power_dbm, "transmit power (dBm)")->capture_default_str();
}

int parse_topology(const std::string& text) {
  if (text == "full") return 0;
  if (text.rfind("knn:", 0) == 0) {
    try {
      std::size_t used = 0;
      const int k = std::stoi(text.substr(4), &used);
      if (used == text.size() - 4 && k > 0) return k;
    } catch (const std::exception&) {
    }
  }
  throw Failure{LS_ERR_CONFIG, "bad topology '" + text + "' (expected full or knn:K)"};
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-embedding link scheduling for D2D networks"};
  app.require_subcommand(1);
  const std::vector<std::string> args(argv, argv + argc);

  ls_channel_config ch;
  ls_channel_config_default(&ch);

  // gen
  ls_layout_config layout;
  ls_layout_config_default(&layout);
  std::size_t num_layouts = 500;
  std::uint64_t gen_seed = 1;
  double shadowing = 0.0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "generate random network layouts");
  gen->add_option("--num-layouts", num_layouts, "number of layouts")->capture_default_str();
  gen->add_option("--pairs", layout.num_pairs, "D2D pairs per layout")->capture_default_str();
  gen->add_option("--area", layout.area_edge, "square edge length (m)")->capture_default_str();
  gen->add_option("--dmin", layout.d_min, "minimum pair distance (m)")->capture_default_str();
  gen->add_option("--dmax", layout.d_max, "maximum pair distance (m)")->capture_default_str();
  gen->add_option("--shadowing", shadowing, "log-normal shadowing std (dB)")->capture_default_str();
  gen->add_option("--seed", gen_seed, "base seed")->capture_default_str();
  gen->add_option("--out", gen_out, "output dataset")->required();

  // label
  std::string label_in, label_out, label_oracle = "greedy";
  auto* label = app.add_subcommand("label", "attach oracle schedules to a dataset");
  label->add_option("--in", label_in, "input dataset")->required();
  label->add_option("--oracle", label_oracle, "brute or greedy")
      ->check(CLI::IsMember({"brute", "greedy"}))
      ->capture_default_str();
  label->add_option("--out", label_out, "output dataset")->required();
  add_channel_options(label, ch);

  // train
  ls_train_config tc;
  ls_train_config_default(&tc);
  std::string train_in, train_out, train_mode = "sup", train_topology = "full", history_out;
  bool no_tune = false;
  auto* trn = app.add_subcommand("train", "train the embedding and classifier");
  trn->add_option("--in", train_in, "training dataset")->required();
  trn->add_option("--mode", train_mode, "sup or unsup")->check(CLI::IsMember({"sup", "unsup"}))->capture_default_str();
  trn->add_option("--T", tc.iterations, "embedding iterations")->capture_default_str();
  trn->add_option("--p", tc.embed_dim, "embedding dimension")->capture_default_str();
  trn->add_option("--q", tc.quant_bits, "distance quantization bits")->capture_default_str();
  trn->add_option("--hidden", tc.hidden, "classifier hidden width")->capture_default_str();
  trn->add_option("--topology", train_topology, "full or knn:K")->capture_default_str();
  trn->add_option("--epochs", tc.epochs_max, "maximum epochs")->capture_default_str();
  trn->add_option("--batch", tc.batch_size, "layouts per mini-batch")->capture_default_str();
  trn->add_option("--lr", tc.lr, "Adam learning rate")->capture_default_str();
  trn->add_option("--patience", tc.patience, "early-stopping patience (epochs)")->capture_default_str();
  trn->add_option("--val-fraction", tc.val_fraction, "hold-out fraction")->capture_default_str();
  trn->add_option("--omega", tc.omega_loss, "unsupervised activation penalty")->capture_default_str();
  trn->add_flag("--no-tune-omega", no_tune, "do not retune omega after a full-activation collapse");
  trn->add_option("--seed", tc.seed, "training seed")->capture_default_str();
  trn->add_option("--out-model", train_out, "checkpoint path")->required();
  trn->add_option("--history", history_out, "history CSV (default: <out-model>.history.csv)");
  add_channel_options(trn, ch);

  // eval
  std::string eval_model, eval_test, eval_oracle = "auto", eval_report, eval_scheduler = "learned", eval_topology;
  int eval_q = 0;
  auto* evl = app.add_subcommand("eval", "evaluate a model or baseline against an oracle");
  evl->add_option("--model", eval_model, "checkpoint (required for the learned scheduler)");
  evl->add_option("--test", eval_test, "test dataset")->required();
  evl->add_option("--oracle", eval_oracle, "normalizer: brute, greedy or auto")->capture_default_str();
  evl->add_option("--report", eval_report, "per-layout report CSV");
  evl->add_option("--scheduler", eval_scheduler, "learned, greedy, brute, all, random:P, strongest:F")
      ->capture_default_str();
  evl->add_option("--q", eval_q, "expected quantization bits of the checkpoint");
  evl->add_option("--topology", eval_topology, "expected graph topology of the checkpoint");
  add_channel_options(evl, ch);

  // repro
  ls_repro_options ro;
  ls_repro_options_default(&ro);
  std::string repro_table, repro_dir = "results";
  bool repro_big = false;
  auto* rep = app.add_subcommand("repro", "run one experiment sweep table");
  rep->add_option("--table", repro_table, "T, q, K, L, dist, shadow, algos or size")
      ->required()
      ->check(CLI::IsMember({"T", "q", "K", "L", "dist", "shadow", "algos", "size"}));
  rep->add_option("--n-train", ro.n_train, "training layouts per cell")->capture_default_str();
  rep->add_option("--n-test", ro.n_test, "test layouts per cell")->capture_default_str();
  rep->add_option("--seed", ro.seed, "sweep seed")->capture_default_str();
  rep->add_option("--epochs", ro.train.epochs_max, "maximum epochs per training run")->capture_default_str();
  rep->add_flag("--big", repro_big, "include the L=500 scenario");
  rep->add_option("--out-dir", repro_dir, "output directory")->capture_default_str();
  add_channel_options(rep, ch);

  // graph (debug)
  std::string graph_in, graph_out, graph_topology = "full";
  std::size_t graph_index = 0;
  int graph_q = 3;
  auto* grp = app.add_subcommand("graph", "dump one layout's interference graph as an edge list");
  grp->add_option("--in", graph_in, "dataset")->required();
  grp->add_option("--index", graph_index, "record index")->capture_default_str();
  grp->add_option("--q", graph_q, "quantization bits")->capture_default_str();
  grp->add_option("--topology", graph_topology, "full or knn:K")->capture_default_str();
  grp->add_option("--out", graph_out, "edge list path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LS_ERR_CONFIG;
  }

  try {
    if (*gen) {
      Manifest m("gen", args);
      m.config() = {{"num_layouts", num_layouts}, {"pairs", layout.num_pairs}, {"area", layout.area_edge},
                    {"dmin", layout.d_min},       {"dmax", layout.d_max},       {"shadowing_std", shadowing}};
      m.seeds()["base"] = gen_seed;
      const auto t0 = std::chrono::steady_clock::now();
      Dataset d;
      check(ls_dataset_generate(&layout, num_layouts, gen_seed, shadowing, &d.h), "gen");
      check(ls_dataset_save(d.h, gen_out.c_str()), "gen");
      m.timing("generate", seconds_since(t0));
      m.output(gen_out);
      m.write(manifest_path(gen_out));
      std::printf("wrote %zu layouts to %s\n", ls_dataset_size(d.h), gen_out.c_str());
    } else if (*label) {
      Manifest m("label", args);
      m.config() = {{"oracle", label_oracle}, {"channel", channel_json(ch)}};
      m.input(label_in);
      const auto t0 = std::chrono::steady_clock::now();
      Dataset d;
      check(ls_dataset_load(label_in.c_str(), &d.h), "label");
      check(ls_dataset_label(d.h, &ch, label_oracle.c_str()), "label");
      check(ls_dataset_save(d.h, label_out.c_str()), "label");
      m.timing("label", seconds_since(t0));
      m.output(label_out);
      m.write(manifest_path(label_out));
      std::printf("labeled %zu layouts with %s\n", ls_dataset_size(d.h), label_oracle.c_str());
    } else if (*trn) {
      tc.unsupervised = train_mode == "unsup";
      tc.knn_k = parse_topology(train_topology);
      tc.tune_omega = no_tune ? 0 : 1;
      if (history_out.empty()) history_out = train_out + ".history.csv";
      Manifest m("train", args);
      m.config() = {{"train", train_json(tc)}, {"channel", channel_json(ch)}};
      m.seeds()["train"] = tc.seed;
      m.input(train_in);
      Dataset d;
      check(ls_dataset_load(train_in.c_str(), &d.h), "train");
      const auto t0 = std::chrono::steady_clock::now();
      Model model;
      check(ls_model_train(d.h, &ch, &tc, &model.h), "train");
      m.timing("train", seconds_since(t0));
      check(ls_model_save(model.h, train_out.c_str()), "train");
      check(ls_model_write_history(model.h, history_out.c_str()), "train");
      int best_epoch = 0;
      double best_ratio = 0.0;
      check(ls_model_best_epoch(model.h, &best_epoch, &best_ratio), "train");
      m.config()["best_epoch"] = best_epoch;
      m.config()["best_val_ratio"] = best_ratio;
      m.output(train_out);
      m.output(history_out);
      m.write(manifest_path(train_out));
      std::printf("best_epoch=%d, val_ratio=%.6f\n", best_epoch, best_ratio);
    } else if (*evl) {
      Manifest m("eval", args);
      m.config() = {{"scheduler", eval_scheduler}, {"oracle", eval_oracle}, {"channel", channel_json(ch)}};
      Model model;
      if (eval_scheduler == "learned") {
        if (eval_model.empty()) throw Failure{LS_ERR_CONFIG, "eval: --model is required for the learned scheduler"};
        m.input(eval_model);
        check(ls_model_load(eval_model.c_str(), &model.h), "eval");
        check(ls_model_check_compatible(model.h, eval_q, eval_topology.empty() ? nullptr : eval_topology.c_str()),
              "eval");
      }
      m.input(eval_test);
      Dataset d;
      check(ls_dataset_load(eval_test.c_str(), &d.h), "eval");
      ls_eval_summary s{};
      check(ls_evaluate(model.h, eval_scheduler.c_str(), d.h, &ch, eval_oracle.c_str(),
                        eval_report.empty() ? nullptr : eval_report.c_str(), &s),
            "eval");
      m.timing("evaluate", s.runtime_s);
      m.config()["accuracy"] = s.accuracy;
      m.config()["ratio"] = s.ratio;
      m.config()["active_fraction"] = s.mean_active_fraction;
      if (!eval_report.empty()) {
        m.output(eval_report);
        m.write(manifest_path(eval_report));
      }
      std::printf("accuracy=%.6f, ratio=%.6f\n", s.accuracy, s.ratio);
    } else if (*rep) {
      ro.big = repro_big ? 1 : 0;
      Manifest m("repro", args);
      m.config() = {{"table", repro_table}, {"n_train", ro.n_train}, {"n_test", ro.n_test},
                    {"big", repro_big},     {"train", train_json(ro.train)}, {"channel", channel_json(ch)}};
      m.seeds()["sweep"] = ro.seed;
      const auto t0 = std::chrono::steady_clock::now();
      check(ls_repro(repro_table.c_str(), &ro, &ch, repro_dir.c_str()), "repro");
      m.timing("sweep", seconds_since(t0));
      const std::string results = (fs::path(repro_dir) / (repro_table + ".csv")).string();
      m.output(results);
      m.output((fs::path(repro_dir) / (repro_table + "_history.csv")).string());
      m.write(manifest_path(results));
      std::printf("wrote %s\n", results.c_str());
    } else if (*grp) {
      Dataset d;
      check(ls_dataset_load(graph_in.c_str(), &d.h), "graph");
      check(ls_dataset_dump_graph(d.h, graph_index, graph_q, graph_topology.c_str(), graph_out.c_str()), "graph");
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return LS_ERR_INTERNAL;
  }
  return 0;
}
