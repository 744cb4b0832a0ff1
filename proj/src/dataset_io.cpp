#include "linksched/dataset_io.hpp"

#include <fstream>
#include <iostream>
#include <string>

#include <json.hpp>

#include "linksched/error.hpp"
#include "linksched/hash.hpp"
#include "linksched/parallel.hpp"

namespace linksched {
namespace {

using nlohmann::json;

constexpr const char* kFormatName = "linksched-dataset";

json points_to_json(const std::vector<Point>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x, p.y});
  return arr;
}

std::vector<Point> points_from_json(const json& arr, const char* field) {
  if (!arr.is_array()) throw InputError(std::string("dataset field '") + field + "' must be an array");
  std::vector<Point> pts;
  pts.reserve(arr.size());
  for (const auto& p : arr) {
    if (!p.is_array() || p.size() != 2) throw InputError(std::string("dataset field '") + field + "' has a bad point");
    pts.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return pts;
}

json oracle_to_json(const OracleKind& k) {
  json params = json::object();
  if (k.kind == OracleKind::Kind::kStrongestFraction) params["f"] = k.param;
  if (k.kind == OracleKind::Kind::kRandomActive) params["p"] = k.param;
  const std::string name = k.name();
  return {{"kind", name.substr(0, name.find(':'))}, {"params", params}};
}

OracleKind oracle_from_json(const json& j) {
  std::string text = j.at("kind").get<std::string>();
  const json& params = j.value("params", json::object());
  if (params.contains("f")) text += ":" + params["f"].dump();
  if (params.contains("p")) text += ":" + params["p"].dump();
  return OracleKind::parse(text);
}

json record_to_json(const DatasetRecord& r) {
  const auto& c = r.layout.config;
  json j = {{"L", c.num_pairs},
            {"d_area", c.area_edge},
            {"d_min", c.d_min},
            {"d_max", c.d_max},
            {"seed", c.seed},
            {"shadowing_std", r.shadowing_std},
            {"tx", points_to_json(r.layout.tx)},
            {"rx", points_to_json(r.layout.rx)}};
  if (r.label) {
    json lab = json::array();
    for (auto v : *r.label) lab.push_back(static_cast<int>(v));
    j["label"] = std::move(lab);
  }
  if (r.oracle) j["oracle"] = oracle_to_json(*r.oracle);
  return j;
}

DatasetRecord record_from_json(const json& j) {
  DatasetRecord r;
  auto& c = r.layout.config;
  c.num_pairs = j.at("L").get<int>();
  c.area_edge = j.at("d_area").get<double>();
  c.d_min = j.at("d_min").get<double>();
  c.d_max = j.at("d_max").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  r.shadowing_std = j.value("shadowing_std", 0.0);
  if (!(r.shadowing_std >= 0.0)) throw InputError("record has negative shadowing_std");
  r.layout.tx = points_from_json(j.at("tx"), "tx");
  r.layout.rx = points_from_json(j.at("rx"), "rx");
  const auto n = static_cast<std::size_t>(c.num_pairs);
  if (r.layout.tx.size() != n || r.layout.rx.size() != n) throw InputError("record coordinate count differs from L");
  r.layout.weights.assign(n, 1.0);
  if (j.contains("label") && !j["label"].is_null()) {
    Schedule lab;
    for (const auto& v : j["label"]) {
      const int b = v.get<int>();
      if (b != 0 && b != 1) throw InputError("label entries must be 0 or 1");
      lab.push_back(static_cast<std::uint8_t>(b));
    }
    if (lab.size() != n) throw InputError("label length differs from L");
    r.label = std::move(lab);
  }
  if (j.contains("oracle")) r.oracle = oracle_from_json(j["oracle"]);
  return r;
}

}  // namespace

Dataset generate_dataset(const LayoutConfig& config, std::size_t count, std::uint64_t base_seed,
                         double shadowing_std) {
  config.validate();
  if (!(shadowing_std >= 0.0)) throw ConfigError("shadowing std must be nonnegative");
  Dataset data(count);
  for (std::size_t i = 0; i < count; ++i) {
    data[i].layout = generate_layout(config, mix_seed(base_seed, i));
    data[i].shadowing_std = shadowing_std;
  }
  return data;
}

ChannelMatrix record_channel(const DatasetRecord& record, const ChannelConfig& ch_base) {
  ChannelConfig ch = ch_base;
  ch.shadowing_std_db = record.shadowing_std;
  return compute_channel(record.layout, ch, channel_seed(record.layout));
}

void label_records(Dataset& data, const ChannelConfig& ch_base, const OracleKind& oracle) {
  if (oracle.kind != OracleKind::Kind::kBruteForce && oracle.kind != OracleKind::Kind::kGreedy) {
    throw ConfigError("labels must come from the brute-force or greedy oracle, got " + oracle.name());
  }
  for (const auto& r : data) {
    if (oracle.kind == OracleKind::Kind::kBruteForce && r.layout.size() > static_cast<std::size_t>(kBruteForceMaxLinks)) {
      throw ConfigError("brute force limited to " + std::to_string(kBruteForceMaxLinks) + " links, dataset has L=" +
                        std::to_string(r.layout.size()));
    }
  }
  parallel_for(data.size(), [&](std::size_t i) {
    const auto ch = record_channel(data[i], ch_base);
    data[i].label = heuristic_schedule(ch, oracle, 0).rho;
    data[i].oracle = oracle;
  });
}

bool all_labeled(const Dataset& data) {
  for (const auto& r : data) {
    if (!r.label) return false;
  }
  return true;
}

void write_dataset(std::ostream& os, const Dataset& data) {
  const json header = {{"format", kFormatName}, {"version", kDatasetVersion}, {"count", data.size()}};
  os << header.dump() << '\n';
  for (const auto& r : data) os << record_to_json(r).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InputError("cannot write dataset " + path.string());
  write_dataset(out, data);
  if (!out) throw InputError("failed writing dataset " + path.string());
}

Dataset read_dataset(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InputError("dataset is empty (missing header)");
  std::size_t expected = 0;
  try {
    const json header = json::parse(line);
    if (header.value("format", "") != kFormatName) throw InputError("not a linksched dataset");
    if (header.value("version", 0) != kDatasetVersion) throw InputError("unsupported dataset version");
    expected = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw InputError(std::string("bad dataset header: ") + e.what());
  }
  Dataset data;
  data.reserve(expected);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      data.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw InputError("dataset line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw InputError("dataset line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (data.size() != expected) {
    throw InputError("dataset header announces " + std::to_string(expected) + " records, found " +
                     std::to_string(data.size()));
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace linksched
