#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "linksched/baselines.hpp"
#include "linksched/netgen.hpp"

namespace linksched {

inline constexpr int kDatasetVersion = 1;

struct DatasetRecord {
  NetworkLayout layout;
  double shadowing_std = 0.0;
  std::optional<Schedule> label;
  std::optional<OracleKind> oracle;  // provenance of label
};

using Dataset = std::vector<DatasetRecord>;

// Layout i uses seed mix_seed(base_seed, i).
Dataset generate_dataset(const LayoutConfig& config, std::size_t count, std::uint64_t base_seed,
                         double shadowing_std = 0.0);

// Channel for a record: ch_base with the record's shadowing std, seeded per layout.
ChannelMatrix record_channel(const DatasetRecord& record, const ChannelConfig& ch_base);

// Labels every record in place with a BruteForce or Greedy oracle.
void label_records(Dataset& data, const ChannelConfig& ch_base, const OracleKind& oracle);

bool all_labeled(const Dataset& data);

// Line-delimited JSON: one header line {"format","version","count"}, then one
// record per line with fields L, d_area, d_min, d_max, seed, shadowing_std,
// tx, rx and optionally label and oracle {kind, params}.
void write_dataset(std::ostream& os, const Dataset& data);
void write_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset read_dataset(std::istream& is);
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace linksched
