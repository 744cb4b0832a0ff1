#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linksched/netgen.hpp"

namespace linksched {

inline constexpr int kBruteForceMaxLinks = 20;
inline constexpr int kBruteForceDefaultThreshold = 12;

struct OracleKind {
  enum class Kind { kBruteForce, kGreedy, kStrongestFraction, kRandomActive, kAllActive };
  Kind kind = Kind::kGreedy;
  double param = 0.0;  // f for StrongestFraction, p for RandomActive

  static OracleKind brute_force() { return {Kind::kBruteForce, 0.0}; }
  static OracleKind greedy() { return {Kind::kGreedy, 0.0}; }
  static OracleKind strongest_fraction(double f) { return {Kind::kStrongestFraction, f}; }
  static OracleKind random_active(double p) { return {Kind::kRandomActive, p}; }
  static OracleKind all_active() { return {Kind::kAllActive, 0.0}; }
  // BruteForce up to kBruteForceDefaultThreshold links, Greedy beyond.
  static OracleKind automatic(std::size_t num_links);

  void validate() const;
  std::string name() const;
  // Inverse of name(): "brute", "greedy", "strongest:0.2", "random:0.5", "all".
  static OracleKind parse(const std::string& text);
  friend bool operator==(const OracleKind&, const OracleKind&) = default;
};

// Exhaustive search; ties go to the lexicographically smallest rho.
// Throws ConfigError when the instance has more than kBruteForceMaxLinks links.
ScheduleVector brute_force_optimal(const ChannelMatrix& ch);

// Visits links by descending direct gain (index order on ties) and keeps each
// one only if it strictly raises the sum rate.
ScheduleVector greedy_schedule(const ChannelMatrix& ch);

ScheduleVector heuristic_schedule(const ChannelMatrix& ch, const OracleKind& kind, std::uint64_t seed);

struct LabeledLayout {
  NetworkLayout layout;
  ScheduleVector label;
};

// Channels are drawn with compute_channel(layout, ch_cfg, layout.config.seed).
std::vector<LabeledLayout> label_dataset(const std::vector<NetworkLayout>& layouts, const ChannelConfig& ch_cfg,
                                         const OracleKind& oracle);

// Channel seed used throughout for a layout; keeps labeling and evaluation consistent.
std::uint64_t channel_seed(const NetworkLayout& layout);

}  // namespace linksched
