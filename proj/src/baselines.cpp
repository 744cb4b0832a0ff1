#include "linksched/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "linksched/error.hpp"
#include "linksched/hash.hpp"
#include "linksched/parallel.hpp"

namespace linksched {
namespace {

std::vector<std::size_t> by_descending_direct_gain(const ChannelMatrix& ch) {
  std::vector<std::size_t> order(ch.num_links);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ch.direct(a) > ch.direct(b); });
  return order;
}

}  // namespace

OracleKind OracleKind::automatic(std::size_t num_links) {
  return num_links <= static_cast<std::size_t>(kBruteForceDefaultThreshold) ? brute_force() : greedy();
}

void OracleKind::validate() const {
  switch (kind) {
    case Kind::kStrongestFraction:
      if (!(param > 0.0 && param <= 1.0)) throw ConfigError("strongest fraction must lie in (0, 1]");
      break;
    case Kind::kRandomActive:
      if (!(param >= 0.0 && param <= 1.0)) throw ConfigError("random activation probability must lie in [0, 1]");
      break;
    default:
      break;
  }
}

std::string OracleKind::name() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::kBruteForce: return "brute";
    case Kind::kGreedy: return "greedy";
    case Kind::kAllActive: return "all";
    case Kind::kStrongestFraction: os << "strongest:" << param; return os.str();
    case Kind::kRandomActive: os << "random:" << param; return os.str();
  }
  return "unknown";
}

OracleKind OracleKind::parse(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  auto value = [&]() -> double {
    if (colon == std::string::npos) throw ConfigError("oracle '" + text + "' needs a parameter");
    try {
      return std::stod(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad oracle parameter in '" + text + "'");
    }
  };
  OracleKind k;
  if (head == "brute") k = brute_force();
  else if (head == "greedy") k = greedy();
  else if (head == "all") k = all_active();
  else if (head == "strongest") k = strongest_fraction(value());
  else if (head == "random") k = random_active(value());
  else throw ConfigError("unknown oracle '" + text + "'");
  k.validate();
  return k;
}

ScheduleVector brute_force_optimal(const ChannelMatrix& ch) {
  const std::size_t n = ch.num_links;
  if (n > static_cast<std::size_t>(kBruteForceMaxLinks)) {
    throw ConfigError("brute force limited to " + std::to_string(kBruteForceMaxLinks) + " links, got " +
                      std::to_string(n));
  }
  // Ascending mask order with rho[0] as the most significant bit is
  // lexicographic order on rho; only strict improvements replace the incumbent.
  Schedule rho(n, 0), best(n, 0);
  double best_total = -1.0;
  const std::uint64_t count = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (std::size_t l = 0; l < n; ++l) rho[l] = static_cast<std::uint8_t>((mask >> (n - 1 - l)) & 1U);
    const double total = sum_rate_total(ch, rho);
    if (total > best_total) {
      best_total = total;
      best = rho;
    }
  }
  return {std::move(best), std::nullopt};
}

ScheduleVector greedy_schedule(const ChannelMatrix& ch) {
  Schedule rho(ch.num_links, 0);
  double current = 0.0;
  for (std::size_t l : by_descending_direct_gain(ch)) {
    rho[l] = 1;
    const double total = sum_rate_total(ch, rho);
    if (total > current) {
      current = total;
    } else {
      rho[l] = 0;
    }
  }
  return {std::move(rho), std::nullopt};
}

ScheduleVector heuristic_schedule(const ChannelMatrix& ch, const OracleKind& kind, std::uint64_t seed) {
  kind.validate();
  const std::size_t n = ch.num_links;
  switch (kind.kind) {
    case OracleKind::Kind::kBruteForce: return brute_force_optimal(ch);
    case OracleKind::Kind::kGreedy: return greedy_schedule(ch);
    case OracleKind::Kind::kAllActive: return {Schedule(n, 1), std::nullopt};
    case OracleKind::Kind::kStrongestFraction: {
      const auto count = std::min<std::size_t>(
          n, static_cast<std::size_t>(std::ceil(kind.param * static_cast<double>(n) - 1e-9)));
      Schedule rho(n, 0);
      const auto order = by_descending_direct_gain(ch);
      for (std::size_t i = 0; i < count; ++i) rho[order[i]] = 1;
      return {std::move(rho), std::nullopt};
    }
    case OracleKind::Kind::kRandomActive: {
      std::mt19937_64 rng(seed);
      std::bernoulli_distribution coin(kind.param);
      Schedule rho(n, 0);
      for (auto& r : rho) r = coin(rng) ? 1 : 0;
      return {std::move(rho), std::nullopt};
    }
  }
  throw ConfigError("unhandled oracle kind");
}

std::uint64_t channel_seed(const NetworkLayout& layout) { return mix_seed(layout.config.seed, 0xC7A77E15ULL); }

std::vector<LabeledLayout> label_dataset(const std::vector<NetworkLayout>& layouts, const ChannelConfig& ch_cfg,
                                         const OracleKind& oracle) {
  if (oracle.kind != OracleKind::Kind::kBruteForce && oracle.kind != OracleKind::Kind::kGreedy) {
    throw ConfigError("labels must come from the brute-force or greedy oracle, got " + oracle.name());
  }
  std::vector<LabeledLayout> out(layouts.size());
  parallel_for(layouts.size(), [&](std::size_t i) {
    const auto ch = compute_channel(layouts[i], ch_cfg, channel_seed(layouts[i]));
    out[i] = {layouts[i], heuristic_schedule(ch, oracle, 0)};
  });
  return out;
}

}  // namespace linksched
