#include "linksched/netgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "linksched/error.hpp"

namespace linksched {
namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kMinDistance = 1.0;

// Calls emit(l, rate_l) for every link; rho may be 0/1 or fractional.
template <typename Activation, typename Emit>
void for_each_link_rate(const ChannelMatrix& ch, std::span<const Activation> rho, Emit&& emit) {
  const std::size_t n = ch.num_links;
  const double p = ch.tx_power_w;
  for (std::size_t l = 0; l < n; ++l) {
    if (rho[l] == Activation{0}) {
      emit(l, 0.0);
      continue;
    }
    double interference = ch.noise_power_w;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != l && rho[k] != Activation{0}) interference += static_cast<double>(rho[k]) * p * ch.at(k, l);
    }
    const double signal = static_cast<double>(rho[l]) * p * ch.direct(l);
    emit(l, ch.weights[l] * ch.bandwidth_hz * std::log2(1.0 + signal / interference));
  }
}

}  // namespace

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void LayoutConfig::validate() const {
  if (num_pairs < 1) throw ConfigError("num_pairs must be >= 1, got " + std::to_string(num_pairs));
  if (!(d_min > 0.0 && d_min <= d_max && d_max <= area_edge)) {
    throw ConfigError("layout requires 0 < d_min <= d_max <= area_edge (got d_min=" + std::to_string(d_min) +
                      ", d_max=" + std::to_string(d_max) + ", area_edge=" + std::to_string(area_edge) + ")");
  }
}

void ChannelConfig::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  if (!(carrier_freq_hz > 0.0)) throw ConfigError("carrier frequency must be positive");
  if (!(antenna_height_m > 0.0)) throw ConfigError("antenna height must be positive");
  if (!(shadowing_std_db >= 0.0)) throw ConfigError("shadowing std must be nonnegative");
}

ScheduleVector ScheduleVector::from_soft(std::vector<double> probs) {
  ScheduleVector s;
  s.rho.resize(probs.size());
  for (std::size_t l = 0; l < probs.size(); ++l) s.rho[l] = probs[l] > 0.5 ? 1 : 0;
  s.soft = std::move(probs);
  return s;
}

std::size_t ScheduleVector::active_count() const {
  std::size_t n = 0;
  for (auto r : rho) n += r;
  return n;
}

double path_loss_db(double distance_m, const ChannelConfig& ch) {
  const double d = std::max(distance_m, kMinDistance);
  const double lambda = kSpeedOfLight / ch.carrier_freq_hz;
  const double h = ch.antenna_height_m;
  const double breakpoint = 4.0 * h * h / lambda;
  const double basic = std::abs(20.0 * std::log10(lambda * lambda / (8.0 * std::numbers::pi * h * h)));
  const double slope = d <= breakpoint ? 20.0 : 40.0;
  return basic + 6.0 + slope * std::log10(d / breakpoint);
}

NetworkLayout generate_layout(const LayoutConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, config.area_edge);
  std::uniform_real_distribution<double> dist(config.d_min, config.d_max);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  const auto n = static_cast<std::size_t>(config.num_pairs);
  NetworkLayout layout;
  layout.config = config;
  layout.config.seed = seed;
  layout.tx.resize(n);
  layout.rx.resize(n);
  layout.weights.assign(n, 1.0);
  for (std::size_t l = 0; l < n; ++l) {
    const double x = coord(rng);
    const double y = coord(rng);
    const double d = config.d_min == config.d_max ? config.d_min : dist(rng);
    const double theta = angle(rng);
    layout.tx[l] = {x, y};
    layout.rx[l] = {x + d * std::cos(theta), y + d * std::sin(theta)};
  }
  return layout;
}

ChannelMatrix compute_channel(const NetworkLayout& layout, const ChannelConfig& ch, std::uint64_t seed) {
  ch.validate();
  const std::size_t n = layout.size();
  if (layout.rx.size() != n) throw InputError("layout has mismatched tx/rx counts");

  ChannelMatrix out;
  out.num_links = n;
  out.gain.resize(n * n);
  out.noise_power_w = dbm_to_watts(ch.noise_psd_dbm_hz) * ch.bandwidth_hz;
  out.tx_power_w = dbm_to_watts(ch.tx_power_dbm);
  out.bandwidth_hz = ch.bandwidth_hz;
  out.weights = layout.weights.size() == n ? layout.weights : std::vector<double>(n, 1.0);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> shadow(0.0, ch.shadowing_std_db > 0.0 ? ch.shadowing_std_db : 1.0);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = 0; l < n; ++l) {
      double gain_db = -path_loss_db(layout.cross_distance(k, l), ch);
      if (ch.shadowing_std_db > 0.0) gain_db += shadow(rng);
      out.at(k, l) = std::pow(10.0, gain_db / 10.0);
    }
  }
  return out;
}

RateResult sum_rate(const ChannelMatrix& ch, std::span<const std::uint8_t> rho) {
  if (rho.size() != ch.num_links) throw StateError("schedule length does not match channel size");
  RateResult r;
  r.per_link.assign(ch.num_links, 0.0);
  for_each_link_rate(ch, rho, [&](std::size_t l, double rate) { r.per_link[l] = rate; });
  for (double v : r.per_link) r.total += v;
  return r;
}

double sum_rate_total(const ChannelMatrix& ch, std::span<const std::uint8_t> rho) {
  if (rho.size() != ch.num_links) throw StateError("schedule length does not match channel size");
  double total = 0.0;
  for_each_link_rate(ch, rho, [&](std::size_t, double rate) { total += rate; });
  return total;
}

double soft_sum_rate(const ChannelMatrix& ch, std::span<const double> probs, std::vector<double>* grad) {
  const std::size_t n = ch.num_links;
  if (probs.size() != n) throw StateError("probability vector length does not match channel size");
  const double p = ch.tx_power_w;
  const double scale = ch.bandwidth_hz / std::numbers::ln2;

  std::vector<double> interference(n), signal(n);
  double total = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    double acc = ch.noise_power_w;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != l) acc += probs[k] * p * ch.at(k, l);
    }
    interference[l] = acc;
    signal[l] = probs[l] * p * ch.direct(l);
    total += ch.weights[l] * ch.bandwidth_hz * std::log2(1.0 + signal[l] / acc);
  }
  if (grad) {
    grad->assign(n, 0.0);
    // d rate_l / d prob_k = w_l B p g_kl (1/(I_l+S_l) - 1/I_l) / ln2 for k != l.
    std::vector<double> cross(n);
    for (std::size_t l = 0; l < n; ++l) {
      const double i = interference[l];
      cross[l] = -ch.weights[l] * signal[l] / (i * (i + signal[l]));
    }
    for (std::size_t k = 0; k < n; ++k) {
      double g = ch.weights[k] * p * ch.direct(k) / (interference[k] + signal[k]);
      for (std::size_t l = 0; l < n; ++l) {
        if (l != k) g += p * ch.at(k, l) * cross[l];
      }
      (*grad)[k] = scale * g;
    }
  }
  return total;
}

}  // namespace linksched
