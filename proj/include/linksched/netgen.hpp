#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace linksched {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

double distance(const Point& a, const Point& b);

struct LayoutConfig {
  int num_pairs = 50;
  double area_edge = 500.0;  // meters
  double d_min = 2.0;        // meters
  double d_max = 65.0;       // meters
  std::uint64_t seed = 0;

  // Throws ConfigError unless 0 < d_min <= d_max <= area_edge and num_pairs >= 1.
  void validate() const;
  friend bool operator==(const LayoutConfig&, const LayoutConfig&) = default;
};

/// One D2D deployment. Transmitters lie in [0, area_edge]^2; receivers sit on a
/// disk of radius d_max around their transmitter and may leave the square.
struct NetworkLayout {
  std::vector<Point> tx;
  std::vector<Point> rx;
  LayoutConfig config;
  std::vector<double> weights;

  std::size_t size() const { return tx.size(); }
  double direct_distance(std::size_t l) const { return distance(tx[l], rx[l]); }
  // Distance from transmitter k to receiver l.
  double cross_distance(std::size_t k, std::size_t l) const { return distance(tx[k], rx[l]); }
  friend bool operator==(const NetworkLayout&, const NetworkLayout&) = default;
};

struct ChannelConfig {
  double noise_psd_dbm_hz = -169.0;
  double bandwidth_hz = 5e6;
  double carrier_freq_hz = 2.4e9;
  double antenna_height_m = 1.5;
  double tx_power_dbm = 40.0;
  double shadowing_std_db = 0.0;

  void validate() const;
};

/// Linear power gains, gain(k, l) = |h_kl|^2 from transmitter k to receiver l.
struct ChannelMatrix {
  std::size_t num_links = 0;
  std::vector<double> gain;  // row-major num_links x num_links
  double noise_power_w = 0.0;
  double tx_power_w = 0.0;
  double bandwidth_hz = 0.0;
  std::vector<double> weights;

  double at(std::size_t k, std::size_t l) const { return gain[k * num_links + l]; }
  double& at(std::size_t k, std::size_t l) { return gain[k * num_links + l]; }
  double direct(std::size_t l) const { return at(l, l); }
};

using Schedule = std::vector<std::uint8_t>;

struct ScheduleVector {
  Schedule rho;
  std::optional<std::vector<double>> soft;

  // rho[l] = 1 iff soft[l] > 0.5.
  static ScheduleVector from_soft(std::vector<double> probs);
  std::size_t active_count() const;
};

struct RateResult {
  double total = 0.0;
  std::vector<double> per_link;
};

// Median ITU-R P.1411 line-of-sight loss in dB; distances below 1 m are clamped.
double path_loss_db(double distance_m, const ChannelConfig& ch);

NetworkLayout generate_layout(const LayoutConfig& config, std::uint64_t seed);

ChannelMatrix compute_channel(const NetworkLayout& layout, const ChannelConfig& ch, std::uint64_t seed);

RateResult sum_rate(const ChannelMatrix& ch, std::span<const std::uint8_t> rho);
double sum_rate_total(const ChannelMatrix& ch, std::span<const std::uint8_t> rho);

// Sum rate with activation probabilities substituted for rho. When grad is
// non-null it receives d(total)/d(probs).
double soft_sum_rate(const ChannelMatrix& ch, std::span<const double> probs,
                     std::vector<double>* grad = nullptr);

double dbm_to_watts(double dbm);

}  // namespace linksched
