#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lqelab/phy.hpp"
#include "lqelab/rates.hpp"

namespace lqelab {

// The five link-quality estimation sources under comparison. Enumeration
// order is also the deterministic tie-break order when ranking.
enum class MethodId { Unicast, Beacon, Broadcast, Data, SnrProfile };

inline constexpr std::array<MethodId, 5> kAllMethods{
    MethodId::Unicast, MethodId::Beacon, MethodId::Broadcast, MethodId::Data,
    MethodId::SnrProfile};

inline std::string_view method_name(MethodId m) {
  switch (m) {
    case MethodId::Unicast: return "unicast";
    case MethodId::Beacon: return "beacon";
    case MethodId::Broadcast: return "broadcast";
    case MethodId::Data: return "data";
    case MethodId::SnrProfile: return "snr_profile";
  }
  return "?";
}

// Model inputs for the closed-form comparison of estimation methods.
struct LqeModelParams {
  double data_size_bytes = 1500.0;    // probe/data frame size
  double beacon_size_bytes = 40.0;    // hello frame size, sent at rate R(2)
  int node_count = 40;
  double probes_per_interval = 100.0;      // w: probes per estimation interval
  double data_packets_per_interval = 10.0; // w_d: mean data frames per interval
  double t_si_us = 10.0;              // short inter-frame space
  double t_di_us = 50.0;              // distributed inter-frame space
  double slot_us = 20.0;              // slot length
  double min_contention_window = 32.0;
  double neighbor_connect_prob = 0.3; // p_a
  double mean_snr_db = 10.0;
  double sigma_db = 1.0;
  std::vector<int> rates_in_scope{1, 2};
  // Cumulative data packet count backing the data-path SNR estimate. 0 means
  // "track the probing interval": the interval spans one SNR registration per
  // probe second, so the pool defaults to probes_per_interval.
  double cumulative_data_packets = 0.0;
  const BerModel* ber_model = nullptr;

  double effective_cumulative_packets() const {
    return cumulative_data_packets > 0.0 ? cumulative_data_packets
                                         : probes_per_interval;
  }
  const BerModel& ber() const {
    return ber_model ? *ber_model : BerModel::default_model();
  }
  void validate() const {
    if (node_count < 2)
      throw std::invalid_argument("node_count must be >= 2");
    if (probes_per_interval < 1.0 || data_packets_per_interval < 1.0)
      throw std::invalid_argument("w and w_d must be >= 1");
    if (t_si_us < 0 || t_di_us < 0 || slot_us < 0 ||
        min_contention_window < 0)
      throw std::invalid_argument("times must be >= 0");
    if (neighbor_connect_prob < 0.0 || neighbor_connect_prob > 1.0)
      throw std::invalid_argument("p_a must be in [0,1]");
    if (rates_in_scope.empty())
      throw std::invalid_argument("rates_in_scope must be non-empty");
    for (int r : rates_in_scope) RateTable::standard().at(r);
  }
};

// Mean neighbor count of a tandem (line) topology with N nodes.
inline double tandem_neighbors(int node_count) {
  if (node_count < 2)
    throw std::invalid_argument("tandem topology needs at least 2 nodes");
  return 2.0 * static_cast<double>(node_count - 1) /
         static_cast<double>(node_count);
}

inline double connected_neighbors(int node_count, double p_a) {
  return tandem_neighbors(node_count) * p_a;
}

namespace detail {

inline double mean_backoff_us(const LqeModelParams& p) {
  return p.min_contention_window / 2.0 * p.slot_us;
}

inline double beacon_airtime_us(const LqeModelParams& p) {
  return 8.0 * p.beacon_size_bytes / RateTable::standard().mbps(2);
}

inline double scope_airtime_sum_us(const LqeModelParams& p) {
  double sum = 0.0;
  for (int r : p.rates_in_scope)
    sum += 8.0 * p.data_size_bytes / RateTable::standard().mbps(r);
  return sum;
}

}  // namespace detail

// Time consumed by one estimation interval of a method, in microseconds. The
// data-traffic and profile methods share the same expression because both
// ride on the data stream.
inline double estimation_time_us(MethodId method, const LqeModelParams& p) {
  p.validate();
  const double nbar = tandem_neighbors(p.node_count);
  const double t_bt = detail::mean_backoff_us(p);
  const double beacon_air = detail::beacon_airtime_us(p);
  const double scope = static_cast<double>(p.rates_in_scope.size());
  const double air_sum = detail::scope_airtime_sum_us(p);
  switch (method) {
    case MethodId::Unicast:
      return (air_sum +
              (p.t_di_us + p.t_si_us + t_bt + beacon_air) * scope) *
             p.probes_per_interval * nbar;
    case MethodId::Beacon:
      return (beacon_air + p.t_si_us + t_bt) * p.probes_per_interval * nbar;
    case MethodId::Broadcast:
      return (air_sum + (p.t_si_us + t_bt) * scope) * p.probes_per_interval *
             nbar;
    case MethodId::Data:
    case MethodId::SnrProfile: {
      double mean_air = air_sum / scope;
      return (mean_air + p.t_di_us + p.t_si_us + t_bt + beacon_air) *
             p.data_packets_per_interval * nbar * p.neighbor_connect_prob;
    }
  }
  throw std::logic_error("unreachable");
}

// Inverse time consumption normalized to the data-traffic interval.
inline double time_efficiency(MethodId method, const LqeModelParams& p) {
  double tau_d = estimation_time_us(MethodId::Data, p);
  if (method == MethodId::Data || method == MethodId::SnrProfile) return 1.0;
  return tau_d / (estimation_time_us(method, p) + tau_d);
}

// Mean SNR estimation error of a method. Methods that discard measurements
// each interval keep a constant error; the profile accumulates forever and
// its error vanishes.
inline double snr_error_db(MethodId method, const LqeModelParams& p) {
  p.validate();
  switch (method) {
    case MethodId::SnrProfile:
      return 0.0;
    case MethodId::Data:
      return p.sigma_db / (p.effective_cumulative_packets() *
                           static_cast<double>(p.rates_in_scope.size()));
    default:
      return p.sigma_db / p.probes_per_interval;
  }
}

struct EfficiencyResult {
  double delta;      // summed mapping distance to the true SNR-PDR relation
  double epsilon_e;  // normalized estimation efficiency
};

namespace detail {

// Per-rate mapping value of a method: the delivery probability the method
// would predict for a data-sized frame, given its own probing frame and SNR
// estimate. The beacon method probes with small frames at rate 2 only.
inline double mapping_value(MethodId method, int rate_index,
                            const LqeModelParams& p) {
  const double psi = p.mean_snr_db;
  switch (method) {
    case MethodId::Unicast:
    case MethodId::Broadcast: {
      double est = psi - snr_error_db(method, p);
      return packet_success_prob(rate_index, est,
                                 static_cast<int>(p.data_size_bytes), p.ber());
    }
    case MethodId::Beacon: {
      double est = psi - snr_error_db(method, p);
      return packet_success_prob(2, est, static_cast<int>(p.beacon_size_bytes),
                                 p.ber());
    }
    case MethodId::Data: {
      double est = psi - snr_error_db(method, p);
      return packet_success_prob(rate_index, est,
                                 static_cast<int>(p.data_size_bytes), p.ber());
    }
    case MethodId::SnrProfile:
      return packet_success_prob(rate_index, psi,
                                 static_cast<int>(p.data_size_bytes), p.ber());
  }
  throw std::logic_error("unreachable");
}

inline double delta_of(MethodId method, const LqeModelParams& p) {
  double sum = 0.0;
  for (int r : p.rates_in_scope) {
    double truth = packet_success_prob(
        r, p.mean_snr_db, static_cast<int>(p.data_size_bytes), p.ber());
    sum += std::abs(mapping_value(method, r, p) - truth);
  }
  return sum;
}

}  // namespace detail

// delta and its normalization against the other four methods. When every
// method is exact (all deltas zero) each normalizes to 1.
inline EfficiencyResult estimation_efficiency(MethodId method,
                                              const LqeModelParams& p) {
  p.validate();
  double total = 0.0;
  double own = 0.0;
  for (MethodId m : kAllMethods) {
    double d = detail::delta_of(m, p);
    total += d;
    if (m == method) own = d;
  }
  double eps = total > 0.0 ? 1.0 - own / total : 1.0;
  return EfficiencyResult{own, eps};
}

inline double overall_efficiency(MethodId method, const LqeModelParams& p) {
  return estimation_efficiency(method, p).epsilon_e +
         time_efficiency(method, p);
}

// Methods ordered by descending overall efficiency; equal scores keep the
// enumeration order.
inline std::vector<MethodId> rank_all(const LqeModelParams& p) {
  std::vector<MethodId> order(kAllMethods.begin(), kAllMethods.end());
  std::array<double, 5> eps{};
  for (std::size_t i = 0; i < kAllMethods.size(); ++i)
    eps[i] = overall_efficiency(kAllMethods[i], p);
  std::stable_sort(order.begin(), order.end(), [&](MethodId a, MethodId b) {
    return eps[static_cast<std::size_t>(a)] > eps[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace lqelab
