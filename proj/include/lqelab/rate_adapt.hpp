#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>

#include "lqelab/phy.hpp"
#include "lqelab/rates.hpp"
#include "lqelab/rng.hpp"
#include "lqelab/snr_profile.hpp"

namespace lqelab {

// --- SampleRate baseline ------------------------------------------------------

// Per-rate smoothed delivery estimate driven by retransmission counts.
struct SampleRateState {
  std::array<double, kNumRates> pdr{};
  double alpha_r = 0.5;
  double probe_fraction = 0.10;

  SampleRateState() { pdr.fill(1.0); }  // optimistic start: every rate is tried
};

// P' = alpha / (1 + retransmissions) + (1 - alpha) * P for the rate used.
inline void samplerate_update(SampleRateState& state, int rate_index,
                              int retransmissions) {
  RateTable::standard().at(rate_index);
  if (retransmissions < 0)
    throw std::invalid_argument("retransmissions must be >= 0");
  double& p = state.pdr[static_cast<std::size_t>(rate_index - 1)];
  p = state.alpha_r / (1.0 + static_cast<double>(retransmissions)) +
      (1.0 - state.alpha_r) * p;
}

struct RateDecision {
  int selected_rate_index = 1;
  std::array<double, kNumRates> metric{};  // per-rate cost, +inf = unavailable
};

// Picks the rate minimizing expected per-packet airtime size/(P*R). Rates
// with P = 0 cost infinity; if every rate is unavailable the lowest rate is
// the documented fallback. Ties resolve to the lowest index.
inline RateDecision samplerate_select(const SampleRateState& state,
                                      int packet_size_bytes) {
  RateDecision d;
  d.metric.fill(std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  int best_index = 0;
  for (int k = 1; k <= kNumRates; ++k) {
    double p = state.pdr[static_cast<std::size_t>(k - 1)];
    if (p <= 0.0) continue;
    double cost = packet_airtime_us(k, packet_size_bytes) / p;
    d.metric[static_cast<std::size_t>(k - 1)] = cost;
    if (cost < best) {
      best = cost;
      best_index = k;
    }
  }
  d.selected_rate_index = best_index == 0 ? 1 : best_index;
  return d;
}

// SampleRate deviates from the chosen rate for a fraction of packets, picking
// any other rate uniformly, to keep unused rates' estimates alive.
inline int samplerate_probe(const SampleRateState& state, int selected,
                            SimRng& rng) {
  if (rng.uniform01() >= state.probe_fraction) return selected;
  int other = rng.uniform_int(1, kNumRates - 1);
  return other < selected ? other : other + 1;
}

// --- Profile-driven selection ---------------------------------------------------

// Expected backoff cost in slots for a link with the given delivery ratio,
// with the retransmission count capped at 11:
//   t = sum_{i=0..10} 2^i (1-pdr)^{i+1},  result = (c_m/2) (t+1) / pdr.
inline double backoff_time_slots(double pdr, double c_m) {
  if (!(pdr > 0.0)) return std::numeric_limits<double>::infinity();
  if (pdr > 1.0) pdr = 1.0;
  double t = 0.0;
  double loss_pow = 1.0 - pdr;  // (1-pdr)^{i+1}
  double two_pow = 1.0;         // 2^i
  for (int i = 0; i <= 10; ++i) {
    t += two_pow * loss_pow;
    two_pow *= 2.0;
    loss_pow *= 1.0 - pdr;
  }
  return c_m / 2.0 * (t + 1.0) / pdr;
}

struct RateAdaptParams {
  double alpha_s = 0.2;        // blend between live counts and the profile
  double c_m = 31.0;           // minimum contention window used by the metric
  double slot_us = 20.0;
  int packet_size_bytes = 1500;
  double pdr_floor = 1e-4;     // below this a rate is treated as unavailable
  double adjacent_probe_prob = 0.005;  // per neighbor rate, per packet
};

struct RateBatch {
  std::uint32_t tx = 0;
  std::uint32_t ack = 0;
};

// Fresh per-rate transmission counts observed at the current SNR, if any.
using LiveCounts = std::array<std::optional<RateBatch>, kNumRates>;

// Rate selection against the profile. For every rate the live counts (when
// present) are smoothed into the stored map first, so the metric reads the
// blended estimate alpha_s * live + (1 - alpha_s) * stored and the blend is
// persisted. Cost per rate:
//   G = airtime / pdr + backoff_slots(pdr) * slot,
// minimized over the 12 rates; ties take the lower rate; if no rate has a
// usable estimate the lowest rate is the fallback.
inline RateDecision select_rate(SnrProfile& profile, double snr_db,
                                const RateAdaptParams& params,
                                const LiveCounts& live = {}) {
  RateDecision d;
  d.metric.fill(std::numeric_limits<double>::infinity());
  double best = std::numeric_limits<double>::infinity();
  int best_index = 0;
  for (int k = 1; k <= kNumRates; ++k) {
    const auto& batch = live[static_cast<std::size_t>(k - 1)];
    if (batch && batch->tx >= 1)
      profile.online_update(k, snr_db, batch->tx, batch->ack, params.alpha_s);
    auto est = profile.lookup_pdr(k, snr_db);
    if (!est || *est < params.pdr_floor) continue;
    double g = packet_airtime_us(k, params.packet_size_bytes) / *est +
               backoff_time_slots(*est, params.c_m) * params.slot_us;
    d.metric[static_cast<std::size_t>(k - 1)] = g;
    if (g < best) {
      best = g;
      best_index = k;
    }
  }
  d.selected_rate_index = best_index == 0 ? 1 : best_index;
  return d;
}

// Adjacent-rate probing: each packet deviates to the neighbor below or above
// with small equal probability; the ladder edges probe only their single
// neighbor.
inline int probe_rate(const RateDecision& decision, SimRng& rng,
                      double adjacent_probe_prob = 0.005) {
  int k = decision.selected_rate_index;
  double u = rng.uniform01();
  if (k == 1) return u < adjacent_probe_prob ? 2 : 1;
  if (k == kNumRates)
    return u < adjacent_probe_prob ? kNumRates - 1 : kNumRates;
  if (u < adjacent_probe_prob) return k - 1;
  if (u < 2.0 * adjacent_probe_prob) return k + 1;
  return k;
}

}  // namespace lqelab
