#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqelab/estimators.hpp"
#include "lqelab/phy.hpp"
#include "lqelab/rate_adapt.hpp"
#include "lqelab/rates.hpp"
#include "lqelab/rng.hpp"
#include "lqelab/routing.hpp"
#include "lqelab/sim/scenario.hpp"
#include "lqelab/snr_profile.hpp"

namespace lqelab::sim {

enum class RateAlgo { ProfileG, SampleRate, Fixed };

inline std::string_view rate_algo_name(RateAlgo a) {
  switch (a) {
    case RateAlgo::ProfileG: return "profile-g";
    case RateAlgo::SampleRate: return "samplerate";
    case RateAlgo::Fixed: return "fixed";
  }
  return "?";
}

struct SimOptions {
  EstimatorKind estimator = EstimatorKind::SnrProfile;  // feeds routing
  RateAlgo rate_algo = RateAlgo::ProfileG;
  RouteMetric route_metric = RouteMetric::R;
  int fixed_rate_index = 12;  // used when rate_algo == Fixed
  bool record_events = true;
};

struct Event {
  enum class Kind { Beacon, BroadcastProbe, Data };
  double t_us = 0.0;
  Kind kind = Kind::Data;
  int from = 0;
  int to = 0;
  int rate_index = 1;
  int size_bytes = 0;
  bool delivered = false;
  int retransmissions = 0;
  double elapsed_us = 0.0;
};

struct EstimateSample {
  int t_s = 0;
  int from = 0;
  int to = 0;
  int rate_index = 1;
  EstimatorKind method = EstimatorKind::SnrProfile;
  double value = 0.0;
};

struct DecisionSample {
  int t_s = 0;
  int node = 0;
  int neighbor = 0;
  double snr_db = 0.0;
  int selected_rate = 1;
  int probed_rate = 1;
  double metric_selected = 0.0;
};

struct RouteSample {
  int t_s = 0;
  int src = 0;
  int dst = 0;
  std::vector<int> path;  // empty = no route
  double cost = 0.0;
  int hops() const { return path.empty() ? 0 : static_cast<int>(path.size()) - 1; }
};

struct FlowSummary {
  int flow_index = 0;
  int src = 0;
  int dst = 0;
  long long offered_packets = 0;
  long long delivered_packets = 0;
  long long delivered_payload_bytes = 0;
  double throughput_mbps = 0.0;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<FlowSummary> flows;
  std::vector<EstimateSample> estimates;
  std::vector<DecisionSample> decisions;
  std::vector<RouteSample> routes;
  std::vector<Event> events;
};

struct TxResult {
  bool delivered = false;
  int retransmissions = 0;
  double elapsed_us = 0.0;
};

// One unicast frame: Bernoulli attempts at the given per-attempt success
// probability, doubling the contention window from c_m on each retry (capped
// at 1023 slots as in the MAC), giving up after 11 retransmissions. Elapsed
// time sums DIFS, sampled backoff, data airtime, SIFS and the ack frame.
inline TxResult transmit_unicast(double success_prob, int rate_index,
                                 int size_bytes, const RateSpec& mac,
                                 SimRng& rng) {
  constexpr int kMaxRetries = 11;
  constexpr double kCwCap = 1023.0;
  double cw = mac.c_m;
  double elapsed = 0.0;
  double frame_us = packet_airtime_us(rate_index, size_bytes) + mac.t_di_us +
                    mac.t_si_us +
                    packet_airtime_us(kBeaconRateIndex, kBeaconSizeBytes);
  for (int attempt = 0; attempt <= kMaxRetries; ++attempt) {
    int slots = rng.uniform_int(0, static_cast<int>(std::min(cw, kCwCap)));
    elapsed += frame_us + slots * mac.slot_us;
    if (rng.bernoulli(success_prob)) return {true, attempt, elapsed};
    cw = std::min(cw * 2.0, kCwCap);
  }
  return {false, kMaxRetries, elapsed};
}

namespace detail {

constexpr double kMinSignalDbm = -95.0;  // assigned on a first-ever loss
constexpr double kSecondUs = 1e6;

struct DirState {
  double measured_snr = kMinSignalDbm;  // register at this direction's receiver
  bool have_measurement = false;
  int beacon_loss_streak = 0;
  BeaconWindow beacon_win{10};
  std::array<EwmaState, kNumRates> bcast{};
  SampleRateState srate;  // owned by this direction's transmitter
  RateDecision decision;
  std::array<RateBatch, kNumRates> cur_batch{};
  LiveCounts last_batch{};
  int last_batch_bin = std::numeric_limits<int>::min();
  std::array<bool, kNumRates> last_batch_consumed{};
  std::array<double, kNumRates> last_data_pdr{};
  int first_tx_rate = 0;  // first data rate used this second (0 = none)
};

struct LinkRuntime {
  int index = 0;
  int a = 0;
  int b = 1;
  const SnrModel* model = nullptr;
  SnrProfile profile;
  double true_snr = 0.0;
  bool expired = false;
  double airtime_used_us = 0.0;  // within the current second
  DirState dir[2];               // 0: a->b, 1: b->a

  int tx_node(int d) const { return d == 0 ? a : b; }
  int rx_node(int d) const { return d == 0 ? b : a; }
  // The register the transmitter of direction d reads (reciprocity: it
  // measures SNR on frames arriving from the peer).
  double tx_register(int d) const { return dir[1 - d].measured_snr; }
  bool tx_register_valid(int d) const { return dir[1 - d].have_measurement; }
};

class Engine {
 public:
  Engine(const Scenario& scenario, std::uint64_t seed, const SimOptions& opts)
      : sc_(scenario),
        opts_(opts),
        rng_channel_(SimRng::for_stream(seed, 1)),
        rng_mac_(SimRng::for_stream(seed, 2)),
        rng_boot_(SimRng::for_stream(seed, 3)),
        rng_tc_(SimRng::for_stream(seed, 4)) {
    result_.seed = seed;
    rate_params_.alpha_s = sc_.lqe.alpha_s;
    rate_params_.c_m = sc_.rate.c_m;
    rate_params_.slot_us = sc_.rate.slot_us;
    rate_params_.adjacent_probe_prob = sc_.rate.adjacent_probe_prob;
    links_.reserve(sc_.links.size());
    for (std::size_t i = 0; i < sc_.links.size(); ++i) {
      const auto& spec = sc_.links[i];
      LinkRuntime lr;
      lr.index = static_cast<int>(i);
      lr.a = spec.a;
      lr.b = spec.b;
      lr.model = &spec.snr;
      lr.profile = SnrProfile(std::to_string(spec.a) + "-" +
                              std::to_string(spec.b));
      for (auto& d : lr.dir) {
        d.beacon_win = BeaconWindow(sc_.lqe.beacon_window);
        for (auto& e : d.bcast) e.alpha_p = sc_.lqe.alpha_p;
        d.srate.alpha_r = sc_.rate.alpha_r;
        d.srate.probe_fraction = sc_.rate.probe_fraction;
        d.last_data_pdr.fill(1.0);  // optimistic until data flows
      }
      links_.push_back(std::move(lr));
      link_by_pair_[normalize(spec.a, spec.b)] = static_cast<int>(i);
    }
    for (const auto& f : sc_.flows) {
      flow_summaries_.push_back(FlowSummary{
          static_cast<int>(flow_summaries_.size()), f.src, f.dst, 0, 0, 0,
          0.0});
    }
  }

  RunResult run() {
    if (sc_.bootstrap.enabled) bootstrap_profiles();
    int duration = static_cast<int>(sc_.duration_s);
    for (int t = 0; t < duration; ++t) step(t);
    finish();
    return std::move(result_);
  }

 private:
  static std::pair<int, int> normalize(int a, int b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  LinkRuntime* find_link(int u, int v) {
    auto it = link_by_pair_.find(normalize(u, v));
    return it == link_by_pair_.end() ? nullptr : &links_[static_cast<std::size_t>(it->second)];
  }

  // Initial per-rate probing with acknowledgments, feeding raw counts into
  // each link's profile. Runs on its own clock before the scenario starts.
  void bootstrap_profiles() {
    int seconds = static_cast<int>(sc_.bootstrap.duration_s);
    int per_rate =
        static_cast<int>(sc_.bootstrap.packets_per_s_per_rate);
    for (auto& link : links_) {
      for (int t = 0; t < seconds; ++t) {
        double snr = link.model->sample(static_cast<double>(t), rng_boot_) +
                     sc_.bootstrap.snr_offset_db;
        for (int k = 1; k <= kNumRates; ++k) {
          double p = packet_success_prob(k, snr, link.profile.packet_size_bytes());
          for (int n = 0; n < per_rate; ++n)
            link.profile.bootstrap_record(k, snr, rng_boot_.bernoulli(p));
        }
      }
    }
  }

  void step(int t) {
    sample_channel(t);
    beacon_tick(t);
    if (sc_.lqe.broadcast_probes) broadcast_probe_tick(t);
    decide_rates(t);
    if (tc_due(t)) tc_tick(t);
    snapshot_estimates(t);
    data_tick(t);
    close_second(t);
  }

  void sample_channel(int t) {
    for (auto& link : links_) {
      link.true_snr = link.model->sample(static_cast<double>(t), rng_channel_) +
                      sc_.snr_offset_db;
      link.airtime_used_us = 0.0;
      for (auto& d : link.dir) d.first_tx_rate = 0;
    }
  }

  // 40 B hello frames at rate R(2), one per node per second, received
  // independently per neighbor. Fifty consecutive losses expire the neighbor
  // relation; any reception revives it. A receiver registers the frame SNR;
  // on a loss it keeps the previous register (first-ever loss: -95 dBm).
  void beacon_tick(int t) {
    for (auto& link : links_) {
      double p = packet_success_prob(kBeaconRateIndex, link.true_snr,
                                     kBeaconSizeBytes);
      for (int d = 0; d < 2; ++d) {
        auto& dir = link.dir[d];
        bool received = rng_mac_.bernoulli(p);
        double elapsed = sc_.rate.t_di_us +
                         rng_mac_.uniform_int(0, static_cast<int>(sc_.rate.c_m)) *
                             sc_.rate.slot_us +
                         packet_airtime_us(kBeaconRateIndex, kBeaconSizeBytes);
        record_event(Event{t * detail::kSecondUs + link.airtime_used_us,
                           Event::Kind::Beacon, link.tx_node(d),
                           link.rx_node(d), kBeaconRateIndex, kBeaconSizeBytes,
                           received, 0, elapsed});
        link.airtime_used_us += elapsed;
        dir.beacon_win.push(received);
        if (received) {
          dir.measured_snr = link.true_snr;
          dir.have_measurement = true;
          dir.beacon_loss_streak = 0;
          link.expired = false;
        } else {
          if (!dir.have_measurement) dir.measured_snr = kMinSignalDbm;
          if (++dir.beacon_loss_streak >= sc_.routing.beacon_expiry_losses)
            link.expired = true;
        }
      }
    }
  }

  // One data-sized broadcast per supported rate per node per second, not
  // acknowledged and never retransmitted. Each neighbor's reception drives
  // the per-rate EWMA counting estimator.
  void broadcast_probe_tick(int t) {
    for (auto& link : links_) {
      for (int d = 0; d < 2; ++d) {
        auto& dir = link.dir[d];
        for (int k = 1; k <= kNumRates; ++k) {
          double p = packet_success_prob(k, link.true_snr, 1500);
          bool received = rng_mac_.bernoulli(p);
          double elapsed = sc_.rate.t_di_us +
                           rng_mac_.uniform_int(0, static_cast<int>(sc_.rate.c_m)) *
                               sc_.rate.slot_us +
                           packet_airtime_us(k, 1500);
          record_event(Event{t * detail::kSecondUs + link.airtime_used_us,
                             Event::Kind::BroadcastProbe, link.tx_node(d),
                             link.rx_node(d), k, 1500, received, 0, elapsed});
          link.airtime_used_us += elapsed;
          dir.bcast[static_cast<std::size_t>(k - 1)] = ewma_update(
              dir.bcast[static_cast<std::size_t>(k - 1)], received);
        }
      }
    }
  }

  // Once per second each transmitter fixes the rate it will use on the link.
  // The profile algorithm blends last interval's live counts (when they
  // belong to the current SNR bin) into the stored map and minimizes G; the
  // baseline minimizes expected airtime from its retransmission-driven
  // estimates.
  void decide_rates(int t) {
    for (auto& link : links_) {
      for (int d = 0; d < 2; ++d) {
        auto& dir = link.dir[d];
        switch (opts_.rate_algo) {
          case RateAlgo::ProfileG: {
            double snr = link.tx_register(d);
            LiveCounts live{};
            int bin = SnrProfile::quantize(snr);
            if (bin == dir.last_batch_bin) {
              for (int k = 0; k < kNumRates; ++k) {
                if (dir.last_batch[static_cast<std::size_t>(k)] &&
                    !dir.last_batch_consumed[static_cast<std::size_t>(k)]) {
                  live[static_cast<std::size_t>(k)] =
                      dir.last_batch[static_cast<std::size_t>(k)];
                  dir.last_batch_consumed[static_cast<std::size_t>(k)] = true;
                }
              }
            }
            dir.decision = select_rate(link.profile, snr, rate_params_, live);
            break;
          }
          case RateAlgo::SampleRate:
            dir.decision =
                samplerate_select(dir.srate, rate_params_.packet_size_bytes);
            break;
          case RateAlgo::Fixed:
            dir.decision = RateDecision{};
            dir.decision.metric.fill(0.0);
            dir.decision.selected_rate_index = opts_.fixed_rate_index;
            break;
        }
      }
    }
  }

  bool tc_due(int t) const {
    int interval = std::max(1, static_cast<int>(sc_.routing.tc_interval_s));
    return t % interval == 0;
  }

  double control_estimate(const LinkRuntime& link, int d) const {
    const auto& dir = link.dir[d];
    int rate = dir.decision.selected_rate_index;
    switch (opts_.estimator) {
      case EstimatorKind::SnrProfile:
        return link.profile.lookup_pdr(rate, link.tx_register(d)).value_or(0.0);
      case EstimatorKind::Beacon:
        return dir.beacon_win.estimate().value_or(0.0);
      case EstimatorKind::BroadcastEwma:
        return dir.bcast[static_cast<std::size_t>(rate - 1)].value;
      case EstimatorKind::DataPacket:
        return dir.last_data_pdr[static_cast<std::size_t>(rate - 1)];
    }
    return 0.0;
  }

  // Periodic topology-control flood: every live link advertises its current
  // per-direction (PDR, rate) snapshot. A lost flood leaves the previous
  // snapshot aging in place; entries past the expiry drop out of routing.
  void tc_tick(int t) {
    for (auto& link : links_) {
      if (link.expired) continue;
      if (sc_.routing.tc_loss_prob > 0.0 &&
          rng_tc_.bernoulli(sc_.routing.tc_loss_prob))
        continue;  // flood lost; stale state retained
      LinkState snapshot;
      snapshot.a = link.a;
      snapshot.b = link.b;
      snapshot.pdr_fwd = control_estimate(link, 0);
      snapshot.pdr_rev = control_estimate(link, 1);
      snapshot.rate_fwd_mbps =
          RateTable::standard().mbps(link.dir[0].decision.selected_rate_index);
      snapshot.rate_rev_mbps =
          RateTable::standard().mbps(link.dir[1].decision.selected_rate_index);
      db_.apply_snapshot(snapshot);
    }
    db_.age_all();
    auto active = db_.active(sc_.routing.expiry_intervals);
    for (std::size_t i = 0; i < sc_.flows.size(); ++i) {
      const auto& flow = sc_.flows[i];
      if (flow.type != TrafficType::Duty) continue;
      auto route = shortest_path(active, opts_.route_metric, flow.src,
                                 flow.dst, flow.packet_size_bytes);
      RouteSample sample;
      sample.t_s = t;
      sample.src = flow.src;
      sample.dst = flow.dst;
      if (route) {
        sample.path = route->path;
        sample.cost = route->cost;
      }
      flow_routes_[i] = sample.path;
      result_.routes.push_back(std::move(sample));
    }
  }

  // Captures what each estimator family would report for every (direction,
  // rate) before this second's data flows; rows are emitted later only where
  // the data benchmark exists, keeping the series aligned.
  void snapshot_estimates(int t) {
    pending_estimates_.clear();
    for (auto& link : links_) {
      for (int d = 0; d < 2; ++d) {
        auto& dir = link.dir[d];
        auto beacon = dir.beacon_win.estimate();
        for (int k = 1; k <= kNumRates; ++k) {
          PendingEstimate pe;
          pe.link_index = link.index;
          pe.dir = d;
          pe.rate_index = k;
          pe.profile =
              link.profile.lookup_pdr(k, link.tx_register(d)).value_or(0.0);
          pe.broadcast = dir.bcast[static_cast<std::size_t>(k - 1)].value;
          pe.beacon = beacon.value_or(0.0);
          pending_estimates_.push_back(pe);
        }
      }
    }
  }

  struct HopOutcome {
    bool delivered = false;
    double elapsed_us = 0.0;
  };

  HopOutcome send_over_link(int t, LinkRuntime& link, int d, int rate_used,
                            int size_bytes, bool single_attempt) {
    auto& dir = link.dir[d];
    TxResult res;
    if (single_attempt) {
      double p = packet_success_prob(rate_used, link.true_snr, size_bytes);
      int slots = rng_mac_.uniform_int(0, static_cast<int>(sc_.rate.c_m));
      res.delivered = rng_mac_.bernoulli(p);
      res.retransmissions = 0;
      res.elapsed_us = sc_.rate.t_di_us + slots * sc_.rate.slot_us +
                       packet_airtime_us(rate_used, size_bytes) +
                       sc_.rate.t_si_us +
                       packet_airtime_us(kBeaconRateIndex, kBeaconSizeBytes);
    } else {
      double p = packet_success_prob(rate_used, link.true_snr, size_bytes);
      res = transmit_unicast(p, rate_used, size_bytes, sc_.rate, rng_mac_);
    }
    record_event(Event{t * detail::kSecondUs + link.airtime_used_us,
                       Event::Kind::Data, link.tx_node(d), link.rx_node(d),
                       rate_used, size_bytes, res.delivered,
                       res.retransmissions, res.elapsed_us});
    link.airtime_used_us += res.elapsed_us;
    auto& batch = dir.cur_batch[static_cast<std::size_t>(rate_used - 1)];
    batch.tx += static_cast<std::uint32_t>(res.retransmissions + 1);
    if (res.delivered) batch.ack += 1;
    if (dir.first_tx_rate == 0) dir.first_tx_rate = rate_used;
    samplerate_update(dir.srate, rate_used, res.retransmissions);
    return {res.delivered, res.elapsed_us};
  }

  int pick_tx_rate(LinkRuntime& link, int d) {
    auto& dir = link.dir[d];
    switch (opts_.rate_algo) {
      case RateAlgo::ProfileG:
        return probe_rate(dir.decision, rng_mac_,
                          rate_params_.adjacent_probe_prob);
      case RateAlgo::SampleRate:
        return samplerate_probe(dir.srate, dir.decision.selected_rate_index,
                                rng_mac_);
      case RateAlgo::Fixed:
        return dir.decision.selected_rate_index;
    }
    return dir.decision.selected_rate_index;
  }

  bool flow_active(const FlowSpec& f, int t) const {
    if (t < static_cast<int>(f.start_s)) return false;
    double end = f.duration_s < 0.0 ? sc_.duration_s : f.start_s + f.duration_s;
    return t < static_cast<int>(end);
  }

  void data_tick(int t) {
    for (std::size_t i = 0; i < sc_.flows.size(); ++i) {
      const auto& flow = sc_.flows[i];
      if (!flow_active(flow, t)) continue;
      if (flow.type == TrafficType::RateProbe)
        rate_probe_flow(t, flow);
      else
        duty_flow(t, i, flow);
    }
  }

  // Measurement traffic: a fixed number of single-attempt unicast frames per
  // rate per second over one link, giving the per-rate data-counting
  // benchmark something to see at every rate.
  void rate_probe_flow(int t, const FlowSpec& flow) {
    LinkRuntime* link = find_link(flow.src, flow.dst);
    if (!link) throw std::runtime_error("rate-probe flow endpoints not adjacent");
    int d = link->a == flow.src ? 0 : 1;
    int count = static_cast<int>(flow.probe_packets_per_s_per_rate);
    for (int k = 1; k <= kNumRates; ++k)
      for (int n = 0; n < count; ++n)
        send_over_link(t, *link, d, k, flow.packet_size_bytes, true);
  }

  // Duty-cycled saturation: the flow offers packets until the fraction of
  // the second it is entitled to is spent. Packets walk the current route
  // hop by hop; a hop that exhausts its retransmissions drops the packet.
  void duty_flow(int t, std::size_t flow_index, const FlowSpec& flow) {
    auto& summary = flow_summaries_[flow_index];
    auto route_it = flow_routes_.find(flow_index);
    if (route_it == flow_routes_.end() || route_it->second.empty()) return;
    const auto& path = route_it->second;
    double budget = flow.load * detail::kSecondUs;
    while (budget > 0.0) {
      bool congested = false;
      for (std::size_t h = 0; h + 1 < path.size(); ++h) {
        LinkRuntime* link = find_link(path[h], path[h + 1]);
        if (!link || link->airtime_used_us >= detail::kSecondUs) {
          congested = true;
          break;
        }
      }
      if (congested) break;
      ++summary.offered_packets;
      bool delivered = true;
      for (std::size_t h = 0; h + 1 < path.size(); ++h) {
        LinkRuntime* link = find_link(path[h], path[h + 1]);
        if (!link || link->expired) {
          delivered = false;
          break;
        }
        int d = link->a == path[h] ? 0 : 1;
        int rate_used = pick_tx_rate(*link, d);
        auto outcome =
            send_over_link(t, *link, d, rate_used, flow.packet_size_bytes, false);
        budget -= outcome.elapsed_us;
        if (!outcome.delivered) {
          delivered = false;
          break;
        }
      }
      if (delivered) {
        ++summary.delivered_packets;
        summary.delivered_payload_bytes += flow.packet_size_bytes;
      }
    }
  }

  // End of the second: smooth this interval's batches into the profile at
  // the bin they were observed in (unless the rate decision already consumed
  // them), refresh the data-counting estimates, emit the aligned estimator
  // and benchmark series, and roll the batches over.
  void close_second(int t) {
    for (auto& link : links_) {
      for (int d = 0; d < 2; ++d) {
        auto& dir = link.dir[d];
        double snr = link.tx_register(d);
        bool any = false;
        for (int k = 1; k <= kNumRates; ++k) {
          auto& batch = dir.cur_batch[static_cast<std::size_t>(k - 1)];
          if (batch.tx == 0) continue;
          any = true;
          dir.last_data_pdr[static_cast<std::size_t>(k - 1)] =
              static_cast<double>(batch.ack) / static_cast<double>(batch.tx);
        }
        if (any) {
          for (const auto& pe : pending_estimates_) {
            if (pe.link_index != link.index || pe.dir != d) continue;
            const auto& batch =
                dir.cur_batch[static_cast<std::size_t>(pe.rate_index - 1)];
            if (batch.tx == 0) continue;
            int from = link.tx_node(d);
            int to = link.rx_node(d);
            double bench = static_cast<double>(batch.ack) /
                           static_cast<double>(batch.tx);
            result_.estimates.push_back(EstimateSample{
                t, from, to, pe.rate_index, EstimatorKind::SnrProfile,
                pe.profile});
            result_.estimates.push_back(EstimateSample{
                t, from, to, pe.rate_index, EstimatorKind::BroadcastEwma,
                pe.broadcast});
            result_.estimates.push_back(EstimateSample{
                t, from, to, pe.rate_index, EstimatorKind::Beacon, pe.beacon});
            result_.estimates.push_back(EstimateSample{
                t, from, to, pe.rate_index, EstimatorKind::DataPacket, bench});
          }
        }
        for (int k = 1; k <= kNumRates; ++k) {
          auto& batch = dir.cur_batch[static_cast<std::size_t>(k - 1)];
          auto idx = static_cast<std::size_t>(k - 1);
          if (dir.last_batch[idx] && !dir.last_batch_consumed[idx]) {
            // batch never matched a decision bin; fold it in at its own bin
            apply_profile_update(link, k, dir.last_batch_bin,
                                 *dir.last_batch[idx]);
          }
          if (batch.tx >= 1)
            dir.last_batch[idx] = batch;
          else
            dir.last_batch[idx].reset();
          dir.last_batch_consumed[idx] = false;
          batch = RateBatch{};
        }
        if (any) dir.last_batch_bin = SnrProfile::quantize(snr);
        record_decision(t, link, d);
      }
    }
  }

  void apply_profile_update(LinkRuntime& link, int rate_index, int bin,
                            const RateBatch& batch) {
    if (bin == std::numeric_limits<int>::min() || sc_.lqe.alpha_s == 0.0)
      return;
    link.profile.online_update(rate_index, static_cast<double>(bin), batch.tx,
                               batch.ack, sc_.lqe.alpha_s);
  }

  void record_decision(int t, LinkRuntime& link, int d) {
    auto& dir = link.dir[d];
    int sel = dir.decision.selected_rate_index;
    double metric = dir.decision.metric[static_cast<std::size_t>(sel - 1)];
    if (!std::isfinite(metric)) metric = 0.0;
    result_.decisions.push_back(DecisionSample{
        t, link.tx_node(d), link.rx_node(d), link.tx_register(d), sel,
        dir.first_tx_rate == 0 ? sel : dir.first_tx_rate, metric});
  }

  void record_event(Event e) {
    if (opts_.record_events) result_.events.push_back(std::move(e));
  }

  void finish() {
    for (std::size_t i = 0; i < sc_.flows.size(); ++i) {
      const auto& flow = sc_.flows[i];
      auto& summary = flow_summaries_[i];
      double end = flow.duration_s < 0.0 ? sc_.duration_s
                                         : flow.start_s + flow.duration_s;
      double active = std::max(1.0, end - flow.start_s);
      summary.throughput_mbps =
          static_cast<double>(summary.delivered_payload_bytes) * 8.0 /
          (active * detail::kSecondUs);
      result_.flows.push_back(summary);
    }
    std::stable_sort(result_.events.begin(), result_.events.end(),
                     [](const Event& x, const Event& y) {
                       return x.t_us < y.t_us;
                     });
  }

  struct PendingEstimate {
    int link_index = 0;
    int dir = 0;
    int rate_index = 1;
    double profile = 0.0;
    double broadcast = 0.0;
    double beacon = 0.0;
  };

  const Scenario& sc_;
  SimOptions opts_;
  SimRng rng_channel_;
  SimRng rng_mac_;
  SimRng rng_boot_;
  SimRng rng_tc_;
  RateAdaptParams rate_params_;
  std::vector<LinkRuntime> links_;
  std::map<std::pair<int, int>, int> link_by_pair_;
  LinkStateDb db_;
  std::map<std::size_t, std::vector<int>> flow_routes_;
  std::vector<FlowSummary> flow_summaries_;
  std::vector<PendingEstimate> pending_estimates_;
  RunResult result_;
};

}  // namespace detail

inline RunResult run_one(const Scenario& scenario, std::uint64_t seed,
                         const SimOptions& opts = {}) {
  scenario.validate();
  detail::Engine engine(scenario, seed, opts);
  return engine.run();
}

// All seeds of the scenario, in order.
inline std::vector<RunResult> run(const Scenario& scenario,
                                  const SimOptions& opts = {}) {
  std::vector<RunResult> results;
  results.reserve(scenario.seeds.size());
  for (auto seed : scenario.seeds) results.push_back(run_one(scenario, seed, opts));
  return results;
}

}  // namespace lqelab::sim
