#pragma once

#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqelab/csv.hpp"
#include "lqelab/estimators.hpp"
#include "lqelab/rates.hpp"
#include "lqelab/sim/engine.hpp"

namespace lqelab::sim {

inline std::string path_to_string(const std::vector<int>& path) {
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '-';
    s += std::to_string(path[i]);
  }
  return s;
}

inline void write_estimates_csv(std::ostream& out,
                                std::span<const RunResult> results) {
  out << "seed,t,link,rate_mbps,method,pdr_estimate\n";
  for (const auto& r : results)
    for (const auto& e : r.estimates)
      out << r.seed << ',' << e.t_s << ',' << e.from << "->" << e.to << ','
          << double_to_string(RateTable::standard().mbps(e.rate_index)) << ','
          << estimator_name(e.method) << ',' << double_to_string(e.value)
          << '\n';
}

inline void write_decisions_csv(std::ostream& out,
                                std::span<const RunResult> results) {
  out << "seed,t,node,neighbor,snr_db,selected_rate,probed_rate,G_selected\n";
  for (const auto& r : results)
    for (const auto& d : r.decisions)
      out << r.seed << ',' << d.t_s << ',' << d.node << ',' << d.neighbor
          << ',' << double_to_string(d.snr_db) << ','
          << double_to_string(RateTable::standard().mbps(d.selected_rate))
          << ','
          << double_to_string(RateTable::standard().mbps(d.probed_rate)) << ','
          << double_to_string(d.metric_selected) << '\n';
}

inline void write_routes_csv(std::ostream& out,
                             std::span<const RunResult> results,
                             std::string_view metric_name) {
  out << "seed,t,src,dst,path,hops,metric,cost\n";
  for (const auto& r : results)
    for (const auto& s : r.routes)
      out << r.seed << ',' << s.t_s << ',' << s.src << ',' << s.dst << ','
          << path_to_string(s.path) << ',' << s.hops() << ',' << metric_name
          << ',' << double_to_string(s.cost) << '\n';
}

// Per-seed flow rows followed by a seed-mean row per flow.
inline void write_summary_csv(std::ostream& out,
                              std::span<const RunResult> results,
                              const SimOptions& opts) {
  out << "seed,flow,src,dst,estimator,rate_algo,route_metric,offered_packets,"
         "delivered_packets,delivered_bytes,throughput_mbps\n";
  std::map<int, std::pair<double, int>> mean_acc;  // flow -> (sum, n)
  std::map<int, const FlowSummary*> last;
  for (const auto& r : results) {
    for (const auto& f : r.flows) {
      out << r.seed << ',' << f.flow_index << ',' << f.src << ',' << f.dst
          << ',' << estimator_name(opts.estimator) << ','
          << rate_algo_name(opts.rate_algo) << ','
          << route_metric_name(opts.route_metric) << ',' << f.offered_packets
          << ',' << f.delivered_packets << ',' << f.delivered_payload_bytes
          << ',' << double_to_string(f.throughput_mbps) << '\n';
      auto& acc = mean_acc[f.flow_index];
      acc.first += f.throughput_mbps;
      acc.second += 1;
      last[f.flow_index] = &f;
    }
  }
  for (const auto& [flow, acc] : mean_acc) {
    const auto* f = last[flow];
    out << "mean," << flow << ',' << f->src << ',' << f->dst << ','
        << estimator_name(opts.estimator) << ',' << rate_algo_name(opts.rate_algo)
        << ',' << route_metric_name(opts.route_metric) << ",,,,"
        << double_to_string(acc.first / acc.second) << '\n';
  }
}

inline void write_events_jsonl(std::ostream& out,
                               std::span<const RunResult> results) {
  for (const auto& r : results) {
    for (const auto& e : r.events) {
      nlohmann::json j;
      j["seed"] = r.seed;
      j["t_us"] = e.t_us;
      switch (e.kind) {
        case Event::Kind::Beacon: j["kind"] = "beacon"; break;
        case Event::Kind::BroadcastProbe: j["kind"] = "broadcast_probe"; break;
        case Event::Kind::Data: j["kind"] = "data"; break;
      }
      j["from"] = e.from;
      j["to"] = e.to;
      j["rate_mbps"] = RateTable::standard().mbps(e.rate_index);
      j["size_bytes"] = e.size_bytes;
      j["delivered"] = e.delivered;
      j["retransmissions"] = e.retransmissions;
      j["elapsed_us"] = e.elapsed_us;
      out << j.dump() << '\n';
    }
  }
}

struct DeltaRow {
  int rate_index = 1;
  EstimatorKind method = EstimatorKind::SnrProfile;
  double delta = 0.0;
  std::size_t samples = 0;
};

struct TaggedEstimate {
  std::uint64_t seed = 0;
  EstimateSample sample;
};

inline std::vector<TaggedEstimate> collect_estimates(
    std::span<const RunResult> results) {
  std::vector<TaggedEstimate> out;
  for (const auto& r : results)
    for (const auto& e : r.estimates) out.push_back(TaggedEstimate{r.seed, e});
  return out;
}

// Mean absolute error of each estimator against the data-counting benchmark,
// per rate, joined per (seed, link, interval) where the benchmark exists.
// Samples from different links and seeds aggregate into one row per
// (rate, method).
inline std::vector<DeltaRow> delta_table(
    std::span<const TaggedEstimate> samples) {
  struct Key {
    std::uint64_t seed;
    std::uint64_t link;
    int rate;
    int t;
    bool operator<(const Key& o) const {
      if (seed != o.seed) return seed < o.seed;
      if (link != o.link) return link < o.link;
      if (rate != o.rate) return rate < o.rate;
      return t < o.t;
    }
  };
  auto key_of = [](const TaggedEstimate& te) {
    const auto& e = te.sample;
    std::uint64_t link =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.from))
         << 32) |
        static_cast<std::uint32_t>(e.to);
    return Key{te.seed, link, e.rate_index, e.t_s};
  };
  std::map<Key, double> benchmark;
  bool any_benchmark = false;
  for (const auto& te : samples) {
    if (te.sample.method == EstimatorKind::DataPacket) {
      benchmark[key_of(te)] = te.sample.value;
      any_benchmark = true;
    }
  }
  if (!any_benchmark)
    throw std::invalid_argument(
        "delta_table: no data-counting benchmark rows in the trace");
  std::map<std::pair<int, int>, std::pair<std::vector<double>,
                                          std::vector<double>>>
      series;  // (rate, method) -> (estimates, benchmark)
  for (const auto& te : samples) {
    auto it = benchmark.find(key_of(te));
    if (it == benchmark.end()) continue;
    auto& s = series[{te.sample.rate_index, static_cast<int>(te.sample.method)}];
    s.first.push_back(te.sample.value);
    s.second.push_back(it->second);
  }
  std::vector<DeltaRow> rows;
  for (const auto& [key, s] : series) {
    DeltaRow row;
    row.rate_index = key.first;
    row.method = static_cast<EstimatorKind>(key.second);
    row.delta = accuracy_mae(s.first, s.second);
    row.samples = s.first.size();
    rows.push_back(row);
  }
  return rows;
}

inline void write_delta_csv(std::ostream& out, std::span<const DeltaRow> rows) {
  out << "rate_mbps,method,delta,samples\n";
  for (const auto& r : rows)
    out << double_to_string(RateTable::standard().mbps(r.rate_index)) << ','
        << estimator_name(r.method) << ',' << double_to_string(r.delta) << ','
        << r.samples << '\n';
}

// Parses rows produced by write_estimates_csv back into samples.
inline std::vector<TaggedEstimate> read_estimates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("empty estimate trace");
  if (line != "seed,t,link,rate_mbps,method,pdr_estimate")
    throw std::invalid_argument("unexpected estimate trace header: " + line);
  std::vector<TaggedEstimate> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 6)
      throw std::invalid_argument("malformed estimate trace row: " + line);
    EstimateSample e;
    std::uint64_t seed =
        static_cast<std::uint64_t>(parse_int(fields[0]));
    e.t_s = static_cast<int>(parse_int(fields[1]));
    auto arrow = fields[2].find("->");
    if (arrow == std::string::npos)
      throw std::invalid_argument("malformed link field: " + fields[2]);
    e.from = static_cast<int>(parse_int(fields[2].substr(0, arrow)));
    e.to = static_cast<int>(parse_int(fields[2].substr(arrow + 2)));
    e.rate_index = RateTable::standard().index_of_mbps(parse_double(fields[3]));
    if (e.rate_index == 0)
      throw std::invalid_argument("unknown rate in trace: " + fields[3]);
    if (fields[4] == "snr_profile")
      e.method = EstimatorKind::SnrProfile;
    else if (fields[4] == "broadcast_ewma")
      e.method = EstimatorKind::BroadcastEwma;
    else if (fields[4] == "beacon")
      e.method = EstimatorKind::Beacon;
    else if (fields[4] == "data")
      e.method = EstimatorKind::DataPacket;
    else
      throw std::invalid_argument("unknown method in trace: " + fields[4]);
    e.value = parse_double(fields[5]);
    samples.push_back(TaggedEstimate{seed, e});
  }
  return samples;
}

}  // namespace lqelab::sim
