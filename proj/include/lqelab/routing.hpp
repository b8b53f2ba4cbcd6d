#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lqelab/phy.hpp"

namespace lqelab {

using NodeId = int;

// Bidirectional link snapshot carried by topology-control floods. Direction
// "fwd" is a -> b.
struct LinkState {
  NodeId a = 0;
  NodeId b = 0;
  double pdr_fwd = 0.0;
  double pdr_rev = 0.0;
  double rate_fwd_mbps = 1.0;
  double rate_rev_mbps = 1.0;
  int age = 0;  // intervals since the last refresh
};

// Expected transmission count: 1 / (forward PDR * reverse PDR).
inline double metric_etx(double pdr_fwd, double pdr_rev) {
  if (pdr_fwd <= 0.0 || pdr_rev <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 1.0 / (pdr_fwd * pdr_rev);
}

// Rate-aware replacement for ETX: each direction contributes 1/(pdr*sqrt(rate)).
inline double metric_r(double pdr_fwd, double rate_fwd_mbps, double pdr_rev,
                       double rate_rev_mbps) {
  if (pdr_fwd <= 0.0 || pdr_rev <= 0.0 || rate_fwd_mbps <= 0.0 ||
      rate_rev_mbps <= 0.0)
    return std::numeric_limits<double>::infinity();
  return 1.0 / (pdr_fwd * std::sqrt(rate_fwd_mbps)) *
         (1.0 / (pdr_rev * std::sqrt(rate_rev_mbps)));
}

// Expected transmission time: per-direction airtime 8*size/(pdr*rate), summed.
inline double metric_ett_us(double pdr_fwd, double rate_fwd_mbps,
                            double pdr_rev, double rate_rev_mbps,
                            int size_bytes) {
  if (pdr_fwd <= 0.0 || pdr_rev <= 0.0 || rate_fwd_mbps <= 0.0 ||
      rate_rev_mbps <= 0.0)
    return std::numeric_limits<double>::infinity();
  double bits = 8.0 * static_cast<double>(size_bytes);
  return bits / (pdr_fwd * rate_fwd_mbps) + bits / (pdr_rev * rate_rev_mbps);
}

enum class RouteMetric { R, Etx, Ett };

inline std::string_view route_metric_name(RouteMetric m) {
  switch (m) {
    case RouteMetric::R: return "r";
    case RouteMetric::Etx: return "etx";
    case RouteMetric::Ett: return "ett";
  }
  return "?";
}

inline double link_cost(RouteMetric metric, const LinkState& ls,
                        int size_bytes = 1500) {
  switch (metric) {
    case RouteMetric::R:
      return metric_r(ls.pdr_fwd, ls.rate_fwd_mbps, ls.pdr_rev,
                      ls.rate_rev_mbps);
    case RouteMetric::Etx:
      return metric_etx(ls.pdr_fwd, ls.pdr_rev);
    case RouteMetric::Ett:
      return metric_ett_us(ls.pdr_fwd, ls.rate_fwd_mbps, ls.pdr_rev,
                           ls.rate_rev_mbps, size_bytes);
  }
  return std::numeric_limits<double>::infinity();
}

struct Route {
  std::vector<NodeId> path;  // src first, dst last
  double cost = 0.0;
  int hops() const { return static_cast<int>(path.size()) - 1; }
};

// Dijkstra over the finite-cost links. Paths are simple by construction; cost
// ties resolve to the lexicographically smallest node-id path so results are
// reproducible. Costs accumulate in path order, which keeps them bit-equal to
// a left-to-right sum over the same links.
inline std::optional<Route> shortest_path(std::span<const LinkState> links,
                                          RouteMetric metric, NodeId src,
                                          NodeId dst, int size_bytes = 1500) {
  struct Candidate {
    double cost;
    std::vector<NodeId> path;
  };
  auto better = [](const Candidate& x, const Candidate& y) {
    if (x.cost != y.cost) return x.cost < y.cost;
    return x.path < y.path;
  };

  std::map<NodeId, std::vector<std::pair<NodeId, double>>> adj;
  for (const auto& ls : links) {
    double c = link_cost(metric, ls, size_bytes);
    if (!std::isfinite(c)) continue;
    adj[ls.a].emplace_back(ls.b, c);
    adj[ls.b].emplace_back(ls.a, c);
  }

  std::map<NodeId, Candidate> best;
  auto cmp = [&](const Candidate& x, const Candidate& y) { return better(y, x); };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(cmp)> queue(
      cmp);
  queue.push(Candidate{0.0, {src}});
  best[src] = Candidate{0.0, {src}};

  while (!queue.empty()) {
    Candidate cur = queue.top();
    queue.pop();
    NodeId node = cur.path.back();
    auto settled = best.find(node);
    if (settled != best.end() && better(settled->second, cur)) continue;
    if (node == dst) break;
    auto it = adj.find(node);
    if (it == adj.end()) continue;
    for (const auto& [next, c] : it->second) {
      if (std::find(cur.path.begin(), cur.path.end(), next) != cur.path.end())
        continue;
      Candidate cand{cur.cost + c, cur.path};
      cand.path.push_back(next);
      auto known = best.find(next);
      if (known == best.end() || better(cand, known->second)) {
        best[next] = cand;
        queue.push(std::move(cand));
      }
    }
  }

  auto found = best.find(dst);
  if (found == best.end()) return std::nullopt;
  return Route{found->second.path, found->second.cost};
}

struct RouteTableEntry {
  NodeId next_hop = -1;
  double cost = 0.0;
  int hops = 0;
  std::vector<NodeId> path;
};

// All destinations reachable from src under the given metric.
inline std::map<NodeId, RouteTableEntry> build_route_table(
    std::span<const LinkState> links, RouteMetric metric, NodeId src,
    int size_bytes = 1500) {
  std::map<NodeId, RouteTableEntry> table;
  std::map<NodeId, bool> nodes;
  for (const auto& ls : links) {
    nodes[ls.a] = true;
    nodes[ls.b] = true;
  }
  for (const auto& [dst, _] : nodes) {
    if (dst == src) continue;
    auto route = shortest_path(links, metric, src, dst, size_bytes);
    if (!route) continue;
    table[dst] = RouteTableEntry{route->path[1], route->cost, route->hops(),
                                 route->path};
  }
  return table;
}

// Network-wide view of link snapshots, as assembled from periodic topology-
// control floods. Entries age each interval and stale ones drop out of the
// routing input.
class LinkStateDb {
 public:
  void apply_snapshot(const LinkState& snapshot) {
    auto key = normalize_key(snapshot.a, snapshot.b);
    LinkState stored = snapshot;
    if (key.first != snapshot.a) {
      std::swap(stored.a, stored.b);
      std::swap(stored.pdr_fwd, stored.pdr_rev);
      std::swap(stored.rate_fwd_mbps, stored.rate_rev_mbps);
    }
    stored.age = 0;
    links_[key] = stored;
  }

  void age_all() {
    for (auto& [key, ls] : links_) ++ls.age;
  }

  void remove(NodeId a, NodeId b) { links_.erase(normalize_key(a, b)); }

  // Links still fresh enough to route over.
  std::vector<LinkState> active(int expiry_intervals) const {
    std::vector<LinkState> out;
    for (const auto& [key, ls] : links_)
      if (ls.age <= expiry_intervals) out.push_back(ls);
    return out;
  }

  const LinkState* find(NodeId a, NodeId b) const {
    auto it = links_.find(normalize_key(a, b));
    return it == links_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return links_.size(); }

 private:
  static std::pair<NodeId, NodeId> normalize_key(NodeId a, NodeId b) {
    return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  std::map<std::pair<NodeId, NodeId>, LinkState> links_;
};

}  // namespace lqelab
