#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lqelab/sim/trajectory.hpp"

namespace lqelab::sim {

// Scenario document problems carry the JSON pointer of the offending value.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, const std::string& pointer)
      : std::runtime_error(what + " at " + (pointer.empty() ? "/" : pointer)),
        pointer_(pointer) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

struct LinkSpec {
  int a = 0;
  int b = 1;
  SnrModel snr;
};

enum class TrafficType { Duty, RateProbe };

struct FlowSpec {
  TrafficType type = TrafficType::Duty;
  int src = 0;
  int dst = 1;
  double load = 1.0;                 // fraction of each second offered
  int packet_size_bytes = 1500;
  double start_s = 0.0;
  double duration_s = -1.0;          // -1 = until scenario end
  double probe_packets_per_s_per_rate = 10.0;  // rate-probe flows only
};

struct BootstrapSpec {
  bool enabled = false;
  double duration_s = 60.0;
  double packets_per_s_per_rate = 10.0;
  double snr_offset_db = 0.0;  // environment shift while probing
};

struct LqeSpec {
  double alpha_p = 0.2;       // broadcast-counting EWMA weight
  int beacon_window = 10;     // ETX-style window size w
  double alpha_s = 0.2;       // profile update weight
  bool broadcast_probes = true;
};

struct RateSpec {
  double alpha_r = 0.5;
  double probe_fraction = 0.10;
  double adjacent_probe_prob = 0.005;
  double c_m = 31.0;
  double slot_us = 20.0;
  double t_si_us = 10.0;
  double t_di_us = 50.0;
};

struct RoutingSpec {
  double tc_interval_s = 1.0;
  double tc_loss_prob = 0.0;
  int expiry_intervals = 50;
  int beacon_expiry_losses = 50;
};

struct Scenario {
  std::string name = "scenario";
  double duration_s = 60.0;
  double beacon_interval_s = 1.0;
  std::vector<std::uint64_t> seeds{1};
  int node_count = 2;
  std::vector<LinkSpec> links;
  std::vector<FlowSpec> flows;
  BootstrapSpec bootstrap;
  double snr_offset_db = 0.0;  // interference knob for the main phase
  LqeSpec lqe;
  RateSpec rate;
  RoutingSpec routing;

  void validate() const {
    if (!(duration_s > 0.0))
      throw ScenarioError("duration_s must be > 0", "/duration_s");
    if (node_count < 1)
      throw ScenarioError("node count must be >= 1", "/topology/nodes");
    if (seeds.empty()) throw ScenarioError("seeds must be non-empty", "/seeds");
    for (std::size_t i = 0; i < links.size(); ++i) {
      const auto& l = links[i];
      std::string at = "/topology/links/" + std::to_string(i);
      if (l.a < 0 || l.a >= node_count || l.b < 0 || l.b >= node_count)
        throw ScenarioError("link endpoint out of range", at);
      if (l.a == l.b) throw ScenarioError("self link", at);
    }
    for (std::size_t i = 0; i < flows.size(); ++i) {
      const auto& f = flows[i];
      std::string at = "/traffic/" + std::to_string(i);
      if (f.src < 0 || f.src >= node_count || f.dst < 0 ||
          f.dst >= node_count || f.src == f.dst)
        throw ScenarioError("flow endpoints invalid", at);
      if (f.type == TrafficType::Duty && !(f.load > 0.0 && f.load <= 1.0))
        throw ScenarioError("load must be in (0,1]", at + "/load");
      if (f.packet_size_bytes < 1)
        throw ScenarioError("packet size must be >= 1", at + "/packet_size_bytes");
    }
    if (lqe.beacon_window < 1)
      throw ScenarioError("beacon window must be >= 1", "/lqe/beacon_window");
  }
};

namespace detail {

using json = nlohmann::json;

inline void expect_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& pointer) {
  if (!obj.is_object()) throw ScenarioError("expected an object", pointer);
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ScenarioError("unknown key '" + it.key() + "'",
                          pointer + "/" + it.key());
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback,
         const std::string& pointer) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("bad value: ") + e.what(),
                        pointer + "/" + key);
  }
}

inline SnrModel parse_snr(const json& obj, const std::string& pointer,
                          double scenario_duration) {
  expect_keys(obj,
              {"model", "mean_db", "sigma_db", "min_db", "max_db", "period_s",
               "points"},
              pointer);
  std::string model = get_or<std::string>(obj, "model", "constant", pointer);
  double sigma = get_or<double>(obj, "sigma_db", 0.0, pointer);
  if (sigma < 0.0) throw ScenarioError("sigma must be >= 0", pointer + "/sigma_db");
  if (model == "constant")
    return SnrModel::constant(get_or<double>(obj, "mean_db", 30.0, pointer));
  if (model == "gaussian")
    return SnrModel::gaussian(get_or<double>(obj, "mean_db", 30.0, pointer),
                              sigma);
  if (model == "sweep") {
    double period = get_or<double>(obj, "period_s", scenario_duration, pointer);
    try {
      return mobility_sweep(get_or<double>(obj, "min_db", 5.0, pointer),
                            get_or<double>(obj, "max_db", 45.0, pointer),
                            period, sigma);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what(), pointer);
    }
  }
  if (model == "trajectory") {
    if (!obj.contains("points"))
      throw ScenarioError("trajectory requires points", pointer);
    std::vector<std::pair<double, double>> pts;
    const auto& arr = obj.at("points");
    if (!arr.is_array() || arr.size() < 2)
      throw ScenarioError("points must be an array of >= 2 [t, snr] pairs",
                          pointer + "/points");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& p = arr[i];
      if (!p.is_array() || p.size() != 2)
        throw ScenarioError("point must be [t, snr]",
                            pointer + "/points/" + std::to_string(i));
      pts.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    try {
      return SnrModel::trajectory(std::move(pts), sigma);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError(e.what(), pointer + "/points");
    }
  }
  throw ScenarioError("unknown snr model '" + model + "'", pointer + "/model");
}

}  // namespace detail

inline Scenario scenario_from_json(const nlohmann::json& doc) {
  using detail::expect_keys;
  using detail::get_or;
  if (!doc.is_object()) throw ScenarioError("scenario must be an object", "");
  expect_keys(doc,
              {"name", "duration_s", "beacon_interval_s", "seeds", "topology",
               "traffic", "bootstrap", "snr_offset_db", "lqe", "rate",
               "routing"},
              "");
  Scenario s;
  s.name = get_or<std::string>(doc, "name", "scenario", "");
  s.duration_s = get_or<double>(doc, "duration_s", 60.0, "");
  s.beacon_interval_s = get_or<double>(doc, "beacon_interval_s", 1.0, "");
  s.seeds = get_or<std::vector<std::uint64_t>>(doc, "seeds", {1}, "");
  s.snr_offset_db = get_or<double>(doc, "snr_offset_db", 0.0, "");

  if (!doc.contains("topology"))
    throw ScenarioError("missing topology", "/topology");
  const auto& topo = doc.at("topology");
  expect_keys(topo, {"nodes", "links", "tandem_snr"}, "/topology");
  s.node_count = get_or<int>(topo, "nodes", 2, "/topology");
  if (topo.contains("tandem_snr")) {
    SnrModel chain = detail::parse_snr(topo.at("tandem_snr"),
                                       "/topology/tandem_snr", s.duration_s);
    for (int i = 0; i + 1 < s.node_count; ++i)
      s.links.push_back(LinkSpec{i, i + 1, chain});
  }
  if (topo.contains("links")) {
    const auto& links = topo.at("links");
    if (!links.is_array())
      throw ScenarioError("links must be an array", "/topology/links");
    for (std::size_t i = 0; i < links.size(); ++i) {
      std::string at = "/topology/links/" + std::to_string(i);
      const auto& l = links[i];
      expect_keys(l, {"a", "b", "snr"}, at);
      LinkSpec spec;
      spec.a = get_or<int>(l, "a", 0, at);
      spec.b = get_or<int>(l, "b", 1, at);
      if (!l.contains("snr"))
        throw ScenarioError("link requires an snr model", at + "/snr");
      spec.snr = detail::parse_snr(l.at("snr"), at + "/snr", s.duration_s);
      s.links.push_back(std::move(spec));
    }
  }

  if (doc.contains("traffic")) {
    const auto& flows = doc.at("traffic");
    if (!flows.is_array())
      throw ScenarioError("traffic must be an array", "/traffic");
    for (std::size_t i = 0; i < flows.size(); ++i) {
      std::string at = "/traffic/" + std::to_string(i);
      const auto& f = flows[i];
      expect_keys(f,
                  {"type", "src", "dst", "load", "packet_size_bytes",
                   "start_s", "duration_s", "packets_per_s_per_rate"},
                  at);
      FlowSpec spec;
      std::string type = get_or<std::string>(f, "type", "duty", at);
      if (type == "duty")
        spec.type = TrafficType::Duty;
      else if (type == "rate-probe")
        spec.type = TrafficType::RateProbe;
      else
        throw ScenarioError("unknown traffic type '" + type + "'",
                            at + "/type");
      spec.src = get_or<int>(f, "src", 0, at);
      spec.dst = get_or<int>(f, "dst", 1, at);
      spec.load = get_or<double>(f, "load", 1.0, at);
      spec.packet_size_bytes = get_or<int>(f, "packet_size_bytes", 1500, at);
      spec.start_s = get_or<double>(f, "start_s", 0.0, at);
      spec.duration_s = get_or<double>(f, "duration_s", -1.0, at);
      spec.probe_packets_per_s_per_rate =
          get_or<double>(f, "packets_per_s_per_rate", 10.0, at);
      s.flows.push_back(std::move(spec));
    }
  }

  if (doc.contains("bootstrap")) {
    const auto& b = doc.at("bootstrap");
    expect_keys(b,
                {"enabled", "duration_s", "packets_per_s_per_rate",
                 "snr_offset_db"},
                "/bootstrap");
    s.bootstrap.enabled = get_or<bool>(b, "enabled", true, "/bootstrap");
    s.bootstrap.duration_s = get_or<double>(b, "duration_s", 60.0, "/bootstrap");
    s.bootstrap.packets_per_s_per_rate =
        get_or<double>(b, "packets_per_s_per_rate", 10.0, "/bootstrap");
    s.bootstrap.snr_offset_db =
        get_or<double>(b, "snr_offset_db", 0.0, "/bootstrap");
  }

  if (doc.contains("lqe")) {
    const auto& l = doc.at("lqe");
    expect_keys(l, {"alpha_p", "beacon_window", "alpha_s", "broadcast_probes"},
                "/lqe");
    s.lqe.alpha_p = get_or<double>(l, "alpha_p", 0.2, "/lqe");
    s.lqe.beacon_window = get_or<int>(l, "beacon_window", 10, "/lqe");
    s.lqe.alpha_s = get_or<double>(l, "alpha_s", 0.2, "/lqe");
    s.lqe.broadcast_probes = get_or<bool>(l, "broadcast_probes", true, "/lqe");
  }

  if (doc.contains("rate")) {
    const auto& r = doc.at("rate");
    expect_keys(r,
                {"alpha_r", "probe_fraction", "adjacent_probe_prob", "c_m",
                 "slot_us", "t_si_us", "t_di_us"},
                "/rate");
    s.rate.alpha_r = get_or<double>(r, "alpha_r", 0.5, "/rate");
    s.rate.probe_fraction = get_or<double>(r, "probe_fraction", 0.10, "/rate");
    s.rate.adjacent_probe_prob =
        get_or<double>(r, "adjacent_probe_prob", 0.005, "/rate");
    s.rate.c_m = get_or<double>(r, "c_m", 31.0, "/rate");
    s.rate.slot_us = get_or<double>(r, "slot_us", 20.0, "/rate");
    s.rate.t_si_us = get_or<double>(r, "t_si_us", 10.0, "/rate");
    s.rate.t_di_us = get_or<double>(r, "t_di_us", 50.0, "/rate");
  }

  if (doc.contains("routing")) {
    const auto& r = doc.at("routing");
    expect_keys(r,
                {"tc_interval_s", "tc_loss_prob", "expiry_intervals",
                 "beacon_expiry_losses"},
                "/routing");
    s.routing.tc_interval_s = get_or<double>(r, "tc_interval_s", 1.0, "/routing");
    s.routing.tc_loss_prob = get_or<double>(r, "tc_loss_prob", 0.0, "/routing");
    s.routing.expiry_intervals =
        get_or<int>(r, "expiry_intervals", 50, "/routing");
    s.routing.beacon_expiry_losses =
        get_or<int>(r, "beacon_expiry_losses", 50, "/routing");
  }

  s.validate();
  return s;
}

inline nlohmann::json snr_to_json(const SnrModel& m) {
  nlohmann::json j;
  switch (m.kind) {
    case SnrModel::Kind::Constant:
      j["model"] = "constant";
      j["mean_db"] = m.mean_db;
      break;
    case SnrModel::Kind::Gaussian:
      j["model"] = "gaussian";
      j["mean_db"] = m.mean_db;
      j["sigma_db"] = m.sigma_db;
      break;
    case SnrModel::Kind::Trajectory: {
      j["model"] = "trajectory";
      j["sigma_db"] = m.sigma_db;
      auto pts = nlohmann::json::array();
      for (const auto& [t, v] : m.points)
        pts.push_back(nlohmann::json::array({t, v}));
      j["points"] = pts;
      break;
    }
  }
  return j;
}

// Fully-resolved echo of a scenario, used for run manifests.
inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json doc;
  doc["name"] = s.name;
  doc["duration_s"] = s.duration_s;
  doc["beacon_interval_s"] = s.beacon_interval_s;
  doc["seeds"] = s.seeds;
  doc["snr_offset_db"] = s.snr_offset_db;
  doc["topology"]["nodes"] = s.node_count;
  auto links = nlohmann::json::array();
  for (const auto& l : s.links) {
    nlohmann::json lj;
    lj["a"] = l.a;
    lj["b"] = l.b;
    lj["snr"] = snr_to_json(l.snr);
    links.push_back(lj);
  }
  doc["topology"]["links"] = links;
  auto flows = nlohmann::json::array();
  for (const auto& f : s.flows) {
    nlohmann::json fj;
    fj["type"] = f.type == TrafficType::Duty ? "duty" : "rate-probe";
    fj["src"] = f.src;
    fj["dst"] = f.dst;
    fj["load"] = f.load;
    fj["packet_size_bytes"] = f.packet_size_bytes;
    fj["start_s"] = f.start_s;
    fj["duration_s"] = f.duration_s;
    fj["packets_per_s_per_rate"] = f.probe_packets_per_s_per_rate;
    flows.push_back(fj);
  }
  doc["traffic"] = flows;
  doc["bootstrap"] = {{"enabled", s.bootstrap.enabled},
                      {"duration_s", s.bootstrap.duration_s},
                      {"packets_per_s_per_rate",
                       s.bootstrap.packets_per_s_per_rate},
                      {"snr_offset_db", s.bootstrap.snr_offset_db}};
  doc["lqe"] = {{"alpha_p", s.lqe.alpha_p},
                {"beacon_window", s.lqe.beacon_window},
                {"alpha_s", s.lqe.alpha_s},
                {"broadcast_probes", s.lqe.broadcast_probes}};
  doc["rate"] = {{"alpha_r", s.rate.alpha_r},
                 {"probe_fraction", s.rate.probe_fraction},
                 {"adjacent_probe_prob", s.rate.adjacent_probe_prob},
                 {"c_m", s.rate.c_m},
                 {"slot_us", s.rate.slot_us},
                 {"t_si_us", s.rate.t_si_us},
                 {"t_di_us", s.rate.t_di_us}};
  doc["routing"] = {{"tc_interval_s", s.routing.tc_interval_s},
                    {"tc_loss_prob", s.routing.tc_loss_prob},
                    {"expiry_intervals", s.routing.expiry_intervals},
                    {"beacon_expiry_losses", s.routing.beacon_expiry_losses}};
  return doc;
}

inline Scenario scenario_from_string(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ScenarioError(std::string("invalid JSON: ") + e.what(), "");
  }
  return scenario_from_json(doc);
}

inline Scenario scenario_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path, "");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return scenario_from_string(text);
}

}  // namespace lqelab::sim
