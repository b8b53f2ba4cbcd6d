#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>

namespace lqelab {

// --- Broadcast packet counting (EWMA) ---------------------------------------

struct EwmaState {
  double value = 0.0;     // current PDR estimate
  double alpha_p = 0.2;   // smoothing factor, fixed per environment
};

// value' = alpha * X + (1 - alpha) * value with X in {0, 1}.
inline EwmaState ewma_update(EwmaState state, bool received) {
  state.value = state.alpha_p * (received ? 1.0 : 0.0) +
                (1.0 - state.alpha_p) * state.value;
  return state;
}

// --- Beacon window counting (ETX-style baseline) -----------------------------

// Keeps the last w received/lost flags; the estimate is the received fraction.
class BeaconWindow {
 public:
  explicit BeaconWindow(int window_size = 10) : window_(window_size) {
    if (window_size < 1)
      throw std::invalid_argument("beacon window size must be >= 1");
  }

  void push(bool received) {
    flags_.push_back(received);
    if (static_cast<int>(flags_.size()) > window_) flags_.pop_front();
  }

  std::optional<double> estimate() const {
    if (flags_.empty()) return std::nullopt;
    int got = 0;
    for (bool f : flags_) got += f ? 1 : 0;
    return static_cast<double>(got) / static_cast<double>(flags_.size());
  }

  int window_size() const { return window_; }
  int count() const { return static_cast<int>(flags_.size()); }

 private:
  int window_;
  std::deque<bool> flags_;
};

// --- Data packet counting (benchmark) ----------------------------------------

struct DataPacketCounter {
  std::uint64_t tx = 0;
  std::uint64_t ack = 0;

  void record(bool acked) {
    ++tx;
    if (acked) ++ack;
  }

  std::optional<double> estimate() const {
    if (tx == 0) return std::nullopt;
    return static_cast<double>(ack) / static_cast<double>(tx);
  }

  void reset() { tx = ack = 0; }
};

// --- Accuracy metric ----------------------------------------------------------

// Mean absolute error between an estimate series and a benchmark series.
inline double accuracy_mae(std::span<const double> estimates,
                           std::span<const double> benchmark) {
  if (estimates.size() != benchmark.size())
    throw std::invalid_argument("accuracy_mae: series length mismatch");
  if (estimates.empty())
    throw std::invalid_argument("accuracy_mae: empty series");
  double sum = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i)
    sum += std::abs(estimates[i] - benchmark[i]);
  return sum / static_cast<double>(estimates.size());
}

// --- Method selection ----------------------------------------------------------

enum class EstimatorKind { SnrProfile, BroadcastEwma, Beacon, DataPacket };

inline std::string_view estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::SnrProfile: return "snr_profile";
    case EstimatorKind::BroadcastEwma: return "broadcast_ewma";
    case EstimatorKind::Beacon: return "beacon";
    case EstimatorKind::DataPacket: return "data";
  }
  return "?";
}

enum class Environment { Indoor, Outdoor };
enum class Mobility { Stationary, Mobile };
enum class AccuracyRequirement { Normal, Highest };

struct MethodContext {
  Environment environment = Environment::Indoor;
  Mobility mobility = Mobility::Stationary;
  AccuracyRequirement accuracy = AccuracyRequirement::Normal;
  int live_broadcast_samples = 0;  // broadcast probe observations on the link
  int window_w = 10;
};

// The profile is the default source: it needs no live traffic and is accurate
// enough for rate adaptation and routing. Only when the caller demands the
// highest accuracy AND enough live broadcast counting exists does the packet
// method take over; ties fall back to the profile.
inline EstimatorKind select_method(const MethodContext& ctx) {
  if (ctx.accuracy == AccuracyRequirement::Highest &&
      ctx.live_broadcast_samples >= ctx.window_w)
    return EstimatorKind::BroadcastEwma;
  return EstimatorKind::SnrProfile;
}

}  // namespace lqelab
