#pragma once

#include <array>
#include <stdexcept>
#include <string_view>

namespace lqelab {

inline constexpr int kNumRates = 12;

// Beacon ("hello") frames are 40 B broadcasts at the second-lowest rate.
inline constexpr int kBeaconRateIndex = 2;
inline constexpr int kBeaconSizeBytes = 40;

enum class Modulation {
  DsssBpsk,
  DsssQpsk,
  Cck,
  OfdmBpsk,
  OfdmQpsk,
  OfdmQam16,
  OfdmQam64,
};

inline std::string_view modulation_name(Modulation m) {
  switch (m) {
    case Modulation::DsssBpsk: return "dsss-bpsk";
    case Modulation::DsssQpsk: return "dsss-qpsk";
    case Modulation::Cck: return "cck";
    case Modulation::OfdmBpsk: return "ofdm-bpsk";
    case Modulation::OfdmQpsk: return "ofdm-qpsk";
    case Modulation::OfdmQam16: return "ofdm-16qam";
    case Modulation::OfdmQam64: return "ofdm-64qam";
  }
  return "?";
}

struct RateInfo {
  int index;       // 1-based position in the rate ladder
  double mbps;
  Modulation modulation;
  bool dot11b;     // DSSS/CCK entry (otherwise OFDM, i.e. 802.11g)
};

// The 12 IEEE 802.11b/g rates in ascending order. Index 1..12.
class RateTable {
 public:
  static const RateTable& standard() {
    static const RateTable table;
    return table;
  }

  int size() const { return kNumRates; }

  const RateInfo& at(int index) const {
    if (index < 1 || index > kNumRates)
      throw std::out_of_range("rate index out of range 1..12: " +
                              std::to_string(index));
    return rates_[static_cast<std::size_t>(index - 1)];
  }

  double mbps(int index) const { return at(index).mbps; }
  bool is_g_rate(int index) const { return !at(index).dot11b; }

  const std::array<RateInfo, kNumRates>& all() const { return rates_; }

  // Returns 0 when no rate matches the given value exactly.
  int index_of_mbps(double mbps) const {
    for (const auto& r : rates_)
      if (r.mbps == mbps) return r.index;
    return 0;
  }

 private:
  RateTable() = default;

  std::array<RateInfo, kNumRates> rates_{{
      {1, 1.0, Modulation::DsssBpsk, true},
      {2, 2.0, Modulation::DsssQpsk, true},
      {3, 5.5, Modulation::Cck, true},
      {4, 6.0, Modulation::OfdmBpsk, false},
      {5, 9.0, Modulation::OfdmBpsk, false},
      {6, 11.0, Modulation::Cck, true},
      {7, 12.0, Modulation::OfdmQpsk, false},
      {8, 18.0, Modulation::OfdmQpsk, false},
      {9, 24.0, Modulation::OfdmQam16, false},
      {10, 36.0, Modulation::OfdmQam16, false},
      {11, 48.0, Modulation::OfdmQam64, false},
      {12, 54.0, Modulation::OfdmQam64, false},
  }};
};

}  // namespace lqelab
