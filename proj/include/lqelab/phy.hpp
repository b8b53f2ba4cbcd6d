#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqelab/rates.hpp"
#include "lqelab/rng.hpp"

namespace lqelab {

// Gaussian tail probability Q(x) = 1 - Phi(x), evaluated through erfc so the
// deep tail (x ~ 10 -> 1e-24) keeps full relative precision.
inline double q_function(double x) {
  return 0.5 * std::erfc(x / std::sqrt(2.0));
}

struct ChannelParams {
  double mean_snr_db = 10.0;   // mean of the per-second SNR process
  double sigma_db = 1.0;       // standard deviation of the SNR process
  double noise_floor_dbm = -95.0;

  void validate() const {
    if (sigma_db < 0.0)
      throw std::invalid_argument("ChannelParams: sigma must be >= 0");
    if (noise_floor_dbm < -100.0 || noise_floor_dbm > -90.0)
      throw std::invalid_argument(
          "ChannelParams: noise floor outside [-100, -90] dBm");
  }
};

// Bit error rate model. Rates 1 and 2 Mbps use Q(snr) and Q(snr/2); the
// remaining ten rates have no closed form here and default to scaled-argument
// Q curves, one divisor per rate, derived from the modulation order of the
// entry. The divisors are synthetic placeholders calibrated so that the
// 1500 B packet delivery knee of each rate lands on a plausible SNR ladder
// (DSSS/CCK rates usable well below the OFDM group, 54 Mbps needing ~40 dB).
// Empirical curves can be substituted from a CSV table per rate.
class BerModel {
 public:
  static const BerModel& default_model() {
    static const BerModel model;
    return model;
  }

  double ber(int rate_index, double snr_db) const {
    const auto& table = tables_[static_cast<std::size_t>(
        RateTable::standard().at(rate_index).index - 1)];
    if (!table.empty()) return interpolate(table, snr_db);
    return q_function(snr_db / divisors_[static_cast<std::size_t>(rate_index - 1)]);
  }

  // CSV columns: rate_mbps,snr_db,ber. Rows may arrive in any order; rates
  // absent from the file keep the default curve. Lookup interpolates linearly
  // in SNR and clamps at the table edges.
  static BerModel from_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open BER table: " + path);
    BerModel model;
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("empty BER table: " + path);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string rate_s, snr_s, ber_s;
      if (!std::getline(row, rate_s, ',') || !std::getline(row, snr_s, ',') ||
          !std::getline(row, ber_s))
        throw std::runtime_error("malformed BER table row at line " +
                                 std::to_string(line_no));
      int idx = RateTable::standard().index_of_mbps(std::stod(rate_s));
      if (idx == 0)
        throw std::runtime_error("unknown rate in BER table at line " +
                                 std::to_string(line_no) + ": " + rate_s);
      double b = std::stod(ber_s);
      if (b < 0.0 || b > 1.0)
        throw std::runtime_error("BER outside [0,1] at line " +
                                 std::to_string(line_no));
      model.tables_[static_cast<std::size_t>(idx - 1)].emplace_back(
          std::stod(snr_s), b);
    }
    for (auto& t : model.tables_)
      std::sort(t.begin(), t.end());
    return model;
  }

 private:
  static double interpolate(const std::vector<std::pair<double, double>>& t,
                            double snr) {
    if (snr <= t.front().first) return t.front().second;
    if (snr >= t.back().first) return t.back().second;
    auto hi = std::lower_bound(t.begin(), t.end(),
                               std::make_pair(snr, -1.0));
    auto lo = hi - 1;
    double span = hi->first - lo->first;
    if (span <= 0.0) return lo->second;
    double f = (snr - lo->first) / span;
    return lo->second + f * (hi->second - lo->second);
  }

  // Indexed by rate ladder position. 1 and 2 Mbps are the closed forms.
  std::array<double, kNumRates> divisors_{
      1.0, 2.0, 2.5, 3.5, 4.0, 3.0, 4.5, 5.0, 6.0, 7.5, 9.0, 10.0};
  std::array<std::vector<std::pair<double, double>>, kNumRates> tables_{};
};

inline double ber(int rate_index, double snr_db,
                  const BerModel& model = BerModel::default_model()) {
  return model.ber(rate_index, snr_db);
}

// Probability that all 8*size_bytes bits of a frame survive: (1 - ber)^bits.
// The exponent is in bits because the error rate is per bit.
inline double packet_success_prob(
    int rate_index, double snr_db, int size_bytes,
    const BerModel& model = BerModel::default_model()) {
  if (size_bytes < 1)
    throw std::invalid_argument("packet size must be >= 1 byte");
  double b = model.ber(rate_index, snr_db);
  if (b >= 1.0) return 0.0;
  if (b <= 0.0) return 1.0;
  return std::exp(8.0 * static_cast<double>(size_bytes) * std::log1p(-b));
}

// Lossless transmission time in microseconds: bits / (Mbps) = us.
inline double packet_airtime_us(int rate_index, int size_bytes) {
  if (size_bytes < 1)
    throw std::invalid_argument("packet size must be >= 1 byte");
  return 8.0 * static_cast<double>(size_bytes) /
         RateTable::standard().mbps(rate_index);
}

// One draw of the per-second SNR process.
inline double sample_snr(const ChannelParams& params, SimRng& rng) {
  return rng.gaussian(params.mean_snr_db, params.sigma_db);
}

}  // namespace lqelab
