#pragma once

#include <algorithm>
#include <stdexcept>
#include <utility>
#include <vector>

#include "lqelab/rng.hpp"

namespace lqelab::sim {

// Per-link SNR process: a constant, a Gaussian around a fixed mean, or a
// piecewise-linear mean trajectory with Gaussian noise overlaid per sample.
struct SnrModel {
  enum class Kind { Constant, Gaussian, Trajectory };

  Kind kind = Kind::Constant;
  double mean_db = 30.0;
  double sigma_db = 0.0;
  std::vector<std::pair<double, double>> points;  // (time_s, mean_db)

  static SnrModel constant(double mean_db) {
    return SnrModel{Kind::Constant, mean_db, 0.0, {}};
  }

  static SnrModel gaussian(double mean_db, double sigma_db) {
    return SnrModel{Kind::Gaussian, mean_db, sigma_db, {}};
  }

  static SnrModel trajectory(std::vector<std::pair<double, double>> pts,
                             double sigma_db) {
    if (pts.size() < 2)
      throw std::invalid_argument("trajectory needs at least 2 points");
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (!(pts[i].first > pts[i - 1].first))
        throw std::invalid_argument("trajectory times must strictly increase");
    SnrModel m;
    m.kind = Kind::Trajectory;
    m.sigma_db = sigma_db;
    m.points = std::move(pts);
    return m;
  }

  double mean_at(double t) const {
    if (kind != Kind::Trajectory) return mean_db;
    if (t <= points.front().first) return points.front().second;
    if (t >= points.back().first) return points.back().second;
    auto hi = std::lower_bound(
        points.begin(), points.end(), std::make_pair(t, -1e300));
    if (hi->first == t) return hi->second;
    auto lo = hi - 1;
    double f = (t - lo->first) / (hi->first - lo->first);
    return lo->second + f * (hi->second - lo->second);
  }

  double sample(double t, SimRng& rng) const {
    double mean = mean_at(t);
    if (kind == Kind::Constant || sigma_db <= 0.0) return mean;
    return rng.gaussian(mean, sigma_db);
  }
};

// Out-and-back mobility: the mean SNR descends linearly from max to min over
// the first half of the duration and climbs back over the second half.
inline SnrModel mobility_sweep(double min_snr_db, double max_snr_db,
                               double duration_s, double sigma_db = 0.0) {
  if (!(min_snr_db < max_snr_db))
    throw std::invalid_argument("sweep needs min < max");
  if (!(duration_s > 0.0))
    throw std::invalid_argument("sweep needs positive duration");
  return SnrModel::trajectory({{0.0, max_snr_db},
                               {duration_s / 2.0, min_snr_db},
                               {duration_s, max_snr_db}},
                              sigma_db);
}

}  // namespace lqelab::sim
