#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace mcdist {

// Provenance of a recorded trace: what produced it and under which channel.
struct TraceMeta {
  std::vector<double> distances_m;     // Tx-Rx distance per branch
  std::vector<std::string> sequences;  // OOK bit strings, one per branch
  std::uint64_t seed = 0;
  double n_tx = 0.0;                   // molecules per '1' symbol
  double t_s = 0.0;                    // symbol duration (s)
};

// Molecule counts at the receiver on a uniform sample grid. Sample i is
// taken at t = (i + 1) * dt_sample, so the last sample lands on the horizon.
// Counts are integers for simulated traces and expected values for analytic
// ones; both are stored as doubles.
struct CountTrace {
  double dt_sample = 0.0;
  Eigen::VectorXd counts;
  TraceMeta meta;

  Eigen::Index size() const { return counts.size(); }
  double time_at(Eigen::Index i) const {
    return static_cast<double>(i + 1) * dt_sample;
  }
  Eigen::ArrayXd time_grid() const;
};

// Uniform grid t_i = (i + 1) * dt covering (0, horizon].
// Throws std::invalid_argument unless horizon is a positive multiple of dt.
Eigen::ArrayXd make_time_grid(double dt_sample, double horizon_s);

}  // namespace mcdist
