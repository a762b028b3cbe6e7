#include "mcdist/trace.hpp"

#include <cmath>
#include <stdexcept>

namespace mcdist {

Eigen::ArrayXd CountTrace::time_grid() const {
  Eigen::ArrayXd t(counts.size());
  for (Eigen::Index i = 0; i < counts.size(); ++i) t[i] = time_at(i);
  return t;
}

Eigen::ArrayXd make_time_grid(double dt_sample, double horizon_s) {
  if (!(dt_sample > 0.0) || !(horizon_s > 0.0)) {
    throw std::invalid_argument("make_time_grid: dt and horizon must be positive");
  }
  const double ratio = horizon_s / dt_sample;
  const auto n = static_cast<Eigen::Index>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw std::invalid_argument("make_time_grid: horizon must be a positive multiple of dt");
  }
  Eigen::ArrayXd t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    t[i] = static_cast<double>(i + 1) * dt_sample;
  }
  return t;
}

}  // namespace mcdist
