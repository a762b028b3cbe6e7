#include "mcdist/nn/windows.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace mcdist {

void WindowConfig::validate() const {
  if (undersample < 1 || window_len < 1 || stride < 1) {
    throw std::domain_error("WindowConfig: undersample, window_len and stride must be positive");
  }
  if (!(input_scale > 0.0)) {
    throw std::domain_error("WindowConfig: input_scale must be positive");
  }
}

WindowBatch make_windows(const CountTrace& trace, const WindowConfig& cfg) {
  cfg.validate();
  const Eigen::Index raw = trace.counts.size();
  const Eigen::Index needed =
      static_cast<Eigen::Index>(cfg.undersample) * cfg.window_len;
  if (raw < needed) {
    throw std::invalid_argument("make_windows: trace shorter than one full window");
  }

  const Eigen::Index u_len = (raw - 1) / cfg.undersample + 1;
  Eigen::VectorXd under(u_len);
  for (Eigen::Index j = 0; j < u_len; ++j) {
    under[j] = trace.counts[j * cfg.undersample];
  }

  const Eigen::Index n_windows = (u_len - cfg.window_len) / cfg.stride + 1;

  std::vector<double> sorted = trace.meta.distances_m;
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<Eigen::Index>(sorted.size());

  WindowBatch batch;
  batch.inputs.resize(n_windows, cfg.window_len);
  batch.targets.resize(n_windows, k);
  for (Eigen::Index w = 0; w < n_windows; ++w) {
    batch.inputs.row(w) =
        under.segment(w * cfg.stride, cfg.window_len).transpose() /
        cfg.input_scale;
    for (Eigen::Index j = 0; j < k; ++j) {
      batch.targets(w, j) = sorted[static_cast<std::size_t>(j)];
    }
  }
  return batch;
}

}  // namespace mcdist
