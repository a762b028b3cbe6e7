#pragma once

#include <Eigen/Core>

#include "mcdist/trace.hpp"

namespace mcdist {

// Sliding-window extraction: the raw trace is undersampled by `undersample`
// (keeping indices 0, u, 2u, ...) and a `window_len`-sample window slides
// across it with `stride` undersampled samples per step.
struct WindowConfig {
  int undersample = 10;
  int window_len = 200;
  int stride = 20;  // one symbol at the default rates
  double input_scale = 1.0;

  void validate() const;
};

// Windows of one trace with per-window regression targets.
struct WindowBatch {
  Eigen::MatrixXd inputs;   // n_windows x window_len, scaled by 1/input_scale
  Eigen::MatrixXd targets;  // n_windows x K, every row sorted ascending
};

// Throws std::invalid_argument if the trace is shorter than one full window
// (undersample * window_len raw samples).
WindowBatch make_windows(const CountTrace& trace, const WindowConfig& cfg);

}  // namespace mcdist
