#pragma once

#include "mcdist/dataset.hpp"
#include "mcdist/nn/windows.hpp"

namespace mcdist {

// Window sets per split, scaled by the training split's maximum count.
struct SplitWindows {
  WindowBatch train, val, test;
  double input_scale = 1.0;
};

// Builds windows for every trace of the dataset, groups them by the split
// assignment, and scales all inputs by the training maximum (1 if the train
// split is all zeros). Window geometry comes from base_cfg; its input_scale
// is ignored.
SplitWindows build_window_sets(const LoadedDataset& dataset,
                               const WindowConfig& base_cfg);

}  // namespace mcdist
