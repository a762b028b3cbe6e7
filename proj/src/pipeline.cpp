#include "mcdist/pipeline.hpp"

#include <stdexcept>
#include <vector>

namespace mcdist {

SplitWindows build_window_sets(const LoadedDataset& dataset,
                               const WindowConfig& base_cfg) {
  WindowConfig cfg = base_cfg;
  cfg.input_scale = 1.0;

  std::vector<WindowBatch> buckets[3];
  Eigen::Index rows[3] = {0, 0, 0};
  Eigen::Index cols = 0, k = 0;
  for (const LoadedTrace& lt : dataset.traces) {
    const WindowBatch batch = make_windows(lt.trace, cfg);
    const auto s = static_cast<std::size_t>(lt.split);
    rows[s] += batch.inputs.rows();
    cols = batch.inputs.cols();
    k = batch.targets.cols();
    buckets[s].push_back(batch);
  }

  SplitWindows out;
  WindowBatch* sets[3] = {&out.train, &out.val, &out.test};
  for (int s = 0; s < 3; ++s) {
    sets[s]->inputs.resize(rows[s], cols);
    sets[s]->targets.resize(rows[s], k);
    Eigen::Index at = 0;
    for (const WindowBatch& b : buckets[s]) {
      sets[s]->inputs.middleRows(at, b.inputs.rows()) = b.inputs;
      sets[s]->targets.middleRows(at, b.targets.rows()) = b.targets;
      at += b.inputs.rows();
    }
  }

  const double max_count =
      out.train.inputs.size() > 0 ? out.train.inputs.maxCoeff() : 0.0;
  out.input_scale = max_count > 0.0 ? max_count : 1.0;
  for (WindowBatch* set : sets) {
    if (set->inputs.size() > 0) set->inputs /= out.input_scale;
  }
  return out;
}

}  // namespace mcdist
