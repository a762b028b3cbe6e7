#pragma once

#include <cstdint>
#include <vector>

#include "mcdist/nn/adam.hpp"
#include "mcdist/nn/model.hpp"
#include "mcdist/nn/sbrnn.hpp"
#include "mcdist/nn/windows.hpp"
#include "mcdist/trace.hpp"

namespace mcdist {

struct TrainConfig {
  ModelConfig model;
  AdamConfig adam;
  int batch_size = 64;
  int max_epochs = 200;
  int patience = 20;           // epochs without validation improvement
  double target_val_mse = 0.0; // extra stop once reached; 0 disables
  std::uint64_t seed = 1;
  // Items per gradient chunk. Chunks are merged in index order, so results
  // are identical for any thread count.
  int grad_chunk = 8;

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
};

struct TrainResult {
  ModelParams model;  // best-validation checkpoint
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_mse = 0.0;
};

// Minibatch MSE training with Adam and early stopping on validation loss.
// input_scale is stored in the returned model; the window sets must already
// be scaled by it.
TrainResult train(const WindowBatch& train_set, const WindowBatch& val_set,
                  const TrainConfig& cfg, double input_scale);

// Loss/forward evaluation over a full window set, chunked.
double evaluate_mse(const ModelParams& model, const WindowBatch& set);

// Per-window distance estimates for one trace, each row sorted ascending,
// plus their per-component mean.
struct TracePrediction {
  MatrixXd per_window;      // W x K
  Eigen::VectorXd aggregate;  // K
};

TracePrediction predict_trace(const ModelParams& model, const CountTrace& trace,
                              const WindowConfig& window_cfg);

}  // namespace mcdist
