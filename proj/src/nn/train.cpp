#include "mcdist/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "mcdist/rng.hpp"

namespace mcdist {

namespace {

constexpr std::uint64_t kTagInit = 11;
constexpr std::uint64_t kTagShuffle = 12;

MatrixXd gather_rows(const MatrixXd& src, const std::vector<int>& rows,
                     std::size_t begin, std::size_t end) {
  MatrixXd out(static_cast<Eigen::Index>(end - begin), src.cols());
  for (std::size_t i = begin; i < end; ++i) {
    out.row(static_cast<Eigen::Index>(i - begin)) = src.row(rows[i]);
  }
  return out;
}

void check_set(const WindowBatch& set, const ModelConfig& cfg,
               const char* name) {
  if (set.inputs.rows() == 0) {
    throw std::invalid_argument(std::string("train: empty ") + name + " split");
  }
  if (set.inputs.cols() != cfg.window_len) {
    throw std::invalid_argument(std::string("train: ") + name +
                                " window length does not match the model");
  }
  if (set.targets.rows() != set.inputs.rows() ||
      set.targets.cols() != cfg.outputs) {
    throw std::invalid_argument(std::string("train: ") + name +
                                " target shape does not match the model");
  }
}

// Sum of squared prediction errors over one chunk of a window set.
double chunk_squared_error(const ModelParams& model, const WindowBatch& set,
                           Eigen::Index begin, Eigen::Index rows) {
  const MatrixXd pred =
      forward(model, set.inputs.middleRows(begin, rows));
  return (pred - set.targets.middleRows(begin, rows)).squaredNorm();
}

}  // namespace

void TrainConfig::validate() const {
  model.validate();
  if (batch_size < 1 || max_epochs < 1 || patience < 1 || grad_chunk < 1) {
    throw std::domain_error("TrainConfig: batch_size, max_epochs, patience and grad_chunk must be positive");
  }
}

double evaluate_mse(const ModelParams& model, const WindowBatch& set) {
  check_set(set, model.config, "evaluation");
  const Eigen::Index n = set.inputs.rows();
  constexpr Eigen::Index kChunk = 64;
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> sums(static_cast<std::size_t>(n_chunks), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    const Eigen::Index begin = c * kChunk;
    const Eigen::Index rows = std::min(kChunk, n - begin);
    sums[static_cast<std::size_t>(c)] =
        chunk_squared_error(model, set, begin, rows);
  }
  const double total = std::accumulate(sums.begin(), sums.end(), 0.0);
  return total / static_cast<double>(set.targets.size());
}

TrainResult train(const WindowBatch& train_set, const WindowBatch& val_set,
                  const TrainConfig& cfg, double input_scale) {
  cfg.validate();
  check_set(train_set, cfg.model, "train");
  check_set(val_set, cfg.model, "validation");
  if (!(input_scale > 0.0)) {
    throw std::invalid_argument("train: input_scale must be positive");
  }

  ModelParams model = make_model(cfg.model, derive_seed(cfg.seed, kTagInit));
  model.input_scale = input_scale;
  AdamState adam = make_adam_state(cfg.model, cfg.adam);

  const int n_train = static_cast<int>(train_set.inputs.rows());
  std::vector<int> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  result.best_val_mse = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    // Seed-per-epoch permutation: the trajectory depends only on (seed, epoch).
    SplitMix64 shuffle_rng(derive_seed(cfg.seed, kTagShuffle,
                                       static_cast<std::uint64_t>(epoch)));
    for (int i = n_train - 1; i > 0; --i) {
      const auto j = static_cast<int>(shuffle_rng.next() %
                                      static_cast<std::uint64_t>(i + 1));
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(j)]);
    }

    double epoch_sq_sum = 0.0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const auto batch_begin = static_cast<std::size_t>(start);
      const auto batch_end = static_cast<std::size_t>(
          std::min(start + cfg.batch_size, n_train));
      const auto batch_items = batch_end - batch_begin;
      const double batch_elems =
          static_cast<double>(batch_items) * cfg.model.outputs;

      const auto chunk = static_cast<std::size_t>(cfg.grad_chunk);
      const std::size_t n_chunks = (batch_items + chunk - 1) / chunk;
      std::vector<ModelWeights> grads(n_chunks);
      std::vector<double> sq(n_chunks, 0.0);

      // Fixed-size chunks merged in index order: bit-identical results for
      // any thread count.
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n_chunks); ++c) {
        const std::size_t lo = batch_begin + static_cast<std::size_t>(c) * chunk;
        const std::size_t hi = std::min(lo + chunk, batch_end);
        const MatrixXd in = gather_rows(train_set.inputs, order, lo, hi);
        const MatrixXd tgt = gather_rows(train_set.targets, order, lo, hi);
        ForwardCache cache;
        const MatrixXd pred = forward(model, in, &cache);
        const MatrixXd diff = pred - tgt;
        sq[static_cast<std::size_t>(c)] = diff.squaredNorm();
        const MatrixXd dpred = 2.0 * diff / batch_elems;
        grads[static_cast<std::size_t>(c)] = backward(model, cache, dpred);
      }

      ModelWeights total = std::move(grads[0]);
      for (std::size_t c = 1; c < n_chunks; ++c) accumulate(total, grads[c]);
      epoch_sq_sum += std::accumulate(sq.begin(), sq.end(), 0.0);

      adam_step(adam, model.weights, total);
    }

    const double train_mse =
        epoch_sq_sum / static_cast<double>(train_set.targets.size());
    const double val_mse = evaluate_mse(model, val_set);
    result.log.push_back({epoch, train_mse, val_mse});

    if (val_mse < result.best_val_mse) {
      result.best_val_mse = val_mse;
      result.best_epoch = epoch;
      result.model = model;
      stale_epochs = 0;
    } else {
      ++stale_epochs;
    }
    if (stale_epochs >= cfg.patience) break;
    if (cfg.target_val_mse > 0.0 && result.best_val_mse <= cfg.target_val_mse) break;
  }
  return result;
}

TracePrediction predict_trace(const ModelParams& model, const CountTrace& trace,
                              const WindowConfig& window_cfg) {
  WindowConfig cfg = window_cfg;
  cfg.window_len = model.config.window_len;
  cfg.input_scale = model.input_scale;
  const WindowBatch windows = make_windows(trace, cfg);

  const Eigen::Index n = windows.inputs.rows();
  const int k = model.config.outputs;
  TracePrediction out;
  out.per_window.resize(n, k);

  constexpr Eigen::Index kChunk = 64;
  for (Eigen::Index begin = 0; begin < n; begin += kChunk) {
    const Eigen::Index rows = std::min(kChunk, n - begin);
    out.per_window.middleRows(begin, rows) =
        forward(model, windows.inputs.middleRows(begin, rows));
  }
  for (Eigen::Index w = 0; w < n; ++w) {
    Eigen::VectorXd row = out.per_window.row(w);
    std::sort(row.data(), row.data() + row.size());
    out.per_window.row(w) = row.transpose();
  }
  out.aggregate = out.per_window.colwise().mean();
  return out;
}

}  // namespace mcdist
