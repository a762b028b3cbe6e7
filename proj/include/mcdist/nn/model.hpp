#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

namespace mcdist {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Sliding-window bidirectional LSTM regressor: lstm_layers bidirectional
// layers of `hidden` units per direction, a dense ReLU stack, and a linear
// head with one output per branch.
struct ModelConfig {
  int window_len = 200;
  int lstm_layers = 3;
  int hidden = 64;       // per direction
  int dense_layers = 5;  // ReLU layers before the linear head
  int dense_width = 32;
  int outputs = 2;

  int summary_width() const { return 2 * hidden; }
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// One direction of one LSTM layer. Gate rows are blocked
// [input, forget, cell, output], each block `hidden` rows tall.
struct LstmDirParams {
  MatrixXd w_in;   // 4H x In
  MatrixXd w_rec;  // 4H x H
  VectorXd bias;   // 4H
};

struct LstmLayerParams {
  LstmDirParams fwd, bwd;
};

struct DenseParams {
  MatrixXd w;  // out x in
  VectorXd b;  // out
};

// All trainable tensors. Gradients and Adam moments reuse this layout.
struct ModelWeights {
  std::vector<LstmLayerParams> lstm;
  std::vector<DenseParams> dense;  // dense_layers ReLU layers + linear head last
};

struct ModelParams {
  ModelConfig config;
  ModelWeights weights;
  double input_scale = 1.0;  // windows are divided by this before the net
};

// Zero tensors of the right shapes.
ModelWeights make_weights(const ModelConfig& cfg);

// Seeded uniform fan-in init; forget-gate biases start at 1.
ModelParams make_model(const ModelConfig& cfg, std::uint64_t seed);

// Flat views over every tensor in a fixed traversal order; the same order is
// used by Adam, the gradient check, and serialization.
std::vector<Eigen::Map<VectorXd>> tensor_views(ModelWeights& w);
std::vector<Eigen::Map<const VectorXd>> tensor_views(const ModelWeights& w);
long parameter_count(const ModelWeights& w);

void set_zero(ModelWeights& w);
// dst += src, tensor by tensor.
void accumulate(ModelWeights& dst, const ModelWeights& src);

nlohmann::json model_to_json(const ModelParams& model);
ModelParams model_from_json(const nlohmann::json& j);
void save_model(const std::filesystem::path& path, const ModelParams& model);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace mcdist
