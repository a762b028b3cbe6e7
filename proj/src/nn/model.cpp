#include "mcdist/nn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "mcdist/io.hpp"
#include "mcdist/rng.hpp"

namespace mcdist {

void ModelConfig::validate() const {
  if (window_len < 1 || lstm_layers < 1 || hidden < 1 || dense_layers < 0 ||
      dense_width < 1 || outputs < 1) {
    throw std::domain_error("ModelConfig: all sizes must be positive");
  }
}

ModelWeights make_weights(const ModelConfig& cfg) {
  cfg.validate();
  ModelWeights w;
  int in = 1;  // scalar count per timestep
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    LstmLayerParams layer;
    for (LstmDirParams* dir : {&layer.fwd, &layer.bwd}) {
      dir->w_in = MatrixXd::Zero(4 * cfg.hidden, in);
      dir->w_rec = MatrixXd::Zero(4 * cfg.hidden, cfg.hidden);
      dir->bias = VectorXd::Zero(4 * cfg.hidden);
    }
    w.lstm.push_back(std::move(layer));
    in = 2 * cfg.hidden;
  }
  int width_in = cfg.summary_width();
  for (int l = 0; l < cfg.dense_layers; ++l) {
    w.dense.push_back({MatrixXd::Zero(cfg.dense_width, width_in),
                       VectorXd::Zero(cfg.dense_width)});
    width_in = cfg.dense_width;
  }
  w.dense.push_back({MatrixXd::Zero(cfg.outputs, width_in),
                     VectorXd::Zero(cfg.outputs)});
  return w;
}

ModelParams make_model(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams model;
  model.config = cfg;
  model.weights = make_weights(cfg);
  SplitMix64 rng(seed);

  auto fill = [&rng](MatrixXd& m) {
    const double r = 1.0 / std::sqrt(static_cast<double>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, c) = rng.uniform(-r, r);
      }
    }
  };

  for (LstmLayerParams& layer : model.weights.lstm) {
    for (LstmDirParams* dir : {&layer.fwd, &layer.bwd}) {
      fill(dir->w_in);
      fill(dir->w_rec);
      // Forget gates start open so gradients flow through time early on.
      dir->bias.segment(cfg.hidden, cfg.hidden).setOnes();
    }
  }
  for (DenseParams& d : model.weights.dense) fill(d.w);
  return model;
}

namespace {

template <typename Weights, typename Map>
std::vector<Map> views_impl(Weights& w) {
  std::vector<Map> views;
  for (auto& layer : w.lstm) {
    for (auto* dir : {&layer.fwd, &layer.bwd}) {
      views.emplace_back(dir->w_in.data(), dir->w_in.size());
      views.emplace_back(dir->w_rec.data(), dir->w_rec.size());
      views.emplace_back(dir->bias.data(), dir->bias.size());
    }
  }
  for (auto& d : w.dense) {
    views.emplace_back(d.w.data(), d.w.size());
    views.emplace_back(d.b.data(), d.b.size());
  }
  return views;
}

}  // namespace

std::vector<Eigen::Map<VectorXd>> tensor_views(ModelWeights& w) {
  return views_impl<ModelWeights, Eigen::Map<VectorXd>>(w);
}

std::vector<Eigen::Map<const VectorXd>> tensor_views(const ModelWeights& w) {
  return views_impl<const ModelWeights, Eigen::Map<const VectorXd>>(w);
}

long parameter_count(const ModelWeights& w) {
  long n = 0;
  for (const auto& v : tensor_views(w)) n += static_cast<long>(v.size());
  return n;
}

void set_zero(ModelWeights& w) {
  for (auto& v : tensor_views(w)) v.setZero();
}

void accumulate(ModelWeights& dst, const ModelWeights& src) {
  auto d = tensor_views(dst);
  auto s = tensor_views(src);
  if (d.size() != s.size()) {
    throw std::invalid_argument("accumulate: mismatched weight structures");
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].size() != s[i].size()) {
      throw std::invalid_argument("accumulate: mismatched tensor shapes");
    }
    d[i] += s[i];
  }
}

namespace {

nlohmann::json matrix_to_json(const MatrixXd& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  j["data"] = std::move(data);
  return j;
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw std::runtime_error("model file: tensor size mismatch");
  }
  MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
  }
  return m;
}

nlohmann::json vector_to_json(const VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

VectorXd vector_from_json(const nlohmann::json& j) {
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(data.data(),
                                    static_cast<Eigen::Index>(data.size()));
}

constexpr int kModelFormatVersion = 1;

}  // namespace

nlohmann::json model_to_json(const ModelParams& model) {
  nlohmann::json j;
  j["format_version"] = kModelFormatVersion;
  j["config"] = {
      {"window_len", model.config.window_len},
      {"lstm_layers", model.config.lstm_layers},
      {"hidden", model.config.hidden},
      {"dense_layers", model.config.dense_layers},
      {"dense_width", model.config.dense_width},
      {"outputs", model.config.outputs},
  };
  j["input_scale"] = model.input_scale;
  j["lstm"] = nlohmann::json::array();
  for (const LstmLayerParams& layer : model.weights.lstm) {
    nlohmann::json jl;
    for (const auto& [name, dir] :
         {std::pair{"fwd", &layer.fwd}, std::pair{"bwd", &layer.bwd}}) {
      jl[name] = {{"w_in", matrix_to_json(dir->w_in)},
                  {"w_rec", matrix_to_json(dir->w_rec)},
                  {"bias", vector_to_json(dir->bias)}};
    }
    j["lstm"].push_back(std::move(jl));
  }
  j["dense"] = nlohmann::json::array();
  for (const DenseParams& d : model.weights.dense) {
    j["dense"].push_back(
        {{"w", matrix_to_json(d.w)}, {"b", vector_to_json(d.b)}});
  }
  return j;
}

ModelParams model_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kModelFormatVersion) {
    throw std::runtime_error("model file: unsupported format version");
  }
  ModelParams model;
  const auto& jc = j.at("config");
  model.config.window_len = jc.at("window_len").get<int>();
  model.config.lstm_layers = jc.at("lstm_layers").get<int>();
  model.config.hidden = jc.at("hidden").get<int>();
  model.config.dense_layers = jc.at("dense_layers").get<int>();
  model.config.dense_width = jc.at("dense_width").get<int>();
  model.config.outputs = jc.at("outputs").get<int>();
  model.config.validate();
  model.input_scale = j.at("input_scale").get<double>();

  model.weights = make_weights(model.config);
  const auto& jl = j.at("lstm");
  if (jl.size() != model.weights.lstm.size()) {
    throw std::runtime_error("model file: LSTM layer count mismatch");
  }
  for (std::size_t l = 0; l < model.weights.lstm.size(); ++l) {
    for (const auto& [name, dir] :
         {std::pair{"fwd", &model.weights.lstm[l].fwd},
          std::pair{"bwd", &model.weights.lstm[l].bwd}}) {
      const auto& jd = jl.at(l).at(name);
      dir->w_in = matrix_from_json(jd.at("w_in"));
      dir->w_rec = matrix_from_json(jd.at("w_rec"));
      dir->bias = vector_from_json(jd.at("bias"));
    }
  }
  const auto& jd = j.at("dense");
  if (jd.size() != model.weights.dense.size()) {
    throw std::runtime_error("model file: dense layer count mismatch");
  }
  for (std::size_t l = 0; l < model.weights.dense.size(); ++l) {
    model.weights.dense[l].w = matrix_from_json(jd.at(l).at("w"));
    model.weights.dense[l].b = vector_from_json(jd.at(l).at("b"));
  }
  return model;
}

void save_model(const std::filesystem::path& path, const ModelParams& model) {
  save_json(path, model_to_json(model));
}

ModelParams load_model(const std::filesystem::path& path) {
  return model_from_json(load_json(path));
}

}  // namespace mcdist
