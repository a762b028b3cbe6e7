#include "mcdist/nn/sbrnn.hpp"

#include <stdexcept>
#include <string>

namespace mcdist {

namespace {

void check(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

inline Eigen::ArrayXXd logistic(const Eigen::ArrayXXd& x) {
  return ((-x).exp() + 1.0).inverse();
}

// Applies gate nonlinearities in place on a pre-activation block [i f g o].
void activate_gates(MatrixXd& gates, int hidden) {
  auto a = gates.array();
  const Eigen::Index h = hidden;
  a.leftCols(2 * h) = logistic(a.leftCols(2 * h));            // i, f
  a.middleCols(2 * h, h) = a.middleCols(2 * h, h).tanh();     // g
  a.rightCols(h) = logistic(a.rightCols(h));                  // o
}

// Runs one direction of one layer over the whole batch. `reversed` scans the
// sequence right to left. Returns the final hidden state; fills `cache` when
// given.
MatrixXd run_direction(const LstmDirParams& p, const MatrixXd& x_all, int steps,
                       int batch, bool reversed, LstmDirCache* cache) {
  const auto hidden = static_cast<int>(p.w_rec.cols());
  const Eigen::Index h4 = p.w_in.rows();

  // Input contributions for every step in one product.
  MatrixXd gin(x_all.rows(), h4);
  gin.noalias() = x_all * p.w_in.transpose();

  if (cache) {
    cache->gates.resize(x_all.rows(), h4);
    cache->c.resize(x_all.rows(), hidden);
    cache->tanh_c.resize(x_all.rows(), hidden);
    cache->h.resize(x_all.rows(), hidden);
  }

  MatrixXd h_prev = MatrixXd::Zero(batch, hidden);
  MatrixXd c_prev = MatrixXd::Zero(batch, hidden);
  MatrixXd gates(batch, h4), c(batch, hidden), tanh_c(batch, hidden),
      h(batch, hidden);

  for (int s = 0; s < steps; ++s) {
    const int t = reversed ? steps - 1 - s : s;
    const Eigen::Index row = static_cast<Eigen::Index>(t) * batch;
    gates = gin.middleRows(row, batch);
    gates.noalias() += h_prev * p.w_rec.transpose();
    gates.rowwise() += p.bias.transpose();
    activate_gates(gates, hidden);

    auto i = gates.array().leftCols(hidden);
    auto f = gates.array().middleCols(hidden, hidden);
    auto g = gates.array().middleCols(2 * hidden, hidden);
    auto o = gates.array().rightCols(hidden);

    c.array() = f * c_prev.array() + i * g;
    tanh_c.array() = c.array().tanh();
    h.array() = o * tanh_c.array();

    if (cache) {
      cache->gates.middleRows(row, batch) = gates;
      cache->c.middleRows(row, batch) = c;
      cache->tanh_c.middleRows(row, batch) = tanh_c;
      cache->h.middleRows(row, batch) = h;
    }
    h_prev = h;
    c_prev = c;
  }
  if (cache) cache->h_final = h_prev;
  return h_prev;
}

// BPTT through one direction. dh_steps carries per-step gradients w.r.t. the
// direction's hidden outputs; dh_final the gradient w.r.t. its last state.
// Returns d(input) and accumulates parameter gradients.
MatrixXd backward_direction(const LstmDirParams& p, const LstmDirCache& cache,
                            const MatrixXd& x_all, int steps, int batch,
                            bool reversed, const MatrixXd& dh_steps,
                            const MatrixXd& dh_final, LstmDirParams& grads) {
  const auto hidden = static_cast<int>(p.w_rec.cols());
  const Eigen::Index h4 = p.w_in.rows();

  MatrixXd da_all = MatrixXd::Zero(x_all.rows(), h4);
  MatrixXd dh = dh_final;
  MatrixXd dc = MatrixXd::Zero(batch, hidden);
  MatrixXd da(batch, h4);

  for (int s = steps - 1; s >= 0; --s) {
    const int t = reversed ? steps - 1 - s : s;
    const Eigen::Index row = static_cast<Eigen::Index>(t) * batch;

    dh += dh_steps.middleRows(row, batch);

    auto i = cache.gates.array().middleRows(row, batch).leftCols(hidden);
    auto f = cache.gates.array().middleRows(row, batch).middleCols(hidden, hidden);
    auto g = cache.gates.array().middleRows(row, batch).middleCols(2 * hidden, hidden);
    auto o = cache.gates.array().middleRows(row, batch).rightCols(hidden);
    auto tanh_c = cache.tanh_c.array().middleRows(row, batch);

    const Eigen::ArrayXXd dct =
        dc.array() + dh.array() * o * (1.0 - tanh_c.square());

    Eigen::ArrayXXd c_prev(batch, hidden);
    if (s > 0) {
      const int t_prev = reversed ? steps - s : s - 1;
      c_prev = cache.c.array().middleRows(
          static_cast<Eigen::Index>(t_prev) * batch, batch);
    } else {
      c_prev.setZero();
    }

    // Pre-activation gate gradients, blocked like the forward layout.
    da.array().leftCols(hidden) = dct * g * i * (1.0 - i);                  // input gate
    da.array().middleCols(hidden, hidden) = dct * c_prev * f * (1.0 - f);   // forget gate
    da.array().middleCols(2 * hidden, hidden) = dct * i * (1.0 - g.square());  // candidate
    da.array().rightCols(hidden) = dh.array() * tanh_c * o * (1.0 - o);     // output gate

    da_all.middleRows(row, batch) = da;
    dh.noalias() = da * p.w_rec;
    dc = (dct * f).matrix();
  }

  // Weight gradients in two batched products over all steps.
  MatrixXd h_prev_all = MatrixXd::Zero(x_all.rows(), hidden);
  for (int s = 1; s < steps; ++s) {
    const int t = reversed ? steps - 1 - s : s;
    const int t_prev = reversed ? steps - s : s - 1;
    h_prev_all.middleRows(static_cast<Eigen::Index>(t) * batch, batch) =
        cache.h.middleRows(static_cast<Eigen::Index>(t_prev) * batch, batch);
  }
  grads.w_in.noalias() += da_all.transpose() * x_all;
  grads.w_rec.noalias() += da_all.transpose() * h_prev_all;
  grads.bias.noalias() += da_all.colwise().sum().transpose();

  MatrixXd dx(x_all.rows(), x_all.cols());
  dx.noalias() = da_all * p.w_in;
  return dx;
}

// Reshapes a window batch (B x T) into time-major layout (T*B x 1).
MatrixXd time_major(const MatrixXd& windows) {
  const Eigen::Index batch = windows.rows();
  const Eigen::Index steps = windows.cols();
  MatrixXd x(steps * batch, 1);
  for (Eigen::Index t = 0; t < steps; ++t) {
    x.col(0).segment(t * batch, batch) = windows.col(t);
  }
  return x;
}

void check_lstm_shapes(const ModelParams& model) {
  const ModelConfig& cfg = model.config;
  check(static_cast<int>(model.weights.lstm.size()) == cfg.lstm_layers,
        "forward: LSTM layer count mismatch");
  int in = 1;
  for (const LstmLayerParams& layer : model.weights.lstm) {
    for (const LstmDirParams* dir : {&layer.fwd, &layer.bwd}) {
      check(dir->w_in.rows() == 4 * cfg.hidden && dir->w_in.cols() == in &&
                dir->w_rec.rows() == 4 * cfg.hidden &&
                dir->w_rec.cols() == cfg.hidden &&
                dir->bias.size() == 4 * cfg.hidden,
            "forward: LSTM tensor shapes inconsistent with config");
    }
    in = 2 * cfg.hidden;
  }
}

}  // namespace

LstmStepResult lstm_cell_step(const LstmDirParams& params, const MatrixXd& x,
                              const MatrixXd& h_prev, const MatrixXd& c_prev) {
  const Eigen::Index h4 = params.w_in.rows();
  check(h4 % 4 == 0, "lstm_cell_step: gate block height must be 4*hidden");
  const Eigen::Index hidden = h4 / 4;
  check(params.w_rec.rows() == h4 && params.w_rec.cols() == hidden &&
            params.bias.size() == h4,
        "lstm_cell_step: parameter shapes inconsistent");
  check(x.cols() == params.w_in.cols(), "lstm_cell_step: input width mismatch");
  check(h_prev.rows() == x.rows() && c_prev.rows() == x.rows() &&
            h_prev.cols() == hidden && c_prev.cols() == hidden,
        "lstm_cell_step: state shape mismatch");

  MatrixXd gates(x.rows(), h4);
  gates.noalias() = x * params.w_in.transpose();
  gates.noalias() += h_prev * params.w_rec.transpose();
  gates.rowwise() += params.bias.transpose();
  activate_gates(gates, static_cast<int>(hidden));

  LstmStepResult out;
  out.c = (gates.array().middleCols(hidden, hidden) * c_prev.array() +
           gates.array().leftCols(hidden) *
               gates.array().middleCols(2 * hidden, hidden))
              .matrix();
  out.h = (gates.array().rightCols(hidden) * out.c.array().tanh()).matrix();
  return out;
}

MatrixXd forward(const ModelParams& model, const MatrixXd& windows,
                 ForwardCache* cache) {
  const ModelConfig& cfg = model.config;
  check_lstm_shapes(model);
  check(windows.cols() == cfg.window_len,
        "forward: window length does not match the model");
  check(windows.rows() >= 1, "forward: empty batch");
  const int batch = static_cast<int>(windows.rows());
  const int steps = cfg.window_len;

  if (cache) {
    cache->batch = batch;
    cache->steps = steps;
    cache->layer_inputs.assign(static_cast<std::size_t>(cfg.lstm_layers), {});
    cache->fwd.assign(static_cast<std::size_t>(cfg.lstm_layers), {});
    cache->bwd.assign(static_cast<std::size_t>(cfg.lstm_layers), {});
    cache->dense_pre.clear();
    cache->dense_in.clear();
  }

  MatrixXd x_all = time_major(windows);
  MatrixXd summary(batch, cfg.summary_width());
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const LstmLayerParams& layer = model.weights.lstm[static_cast<std::size_t>(l)];
    if (cache) cache->layer_inputs[static_cast<std::size_t>(l)] = x_all;
    LstmDirCache fwd_cache, bwd_cache;
    LstmDirCache* fc = cache ? &cache->fwd[static_cast<std::size_t>(l)] : &fwd_cache;
    LstmDirCache* bc = cache ? &cache->bwd[static_cast<std::size_t>(l)] : &bwd_cache;
    const bool need_cache = cache || l + 1 < cfg.lstm_layers;

    MatrixXd hf = run_direction(layer.fwd, x_all, steps, batch, false,
                                need_cache ? fc : nullptr);
    MatrixXd hb = run_direction(layer.bwd, x_all, steps, batch, true,
                                need_cache ? bc : nullptr);

    if (l + 1 < cfg.lstm_layers) {
      MatrixXd next(x_all.rows(), 2 * cfg.hidden);
      next.leftCols(cfg.hidden) = fc->h;
      next.rightCols(cfg.hidden) = bc->h;
      x_all = std::move(next);
    } else {
      summary.leftCols(cfg.hidden) = hf;
      summary.rightCols(cfg.hidden) = hb;
    }
  }

  // Dense ReLU stack, then the linear head.
  MatrixXd act = summary;
  if (cache) {
    cache->summary = summary;
    cache->dense_in.push_back(act);
  }
  const std::size_t n_dense = model.weights.dense.size();
  check(n_dense == static_cast<std::size_t>(cfg.dense_layers) + 1,
        "forward: dense layer count mismatch");
  for (std::size_t l = 0; l < n_dense; ++l) {
    const DenseParams& d = model.weights.dense[l];
    check(d.w.cols() == act.cols(), "forward: dense input width mismatch");
    MatrixXd pre(act.rows(), d.w.rows());
    pre.noalias() = act * d.w.transpose();
    pre.rowwise() += d.b.transpose();
    if (l + 1 < n_dense) {
      if (cache) cache->dense_pre.push_back(pre);
      act = pre.cwiseMax(0.0);
      if (cache) cache->dense_in.push_back(act);
    } else {
      act = std::move(pre);  // linear head
    }
  }
  check(act.cols() == cfg.outputs, "forward: head output width mismatch");
  if (cache) cache->output = act;
  return act;
}

MatrixXd bilstm_forward(const ModelParams& model, const MatrixXd& windows) {
  const ModelConfig& cfg = model.config;
  check_lstm_shapes(model);
  check(windows.cols() == cfg.window_len,
        "bilstm_forward: window length does not match the model");
  const int batch = static_cast<int>(windows.rows());

  MatrixXd x_all = time_major(windows);
  MatrixXd summary(batch, cfg.summary_width());
  for (int l = 0; l < cfg.lstm_layers; ++l) {
    const LstmLayerParams& layer = model.weights.lstm[static_cast<std::size_t>(l)];
    LstmDirCache fc, bc;
    const bool inner = l + 1 < cfg.lstm_layers;
    MatrixXd hf = run_direction(layer.fwd, x_all, cfg.window_len, batch, false,
                                inner ? &fc : nullptr);
    MatrixXd hb = run_direction(layer.bwd, x_all, cfg.window_len, batch, true,
                                inner ? &bc : nullptr);
    if (inner) {
      MatrixXd next(x_all.rows(), 2 * cfg.hidden);
      next.leftCols(cfg.hidden) = fc.h;
      next.rightCols(cfg.hidden) = bc.h;
      x_all = std::move(next);
    } else {
      summary.leftCols(cfg.hidden) = hf;
      summary.rightCols(cfg.hidden) = hb;
    }
  }
  return summary;
}

MatrixXd head_forward(const ModelParams& model, const MatrixXd& summary) {
  const ModelConfig& cfg = model.config;
  check(summary.cols() == cfg.summary_width(),
        "head_forward: summary width does not match the model");
  MatrixXd act = summary;
  const std::size_t n_dense = model.weights.dense.size();
  for (std::size_t l = 0; l < n_dense; ++l) {
    const DenseParams& d = model.weights.dense[l];
    check(d.w.cols() == act.cols(), "head_forward: dense input width mismatch");
    MatrixXd pre(act.rows(), d.w.rows());
    pre.noalias() = act * d.w.transpose();
    pre.rowwise() += d.b.transpose();
    act = (l + 1 < n_dense) ? pre.cwiseMax(0.0) : std::move(pre);
  }
  return act;
}

double mse_loss(const MatrixXd& pred, const MatrixXd& target) {
  check(pred.rows() == target.rows() && pred.cols() == target.cols(),
        "mse_loss: shape mismatch");
  check(pred.size() > 0, "mse_loss: empty batch");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

ModelWeights backward(const ModelParams& model, const ForwardCache& cache,
                      const MatrixXd& doutput) {
  const ModelConfig& cfg = model.config;
  check(doutput.rows() == cache.batch && doutput.cols() == cfg.outputs,
        "backward: output gradient shape mismatch");
  check(cache.dense_in.size() == static_cast<std::size_t>(cfg.dense_layers) + 1,
        "backward: cache does not match the model");
  ModelWeights grads = make_weights(cfg);
  const int batch = cache.batch;
  const int steps = cache.steps;

  // Dense stack, head first.
  MatrixXd dact = doutput;
  for (std::size_t l = model.weights.dense.size(); l-- > 0;) {
    const DenseParams& d = model.weights.dense[l];
    DenseParams& gd = grads.dense[l];
    const bool is_head = (l + 1 == model.weights.dense.size());
    MatrixXd dpre = is_head
                        ? std::move(dact)
                        : MatrixXd((dact.array() *
                                    (cache.dense_pre[l].array() > 0.0).cast<double>())
                                       .matrix());
    gd.w.noalias() = dpre.transpose() * cache.dense_in[l];
    gd.b = dpre.colwise().sum().transpose();
    dact.resize(batch, d.w.cols());
    dact.noalias() = dpre * d.w;
  }

  // dact now holds d(summary); split into the per-direction final-state grads.
  MatrixXd dh_final_fwd = dact.leftCols(cfg.hidden);
  MatrixXd dh_final_bwd = dact.rightCols(cfg.hidden);

  const Eigen::Index rows = static_cast<Eigen::Index>(steps) * batch;
  MatrixXd dh_steps_fwd = MatrixXd::Zero(rows, cfg.hidden);
  MatrixXd dh_steps_bwd = MatrixXd::Zero(rows, cfg.hidden);

  for (int l = cfg.lstm_layers; l-- > 0;) {
    const LstmLayerParams& layer = model.weights.lstm[static_cast<std::size_t>(l)];
    LstmLayerParams& gl = grads.lstm[static_cast<std::size_t>(l)];
    const MatrixXd& x_all = cache.layer_inputs[static_cast<std::size_t>(l)];

    MatrixXd dx_f = backward_direction(layer.fwd, cache.fwd[static_cast<std::size_t>(l)],
                                       x_all, steps, batch, false, dh_steps_fwd,
                                       dh_final_fwd, gl.fwd);
    MatrixXd dx_b = backward_direction(layer.bwd, cache.bwd[static_cast<std::size_t>(l)],
                                       x_all, steps, batch, true, dh_steps_bwd,
                                       dh_final_bwd, gl.bwd);
    dx_f += dx_b;

    if (l > 0) {
      // The layer input was [h_fwd | h_bwd] of the layer below.
      dh_steps_fwd = dx_f.leftCols(cfg.hidden);
      dh_steps_bwd = dx_f.rightCols(cfg.hidden);
      dh_final_fwd.setZero();
      dh_final_bwd.setZero();
    }
  }
  return grads;
}

LossGrad loss_and_gradients(const ModelParams& model, const MatrixXd& windows,
                            const MatrixXd& targets) {
  ForwardCache cache;
  const MatrixXd pred = forward(model, windows, &cache);
  LossGrad out;
  out.loss = mse_loss(pred, targets);
  const MatrixXd dpred =
      2.0 * (pred - targets) / static_cast<double>(pred.size());
  out.grads = backward(model, cache, dpred);
  return out;
}

}  // namespace mcdist
