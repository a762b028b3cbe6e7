#pragma once

#include <Eigen/Core>
#include <vector>

#include "mcdist/nn/model.hpp"

namespace mcdist {

// Sequences are stored time-major: a (T*B x W) matrix whose row block
// [t*B, (t+1)*B) holds timestep t for the whole batch.

// Activations recorded by one direction of one LSTM layer for BPTT.
struct LstmDirCache {
  MatrixXd gates;   // T*B x 4H, post-activation [i f g o]
  MatrixXd c;       // T*B x H
  MatrixXd tanh_c;  // T*B x H
  MatrixXd h;       // T*B x H
  MatrixXd h_final; // B x H, state after the direction's last step
};

struct ForwardCache {
  int batch = 0;
  int steps = 0;
  std::vector<MatrixXd> layer_inputs;       // per LSTM layer, T*B x In
  std::vector<LstmDirCache> fwd, bwd;       // per LSTM layer
  MatrixXd summary;                         // B x 2H
  std::vector<MatrixXd> dense_pre;          // per ReLU layer, B x width
  std::vector<MatrixXd> dense_in;           // input to each dense layer incl. head
  MatrixXd output;                          // B x K
};

// One LSTM recurrence step:
// i,f,o = logistic(affine), g = tanh(affine), c = f.*c_prev + i.*g,
// h = o.*tanh(c). Throws std::invalid_argument on shape mismatch.
struct LstmStepResult {
  MatrixXd h, c;
};
LstmStepResult lstm_cell_step(const LstmDirParams& params, const MatrixXd& x,
                              const MatrixXd& h_prev, const MatrixXd& c_prev);

// Full bidirectional stack over a window batch (B x T); returns the sequence
// summary: final forward state next to final backward state (B x 2H).
MatrixXd bilstm_forward(const ModelParams& model, const MatrixXd& windows);

// Dense ReLU stack plus linear head over a summary batch (B x 2H -> B x K).
MatrixXd head_forward(const ModelParams& model, const MatrixXd& summary);

// Whole model. With a cache, records everything backward() needs.
MatrixXd forward(const ModelParams& model, const MatrixXd& windows,
                 ForwardCache* cache);
inline MatrixXd forward(const ModelParams& model, const MatrixXd& windows) {
  return forward(model, windows, nullptr);
}

// Mean of squared elementwise differences over the whole batch.
double mse_loss(const MatrixXd& pred, const MatrixXd& target);

// Reverse-mode gradients for every parameter given d(loss)/d(output),
// backpropagating through the dense stack and through time in both
// directions. The cache must come from forward() on the same model.
ModelWeights backward(const ModelParams& model, const ForwardCache& cache,
                      const MatrixXd& doutput);

// Forward + MSE + backward in one call.
struct LossGrad {
  double loss = 0.0;
  ModelWeights grads;
};
LossGrad loss_and_gradients(const ModelParams& model, const MatrixXd& windows,
                            const MatrixXd& targets);

}  // namespace mcdist
