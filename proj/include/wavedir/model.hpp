#pragma once

#include "wavedir/common.hpp"
#include "wavedir/datapipe.hpp"
#include "wavedir/rng.hpp"

#include <array>
#include <string>
#include <vector>

namespace wavedir {

/// Gate order used everywhere (weights, checkpoints, Adam slots).
enum GateKind { kGateInput = 0, kGateForget = 1, kGateCell = 2, kGateOutput = 3 };
inline constexpr int kNumGates = 4;

struct GateParams {
  Mat W;   // hidden x input_dim
  Mat U;   // hidden x hidden
  Vec b;   // hidden
  Mat dW;
  Mat dU;
  Vec db;
};

struct LstmLayerParams {
  std::array<GateParams, kNumGates> gates;

  Index input_dim() const { return gates[0].W.cols(); }
  Index hidden() const { return gates[0].W.rows(); }
};

struct DenseHead {
  Mat W;   // 2 x hidden
  Vec b;   // 2
  Mat dW;
  Vec db;
};

struct ModelConfig {
  int sequence_size = 10;  // n; the model consumes n-1 measurements
  int hidden = 20;
  int num_layers = 1;
  double learning_rate = 1e-3;
};

struct StackedLstm {
  ModelConfig config;
  std::vector<LstmLayerParams> layers;
  DenseHead head;
};

/// Uniform +-1/sqrt(fan_in) weights, zero biases except forget bias = 1.
StackedLstm make_lstm(const ModelConfig& cfg, SeededRng& rng,
                      int input_features = kFeatureCount);

void zero_grad(StackedLstm& model);

/// Single-step cache for backprop.
struct CellCache {
  Vec x, h_prev, c_prev;
  Vec i, f, g, o, c, tanh_c;
};

/// One LSTM cell step: i=sig(Wx+Uh+b), f=sig(.), o=sig(.), g=tanh(.),
/// c'=f.c+i.g, h'=o.tanh(c').
void cell_forward(const LstmLayerParams& p, const Vec& x, const Vec& h_prev,
                  const Vec& c_prev, Vec* h_out, Vec* c_out,
                  CellCache* cache = nullptr);

/// Batched per-step cache; matrices are batch x hidden.
struct StepCache {
  Mat h_prev, c_prev;
  Mat i, f, g, o, c, tanh_c, h;
};

struct ForwardCaches {
  std::vector<Mat> x0;                         // [t] batch x features
  std::vector<std::vector<StepCache>> steps;   // [layer][t]
  Mat head_input;                              // batch x hidden (top final h)
  bool valid = false;
};

/// Forward over a batch of sequences; x_steps[t] holds the t-th row of every
/// window. Returns batch x 2 raw linear predictions.
Mat sequence_forward_batch(const StackedLstm& model,
                           const std::vector<Mat>& x_steps,
                           ForwardCaches* caches = nullptr);

/// Single window (rows = n-1, cols = 26) convenience wrapper.
Vec2 sequence_forward(const StackedLstm& model, const Mat& window,
                      ForwardCaches* caches = nullptr);

/// Row i equals sequence_forward on window i.
Mat predict_batch(const StackedLstm& model, const WindowSet& windows);

/// Two tanh hidden layers over the flattened window, linear 2-output head.
struct Mlp {
  int input_dim = 0;
  int hidden = 0;
  Mat W1; Vec b1;
  Mat W2; Vec b2;
  Mat W3; Vec b3;
  Mat dW1; Vec db1;
  Mat dW2; Vec db2;
  Mat dW3; Vec db3;
};

Mlp make_mlp(int input_dim, int hidden, SeededRng& rng);
void zero_grad(Mlp& model);

struct MlpCache {
  Mat x;        // batch x input_dim
  Mat a1, a2;   // tanh outputs
  bool valid = false;
};

Mat mlp_forward_batch(const Mlp& m, const Mat& x, MlpCache* cache = nullptr);

/// Window flattened row-major (time-major) before the first dense layer.
Vec2 mlp_forward(const Mlp& m, const Mat& window);

Mat mlp_predict_batch(const Mlp& m, const WindowSet& windows);

Vec flatten_window(const Mat& window);

/// Flat view of every trainable tensor, in checkpoint order.
struct ParamRef {
  double* value;
  double* grad;
  Index size;
  std::string name;
};

std::vector<ParamRef> param_refs(StackedLstm& model);
std::vector<ParamRef> param_refs(Mlp& model);

Index param_count(StackedLstm& model);

}  // namespace wavedir
