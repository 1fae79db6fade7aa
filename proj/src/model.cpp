#include "wavedir/model.hpp"

#include "wavedir/numerics.hpp"

#include <cmath>

namespace wavedir {

namespace {

GateParams make_gate(SeededRng& rng, Index hidden, Index input_dim,
                     double bias_init) {
  GateParams g;
  g.W = uniform_init(rng, hidden, input_dim, input_dim);
  g.U = uniform_init(rng, hidden, hidden, hidden);
  g.b = Vec::Constant(hidden, bias_init);
  g.dW = Mat::Zero(hidden, input_dim);
  g.dU = Mat::Zero(hidden, hidden);
  g.db = Vec::Zero(hidden);
  return g;
}

}  // namespace

StackedLstm make_lstm(const ModelConfig& cfg, SeededRng& rng, int input_features) {
  if (cfg.sequence_size < 2 || cfg.hidden < 1 || cfg.num_layers < 1) {
    throw ArgumentError("make_lstm: invalid config");
  }
  StackedLstm model;
  model.config = cfg;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const Index in = l == 0 ? input_features : cfg.hidden;
    LstmLayerParams layer;
    for (int g = 0; g < kNumGates; ++g) {
      const double bias = g == kGateForget ? 1.0 : 0.0;
      layer.gates[g] = make_gate(rng, cfg.hidden, in, bias);
    }
    model.layers.push_back(std::move(layer));
  }
  model.head.W = uniform_init(rng, 2, cfg.hidden, cfg.hidden);
  model.head.b = Vec::Zero(2);
  model.head.dW = Mat::Zero(2, cfg.hidden);
  model.head.db = Vec::Zero(2);
  return model;
}

void zero_grad(StackedLstm& model) {
  for (auto& layer : model.layers) {
    for (auto& g : layer.gates) {
      g.dW.setZero();
      g.dU.setZero();
      g.db.setZero();
    }
  }
  model.head.dW.setZero();
  model.head.db.setZero();
}

void cell_forward(const LstmLayerParams& p, const Vec& x, const Vec& h_prev,
                  const Vec& c_prev, Vec* h_out, Vec* c_out, CellCache* cache) {
  const Index hidden = p.hidden();
  if (x.size() != p.input_dim() || h_prev.size() != hidden ||
      c_prev.size() != hidden) {
    throw DimensionError("cell_forward: input/state shapes inconsistent with layer");
  }
  auto pre = [&](int g) -> Vec {
    return p.gates[g].W * x + p.gates[g].U * h_prev + p.gates[g].b;
  };
  const Vec i = sigmoid(pre(kGateInput));
  const Vec f = sigmoid(pre(kGateForget));
  const Vec g = tanh_elem(pre(kGateCell));
  const Vec o = sigmoid(pre(kGateOutput));
  const Vec c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  const Vec tc = tanh_elem(c);
  *c_out = c;
  *h_out = o.cwiseProduct(tc);
  if (cache) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->i = i;
    cache->f = f;
    cache->g = g;
    cache->o = o;
    cache->c = c;
    cache->tanh_c = tc;
  }
}

Mat sequence_forward_batch(const StackedLstm& model,
                           const std::vector<Mat>& x_steps,
                           ForwardCaches* caches) {
  const int expected_steps = model.config.sequence_size - 1;
  if (static_cast<int>(x_steps.size()) != expected_steps) {
    throw DimensionError("sequence_forward: expected " +
                         std::to_string(expected_steps) + " time steps, got " +
                         std::to_string(x_steps.size()));
  }
  const Index batch = x_steps.front().rows();
  const Index hidden = model.config.hidden;
  const int num_layers = model.config.num_layers;

  if (caches) {
    caches->x0 = x_steps;
    caches->steps.assign(num_layers, {});
    caches->valid = false;
  }

  std::vector<Mat> below = x_steps;  // inputs to the current layer, per step
  for (int l = 0; l < num_layers; ++l) {
    const LstmLayerParams& p = model.layers[l];
    if (below.front().cols() != p.input_dim()) {
      throw DimensionError("sequence_forward: layer input width mismatch");
    }
    Mat h = Mat::Zero(batch, hidden);
    Mat c = Mat::Zero(batch, hidden);
    std::vector<Mat> outputs;
    outputs.reserve(below.size());
    for (std::size_t t = 0; t < below.size(); ++t) {
      const Mat& x = below[t];
      const Mat pre_i = x * p.gates[kGateInput].W.transpose() +
                        h * p.gates[kGateInput].U.transpose();
      const Mat pre_f = x * p.gates[kGateForget].W.transpose() +
                        h * p.gates[kGateForget].U.transpose();
      const Mat pre_g = x * p.gates[kGateCell].W.transpose() +
                        h * p.gates[kGateCell].U.transpose();
      const Mat pre_o = x * p.gates[kGateOutput].W.transpose() +
                        h * p.gates[kGateOutput].U.transpose();
      StepCache sc;
      sc.h_prev = h;
      sc.c_prev = c;
      sc.i = sigmoid(pre_i.rowwise() + p.gates[kGateInput].b.transpose());
      sc.f = sigmoid(pre_f.rowwise() + p.gates[kGateForget].b.transpose());
      sc.g = tanh_elem(pre_g.rowwise() + p.gates[kGateCell].b.transpose());
      sc.o = sigmoid(pre_o.rowwise() + p.gates[kGateOutput].b.transpose());
      sc.c = sc.f.cwiseProduct(c) + sc.i.cwiseProduct(sc.g);
      sc.tanh_c = tanh_elem(sc.c);
      sc.h = sc.o.cwiseProduct(sc.tanh_c);
      h = sc.h;
      c = sc.c;
      outputs.push_back(sc.h);
      if (caches) caches->steps[l].push_back(std::move(sc));
    }
    below = std::move(outputs);
  }

  const Mat& top_final = below.back();
  Mat pred = top_final * model.head.W.transpose();
  pred.rowwise() += model.head.b.transpose();
  if (caches) {
    caches->head_input = top_final;
    caches->valid = true;
  }
  return pred;
}

Vec2 sequence_forward(const StackedLstm& model, const Mat& window,
                      ForwardCaches* caches) {
  if (window.cols() != model.layers.front().input_dim()) {
    throw DimensionError("sequence_forward: window feature width mismatch");
  }
  std::vector<Mat> steps;
  steps.reserve(window.rows());
  for (Index t = 0; t < window.rows(); ++t) {
    steps.push_back(window.row(t));
  }
  const Mat pred = sequence_forward_batch(model, steps, caches);
  return Vec2(pred(0, 0), pred(0, 1));
}

Mat predict_batch(const StackedLstm& model, const WindowSet& windows) {
  Mat out(windows.count(), 2);
  for (Index i = 0; i < windows.count(); ++i) {
    out.row(i) = sequence_forward(model, windows.inputs[i]).transpose();
  }
  return out;
}

Mlp make_mlp(int input_dim, int hidden, SeededRng& rng) {
  if (input_dim < 1 || hidden < 1) throw ArgumentError("make_mlp: invalid config");
  Mlp m;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.W1 = uniform_init(rng, hidden, input_dim, input_dim);
  m.b1 = Vec::Zero(hidden);
  m.W2 = uniform_init(rng, hidden, hidden, hidden);
  m.b2 = Vec::Zero(hidden);
  m.W3 = uniform_init(rng, 2, hidden, hidden);
  m.b3 = Vec::Zero(2);
  m.dW1 = Mat::Zero(hidden, input_dim);
  m.db1 = Vec::Zero(hidden);
  m.dW2 = Mat::Zero(hidden, hidden);
  m.db2 = Vec::Zero(hidden);
  m.dW3 = Mat::Zero(2, hidden);
  m.db3 = Vec::Zero(2);
  return m;
}

void zero_grad(Mlp& m) {
  m.dW1.setZero(); m.db1.setZero();
  m.dW2.setZero(); m.db2.setZero();
  m.dW3.setZero(); m.db3.setZero();
}

Mat mlp_forward_batch(const Mlp& m, const Mat& x, MlpCache* cache) {
  if (x.cols() != m.input_dim) {
    throw DimensionError("mlp_forward: expected input width " +
                         std::to_string(m.input_dim) + ", got " +
                         std::to_string(x.cols()));
  }
  Mat a1 = tanh_elem((x * m.W1.transpose()).rowwise() + m.b1.transpose());
  Mat a2 = tanh_elem((a1 * m.W2.transpose()).rowwise() + m.b2.transpose());
  Mat pred = (a2 * m.W3.transpose()).rowwise() + m.b3.transpose();
  if (cache) {
    cache->x = x;
    cache->a1 = std::move(a1);
    cache->a2 = std::move(a2);
    cache->valid = true;
  }
  return pred;
}

Vec flatten_window(const Mat& window) {
  Vec out(window.size());
  Index k = 0;
  for (Index r = 0; r < window.rows(); ++r) {
    for (Index c = 0; c < window.cols(); ++c) {
      out[k++] = window(r, c);
    }
  }
  return out;
}

Vec2 mlp_forward(const Mlp& m, const Mat& window) {
  const Mat pred = mlp_forward_batch(m, flatten_window(window).transpose());
  return Vec2(pred(0, 0), pred(0, 1));
}

Mat mlp_predict_batch(const Mlp& m, const WindowSet& windows) {
  Mat out(windows.count(), 2);
  for (Index i = 0; i < windows.count(); ++i) {
    out.row(i) = mlp_forward(m, windows.inputs[i]).transpose();
  }
  return out;
}

namespace {

void push_ref(std::vector<ParamRef>& refs, Mat& value, Mat& grad,
              const std::string& name) {
  refs.push_back({value.data(), grad.data(), value.size(), name});
}

void push_ref(std::vector<ParamRef>& refs, Vec& value, Vec& grad,
              const std::string& name) {
  refs.push_back({value.data(), grad.data(), value.size(), name});
}

}  // namespace

std::vector<ParamRef> param_refs(StackedLstm& model) {
  static const char* gate_names[] = {"input", "forget", "cell", "output"};
  std::vector<ParamRef> refs;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    for (int g = 0; g < kNumGates; ++g) {
      GateParams& gp = model.layers[l].gates[g];
      const std::string base =
          "layer" + std::to_string(l) + "." + gate_names[g];
      push_ref(refs, gp.W, gp.dW, base + ".W");
      push_ref(refs, gp.U, gp.dU, base + ".U");
      push_ref(refs, gp.b, gp.db, base + ".b");
    }
  }
  push_ref(refs, model.head.W, model.head.dW, "head.W");
  push_ref(refs, model.head.b, model.head.db, "head.b");
  return refs;
}

std::vector<ParamRef> param_refs(Mlp& m) {
  std::vector<ParamRef> refs;
  push_ref(refs, m.W1, m.dW1, "mlp.W1");
  push_ref(refs, m.b1, m.db1, "mlp.b1");
  push_ref(refs, m.W2, m.dW2, "mlp.W2");
  push_ref(refs, m.b2, m.db2, "mlp.b2");
  push_ref(refs, m.W3, m.dW3, "mlp.W3");
  push_ref(refs, m.b3, m.db3, "mlp.b3");
  return refs;
}

Index param_count(StackedLstm& model) {
  Index total = 0;
  for (const ParamRef& r : param_refs(model)) total += r.size;
  return total;
}

}  // namespace wavedir
