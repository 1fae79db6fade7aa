#include "wavedir/training.hpp"

#include "wavedir/rng.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace wavedir {

double mse_loss(const Mat& pred, const Mat& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw DimensionError("mse_loss: shape mismatch");
  }
  if (pred.size() == 0) throw ArgumentError("mse_loss: empty input");
  return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

void backward(StackedLstm& model, const ForwardCaches& caches, const Mat& pred,
              const Mat& target) {
  if (!caches.valid) throw StateError("backward: missing or stale forward cache");
  if (pred.rows() != target.rows() || pred.cols() != 2 || target.cols() != 2) {
    throw DimensionError("backward: prediction/target shape mismatch");
  }
  const Index batch = pred.rows();
  const int num_layers = model.config.num_layers;
  const std::size_t steps = caches.steps.front().size();

  zero_grad(model);

  // dLoss/dPred for mean-over-elements MSE, already batch averaged
  const Mat dpred = (pred - target) / static_cast<double>(batch);

  model.head.dW = dpred.transpose() * caches.head_input;
  model.head.db = dpred.colwise().sum().transpose();
  const Mat d_top_final = dpred * model.head.W;

  // external gradient flowing into each h_t of the current layer
  std::vector<Mat> d_ext(steps, Mat::Zero(batch, model.config.hidden));
  d_ext[steps - 1] = d_top_final;

  for (int l = num_layers - 1; l >= 0; --l) {
    LstmLayerParams& p = model.layers[l];
    const Index hidden = p.hidden();
    std::vector<Mat> d_below;
    if (l > 0) d_below.assign(steps, Mat::Zero(batch, hidden));

    Mat dh_rec = Mat::Zero(batch, hidden);
    Mat dc_rec = Mat::Zero(batch, hidden);
    for (int t = static_cast<int>(steps) - 1; t >= 0; --t) {
      const StepCache& sc = caches.steps[l][t];
      const Mat& x = l == 0 ? caches.x0[t] : caches.steps[l - 1][t].h;

      const Mat dh = d_ext[t] + dh_rec;
      const Mat d_o = dh.cwiseProduct(sc.tanh_c);
      const Mat dc =
          dc_rec + dh.cwiseProduct(sc.o).cwiseProduct(
                       (1.0 - sc.tanh_c.array().square()).matrix());
      const Mat d_i = dc.cwiseProduct(sc.g);
      const Mat d_g = dc.cwiseProduct(sc.i);
      const Mat d_f = dc.cwiseProduct(sc.c_prev);
      dc_rec = dc.cwiseProduct(sc.f);

      const Mat da_i =
          d_i.cwiseProduct(sc.i).cwiseProduct((1.0 - sc.i.array()).matrix());
      const Mat da_f =
          d_f.cwiseProduct(sc.f).cwiseProduct((1.0 - sc.f.array()).matrix());
      const Mat da_g = d_g.cwiseProduct((1.0 - sc.g.array().square()).matrix());
      const Mat da_o =
          d_o.cwiseProduct(sc.o).cwiseProduct((1.0 - sc.o.array()).matrix());
      const Mat* das[kNumGates] = {&da_i, &da_f, &da_g, &da_o};

      dh_rec.setZero();
      for (int g = 0; g < kNumGates; ++g) {
        GateParams& gp = p.gates[g];
        gp.dW.noalias() += das[g]->transpose() * x;
        gp.dU.noalias() += das[g]->transpose() * sc.h_prev;
        gp.db.noalias() += das[g]->colwise().sum().transpose();
        dh_rec.noalias() += *das[g] * gp.U;
        if (l > 0) d_below[t].noalias() += *das[g] * gp.W;
      }
    }
    if (l > 0) d_ext = std::move(d_below);
  }
}

void mlp_backward(Mlp& m, const MlpCache& cache, const Mat& pred,
                  const Mat& target) {
  if (!cache.valid) throw StateError("mlp_backward: missing forward cache");
  const Index batch = pred.rows();
  zero_grad(m);
  const Mat dpred = (pred - target) / static_cast<double>(batch);
  m.dW3 = dpred.transpose() * cache.a2;
  m.db3 = dpred.colwise().sum().transpose();
  const Mat da2 =
      (dpred * m.W3).cwiseProduct((1.0 - cache.a2.array().square()).matrix());
  m.dW2 = da2.transpose() * cache.a1;
  m.db2 = da2.colwise().sum().transpose();
  const Mat da1 =
      (da2 * m.W2).cwiseProduct((1.0 - cache.a1.array().square()).matrix());
  m.dW1 = da1.transpose() * cache.x;
  m.db1 = da1.colwise().sum().transpose();
}

AdamState::AdamState(const std::vector<ParamRef>& refs) {
  m_.reserve(refs.size());
  v_.reserve(refs.size());
  for (const ParamRef& r : refs) {
    m_.push_back(Vec::Zero(r.size));
    v_.push_back(Vec::Zero(r.size));
  }
}

void AdamState::step(const std::vector<ParamRef>& refs, double lr) {
  for (std::size_t k = 0; k < refs.size(); ++k) {
    Eigen::Map<const Vec> g(refs[k].grad, refs[k].size);
    if (!g.array().isFinite().all()) {
      throw StateError("adam_step: non-finite gradient in tensor " +
                       refs[k].name + " at step " + std::to_string(t_ + 1));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < refs.size(); ++k) {
    Eigen::Map<Vec> theta(refs[k].value, refs[k].size);
    Eigen::Map<const Vec> g(refs[k].grad, refs[k].size);
    m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * g;
    v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * g.cwiseProduct(g);
    const Vec m_hat = m_[k] / bc1;
    const Vec v_hat = v_[k] / bc2;
    theta -= lr * (m_hat.array() / (v_hat.array().sqrt() + kEps)).matrix();
  }
}

namespace {

void clip_gradients(const std::vector<ParamRef>& refs, double clip_norm) {
  if (clip_norm <= 0.0) return;
  double sq = 0.0;
  for (const ParamRef& r : refs) {
    Eigen::Map<const Vec> g(r.grad, r.size);
    sq += g.squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (norm > clip_norm) {
    const double scale = clip_norm / norm;
    for (const ParamRef& r : refs) {
      Eigen::Map<Vec> g(r.grad, r.size);
      g *= scale;
    }
  }
}

// One optimization epoch over shuffled minibatches; step(idx, target_rows)
// must run forward+backward+update and return the batch loss.
template <typename StepFn>
double run_epoch(const WindowSet& train, const TrainConfig& cfg, SeededRng& rng,
                 std::vector<Index>& order, StepFn&& step) {
  const Index n = train.count();
  if (cfg.shuffle_each_epoch) {
    for (Index i = n - 1; i > 0; --i) {
      const Index j =
          static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
  }
  double loss_sum = 0.0;
  for (Index b = 0; b < n; b += cfg.batch_size) {
    const Index bs = std::min<Index>(cfg.batch_size, n - b);
    std::vector<Index> idx(order.begin() + b, order.begin() + b + bs);
    loss_sum += step(idx) * static_cast<double>(bs);
  }
  return loss_sum / static_cast<double>(n);
}

void validate_train_args(const WindowSet& train, const TrainConfig& cfg) {
  if (train.empty()) throw ArgumentError("train: empty training set");
  if (cfg.epochs < 1) throw ArgumentError("train: epochs must be >= 1");
  if (cfg.batch_size < 1) throw ArgumentError("train: batch_size must be >= 1");
}

}  // namespace

LossReport train(StackedLstm& model, const WindowSet& train_windows,
                 const WindowSet* test_windows, const TrainConfig& cfg) {
  validate_train_args(train_windows, cfg);
  auto refs = param_refs(model);
  AdamState adam(refs);
  SeededRng shuffle_rng = SeededRng(cfg.seed).fork("train-shuffle");
  std::vector<Index> order(train_windows.count());
  std::iota(order.begin(), order.end(), 0);

  const int steps = model.config.sequence_size - 1;
  ForwardCaches caches;
  LossReport report;

  auto step = [&](const std::vector<Index>& idx) {
    const Index bs = static_cast<Index>(idx.size());
    std::vector<Mat> x_steps(steps, Mat(bs, kFeatureCount));
    Mat target(bs, 2);
    for (Index k = 0; k < bs; ++k) {
      const Mat& w = train_windows.inputs[idx[k]];
      for (int t = 0; t < steps; ++t) x_steps[t].row(k) = w.row(t);
      target.row(k) = train_windows.targets.row(idx[k]);
    }
    const Mat pred = sequence_forward_batch(model, x_steps, &caches);
    const double loss = mse_loss(pred, target);
    backward(model, caches, pred, target);
    clip_gradients(refs, cfg.clip_norm);
    adam.step(refs, cfg.learning_rate);
    return loss;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats st;
    st.epoch = epoch;
    st.train_mse = run_epoch(train_windows, cfg, shuffle_rng, order, step);
    if (test_windows && !test_windows->empty()) {
      st.test_mse = mse_loss(predict_batch(model, *test_windows),
                             test_windows->targets);
    }
    st.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count();
    report.push_back(st);
  }
  return report;
}

LossReport train_mlp(Mlp& model, const WindowSet& train_windows,
                     const WindowSet* test_windows, const TrainConfig& cfg) {
  validate_train_args(train_windows, cfg);
  auto refs = param_refs(model);
  AdamState adam(refs);
  SeededRng shuffle_rng = SeededRng(cfg.seed).fork("train-shuffle");
  std::vector<Index> order(train_windows.count());
  std::iota(order.begin(), order.end(), 0);

  MlpCache cache;
  LossReport report;

  auto step = [&](const std::vector<Index>& idx) {
    const Index bs = static_cast<Index>(idx.size());
    Mat x(bs, model.input_dim);
    Mat target(bs, 2);
    for (Index k = 0; k < bs; ++k) {
      x.row(k) = flatten_window(train_windows.inputs[idx[k]]).transpose();
      target.row(k) = train_windows.targets.row(idx[k]);
    }
    const Mat pred = mlp_forward_batch(model, x, &cache);
    const double loss = mse_loss(pred, target);
    mlp_backward(model, cache, pred, target);
    clip_gradients(refs, cfg.clip_norm);
    adam.step(refs, cfg.learning_rate);
    return loss;
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochStats st;
    st.epoch = epoch;
    st.train_mse = run_epoch(train_windows, cfg, shuffle_rng, order, step);
    if (test_windows && !test_windows->empty()) {
      st.test_mse = mse_loss(mlp_predict_batch(model, *test_windows),
                             test_windows->targets);
    }
    st.seconds = std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - t0).count();
    report.push_back(st);
  }
  return report;
}

double gradient_check(StackedLstm& model, const Mat& window, const Vec2& target,
                      double delta) {
  Mat target_row(1, 2);
  target_row << target(0), target(1);

  ForwardCaches caches;
  const Vec2 pred = sequence_forward(model, window, &caches);
  Mat pred_row(1, 2);
  pred_row << pred(0), pred(1);
  backward(model, caches, pred_row, target_row);

  auto refs = param_refs(model);
  std::vector<Vec> analytic;
  analytic.reserve(refs.size());
  for (const ParamRef& r : refs) {
    analytic.emplace_back(Eigen::Map<const Vec>(r.grad, r.size));
  }

  auto loss_at = [&]() {
    const Vec2 p = sequence_forward(model, window);
    Mat pr(1, 2);
    pr << p(0), p(1);
    return mse_loss(pr, target_row);
  };

  double max_rel = 0.0;
  for (std::size_t k = 0; k < refs.size(); ++k) {
    for (Index j = 0; j < refs[k].size; ++j) {
      double& theta = refs[k].value[j];
      const double saved = theta;
      theta = saved + delta;
      const double lp = loss_at();
      theta = saved - delta;
      const double lm = loss_at();
      theta = saved;
      const double numeric = (lp - lm) / (2.0 * delta);
      const double a = analytic[k][j];
      // the 1e-6 floor keeps finite-difference round-off (~1e-11 at
      // delta=1e-5) from dominating near-zero gradients
      const double rel = std::abs(a - numeric) /
                         std::max({std::abs(a), std::abs(numeric), 1e-6});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace wavedir
