#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wavedir/training.hpp"

#include <cmath>

using namespace wavedir;

namespace {

Mat random_window(SeededRng& rng, int rows, int cols = kFeatureCount) {
  Mat w(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) w(r, c) = rng.uniform(-1.5, 1.5);
  }
  return w;
}

WindowSet synthetic_windows(SeededRng& rng, int count, int n) {
  WindowSet ws;
  ws.n = n;
  ws.targets.resize(count, 2);
  for (int i = 0; i < count; ++i) {
    ws.inputs.push_back(random_window(rng, n - 1));
    const double d = rng.uniform(-kPi, kPi);
    ws.targets.row(i) << std::sin(d), std::cos(d);
    ws.final_yaw.push_back(0.0);
    ws.transect_index.push_back(0);
    ws.start_row.push_back(i);
  }
  return ws;
}

// windows whose target is a simple function of the inputs, so a small model
// can overfit them
WindowSet learnable_windows(SeededRng& rng, int count, int n) {
  WindowSet ws;
  ws.n = n;
  ws.targets.resize(count, 2);
  for (int i = 0; i < count; ++i) {
    const double d = rng.uniform(-kPi, kPi);
    Mat w(n - 1, kFeatureCount);
    for (int r = 0; r < n - 1; ++r) {
      for (int c = 0; c < kFeatureCount; ++c) {
        w(r, c) = 0.1 * rng.gaussian();
      }
      w(r, 13) = std::sin(d) + 0.01 * rng.gaussian();
      w(r, 14) = std::cos(d) + 0.01 * rng.gaussian();
    }
    ws.inputs.push_back(w);
    ws.targets.row(i) << std::sin(d), std::cos(d);
    ws.final_yaw.push_back(d);
    ws.transect_index.push_back(0);
    ws.start_row.push_back(i);
  }
  return ws;
}

std::vector<Vec> grad_snapshot(StackedLstm& model) {
  std::vector<Vec> out;
  for (const ParamRef& r : param_refs(model)) {
    out.emplace_back(Eigen::Map<const Vec>(r.grad, r.size));
  }
  return out;
}

}  // namespace

TEST_CASE("mse_loss: identity, hand value, homogeneity") {
  Mat a(1, 2), b(1, 2);
  a << 1, 0;
  b << 0, 1;
  CHECK(mse_loss(a, a) == 0.0);
  CHECK(mse_loss(a, b) == 1.0);  // (1 + 1) / 2

  Mat p(3, 2), t(3, 2);
  SeededRng rng(3);
  for (int i = 0; i < 3; ++i) {
    p.row(i) << rng.uniform(), rng.uniform();
    t.row(i) << rng.uniform(), rng.uniform();
  }
  const double base = mse_loss(p, t);
  const Mat p2 = t + 2.0 * (p - t);
  CHECK(mse_loss(p2, t) == doctest::Approx(4.0 * base).epsilon(1e-12));

  Mat empty(0, 2);
  CHECK_THROWS_AS(mse_loss(empty, empty), ArgumentError);
}

TEST_CASE("backward: stationary point and residual linearity") {
  SeededRng rng(7);
  ModelConfig cfg{4, 3, 2, 1e-3};
  StackedLstm model = make_lstm(cfg, rng);
  const Mat w = random_window(rng, 3);

  ForwardCaches caches;
  const Vec2 pred = sequence_forward(model, w, &caches);
  Mat pred_row(1, 2), target(1, 2);
  pred_row << pred(0), pred(1);

  // pred == target -> every gradient zero
  backward(model, caches, pred_row, pred_row);
  for (const ParamRef& r : param_refs(model)) {
    CHECK(Eigen::Map<const Vec>(r.grad, r.size).cwiseAbs().maxCoeff() == 0.0);
  }

  // doubling the residual doubles the head-bias gradient
  target << pred(0) + 0.2, pred(1) - 0.4;
  backward(model, caches, pred_row, target);
  const Vec db1 = model.head.db;
  Mat target2(1, 2);
  target2 << pred(0) + 0.4, pred(1) - 0.8;
  backward(model, caches, pred_row, target2);
  CHECK((model.head.db - 2.0 * db1).cwiseAbs().maxCoeff() < 1e-15);

  ForwardCaches stale;
  CHECK_THROWS_AS(backward(model, stale, pred_row, target), StateError);
}

TEST_CASE("gradient_check: full model, linear case, corruption sentinel") {
  SeededRng rng(11);
  ModelConfig cfg{4, 3, 2, 1e-3};
  StackedLstm model = make_lstm(cfg, rng);
  const Mat w = random_window(rng, 3);
  const Vec2 target(0.4, -0.9);
  CHECK(gradient_check(model, w, target, 1e-5) < 1e-4);

  // corrupted analytic gradient must be detected: emulate by checking that
  // the margin is not absurdly loose
  ForwardCaches caches;
  const Vec2 pred = sequence_forward(model, w, &caches);
  Mat pred_row(1, 2), target_row(1, 2);
  pred_row << pred(0), pred(1);
  target_row << target(0), target(1);
  backward(model, caches, pred_row, target_row);
  auto refs = param_refs(model);
  // find a parameter with a meaningful gradient and corrupt the weight; the
  // re-run check computes fresh analytic gradients, so instead corrupt via a
  // tiny bespoke comparison: numeric vs 1.01 * analytic on the head weight
  const Index size = refs.back().size;  // head bias
  (void)size;
  double max_rel = 0.0;
  for (Index j = 0; j < model.head.dW.size(); ++j) {
    const double a = model.head.dW.data()[j] * 1.01;  // corrupted
    double& theta = model.head.W.data()[j];
    const double saved = theta;
    const double delta = 1e-5;
    auto loss_at = [&]() {
      const Vec2 p = sequence_forward(model, w);
      Mat pr(1, 2);
      pr << p(0), p(1);
      return mse_loss(pr, target_row);
    };
    theta = saved + delta;
    const double lp = loss_at();
    theta = saved - delta;
    const double lm = loss_at();
    theta = saved;
    const double numeric = (lp - lm) / (2 * delta);
    max_rel = std::max(max_rel, std::abs(a - numeric) /
                                    std::max({std::abs(a), std::abs(numeric), 1e-10}));
  }
  CHECK(max_rel > 1e-4);  // the 1% corruption is visible
}

TEST_CASE("adam: zero gradient, first-step magnitude, scale invariance") {
  SeededRng rng(13);
  ModelConfig cfg{3, 2, 1, 1e-3};
  StackedLstm model = make_lstm(cfg, rng);
  auto refs = param_refs(model);
  AdamState adam(refs);

  std::vector<Vec> before;
  for (const ParamRef& r : refs) {
    before.emplace_back(Eigen::Map<const Vec>(r.value, r.size));
  }
  zero_grad(model);
  adam.step(refs, 0.01);
  CHECK(adam.t() == 1);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    CHECK((Eigen::Map<const Vec>(refs[k].value, refs[k].size) - before[k])
              .cwiseAbs().maxCoeff() == 0.0);
  }

  // first step with constant gradient: update magnitude ~= lr
  zero_grad(model);
  Eigen::Map<Vec>(refs[0].grad, refs[0].size).setConstant(0.37);
  std::vector<Vec> pre;
  for (const ParamRef& r : refs) {
    pre.emplace_back(Eigen::Map<const Vec>(r.value, r.size));
  }
  AdamState fresh(refs);
  fresh.step(refs, 0.01);
  const Vec delta0 =
      Eigen::Map<const Vec>(refs[0].value, refs[0].size) - pre[0];
  CHECK(delta0.cwiseAbs().maxCoeff() == doctest::Approx(0.01).epsilon(1e-4));

  // gradients g and 10g produce equal first-step magnitudes
  zero_grad(model);
  Eigen::Map<Vec>(refs[0].grad, refs[0].size).setConstant(0.05);
  Eigen::Map<Vec>(refs[1].grad, refs[1].size).setConstant(0.5);
  std::vector<Vec> pre2;
  for (const ParamRef& r : refs) {
    pre2.emplace_back(Eigen::Map<const Vec>(r.value, r.size));
  }
  AdamState fresh2(refs);
  fresh2.step(refs, 0.01);
  const double d0 = (Eigen::Map<const Vec>(refs[0].value, refs[0].size) - pre2[0])
                        .cwiseAbs().maxCoeff();
  const double d1 = (Eigen::Map<const Vec>(refs[1].value, refs[1].size) - pre2[1])
                        .cwiseAbs().maxCoeff();
  // the eps term inside Adam breaks exact invariance at ~1e-7 relative
  CHECK(d0 == doctest::Approx(d1).epsilon(1e-6));

  // non-finite gradient aborts before touching parameters
  zero_grad(model);
  refs[2].grad[0] = std::nan("");
  std::vector<Vec> pre3;
  for (const ParamRef& r : refs) {
    pre3.emplace_back(Eigen::Map<const Vec>(r.value, r.size));
  }
  AdamState fresh3(refs);
  CHECK_THROWS_AS(fresh3.step(refs, 0.01), StateError);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    CHECK((Eigen::Map<const Vec>(refs[k].value, refs[k].size) - pre3[k])
              .cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("batch invariance of the averaged gradient") {
  SeededRng rng(17);
  ModelConfig cfg{5, 4, 1, 1e-3};
  StackedLstm model = make_lstm(cfg, rng);
  const int k = 8;
  WindowSet ws = synthetic_windows(rng, 2 * k, 5);

  auto averaged_grad = [&](int from, int count) {
    std::vector<Mat> x_steps(4, Mat(count, kFeatureCount));
    Mat target(count, 2);
    for (int i = 0; i < count; ++i) {
      for (int t = 0; t < 4; ++t) x_steps[t].row(i) = ws.inputs[from + i].row(t);
      target.row(i) = ws.targets.row(from + i);
    }
    ForwardCaches caches;
    const Mat pred = sequence_forward_batch(model, x_steps, &caches);
    backward(model, caches, pred, target);
    return grad_snapshot(model);
  };

  const auto full = averaged_grad(0, 2 * k);
  const auto left = averaged_grad(0, k);
  const auto right = averaged_grad(k, k);
  for (std::size_t i = 0; i < full.size(); ++i) {
    const Vec mean = 0.5 * (left[i] + right[i]);
    CHECK((full[i] - mean).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("train: minimal loop, determinism, argument validation") {
  SeededRng rng(19);
  WindowSet ws = synthetic_windows(rng, 6, 4);
  ModelConfig cfg{4, 3, 1, 1e-3};
  TrainConfig tc;
  tc.epochs = 1;
  tc.batch_size = 6;
  tc.seed = 5;

  SeededRng m1(23), m2(23);
  StackedLstm a = make_lstm(cfg, m1);
  StackedLstm b = make_lstm(cfg, m2);
  const LossReport ra = train(a, ws, nullptr, tc);
  CHECK(ra.size() == 1);

  tc.epochs = 3;
  StackedLstm c = make_lstm(cfg, m1);
  SeededRng m3(23);
  // identical seeds and data -> bitwise identical loss reports and params
  SeededRng ma(99), mb(99);
  StackedLstm d1 = make_lstm(cfg, ma);
  StackedLstm d2 = make_lstm(cfg, mb);
  const LossReport r1 = train(d1, ws, nullptr, tc);
  const LossReport r2 = train(d2, ws, nullptr, tc);
  for (std::size_t e = 0; e < r1.size(); ++e) {
    CHECK(r1[e].train_mse == r2[e].train_mse);
  }
  auto p1 = param_refs(d1);
  auto p2 = param_refs(d2);
  for (std::size_t k = 0; k < p1.size(); ++k) {
    CHECK(Eigen::Map<Vec>(p1[k].value, p1[k].size) ==
          Eigen::Map<Vec>(p2[k].value, p2[k].size));
  }

  WindowSet empty;
  empty.targets.resize(0, 2);
  TrainConfig bad;
  CHECK_THROWS_AS(train(b, empty, nullptr, bad), ArgumentError);
  bad.epochs = 0;
  CHECK_THROWS_AS(train(b, ws, nullptr, bad), ArgumentError);
}

TEST_CASE("train: overfits a learnable synthetic task") {
  SeededRng rng(29);
  WindowSet ws = learnable_windows(rng, 50, 10);
  ModelConfig cfg{10, 20, 1, 1e-3};
  TrainConfig tc;
  tc.epochs = 120;
  tc.learning_rate = 1e-3;
  tc.seed = 7;
  SeededRng mr(31);
  StackedLstm model = make_lstm(cfg, mr);
  const LossReport rep = train(model, ws, nullptr, tc);
  CHECK(rep.back().train_mse < 1e-2);
  CHECK(rep.back().train_mse <= rep.front().train_mse);
}

TEST_CASE("gradient correctness property over random small models") {
  SeededRng rng(37);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig cfg;
    cfg.sequence_size = 2 + static_cast<int>(rng.next_u64() % 3);
    cfg.hidden = 1 + static_cast<int>(rng.next_u64() % 3);
    cfg.num_layers = 1 + static_cast<int>(rng.next_u64() % 2);
    StackedLstm model = make_lstm(cfg, rng);
    const Mat w = random_window(rng, cfg.sequence_size - 1);
    const Vec2 target(rng.uniform(-1, 1), rng.uniform(-1, 1));
    CHECK(gradient_check(model, w, target, 1e-5) < 1e-4);
  }
}
