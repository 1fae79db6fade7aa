#pragma once

#include "wavedir/model.hpp"

#include <cstdint>
#include <vector>

namespace wavedir {

struct TrainConfig {
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  bool shuffle_each_epoch = true;
  double clip_norm = 0.0;  // 0 disables clipping
};

struct EpochStats {
  int epoch = 0;
  double train_mse = 0.0;
  double test_mse = -1.0;  // negative when no test set supplied
  double seconds = 0.0;
};

using LossReport = std::vector<EpochStats>;

/// Mean over all 2*count elements of squared error.
double mse_loss(const Mat& pred, const Mat& target);

/// Batch-averaged gradients of the MSE loss, accumulated into the model's
/// gradient buffers (buffers are zeroed first).
void backward(StackedLstm& model, const ForwardCaches& caches, const Mat& pred,
              const Mat& target);

void mlp_backward(Mlp& model, const MlpCache& cache, const Mat& pred,
                  const Mat& target);

/// Bias-corrected Adam (beta1=0.9, beta2=0.999, eps=1e-8). One moment pair
/// per tensor; t increments by exactly 1 per step.
class AdamState {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit AdamState(const std::vector<ParamRef>& refs);

  /// Applies one update. Throws StateError on non-finite gradients before
  /// touching any parameter.
  void step(const std::vector<ParamRef>& refs, double lr);

  std::int64_t t() const { return t_; }
  const std::vector<Vec>& m() const { return m_; }
  const std::vector<Vec>& v() const { return v_; }

 private:
  std::vector<Vec> m_, v_;
  std::int64_t t_ = 0;
};

LossReport train(StackedLstm& model, const WindowSet& train_windows,
                 const WindowSet* test_windows, const TrainConfig& cfg);

LossReport train_mlp(Mlp& model, const WindowSet& train_windows,
                     const WindowSet* test_windows, const TrainConfig& cfg);

/// Central finite differences vs analytic gradient over every parameter;
/// returns the max relative error, denominator max(|a|, |n|, 1e-6).
double gradient_check(StackedLstm& model, const Mat& window, const Vec2& target,
                      double delta);

}  // namespace wavedir
