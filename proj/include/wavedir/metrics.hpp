#pragma once

#include "wavedir/common.hpp"

#include <cstdint>
#include <vector>

namespace wavedir {

struct MetricReport {
  double mape_percent = 0.0;
  double angular_score_deg = 0.0;
  std::int64_t n_samples = 0;
  std::vector<double> diffs;  // per-sample normalized angular difference, rad
};

/// Denominator floor applied to |actual| so near-zero sine/cosine components
/// cannot blow the metric up.
inline constexpr double kMapeGuard = 1e-3;

/// Mean over all elements (both components pooled) of
/// |pred - actual| / max(|actual|, 1e-3), times 100.
double mape(const Mat& pred, const Mat& actual);

/// atan2(sin, cos) in (-pi, pi]; throws on the exact (0, 0) pair.
double to_angle(double sin_val, double cos_val);

/// wrap(a - b) into (-pi, pi].
double normalize_diff(double a, double b);

/// RMSE of normalized angular differences, in degrees.
double angular_score(const Mat& pred, const Mat& actual,
                     std::vector<double>* diffs = nullptr);

MetricReport evaluate_predictions(const Mat& pred, const Mat& actual);

/// Trailing circular moving average: per index, mean sin/cos over the window,
/// recombined via atan2. Warm-up indices average the available prefix.
std::vector<double> moving_average_direction(const std::vector<double>& angles,
                                             double window_seconds,
                                             double sample_rate);

/// wave = wrap(yaw - atan2(pred)) into [0, 2*pi).
double recover_wave_direction(double pred_sin, double pred_cos, double yaw);

/// Circular mean angle of a series; R_out receives the resultant length.
double circular_mean(const std::vector<double>& angles, double* R_out = nullptr);

/// Circular standard deviation sqrt(-2 ln R), radians.
double circular_std(const std::vector<double>& angles);

}  // namespace wavedir
