#include "wavedir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wavedir {

double mape(const Mat& pred, const Mat& actual) {
  if (pred.rows() != actual.rows() || pred.cols() != actual.cols()) {
    throw DimensionError("mape: shape mismatch");
  }
  if (pred.size() == 0) throw ArgumentError("mape: empty input");
  double sum = 0.0;
  for (Index r = 0; r < pred.rows(); ++r) {
    for (Index c = 0; c < pred.cols(); ++c) {
      const double denom = std::max(std::abs(actual(r, c)), kMapeGuard);
      sum += std::abs(pred(r, c) - actual(r, c)) / denom;
    }
  }
  return 100.0 * sum / static_cast<double>(pred.size());
}

double to_angle(double sin_val, double cos_val) {
  if (sin_val == 0.0 && cos_val == 0.0) {
    throw ArgumentError("to_angle: undefined angle for (0, 0)");
  }
  return std::atan2(sin_val, cos_val);
}

double normalize_diff(double a, double b) { return wrap_pi(a - b); }

double angular_score(const Mat& pred, const Mat& actual,
                     std::vector<double>* diffs) {
  if (pred.rows() != actual.rows() || pred.cols() != 2 || actual.cols() != 2) {
    throw DimensionError("angular_score: shape mismatch");
  }
  if (pred.rows() == 0) throw ArgumentError("angular_score: empty input");
  double sumsq = 0.0;
  if (diffs) diffs->clear();
  for (Index r = 0; r < pred.rows(); ++r) {
    if (pred(r, 0) == 0.0 && pred(r, 1) == 0.0) {
      throw ArgumentError("angular_score: undefined angle at row " +
                          std::to_string(r));
    }
    const double pa = to_angle(pred(r, 0), pred(r, 1));
    const double aa = to_angle(actual(r, 0), actual(r, 1));
    const double d = normalize_diff(pa, aa);
    if (diffs) diffs->push_back(d);
    sumsq += d * d;
  }
  return rad_to_deg(std::sqrt(sumsq / static_cast<double>(pred.rows())));
}

MetricReport evaluate_predictions(const Mat& pred, const Mat& actual) {
  MetricReport rep;
  rep.mape_percent = mape(pred, actual);
  rep.angular_score_deg = angular_score(pred, actual, &rep.diffs);
  rep.n_samples = pred.rows();
  return rep;
}

std::vector<double> moving_average_direction(const std::vector<double>& angles,
                                             double window_seconds,
                                             double sample_rate) {
  std::vector<double> out;
  if (angles.empty()) return out;
  const auto window = static_cast<std::size_t>(
      std::max(1.0, std::round(window_seconds * sample_rate)));
  out.reserve(angles.size());
  double sin_sum = 0.0, cos_sum = 0.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    sin_sum += std::sin(angles[i]);
    cos_sum += std::cos(angles[i]);
    if (i >= window) {
      sin_sum -= std::sin(angles[i - window]);
      cos_sum -= std::cos(angles[i - window]);
    }
    out.push_back(std::atan2(sin_sum, cos_sum));
  }
  return out;
}

double recover_wave_direction(double pred_sin, double pred_cos, double yaw) {
  return wrap_two_pi(yaw - to_angle(pred_sin, pred_cos));
}

double circular_mean(const std::vector<double>& angles, double* R_out) {
  if (angles.empty()) throw ArgumentError("circular_mean: empty series");
  double s = 0.0, c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  s /= static_cast<double>(angles.size());
  c /= static_cast<double>(angles.size());
  if (R_out) *R_out = std::hypot(s, c);
  return std::atan2(s, c);
}

double circular_std(const std::vector<double>& angles) {
  double R = 0.0;
  circular_mean(angles, &R);
  R = std::min(1.0, std::max(R, 1e-300));
  return std::sqrt(-2.0 * std::log(R));
}

}  // namespace wavedir
