#include "wavedir/numerics.hpp"

#include <cmath>
#include <string>

namespace wavedir {

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: incompatible shapes (" +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         ") * (" + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
  return a * b;
}

double sigmoid_scalar(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mat sigmoid(const Mat& x) {
  return x.unaryExpr([](double v) { return sigmoid_scalar(v); });
}

Mat tanh_elem(const Mat& x) {
  return x.unaryExpr([](double v) { return std::tanh(v); });
}

double SeededRng::gaussian(double mean, double stddev) {
  const double u1 = 1.0 - uniform();  // in (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(2.0 * kPi * u2);
}

Mat uniform_init(SeededRng& rng, Index rows, Index cols, Index fan_in) {
  if (fan_in < 1) {
    throw ArgumentError("uniform_init: fan_in must be >= 1");
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
  return m;
}

}  // namespace wavedir
