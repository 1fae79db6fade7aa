#pragma once

#include "wavedir/common.hpp"
#include "wavedir/rng.hpp"

namespace wavedir {

/// Checked matrix product; throws DimensionError naming both shapes.
Mat matmul(const Mat& a, const Mat& b);

/// Elementwise logistic function, stable for |x| up to ~700.
Mat sigmoid(const Mat& x);

/// Elementwise hyperbolic tangent (scalar path, no SIMD divergence).
Mat tanh_elem(const Mat& x);

double sigmoid_scalar(double x);

/// Entries i.i.d. uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)].
Mat uniform_init(SeededRng& rng, Index rows, Index cols, Index fan_in);

}  // namespace wavedir
