#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <string>

namespace wavedir {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Index = Eigen::Index;

inline constexpr int kFeatureCount = 26;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kGravity = 9.81;

/// Shape mismatch between operands.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid argument value (empty input, zero fan-in, bad fraction, ...).
struct ArgumentError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input file does not match the expected schema.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Data-level failure (unreadable file, corrupt payload, insufficient rows).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation called in the wrong state (missing cache, unfitted standardizer).
struct StateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wrap an angle into (-pi, pi].
inline double wrap_pi(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// Wrap an angle into [0, 2*pi).
inline double wrap_two_pi(double a) {
  double r = std::fmod(a, 2.0 * kPi);
  if (r < 0.0) r += 2.0 * kPi;
  if (r >= 2.0 * kPi) r = 0.0;
  return r;
}

inline double deg_to_rad(double d) { return d * kPi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / kPi; }

}  // namespace wavedir
