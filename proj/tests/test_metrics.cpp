#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "wavedir/metrics.hpp"
#include "wavedir/rng.hpp"

#include <cmath>
#include <vector>

using namespace wavedir;

namespace {

// independent brute-force references, written against the documented
// formulas rather than the library code

double mape_reference(const Mat& pred, const Mat& actual) {
  double sum = 0.0;
  for (Index r = 0; r < pred.rows(); ++r) {
    for (Index c = 0; c < pred.cols(); ++c) {
      const double denom = std::max(std::abs(actual(r, c)), 1e-3);
      sum += std::abs(pred(r, c) - actual(r, c)) / denom;
    }
  }
  return 100.0 * sum / static_cast<double>(pred.size());
}

double wrap_reference(double x) {
  while (x <= -kPi) x += 2 * kPi;
  while (x > kPi) x -= 2 * kPi;
  return x;
}

double angular_reference(const Mat& pred, const Mat& actual) {
  double sumsq = 0.0;
  for (Index r = 0; r < pred.rows(); ++r) {
    const double pa = std::atan2(pred(r, 0), pred(r, 1));
    const double aa = std::atan2(actual(r, 0), actual(r, 1));
    const double d = wrap_reference(pa - aa);
    sumsq += d * d;
  }
  return std::sqrt(sumsq / pred.rows()) * 180.0 / kPi;
}

std::vector<double> moving_avg_reference(const std::vector<double>& angles,
                                         int window) {
  std::vector<double> out(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const std::size_t from = i + 1 >= static_cast<std::size_t>(window)
                                 ? i + 1 - window
                                 : 0;
    double s = 0, c = 0;
    for (std::size_t j = from; j <= i; ++j) {
      s += std::sin(angles[j]);
      c += std::cos(angles[j]);
    }
    out[i] = std::atan2(s, c);
  }
  return out;
}

Mat random_unit_rows(SeededRng& rng, int n) {
  Mat m(n, 2);
  for (int i = 0; i < n; ++i) {
    const double a = rng.uniform(-kPi, kPi);
    m.row(i) << std::sin(a), std::cos(a);
  }
  return m;
}

}  // namespace

TEST_CASE("mape: hand values, guard, oracle") {
  Mat p(1, 2), a(1, 2);
  p << 1.1, 0.9;
  a << 1.0, 1.0;
  // |0.1|/1 + |0.1|/1 over 2 elements = 0.1 -> 10%
  CHECK(mape(p, a) == doctest::Approx(10.0).epsilon(1e-12));

  // tiny denominator hits the 1e-3 floor instead of exploding
  Mat p2(1, 2), a2(1, 2);
  p2 << 1e-4, 1.0;
  a2 << 0.0, 1.0;
  CHECK(mape(p2, a2) == doctest::Approx(100.0 * 0.5 * (1e-4 / 1e-3)).epsilon(1e-12));

  SeededRng rng(5);
  Mat pr(40, 2), ar(40, 2);
  for (int i = 0; i < 40; ++i) {
    pr.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
    ar.row(i) << rng.uniform(-1, 1), rng.uniform(-1, 1);
  }
  CHECK(mape(pr, ar) == doctest::Approx(mape_reference(pr, ar)).epsilon(1e-12));

  Mat bad(2, 2);
  CHECK_THROWS_AS(mape(bad, Mat::Zero(3, 2)), DimensionError);
}

TEST_CASE("to_angle and normalize_diff") {
  CHECK(to_angle(0.0, 1.0) == 0.0);
  CHECK(to_angle(1.0, 0.0) == doctest::Approx(kPi / 2).epsilon(1e-15));
  CHECK(to_angle(0.0, -1.0) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK_THROWS_AS(to_angle(0.0, 0.0), ArgumentError);

  // 10 deg vs 350 deg differ by 20 deg, not 340
  const double a10 = deg_to_rad(10.0);
  const double a350 = deg_to_rad(350.0);
  CHECK(rad_to_deg(normalize_diff(a10, a350)) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(rad_to_deg(normalize_diff(a350, a10)) == doctest::Approx(-20.0).epsilon(1e-12));

  // antisymmetry away from the pi cut
  SeededRng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-3.0, 3.0);
    const double b = rng.uniform(-3.0, 3.0);
    const double d = normalize_diff(a, b);
    CHECK(d > -kPi);
    CHECK(d <= kPi);
    if (std::abs(std::abs(a - b) - kPi) > 1e-9) {
      CHECK(normalize_diff(b, a) == doctest::Approx(-d).epsilon(1e-12));
    }
  }
}

TEST_CASE("angular_score: zero, hand value, rotation invariance, oracle") {
  SeededRng rng(13);
  const Mat same = random_unit_rows(rng, 30);
  CHECK(angular_score(same, same) == 0.0);

  // single pair 20 deg apart -> score exactly 20
  Mat p(1, 2), a(1, 2);
  p << std::sin(deg_to_rad(10)), std::cos(deg_to_rad(10));
  a << std::sin(deg_to_rad(350)), std::cos(deg_to_rad(350));
  CHECK(angular_score(p, a) == doctest::Approx(20.0).epsilon(1e-10));

  // rotating both series by a common offset leaves the score unchanged
  Mat pr = random_unit_rows(rng, 50);
  Mat ar = random_unit_rows(rng, 50);
  const double base = angular_score(pr, ar);
  CHECK(base == doctest::Approx(angular_reference(pr, ar)).epsilon(1e-10));
  const double rot = 0.7;
  Mat pr2(50, 2), ar2(50, 2);
  for (int i = 0; i < 50; ++i) {
    const double pa = std::atan2(pr(i, 0), pr(i, 1)) + rot;
    const double aa = std::atan2(ar(i, 0), ar(i, 1)) + rot;
    pr2.row(i) << std::sin(pa), std::cos(pa);
    ar2.row(i) << std::sin(aa), std::cos(aa);
  }
  CHECK(angular_score(pr2, ar2) == doctest::Approx(base).epsilon(1e-9));

  // magnitude does not matter, only direction
  CHECK(angular_score(3.0 * pr, ar) == doctest::Approx(base).epsilon(1e-10));

  std::vector<double> diffs;
  angular_score(pr, ar, &diffs);
  CHECK(diffs.size() == 50);
}

TEST_CASE("evaluate_predictions bundles both metrics") {
  SeededRng rng(17);
  const Mat pr = random_unit_rows(rng, 25);
  const Mat ar = random_unit_rows(rng, 25);
  const MetricReport rep = evaluate_predictions(pr, ar);
  CHECK(rep.n_samples == 25);
  CHECK(rep.mape_percent == doctest::Approx(mape_reference(pr, ar)).epsilon(1e-12));
  CHECK(rep.angular_score_deg ==
        doctest::Approx(angular_reference(pr, ar)).epsilon(1e-10));
  CHECK(rep.diffs.size() == 25);
}

TEST_CASE("moving_average_direction: constants, wrap, oracle") {
  // constant input is a fixed point
  std::vector<double> flat(100, 0.4);
  const auto out = moving_average_direction(flat, 2.0, 10.0);
  CHECK(out.size() == 100);
  for (double v : out) CHECK(v == doctest::Approx(0.4).epsilon(1e-12));

  // values straddling the 0/2pi cut average near the cut, not near pi
  std::vector<double> cut;
  for (int i = 0; i < 50; ++i) cut.push_back(i % 2 ? deg_to_rad(5) : deg_to_rad(-5));
  const auto avg = moving_average_direction(cut, 1.0, 10.0);
  CHECK(std::abs(rad_to_deg(avg.back())) < 1.0);

  // brute-force oracle, including the warm-up prefix
  SeededRng rng(19);
  std::vector<double> noisy;
  for (int i = 0; i < 200; ++i) noisy.push_back(rng.uniform(-kPi, kPi));
  const double rate = 36.0, secs = 0.5;
  const int window = static_cast<int>(std::lround(secs * rate));
  const auto got = moving_average_direction(noisy, secs, rate);
  const auto ref = moving_avg_reference(noisy, window);
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-10));
  }

  // smoothing shrinks the circular spread of a noisy constant signal
  std::vector<double> jitter;
  for (int i = 0; i < 720; ++i) jitter.push_back(1.0 + 0.3 * rng.gaussian());
  const auto sm = moving_average_direction(jitter, 16.0, 36.0);
  CHECK(circular_std(sm) < circular_std(jitter));

  CHECK(moving_average_direction({}, 1.0, 10.0).empty());
}

TEST_CASE("recover_wave_direction inverts the label construction") {
  SeededRng rng(23);
  for (int i = 0; i < 200; ++i) {
    const double wave = rng.uniform(0.0, 2 * kPi);
    const double yaw = rng.uniform(-kPi, kPi);
    const double rel = wrap_pi(yaw - wave);
    const double back = recover_wave_direction(std::sin(rel), std::cos(rel), yaw);
    CHECK(back >= 0.0);
    CHECK(back < 2 * kPi);
    CHECK(std::abs(wrap_reference(back - wave)) < 1e-10);
  }
}

TEST_CASE("circular mean and std") {
  // symmetric pair around zero across the cut
  std::vector<double> pair{deg_to_rad(350), deg_to_rad(10)};
  double R = 0.0;
  CHECK(std::abs(rad_to_deg(circular_mean(pair, &R))) < 1e-9);
  CHECK(R == doctest::Approx(std::cos(deg_to_rad(10))).epsilon(1e-12));

  // concentrated data: circular std approaches linear std
  SeededRng rng(29);
  std::vector<double> tight;
  double lin_sum = 0, lin_sumsq = 0;
  for (int i = 0; i < 5000; ++i) {
    const double v = 0.02 * rng.gaussian();
    tight.push_back(2.0 + v);
    lin_sum += v;
    lin_sumsq += v * v;
  }
  const double lin_std = std::sqrt(lin_sumsq / 5000 - (lin_sum / 5000) * (lin_sum / 5000));
  CHECK(circular_std(tight) == doctest::Approx(lin_std).epsilon(1e-3));
  CHECK(circular_mean(tight) == doctest::Approx(2.0).epsilon(1e-3));

  std::vector<double> empty;
  CHECK_THROWS_AS(circular_mean(empty), ArgumentError);
  CHECK_THROWS_AS(circular_std(empty), ArgumentError);
}
