#pragma once

#include "wavedir/common.hpp"
#include "wavedir/rng.hpp"

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace wavedir {

/// One raw sensor log line, pre-encoding (Euler angles still plain radians).
struct RawRecord {
  double timestamp = 0.0;
  double accel_x = 0.0, accel_y = 0.0, accel_z = 0.0;
  double gyro_x = 0.0, gyro_y = 0.0, gyro_z = 0.0;
  double mag_x = 0.0, mag_y = 0.0, mag_z = 0.0;
  double north_vel = 0.0, east_vel = 0.0, down_vel = 0.0;
  double alt = 0.0;
  double yaw = 0.0, roll = 0.0, pitch = 0.0;  // radians in (-pi, pi]
  double w_quat = 1.0, x_quat = 0.0, y_quat = 0.0, z_quat = 0.0;
  double heave_period = 0.0, heave_motion = 0.0, heave_accel = 0.0;
  bool valid = true;
};

/// Column order of the raw CSV files (timestamp first, valid last).
const std::vector<std::string>& raw_csv_columns();

/// Fixed 26-feature order: accel, gyro, mag, velocity, alt, Euler sin/cos
/// pairs, quaternion, heave.
using FeatureVec = Eigen::Matrix<double, kFeatureCount, 1>;

const std::array<std::string, kFeatureCount>& feature_names();

/// (sin, cos) per angle, in yaw/roll/pitch order.
std::array<double, 6> encode_angles(double yaw, double roll, double pitch);

FeatureVec to_features(const RawRecord& r);

/// Relative direction target: d = wrap(yaw - wave_direction); returns (sin d, cos d).
Vec2 make_label(double yaw, double wave_direction);

struct CsvLoadResult {
  std::vector<RawRecord> records;
  std::size_t malformed = 0;            // rejected data lines
  std::vector<std::string> errors;      // per-line messages (line numbers included)
};

/// Throws SchemaError when a required column is missing; bad lines are
/// tallied, not fatal.
CsvLoadResult load_csv(const std::string& path);

/// Contiguous cleaned trajectory segment with per-row labels.
struct Transect {
  std::string id;
  std::vector<FeatureVec> rows;
  std::vector<double> labels;  // relative direction, radians in (-pi, pi]
  std::vector<double> yaw;     // raw yaw per row, for direction recovery
  double sample_rate = 0.0;    // Hz
};

/// Drops invalid / off-norm-quaternion / slow rows, splits at drops, time
/// gaps > 2 median sample periods, and any override boundary timestamps;
/// discards segments shorter than min_len.
std::vector<std::vector<RawRecord>> clean_and_segment(
    const std::vector<RawRecord>& records, double speed_floor,
    std::size_t min_len, const std::vector<double>& boundaries = {});

Transect build_transect(const std::vector<RawRecord>& segment, std::string id,
                        double wave_direction_rad, double sample_rate);

/// Fixed-length windows: inputs are rows [start, start+n-2], the target is
/// the label of row start+n-1.
struct WindowSet {
  int n = 0;                       // sequence size (inputs hold n-1 rows)
  std::vector<Mat> inputs;         // each (n-1) x 26
  Mat targets;                     // count x 2, (sin d, cos d)
  std::vector<double> final_yaw;   // yaw of the labeled row
  std::vector<int> transect_index;
  std::vector<int> start_row;

  Index count() const { return static_cast<Index>(inputs.size()); }
  bool empty() const { return inputs.empty(); }
};

/// Sliding windows at the given stride. A transect shorter than n yields an
/// empty set (warning flag set, no error).
WindowSet make_windows(const Transect& t, int n, int stride,
                       int transect_index = 0, bool* too_short = nullptr);

void append_windows(WindowSet& dst, const WindowSet& src);

WindowSet make_windows(const std::vector<Transect>& transects, int n, int stride);

/// Per-feature z-score parameters, fitted from training rows only.
struct Standardizer {
  Vec mu;             // 26
  Vec sigma_raw;      // 26, pre-clamping
  Vec sigma_clamped;  // 26, floored at 1e-8
  int fit_count = 0;

  bool fitted() const { return fit_count > 0; }
};

inline constexpr double kSigmaFloor = 1e-8;

/// Population mean/stddev over the given rows; throws on < 2 rows.
Standardizer fit_standardizer(const std::vector<FeatureVec>& rows);

/// Fit over every input row of every window in the set.
Standardizer fit_standardizer(const WindowSet& train);

FeatureVec apply_standardizer(const Standardizer& s, const FeatureVec& row);
void apply_standardizer(const Standardizer& s, WindowSet& ws);

enum class SplitMode { kChronological, kShuffled };

/// Deterministic train/test split. Chronological mode keeps the last
/// (1 - train_fraction) of each transect's windows for test.
std::pair<WindowSet, WindowSet> split(const WindowSet& windows,
                                      double train_fraction, SeededRng& rng,
                                      SplitMode mode);

/// Transect metadata file: CSV with header id,wave_direction_deg,sample_rate_hz.
struct TransectMeta {
  std::string id;
  double wave_direction_deg = 0.0;
  double sample_rate_hz = 0.0;
};

std::vector<TransectMeta> load_metadata(const std::string& path);
void save_metadata(const std::string& path, const std::vector<TransectMeta>& meta);

}  // namespace wavedir
