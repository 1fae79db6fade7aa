#include "wavedir/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace wavedir {

const std::vector<std::string>& raw_csv_columns() {
  static const std::vector<std::string> cols = {
      "timestamp", "accel_x",  "accel_y",  "accel_z",  "gyro_x",  "gyro_y",
      "gyro_z",    "mag_x",    "mag_y",    "mag_z",    "north_vel",
      "east_vel",  "down_vel", "alt",      "yaw",      "roll",    "pitch",
      "w_quat",    "x_quat",   "y_quat",   "z_quat",   "heave_period",
      "heave_motion", "heave_accel", "valid"};
  return cols;
}

const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "accel_x",    "accel_y",    "accel_z",   "gyro_x",     "gyro_y",
      "gyro_z",     "mag_x",      "mag_y",     "mag_z",      "north_vel",
      "east_vel",   "down_vel",   "alt",       "yaw_sine",   "yaw_cosine",
      "roll_sine",  "roll_cosine", "pitch_sine", "pitch_cosine", "w_quat",
      "x_quat",     "y_quat",     "z_quat",    "heave_period", "heave_motion",
      "heave_accel"};
  return names;
}

std::array<double, 6> encode_angles(double yaw, double roll, double pitch) {
  return {std::sin(yaw),  std::cos(yaw),  std::sin(roll),
          std::cos(roll), std::sin(pitch), std::cos(pitch)};
}

FeatureVec to_features(const RawRecord& r) {
  const auto e = encode_angles(r.yaw, r.roll, r.pitch);
  FeatureVec f;
  f << r.accel_x, r.accel_y, r.accel_z, r.gyro_x, r.gyro_y, r.gyro_z, r.mag_x,
      r.mag_y, r.mag_z, r.north_vel, r.east_vel, r.down_vel, r.alt, e[0], e[1],
      e[2], e[3], e[4], e[5], r.w_quat, r.x_quat, r.y_quat, r.z_quat,
      r.heave_period, r.heave_motion, r.heave_accel;
  return f;
}

Vec2 make_label(double yaw, double wave_direction) {
  const double d = wrap_pi(yaw - wave_direction);
  return Vec2(std::sin(d), std::cos(d));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool in_pi_range(double a) { return a > -kPi && a <= kPi; }

}  // namespace

CsvLoadResult load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw SchemaError("load_csv: empty file " + path);

  const auto header_cells = split_line(header);
  std::unordered_map<std::string, std::size_t> col_index;
  for (std::size_t i = 0; i < header_cells.size(); ++i) {
    col_index[header_cells[i]] = i;
  }
  std::vector<std::size_t> idx;
  for (const auto& name : raw_csv_columns()) {
    auto it = col_index.find(name);
    if (it == col_index.end()) {
      throw SchemaError("load_csv: missing column '" + name + "' in " + path);
    }
    idx.push_back(it->second);
  }

  CsvLoadResult res;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() < header_cells.size()) {
      ++res.malformed;
      res.errors.push_back("line " + std::to_string(lineno) + ": field count");
      continue;
    }
    double v[25];
    bool ok = true;
    for (std::size_t c = 0; c < 25 && ok; ++c) {
      if (!parse_double(cells[idx[c]], &v[c])) {
        ok = false;
        res.errors.push_back("line " + std::to_string(lineno) + ": bad value in " +
                             raw_csv_columns()[c]);
      }
    }
    if (!ok) {
      ++res.malformed;
      continue;
    }
    RawRecord r;
    r.timestamp = v[0];
    r.accel_x = v[1]; r.accel_y = v[2]; r.accel_z = v[3];
    r.gyro_x = v[4]; r.gyro_y = v[5]; r.gyro_z = v[6];
    r.mag_x = v[7]; r.mag_y = v[8]; r.mag_z = v[9];
    r.north_vel = v[10]; r.east_vel = v[11]; r.down_vel = v[12];
    r.alt = v[13];
    r.yaw = v[14]; r.roll = v[15]; r.pitch = v[16];
    r.w_quat = v[17]; r.x_quat = v[18]; r.y_quat = v[19]; r.z_quat = v[20];
    r.heave_period = v[21]; r.heave_motion = v[22]; r.heave_accel = v[23];
    r.valid = v[24] != 0.0;
    if (!in_pi_range(r.yaw) || !in_pi_range(r.roll) || !in_pi_range(r.pitch)) {
      ++res.malformed;
      res.errors.push_back("line " + std::to_string(lineno) +
                           ": Euler angle outside (-pi, pi]");
      continue;
    }
    res.records.push_back(r);
  }
  return res;
}

std::vector<std::vector<RawRecord>> clean_and_segment(
    const std::vector<RawRecord>& records, double speed_floor,
    std::size_t min_len, const std::vector<double>& boundaries) {
  std::vector<std::vector<RawRecord>> segments;
  if (records.empty()) return segments;

  // median sample period, from consecutive timestamp deltas
  std::vector<double> dts;
  dts.reserve(records.size());
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double dt = records[i].timestamp - records[i - 1].timestamp;
    if (dt > 0) dts.push_back(dt);
  }
  double dt_med = 1.0;
  if (!dts.empty()) {
    std::nth_element(dts.begin(), dts.begin() + dts.size() / 2, dts.end());
    dt_med = dts[dts.size() / 2];
  }

  auto keep = [&](const RawRecord& r) {
    if (!r.valid) return false;
    const double qn = std::sqrt(r.w_quat * r.w_quat + r.x_quat * r.x_quat +
                                r.y_quat * r.y_quat + r.z_quat * r.z_quat);
    if (std::abs(qn - 1.0) > 0.01) return false;
    const double speed = std::hypot(r.north_vel, r.east_vel);
    return speed >= speed_floor;
  };

  std::vector<RawRecord> cur;
  auto flush = [&]() {
    if (cur.size() >= min_len && min_len > 0) segments.push_back(std::move(cur));
    cur.clear();
  };

  std::size_t bidx = 0;
  std::vector<double> bsorted = boundaries;
  std::sort(bsorted.begin(), bsorted.end());

  for (std::size_t i = 0; i < records.size(); ++i) {
    const RawRecord& r = records[i];
    if (!keep(r)) {
      flush();
      continue;
    }
    if (!cur.empty()) {
      const double gap = r.timestamp - cur.back().timestamp;
      if (gap > 2.0 * dt_med) flush();
    }
    while (bidx < bsorted.size() && bsorted[bidx] <= r.timestamp) {
      if (!cur.empty() && cur.back().timestamp < bsorted[bidx]) flush();
      ++bidx;
    }
    cur.push_back(r);
  }
  flush();
  return segments;
}

Transect build_transect(const std::vector<RawRecord>& segment, std::string id,
                        double wave_direction_rad, double sample_rate) {
  Transect t;
  t.id = std::move(id);
  t.sample_rate = sample_rate;
  t.rows.reserve(segment.size());
  t.labels.reserve(segment.size());
  t.yaw.reserve(segment.size());
  for (const RawRecord& r : segment) {
    t.rows.push_back(to_features(r));
    t.labels.push_back(wrap_pi(r.yaw - wave_direction_rad));
    t.yaw.push_back(r.yaw);
  }
  return t;
}

WindowSet make_windows(const Transect& t, int n, int stride, int transect_index,
                       bool* too_short) {
  if (n < 2) throw ArgumentError("make_windows: n must be >= 2");
  if (stride < 1) throw ArgumentError("make_windows: stride must be >= 1");
  WindowSet ws;
  ws.n = n;
  const Index len = static_cast<Index>(t.rows.size());
  if (too_short) *too_short = false;
  if (len < n) {
    if (too_short) *too_short = true;
    ws.targets.resize(0, 2);
    return ws;
  }
  const Index count = (len - n) / stride + 1;
  ws.targets.resize(count, 2);
  ws.inputs.reserve(count);
  for (Index w = 0; w < count; ++w) {
    const Index start = w * stride;
    Mat window(n - 1, kFeatureCount);
    for (int r = 0; r < n - 1; ++r) {
      window.row(r) = t.rows[start + r].transpose();
    }
    ws.inputs.push_back(std::move(window));
    const Index last = start + n - 1;
    const double d = t.labels[last];
    ws.targets(w, 0) = std::sin(d);
    ws.targets(w, 1) = std::cos(d);
    ws.final_yaw.push_back(t.yaw[last]);
    ws.transect_index.push_back(transect_index);
    ws.start_row.push_back(static_cast<int>(start));
  }
  return ws;
}

void append_windows(WindowSet& dst, const WindowSet& src) {
  if (dst.n == 0) dst.n = src.n;
  if (src.n != dst.n) throw DimensionError("append_windows: sequence size mismatch");
  const Index old = dst.count();
  Mat merged(old + src.count(), 2);
  if (old > 0) merged.topRows(old) = dst.targets;
  if (src.count() > 0) merged.bottomRows(src.count()) = src.targets;
  dst.targets = std::move(merged);
  dst.inputs.insert(dst.inputs.end(), src.inputs.begin(), src.inputs.end());
  dst.final_yaw.insert(dst.final_yaw.end(), src.final_yaw.begin(), src.final_yaw.end());
  dst.transect_index.insert(dst.transect_index.end(), src.transect_index.begin(),
                            src.transect_index.end());
  dst.start_row.insert(dst.start_row.end(), src.start_row.begin(), src.start_row.end());
}

WindowSet make_windows(const std::vector<Transect>& transects, int n, int stride) {
  WindowSet all;
  all.n = n;
  all.targets.resize(0, 2);
  for (std::size_t i = 0; i < transects.size(); ++i) {
    append_windows(all, make_windows(transects[i], n, stride, static_cast<int>(i)));
  }
  return all;
}

namespace {

Standardizer finish_fit(const Vec& sum, const Vec& sumsq, double count) {
  Standardizer s;
  s.mu = sum / count;
  Vec var = sumsq / count - s.mu.cwiseProduct(s.mu);
  var = var.cwiseMax(0.0);  // guard tiny negative round-off
  s.sigma_raw = var.cwiseSqrt();
  s.sigma_clamped = s.sigma_raw.cwiseMax(kSigmaFloor);
  s.fit_count = 1;
  return s;
}

}  // namespace

Standardizer fit_standardizer(const std::vector<FeatureVec>& rows) {
  if (rows.size() < 2) throw DataError("fit_standardizer: need at least 2 rows");
  Vec sum = Vec::Zero(kFeatureCount);
  Vec sumsq = Vec::Zero(kFeatureCount);
  for (const FeatureVec& r : rows) {
    sum += r;
    sumsq += r.cwiseProduct(r);
  }
  return finish_fit(sum, sumsq, static_cast<double>(rows.size()));
}

Standardizer fit_standardizer(const WindowSet& train) {
  Vec sum = Vec::Zero(kFeatureCount);
  Vec sumsq = Vec::Zero(kFeatureCount);
  double count = 0;
  for (const Mat& w : train.inputs) {
    sum += w.colwise().sum().transpose();
    sumsq += w.cwiseProduct(w).colwise().sum().transpose();
    count += static_cast<double>(w.rows());
  }
  if (count < 2) throw DataError("fit_standardizer: need at least 2 rows");
  return finish_fit(sum, sumsq, count);
}

FeatureVec apply_standardizer(const Standardizer& s, const FeatureVec& row) {
  if (!s.fitted()) throw StateError("apply_standardizer: standardizer not fitted");
  return (row - s.mu).cwiseQuotient(s.sigma_clamped);
}

void apply_standardizer(const Standardizer& s, WindowSet& ws) {
  if (!s.fitted()) throw StateError("apply_standardizer: standardizer not fitted");
  for (Mat& w : ws.inputs) {
    w = (w.rowwise() - s.mu.transpose()).array().rowwise() /
        s.sigma_clamped.transpose().array();
  }
}

std::pair<WindowSet, WindowSet> split(const WindowSet& windows,
                                      double train_fraction, SeededRng& rng,
                                      SplitMode mode) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("split: train_fraction must be in (0, 1)");
  }
  const Index total = windows.count();
  if (total < 2) throw DataError("split: need at least 2 windows");

  std::vector<Index> train_idx, test_idx;
  if (mode == SplitMode::kShuffled) {
    std::vector<Index> order(total);
    std::iota(order.begin(), order.end(), 0);
    for (Index i = total - 1; i > 0; --i) {
      const Index j = static_cast<Index>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    const Index n_train = static_cast<Index>(std::llround(total * train_fraction));
    train_idx.assign(order.begin(), order.begin() + n_train);
    test_idx.assign(order.begin() + n_train, order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());
  } else {
    // chronological per transect: the last (1 - fraction) of each transect's
    // windows go to test
    std::vector<std::vector<Index>> groups;
    std::vector<int> group_of;
    for (Index i = 0; i < total; ++i) {
      const int t = windows.transect_index[i];
      while (static_cast<int>(groups.size()) <= t) groups.emplace_back();
      groups[t].push_back(i);
    }
    for (const auto& g : groups) {
      const Index k = static_cast<Index>(g.size());
      const Index n_train = static_cast<Index>(std::llround(k * train_fraction));
      for (Index i = 0; i < k; ++i) {
        (i < n_train ? train_idx : test_idx).push_back(g[i]);
      }
    }
  }
  if (train_idx.empty() || test_idx.empty()) {
    // force both sides non-empty for tiny inputs
    if (train_idx.empty()) {
      train_idx.push_back(test_idx.front());
      test_idx.erase(test_idx.begin());
    } else {
      test_idx.push_back(train_idx.back());
      train_idx.pop_back();
    }
  }

  auto take = [&](const std::vector<Index>& idx) {
    WindowSet out;
    out.n = windows.n;
    out.targets.resize(static_cast<Index>(idx.size()), 2);
    out.inputs.reserve(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const Index i = idx[k];
      out.inputs.push_back(windows.inputs[i]);
      out.targets.row(static_cast<Index>(k)) = windows.targets.row(i);
      out.final_yaw.push_back(windows.final_yaw[i]);
      out.transect_index.push_back(windows.transect_index[i]);
      out.start_row.push_back(windows.start_row[i]);
    }
    return out;
  };
  return {take(train_idx), take(test_idx)};
}

std::vector<TransectMeta> load_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_metadata: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("load_metadata: empty file");
  if (split_line(line) != std::vector<std::string>{"id", "wave_direction_deg",
                                                   "sample_rate_hz"}) {
    throw SchemaError("load_metadata: bad header in " + path);
  }
  std::vector<TransectMeta> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != 3) throw SchemaError("load_metadata: bad line: " + line);
    TransectMeta m;
    m.id = cells[0];
    if (!parse_double(cells[1], &m.wave_direction_deg) ||
        !parse_double(cells[2], &m.sample_rate_hz)) {
      throw SchemaError("load_metadata: bad numeric value: " + line);
    }
    out.push_back(std::move(m));
  }
  return out;
}

void save_metadata(const std::string& path, const std::vector<TransectMeta>& meta) {
  std::ofstream out(path);
  if (!out) throw DataError("save_metadata: cannot write " + path);
  out << "id,wave_direction_deg,sample_rate_hz\n";
  out.precision(17);
  for (const auto& m : meta) {
    out << m.id << ',' << m.wave_direction_deg << ',' << m.sample_rate_hz << '\n';
  }
}

}  // namespace wavedir
