#include "wavedir/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace wavedir {

namespace {

double desired_heading(const TrajectoryPlan& plan, double t) {
  switch (plan.kind) {
    case TrajectoryKind::kFixedHeading:
      return plan.base_heading;
    case TrajectoryKind::kLawnmower: {
      const double cycle = 2.0 * (plan.leg_seconds + plan.cross_seconds);
      const double u = std::fmod(t, cycle);
      if (u < plan.leg_seconds) return plan.base_heading;
      if (u < plan.leg_seconds + plan.cross_seconds) {
        return plan.base_heading + kPi / 2.0;
      }
      if (u < 2.0 * plan.leg_seconds + plan.cross_seconds) {
        return plan.base_heading + kPi;
      }
      return plan.base_heading + kPi / 2.0;
    }
    case TrajectoryKind::kFlower: {
      const int petal =
          static_cast<int>(std::floor(t / plan.petal_seconds)) % plan.petals;
      const double u = std::fmod(t, plan.petal_seconds);
      const double axis =
          plan.base_heading + 2.0 * kPi * petal / std::max(1, plan.petals);
      // outbound half, then return half
      return u < plan.petal_seconds / 2.0 ? axis : axis + kPi;
    }
  }
  return plan.base_heading;
}

struct WaveOsc {
  WaveComponent comp;
  double phase = 0.0;
};

}  // namespace

SimResult simulate(const WaveField& wave, const TrajectoryPlan& plan,
                   const SimConfig& cfg) {
  if (cfg.sample_rate <= 0 || plan.duration <= 0 || plan.cruise_speed <= 0) {
    throw ArgumentError("simulate: invalid configuration");
  }
  const double dt = 1.0 / cfg.sample_rate;
  const auto count = static_cast<std::size_t>(std::floor(plan.duration / dt));

  std::vector<WaveOsc> oscs;
  oscs.push_back({wave.primary, 0.0});
  for (const auto& c : wave.secondary) oscs.push_back({c, 0.0});

  SeededRng rng = SeededRng(cfg.seed).fork("simulate");
  const NoiseConfig& nz = cfg.noise;

  SimResult res;
  res.records.reserve(count);
  res.truth.reserve(count);

  double psi = wrap_pi(desired_heading(plan, 0.0));
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) * dt;

    // rate-limited heading controller
    const double err = wrap_pi(desired_heading(plan, t) - psi);
    const double max_step = plan.turn_rate_limit * dt;
    const double step = std::clamp(err, -max_step, max_step);
    const double yaw_rate = step / dt;
    psi = wrap_pi(psi + step);

    double roll = 0.0, pitch = 0.0, roll_rate = 0.0, pitch_rate = 0.0;
    double heave = 0.0, heave_vel = 0.0, heave_acc = 0.0;
    double primary_we = 2.0 * kPi / wave.primary.period;
    for (std::size_t ci = 0; ci < oscs.size(); ++ci) {
      WaveOsc& osc = oscs[ci];
      const double chi = wrap_pi(psi - osc.comp.direction);
      const double w = 2.0 * kPi / osc.comp.period;
      double we = w - (w * w / kGravity) * plan.cruise_speed * std::cos(chi);
      if (std::abs(we) < 0.05) we = we < 0 ? -0.05 : 0.05;
      if (ci == 0) primary_we = we;
      const double rel_amp = osc.comp.amplitude / cfg.reference_amplitude;
      const double a_roll = cfg.roll_response * rel_amp * std::abs(std::sin(chi));
      const double a_pitch = cfg.pitch_response * rel_amp * std::abs(std::cos(chi));
      roll += a_roll * std::sin(osc.phase + cfg.roll_phase);
      roll_rate += a_roll * we * std::cos(osc.phase + cfg.roll_phase);
      pitch += a_pitch * std::sin(osc.phase + cfg.pitch_phase);
      pitch_rate += a_pitch * we * std::cos(osc.phase + cfg.pitch_phase);
      heave += osc.comp.amplitude * std::sin(osc.phase);
      heave_vel += osc.comp.amplitude * we * std::cos(osc.phase);
      heave_acc -= osc.comp.amplitude * we * we * std::sin(osc.phase);
      osc.phase += we * dt;
    }

    RawRecord r;
    r.timestamp = t;
    r.yaw = wrap_pi(psi + rng.gaussian(0.0, nz.angle));
    r.roll = wrap_pi(roll + rng.gaussian(0.0, nz.angle));
    r.pitch = wrap_pi(pitch + rng.gaussian(0.0, nz.angle));

    // body-frame gravity projection plus heave acceleration
    r.accel_x = -kGravity * std::sin(r.pitch) + rng.gaussian(0.0, nz.accel);
    r.accel_y = kGravity * std::sin(r.roll) * std::cos(r.pitch) +
                rng.gaussian(0.0, nz.accel);
    r.accel_z = kGravity * std::cos(r.roll) * std::cos(r.pitch) + heave_acc +
                rng.gaussian(0.0, nz.accel);

    r.gyro_x = roll_rate + rng.gaussian(0.0, nz.gyro);
    r.gyro_y = pitch_rate + rng.gaussian(0.0, nz.gyro);
    r.gyro_z = yaw_rate + rng.gaussian(0.0, nz.gyro);

    // horizontal field of 0.9 normalized units rotated into the hull frame
    r.mag_x = 0.9 * std::cos(psi) + rng.gaussian(0.0, nz.mag);
    r.mag_y = -0.9 * std::sin(psi) + rng.gaussian(0.0, nz.mag);
    r.mag_z = 0.44 + rng.gaussian(0.0, nz.mag);

    r.north_vel = plan.cruise_speed * std::cos(psi) + rng.gaussian(0.0, nz.vel);
    r.east_vel = plan.cruise_speed * std::sin(psi) + rng.gaussian(0.0, nz.vel);
    r.down_vel = -heave_vel + rng.gaussian(0.0, nz.vel);
    r.alt = heave + rng.gaussian(0.0, nz.alt);

    const double cy = std::cos(r.yaw / 2), sy = std::sin(r.yaw / 2);
    const double cp = std::cos(r.pitch / 2), sp = std::sin(r.pitch / 2);
    const double cr = std::cos(r.roll / 2), sr = std::sin(r.roll / 2);
    r.w_quat = cr * cp * cy + sr * sp * sy;
    r.x_quat = sr * cp * cy - cr * sp * sy;
    r.y_quat = cr * sp * cy + sr * cp * sy;
    r.z_quat = cr * cp * sy - sr * sp * cy;

    r.heave_period = 2.0 * kPi / std::abs(primary_we);
    r.heave_motion = heave + rng.gaussian(0.0, nz.heave);
    r.heave_accel = heave_acc + rng.gaussian(0.0, nz.heave);
    r.valid = true;

    res.truth.push_back(wrap_pi(r.yaw - wave.primary.direction));
    res.records.push_back(r);
  }
  return res;
}

Scenario make_pool_scenario(std::uint64_t seed, double scale) {
  Scenario s;
  s.wave_direction_deg = 90.0;
  s.sample_rate = 36.0;
  const double dir = deg_to_rad(s.wave_direction_deg);
  SeededRng root(seed);
  for (int j = 0; j < 10; ++j) {
    WaveField wave;
    wave.primary.direction = dir;
    wave.primary.period = j % 2 == 0 ? 2.0 : 2.5;
    wave.primary.amplitude = 0.05 + 0.005 * j;  // heights 10-20 cm

    TrajectoryPlan plan;
    plan.kind = TrajectoryKind::kLawnmower;
    plan.base_heading = wrap_pi(deg_to_rad(36.0 * j));
    plan.cruise_speed = 0.8;
    plan.duration = 120.0 * scale;

    SimConfig cfg;
    cfg.sample_rate = s.sample_rate;
    const std::string id = "pool_t" + std::to_string(j / 10) + std::to_string(j % 10);
    cfg.seed = root.fork(id).state();

    SimResult sim = simulate(wave, plan, cfg);
    s.transects.push_back({id, std::move(sim.records), std::move(sim.truth)});
    s.metadata.push_back({id, s.wave_direction_deg, s.sample_rate});
  }
  return s;
}

Scenario make_sea_scenario(std::uint64_t seed, double scale) {
  Scenario s;
  s.wave_direction_deg = 335.0;
  s.sample_rate = 36.0;
  const double dir = wrap_pi(deg_to_rad(s.wave_direction_deg));
  const double minutes[6] = {6.0, 8.0, 9.5, 11.0, 12.5, 14.0};
  SeededRng root(seed);
  for (int j = 0; j < 6; ++j) {
    WaveField wave;
    wave.primary = {dir, 3.5, 0.25};
    wave.secondary.push_back({wrap_pi(dir + 0.4), 2.8, 0.08});
    wave.secondary.push_back({wrap_pi(dir - 0.6), 5.0, 0.06});

    TrajectoryPlan plan;
    plan.kind = TrajectoryKind::kFlower;
    plan.base_heading = wrap_pi(deg_to_rad(30.0 * j));
    plan.cruise_speed = 1.0;
    plan.petals = 6;
    plan.petal_seconds = 40.0;
    plan.duration = minutes[j] * 60.0 * scale;

    SimConfig cfg;
    cfg.sample_rate = s.sample_rate;
    cfg.noise.accel = 0.15;
    cfg.noise.gyro = 0.015;
    cfg.noise.mag = 0.03;
    cfg.noise.vel = 0.06;
    cfg.noise.alt = 0.03;
    cfg.noise.angle = 0.015;
    cfg.noise.heave = 0.006;
    const std::string id = "sea_t0" + std::to_string(j);
    cfg.seed = root.fork(id).state();

    SimResult sim = simulate(wave, plan, cfg);
    s.transects.push_back({id, std::move(sim.records), std::move(sim.truth)});
    s.metadata.push_back({id, s.wave_direction_deg, s.sample_rate});
  }
  return s;
}

void write_records_csv(const std::vector<RawRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_records_csv: cannot write " + path);
  const auto& cols = raw_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out << (i ? "," : "") << cols[i];
  }
  out << '\n';
  out.precision(17);
  for (const RawRecord& r : records) {
    out << r.timestamp << ',' << r.accel_x << ',' << r.accel_y << ','
        << r.accel_z << ',' << r.gyro_x << ',' << r.gyro_y << ',' << r.gyro_z
        << ',' << r.mag_x << ',' << r.mag_y << ',' << r.mag_z << ','
        << r.north_vel << ',' << r.east_vel << ',' << r.down_vel << ',' << r.alt
        << ',' << r.yaw << ',' << r.roll << ',' << r.pitch << ',' << r.w_quat
        << ',' << r.x_quat << ',' << r.y_quat << ',' << r.z_quat << ','
        << r.heave_period << ',' << r.heave_motion << ',' << r.heave_accel
        << ',' << (r.valid ? 1 : 0) << '\n';
  }
}

void write_scenario(const Scenario& s, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& t : s.transects) {
    write_records_csv(t.records, dir + "/" + t.id + ".csv");
  }
  save_metadata(dir + "/metadata.csv", s.metadata);
}

}  // namespace wavedir
