#pragma once

#include "wavedir/datapipe.hpp"
#include "wavedir/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wavedir {

struct WaveComponent {
  double direction = 0.0;  // propagation direction, compass radians
  double period = 2.0;     // seconds
  double amplitude = 0.075;  // meters (= height / 2)
};

struct WaveField {
  WaveComponent primary;
  std::vector<WaveComponent> secondary;
};

enum class TrajectoryKind { kLawnmower, kFlower, kFixedHeading };

struct TrajectoryPlan {
  TrajectoryKind kind = TrajectoryKind::kLawnmower;
  double base_heading = 0.0;     // radians
  double cruise_speed = 0.8;     // m/s
  double turn_rate_limit = 0.6;  // rad/s
  double leg_seconds = 15.0;     // lawnmower straight-leg duration
  double cross_seconds = 4.0;    // lawnmower cross-leg duration
  int petals = 6;                // flower pattern
  double petal_seconds = 30.0;   // out + back duration per petal
  double duration = 120.0;       // seconds
};

struct NoiseConfig {
  double accel = 0.05;   // m/s^2
  double gyro = 0.005;   // rad/s
  double mag = 0.01;
  double vel = 0.02;     // m/s
  double alt = 0.01;     // m
  double angle = 0.005;  // rad, on roll/pitch/yaw
  double heave = 0.002;  // m
};

struct SimConfig {
  double sample_rate = 36.0;  // Hz
  std::uint64_t seed = 0;
  NoiseConfig noise;
  // roll/pitch response amplitudes, radians at the reference wave amplitude
  double roll_response = 0.15;
  double pitch_response = 0.08;
  double roll_phase = 0.0;
  double pitch_phase = kPi / 4.0;
  double reference_amplitude = 0.075;  // meters
};

struct SimResult {
  std::vector<RawRecord> records;
  std::vector<double> truth;  // relative direction wrap(yaw - dir), per record
};

/// Kinematic hull follows the plan; wave-induced roll/pitch/heave use a
/// linear response surrogate driven by the encounter angle and encounter
/// frequency w_e = w - (w^2/g) * U * cos(chi).
SimResult simulate(const WaveField& wave, const TrajectoryPlan& plan,
                   const SimConfig& cfg);

struct ScenarioTransect {
  std::string id;
  std::vector<RawRecord> records;
  std::vector<double> truth;
};

struct Scenario {
  std::vector<ScenarioTransect> transects;
  std::vector<TransectMeta> metadata;
  double wave_direction_deg = 0.0;
  double sample_rate = 36.0;
};

/// Pool preset: fixed wave direction, 10 lawnmower transects of ~2 min at
/// 36 Hz (~43k records at scale 1). scale < 1 shrinks every duration.
Scenario make_pool_scenario(std::uint64_t seed, double scale = 1.0);

/// Open-sea preset: 6 flower transects of 6-14 min, multi-component waves,
/// heavier noise, wave direction 335 degrees.
Scenario make_sea_scenario(std::uint64_t seed, double scale = 1.0);

/// Writes <id>.csv per transect plus metadata.csv into dir.
void write_scenario(const Scenario& s, const std::string& dir);

void write_records_csv(const std::vector<RawRecord>& records,
                       const std::string& path);

}  // namespace wavedir
