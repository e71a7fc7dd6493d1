#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "resilient/attacks.hpp"
#include "resilient/config.hpp"
#include "resilient/synthesis.hpp"

namespace resilient {

enum class SimulationMode { kDiscrete, kContinuous };

SimulationMode parse_simulation_mode(const std::string& text);  // discrete | continuous

/// Everything a full pipeline run needs. File references in the JSON form
/// are resolved against the directory of the scenario file.
struct ScenarioConfig {
  ModelConfig model;
  AgcGains controller;
  Json unsafe = Json{{"frequency_limit", 0.2}};
  std::vector<double> a_grid = default_a_grid();
  ChannelNormalization normalization = ChannelNormalization::kAllChannels;
  double shape_cap = 10.0;

  int verify_trials = 1000;
  int verify_horizon = 500;

  std::vector<AttackType> attacks = {AttackType::kRandom, AttackType::kOptimalSetpoint,
                                     AttackType::kOptimalSensor};
  int attack_horizon = 50;
  int random_trials = 1000;
  DisturbancePolicy attack_disturbance = DisturbancePolicy::kZero;

  double initial_frequency = 0.1;  // df(0) for attack and operation runs [Hz]
  double horizon_seconds = 900.0;
  int dwell_steps = 15;
  SimulationMode mode = SimulationMode::kDiscrete;
  double integration_step = 1e-3;

  int plot_trials = 200;
  int plot_horizon = 100;

  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";

  UnsafeSet unsafe_set() const;
};

ScenarioConfig scenario_from_json(const Json& j, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario(const std::filesystem::path& path);

struct StageStatus {
  std::string name;
  std::string status;  // ok | failed | skipped
  std::string message;
  std::string error;   // config | infeasible | certificate | other; empty unless failed
};

struct AttackRow {
  std::string attack;
  std::string direction;  // max | min | "" for random
  std::string bounds;     // physical | resilient
  double final_deviation = 0.0;  // df(N); worst trial for random attacks
  double peak_deviation = 0.0;   // max_k |df(k)|
  std::string file;
};

struct OperationRow {
  std::string bounds;
  int saturation_events = 0;
  double max_abs_frequency = 0.0;
  std::optional<double> settle_time;  // first time |df| < 0.05 Hz
  std::string file;
};

struct RunReport {
  std::vector<StageStatus> stages;
  std::optional<ResilientResult> result;
  std::optional<CertificateReport> certificate;
  std::vector<AttackRow> attacks;
  std::vector<OperationRow> operation;
  std::vector<std::string> files;  // relative to the output directory
  std::vector<std::string> warnings;

  bool ok() const;
  /// The first failed stage, if any.
  const StageStatus* failure() const;
};

/// Threshold used for the settle-time statistic [Hz].
inline constexpr double kSettleBand = 0.05;

/// Build, synthesize, verify, attack, simulate and plot. A failing stage is
/// recorded and later stages that depend on it are skipped; CSV outputs are
/// byte-identical for identical configurations.
RunReport run_scenario(const ScenarioConfig& config);

Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& j);
std::string report_to_markdown(const RunReport& report);

/// Rows x(0..N) of an attack as a trajectory, for CSV output.
Trajectory attack_trajectory(const DiscreteModel& model, const AttackResult& attack,
                             const Eigen::VectorXd& x0);

}  // namespace resilient
