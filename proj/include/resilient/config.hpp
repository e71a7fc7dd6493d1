#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "resilient/attacks.hpp"
#include "resilient/control.hpp"
#include "resilient/model.hpp"
#include "resilient/reachability.hpp"
#include "resilient/synthesis.hpp"

namespace resilient {

using Json = nlohmann::ordered_json;

/// Physical parameters plus the controller period tau.
struct ModelConfig {
  PowerSystemParams params;
  double tau = 2.0;
};

/// Reads and parses a JSON file; ConfigError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& value);

/// Keys: inertia, damping, generators[{T_t, T_g, R, gamma}],
/// storages[{T_ES, gamma}], disturbance_bound, tau.
ModelConfig model_from_json(const Json& j);
Json model_to_json(const ModelConfig& model);

/// Keys: frequency_bias, K_P, K_I, participation.
AgcGains controller_from_json(const Json& j);
Json controller_to_json(const AgcGains& gains);

/// Either {"frequency_limit": g}, an array of {c, g}, or {"halfspaces": [...]}.
UnsafeSet unsafe_from_json(const Json& j, int state_dim);
Json unsafe_to_json(const UnsafeSet& unsafe);

/// "frequency_limit:0.2" (or "=") expands inline; anything else is a file.
UnsafeSet parse_unsafe_argument(const std::string& text, int state_dim);

/// "start:step:end".
std::vector<double> parse_grid(const std::string& text);

Json result_to_json(const ResilientResult& result);
/// Accepts W as nested rows or a flat row-major array.
ResilientResult result_from_json(const Json& j);

Json certificate_to_json(const CertificateReport& report);

enum class AttackType { kRandom, kOptimalSetpoint, kOptimalSensor };

const char* to_string(AttackType type);
AttackType parse_attack_type(const std::string& text);  // random | optimal-setpoint | optimal-sensor

/// {type, horizon, direction, signal, achieved_deviation}. `signal` holds one
/// m-vector per step for setpoint attacks and a one-element array per step
/// for sensor attacks.
struct AttackFile {
  AttackType type = AttackType::kRandom;
  int horizon = 0;
  std::optional<Direction> direction;
  std::vector<std::vector<double>> signal;
  double achieved_deviation = 0.0;
  double peak_deviation = 0.0;
};

Json attack_to_json(const AttackFile& attack);
AttackFile attack_from_json(const Json& j);
AttackFile make_attack_file(AttackType type, std::optional<Direction> direction,
                            const AttackResult& result);
AttackFile make_attack_file(const std::vector<Eigen::VectorXd>& setpoints);

/// The attack hook used by the simulators for a run of `steps`. Shorter
/// signals are followed by normal operation.
Attack to_simulation_attack(const AttackFile& attack, int steps, int num_inputs);

/// Shortest round-trip decimal form.
std::string format_number(double value);

/// Columns t, x1..xn, u1..um, u_raw1..u_rawm, omega, attack_signal, sat_flags.
/// sat_flags is one 0/1 character per channel in channel order. The final
/// state is written as an extra row with empty input columns.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Writes rows of numbers under a header.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

}  // namespace resilient
