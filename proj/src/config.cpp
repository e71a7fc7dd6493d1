#include "resilient/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "resilient/error.hpp"

namespace resilient {

namespace {

const Json& require(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw ConfigError((where.empty() ? "document" : where) + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ConfigError("missing key '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
  return *it;
}

double number(const Json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + " must be a number");
  return j.get<double>();
}

double number_at(const Json& j, const char* key, const std::string& where) {
  return number(require(j, key, where), where.empty() ? key : where + "." + key);
}

Eigen::VectorXd vector_from(const Json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json vector_to(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << value.dump(2) << '\n';
}

ModelConfig model_from_json(const Json& j) {
  ModelConfig m;
  m.params.inertia = number_at(j, "inertia", "");
  m.params.damping = number_at(j, "damping", "");
  m.params.disturbance_bound = number_at(j, "disturbance_bound", "");
  m.tau = j.contains("tau") ? number(j["tau"], "tau") : 2.0;
  if (j.contains("generators")) {
    const Json& gens = j["generators"];
    if (!gens.is_array()) throw ConfigError("generators must be an array");
    for (std::size_t i = 0; i < gens.size(); ++i) {
      const std::string where = "generators[" + std::to_string(i) + "]";
      m.params.generators.push_back({number_at(gens[i], "T_t", where),
                                     number_at(gens[i], "T_g", where),
                                     number_at(gens[i], "R", where),
                                     number_at(gens[i], "gamma", where)});
    }
  }
  if (j.contains("storages")) {
    const Json& ess = j["storages"];
    if (!ess.is_array()) throw ConfigError("storages must be an array");
    for (std::size_t i = 0; i < ess.size(); ++i) {
      const std::string where = "storages[" + std::to_string(i) + "]";
      m.params.storages.push_back(
          {number_at(ess[i], "T_ES", where), number_at(ess[i], "gamma", where)});
    }
  }
  m.params.validate();
  if (!(m.tau > 0.0) || !std::isfinite(m.tau)) throw ConfigError("tau must be finite and > 0");
  return m;
}

Json model_to_json(const ModelConfig& model) {
  Json j;
  j["inertia"] = model.params.inertia;
  j["damping"] = model.params.damping;
  j["generators"] = Json::array();
  for (const auto& g : model.params.generators) {
    j["generators"].push_back({{"T_t", g.turbine_time_constant},
                               {"T_g", g.governor_time_constant},
                               {"R", g.droop},
                               {"gamma", g.power_rate_bound}});
  }
  j["storages"] = Json::array();
  for (const auto& s : model.params.storages) {
    j["storages"].push_back({{"T_ES", s.time_constant}, {"gamma", s.power_rate_bound}});
  }
  j["disturbance_bound"] = model.params.disturbance_bound;
  j["tau"] = model.tau;
  return j;
}

AgcGains controller_from_json(const Json& j) {
  AgcGains g;
  g.frequency_bias = number_at(j, "frequency_bias", "controller");
  g.proportional = number_at(j, "K_P", "controller");
  g.integral = number_at(j, "K_I", "controller");
  g.participation = vector_from(require(j, "participation", "controller"), "participation");
  g.validate();
  return g;
}

Json controller_to_json(const AgcGains& gains) {
  return {{"frequency_bias", gains.frequency_bias},
          {"K_P", gains.proportional},
          {"K_I", gains.integral},
          {"participation", vector_to(gains.participation)}};
}

UnsafeSet unsafe_from_json(const Json& j, int state_dim) {
  if (j.is_object() && j.contains("frequency_limit")) {
    const double g = number(j["frequency_limit"], "frequency_limit");
    if (!(g > 0.0)) throw ConfigError("frequency_limit must be > 0");
    return UnsafeSet::frequency_limit(state_dim, g);
  }
  const Json& list = j.is_object() ? require(j, "halfspaces", "unsafe") : j;
  if (!list.is_array() || list.empty()) {
    throw ConfigError("unsafe set must be a nonempty array of {c, g}");
  }
  std::vector<HalfSpace> hs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string where = "unsafe[" + std::to_string(i) + "]";
    HalfSpace h{vector_from(require(list[i], "c", where), where + ".c"),
                number_at(list[i], "g", where)};
    if (h.normal.size() != state_dim) {
      throw ConfigError(where + ".c has length " + std::to_string(h.normal.size()) +
                        ", expected " + std::to_string(state_dim));
    }
    hs.push_back(std::move(h));
  }
  try {
    return UnsafeSet(std::move(hs));
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("unsafe set: ") + e.what());
  }
}

Json unsafe_to_json(const UnsafeSet& unsafe) {
  Json a = Json::array();
  for (const auto& h : unsafe.halfspaces()) a.push_back({{"c", vector_to(h.normal)}, {"g", h.offset}});
  return a;
}

UnsafeSet parse_unsafe_argument(const std::string& text, int state_dim) {
  const std::string key = "frequency_limit";
  if (text.rfind(key, 0) == 0 && text.size() > key.size() &&
      (text[key.size()] == ':' || text[key.size()] == '=')) {
    const std::string value = text.substr(key.size() + 1);
    double g = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), g);
    if (ec != std::errc() || ptr != value.data() + value.size() || !(g > 0.0)) {
      throw ConfigError("bad frequency limit '" + value + "'");
    }
    return UnsafeSet::frequency_limit(state_dim, g);
  }
  return unsafe_from_json(read_json_file(text), state_dim);
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    const std::string item = text.substr(start, colon == std::string::npos ? colon : colon - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError("grid must be start:step:end (got '" + text + "')");
    }
    parts.push_back(v);
    if (colon == std::string::npos) break;
    start = colon + 1;
  }
  if (parts.size() != 3) throw ConfigError("grid must be start:step:end (got '" + text + "')");
  if (!(parts[1] > 0.0) || parts[2] < parts[0]) throw ConfigError("grid step must be > 0 and end >= start");
  return make_grid(parts[0], parts[1], parts[2]);
}

Json result_to_json(const ResilientResult& result) {
  Json j;
  Json w = Json::array();
  for (Eigen::Index r = 0; r < result.w.rows(); ++r) w.push_back(vector_to(result.w.row(r).transpose()));
  j["W"] = std::move(w);
  j["gamma_hat"] = vector_to(result.gamma_hat);
  j["a"] = result.a;
  j["objective"] = result.objective;
  j["normalization"] = to_string(result.normalization);
  Json per = Json::array();
  for (const auto& s : result.per_a) {
    per.push_back({{"a", s.a},
                   {"status", to_string(s.status)},
                   {"objective", s.objective},
                   {"gap_bound", s.gap_bound},
                   {"newton_steps", s.newton_steps}});
  }
  j["per_a_status"] = std::move(per);
  return j;
}

ResilientResult result_from_json(const Json& j) {
  ResilientResult r;
  r.gamma_hat = vector_from(require(j, "gamma_hat", "result"), "gamma_hat");
  r.r = r.gamma_hat.cwiseAbs2();
  r.a = number_at(j, "a", "result");
  r.objective = j.contains("objective") ? number(j["objective"], "objective") : r.gamma_hat.sum();
  if (j.contains("normalization")) {
    r.normalization = parse_channel_normalization(j["normalization"].get<std::string>());
  }
  const Json& w = require(j, "W", "result");
  if (!w.is_array() || w.empty()) throw ConfigError("W must be a nonempty array");
  if (w[0].is_array()) {
    const auto n = static_cast<Eigen::Index>(w.size());
    r.w.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::VectorXd row = vector_from(w[static_cast<std::size_t>(i)], "W row");
      if (row.size() != n) throw ConfigError("W must be square");
      r.w.row(i) = row.transpose();
    }
  } else {
    const Eigen::VectorXd flat = vector_from(w, "W");
    const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (n * n != flat.size()) throw ConfigError("flat W must have a square number of entries");
    r.w.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) r.w.row(i) = flat.segment(i * n, n).transpose();
  }
  if (j.contains("per_a_status")) {
    for (const auto& s : j["per_a_status"]) {
      FixedASolution f;
      f.a = number_at(s, "a", "per_a_status");
      const std::string status = require(s, "status", "per_a_status").get<std::string>();
      for (GridStatus g : {GridStatus::kOptimal, GridStatus::kInfeasible, GridStatus::kNumericalFailure}) {
        if (status == to_string(g)) f.status = g;
      }
      f.objective = number_at(s, "objective", "per_a_status");
      f.gap_bound = number_at(s, "gap_bound", "per_a_status");
      f.newton_steps = static_cast<int>(number_at(s, "newton_steps", "per_a_status"));
      r.per_a.push_back(std::move(f));
    }
  }
  return r;
}

Json certificate_to_json(const CertificateReport& report) {
  Json j;
  j["passed"] = report.passed;
  j["max_lyapunov"] = report.max_lyapunov;
  if (report.initial_lyapunov) {
    j["initial_lyapunov"] = *report.initial_lyapunov;
    j["initial_outside"] = report.initial_outside;
  }
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    checks.push_back(
        {{"name", c.name}, {"passed", c.passed}, {"residual", c.residual}, {"detail", c.detail}});
  }
  j["checks"] = std::move(checks);
  return j;
}

const char* to_string(AttackType type) {
  switch (type) {
    case AttackType::kRandom: return "random";
    case AttackType::kOptimalSetpoint: return "optimal-setpoint";
    case AttackType::kOptimalSensor: return "optimal-sensor";
  }
  return "unknown";
}

AttackType parse_attack_type(const std::string& text) {
  if (text == "random") return AttackType::kRandom;
  if (text == "optimal-setpoint") return AttackType::kOptimalSetpoint;
  if (text == "optimal-sensor") return AttackType::kOptimalSensor;
  throw ConfigError("attack type must be random, optimal-setpoint or optimal-sensor (got '" + text +
                    "')");
}

Json attack_to_json(const AttackFile& attack) {
  Json j;
  j["type"] = to_string(attack.type);
  j["horizon"] = attack.horizon;
  if (attack.direction) j["direction"] = to_string(*attack.direction);
  j["signal"] = attack.signal;
  j["achieved_deviation"] = attack.achieved_deviation;
  j["peak_deviation"] = attack.peak_deviation;
  return j;
}

AttackFile attack_from_json(const Json& j) {
  AttackFile a;
  const Json& type = require(j, "type", "attack");
  if (!type.is_string()) throw ConfigError("attack.type must be a string");
  a.type = parse_attack_type(type.get<std::string>());
  const Json& signal = require(j, "signal", "attack");
  if (!signal.is_array()) throw ConfigError("attack.signal must be an array of arrays");
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const Eigen::VectorXd v = vector_from(signal[k], "signal[" + std::to_string(k) + "]");
    a.signal.emplace_back(v.data(), v.data() + v.size());
  }
  a.horizon = j.contains("horizon") ? j["horizon"].get<int>() : static_cast<int>(a.signal.size());
  if (j.contains("direction")) a.direction = parse_direction(j["direction"].get<std::string>());
  if (j.contains("achieved_deviation")) a.achieved_deviation = number(j["achieved_deviation"], "achieved_deviation");
  if (j.contains("peak_deviation")) a.peak_deviation = number(j["peak_deviation"], "peak_deviation");
  return a;
}

AttackFile make_attack_file(AttackType type, std::optional<Direction> direction,
                            const AttackResult& result) {
  AttackFile a;
  a.type = type;
  a.direction = direction;
  if (type == AttackType::kOptimalSensor) {
    for (double d : result.injections) a.signal.push_back({d});
  } else {
    for (const auto& u : result.setpoints) a.signal.emplace_back(u.data(), u.data() + u.size());
  }
  a.horizon = static_cast<int>(a.signal.size());
  a.achieved_deviation = result.achieved_deviation;
  a.peak_deviation = result.peak_deviation;
  return a;
}

AttackFile make_attack_file(const std::vector<Eigen::VectorXd>& setpoints) {
  AttackFile a;
  a.type = AttackType::kRandom;
  for (const auto& u : setpoints) a.signal.emplace_back(u.data(), u.data() + u.size());
  a.horizon = static_cast<int>(a.signal.size());
  return a;
}

Attack to_simulation_attack(const AttackFile& attack, int steps, int num_inputs) {
  if (attack.type == AttackType::kOptimalSensor) {
    SensorAttack s;
    s.injections.assign(static_cast<std::size_t>(steps), 0.0);
    for (std::size_t k = 0; k < attack.signal.size() && k < s.injections.size(); ++k) {
      if (attack.signal[k].size() != 1) throw ConfigError("sensor attack signal entries must have one value");
      s.injections[k] = attack.signal[k][0];
    }
    return s;
  }
  SetpointAttack sp;
  const std::size_t count = std::min(attack.signal.size(), static_cast<std::size_t>(steps));
  for (std::size_t k = 0; k < count; ++k) {
    const auto& row = attack.signal[k];
    if (static_cast<int>(row.size()) != num_inputs) {
      throw ConfigError("setpoint attack signal entries must have one value per input");
    }
    sp.setpoints.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), num_inputs));
  }
  return sp;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const int n = traj.final_state.size() > 0 ? static_cast<int>(traj.final_state.size())
                : traj.states.empty()     ? 0
                                          : static_cast<int>(traj.states.front().size());
  const int m = traj.setpoints.empty() ? 0 : static_cast<int>(traj.setpoints.front().size());
  out << 't';
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= m; ++i) out << ",u" << i;
  for (int i = 1; i <= m; ++i) out << ",u_raw" << i;
  out << ",omega,attack_signal,sat_flags\n";
  for (int r = 0; r < traj.rows(); ++r) {
    const auto row = static_cast<std::size_t>(r);
    out << format_number(traj.times[row]);
    for (int i = 0; i < n; ++i) out << ',' << format_number(traj.states[row](i));
    for (int i = 0; i < m; ++i) out << ',' << format_number(traj.setpoints[row](i));
    for (int i = 0; i < m; ++i) out << ',' << format_number(traj.raw_setpoints[row](i));
    out << ',' << format_number(traj.disturbance[row]) << ','
        << format_number(traj.attack_signal[row]) << ',';
    for (int i = 0; i < m; ++i) out << (((traj.saturation[row] >> i) & 1u) ? '1' : '0');
    out << '\n';
  }
  if (traj.final_state.size() > 0) {
    out << format_number(traj.final_time);
    for (int i = 0; i < n; ++i) out << ',' << format_number(traj.final_state(i));
    for (int i = 0; i < 2 * m + 3; ++i) out << ',';
    out << '\n';
  }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_trajectory_csv(out, traj);
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
}

}  // namespace resilient
