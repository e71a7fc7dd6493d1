#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "resilient/attacks.hpp"
#include "resilient/config.hpp"
#include "resilient/control.hpp"
#include "resilient/error.hpp"
#include "resilient/plots.hpp"
#include "resilient/random.hpp"
#include "resilient/scenario.hpp"
#include "resilient/synthesis.hpp"

namespace fs = std::filesystem;
using namespace resilient;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kInfeasible = 2, kCertificateFailed = 3, kConfigError = 4 };

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
};

Globals globals;
std::optional<ScenarioConfig> scenario_cache;

const ScenarioConfig* scenario() {
  if (globals.config.empty()) return nullptr;
  if (!scenario_cache) scenario_cache = load_scenario(globals.config);
  return &*scenario_cache;
}

std::uint64_t seed_or(std::uint64_t fallback) {
  if (globals.seed) return *globals.seed;
  if (const auto* s = scenario()) return s->seed;
  return fallback;
}

fs::path output(const std::string& given, const std::string& fallback) {
  if (!given.empty()) return given;
  return fs::path(globals.out_dir) / fallback;
}

ModelConfig load_model(const std::string& file) {
  if (!file.empty()) return model_from_json(read_json_file(file));
  if (const auto* s = scenario()) return s->model;
  throw ConfigError("--model is required (or a --config scenario)");
}

AgcGains load_controller(const std::string& file) {
  if (!file.empty()) return controller_from_json(read_json_file(file));
  if (const auto* s = scenario()) return s->controller;
  throw ConfigError("--controller is required (or a --config scenario)");
}

UnsafeSet load_unsafe(const std::string& text, int n) {
  if (!text.empty()) return parse_unsafe_argument(text, n);
  if (const auto* s = scenario()) return s->unsafe_set();
  return UnsafeSet::frequency_limit(n, 0.2);
}

/// "physical" or "resilient:<result.json>".
Eigen::VectorXd load_bounds(const std::string& text, const ModelConfig& model) {
  if (text == "physical") return model.params.power_rate_bounds();
  const std::string prefix = "resilient:";
  if (text.rfind(prefix, 0) == 0) {
    const ResilientResult r = result_from_json(read_json_file(text.substr(prefix.size())));
    if (r.gamma_hat.size() != model.params.input_dim()) {
      throw ConfigError("result bounds do not match the model inputs");
    }
    return r.gamma_hat;
  }
  throw ConfigError("--bounds must be 'physical' or 'resilient:<result.json>'");
}

Eigen::VectorXd frequency_state(const ModelConfig& model, double df) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.params.state_dim());
  x0(0) = df;
  return x0;
}

void print_number_line(const std::string& label, const Eigen::VectorXd& v) {
  std::cout << label << " [";
  for (Eigen::Index i = 0; i < v.size(); ++i) std::cout << (i ? ", " : "") << format_number(v(i));
  std::cout << "]\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resilient operating constraints for frequency-regulated power systems"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  app.add_option("--config", globals.config, "Scenario file providing defaults")->check(CLI::ExistingFile);
  app.add_option("--seed", globals.seed, "Seed for every random stream");
  app.add_option("--out-dir", globals.out_dir, "Directory for outputs without an explicit --out");

  // build
  std::string model_file, out_file;
  double tau = 0.0;
  auto* build = app.add_subcommand("build", "Assemble and discretize the model");
  build->add_option("--model", model_file, "Model JSON");
  build->add_option("--tau", tau, "Override the controller period [s]");
  build->add_option("--out", out_file, "Output JSON");

  // synthesize
  std::string unsafe_arg, grid_arg, normalization_arg = "all_channels";
  double shape_cap = 10.0;
  auto* synth = app.add_subcommand("synthesize", "Compute resilient bounds");
  synth->add_option("--model", model_file, "Model JSON");
  synth->add_option("--unsafe", unsafe_arg, "Unsafe-set JSON or frequency_limit:<g>");
  synth->add_option("--a-grid", grid_arg, "start:step:end");
  synth->add_option("--normalization", normalization_arg, "all_channels | inputs_only");
  synth->add_option("--shape-cap", shape_cap, "Upper bound on W");
  synth->add_option("--out", out_file, "Result JSON");

  // verify
  std::string result_file;
  int trials = 1000, horizon_steps = 500;
  double initial_frequency = 0.1;
  auto* verify = app.add_subcommand("verify", "Re-check a certificate without the solver");
  verify->add_option("--model", model_file, "Model JSON");
  verify->add_option("--result", result_file, "Result JSON")->required();
  verify->add_option("--unsafe", unsafe_arg, "Unsafe-set JSON or frequency_limit:<g>");
  verify->add_option("--trials", trials, "Simulated trajectories");
  verify->add_option("--steps", horizon_steps, "Steps per trajectory");
  verify->add_option("--initial-frequency", initial_frequency, "df(0) used to report V(0) [Hz]");
  verify->add_option("--out", out_file, "Report JSON");

  // attack
  std::string controller_file, type_arg, bounds_arg = "physical", direction_arg = "min",
                                           disturbance_arg = "zero";
  int attack_horizon = 50;
  auto* attack = app.add_subcommand("attack", "Synthesize an attack signal");
  attack->add_option("--model", model_file, "Model JSON");
  attack->add_option("--controller", controller_file, "Controller JSON (sensor attacks)");
  attack->add_option("--type", type_arg, "random | optimal-setpoint | optimal-sensor")->required();
  attack->add_option("--bounds", bounds_arg, "physical | resilient:<result.json>");
  attack->add_option("--horizon", attack_horizon, "Steps");
  attack->add_option("--direction", direction_arg, "max | min");
  attack->add_option("--disturbance", disturbance_arg, "zero | worst_case_constant");
  attack->add_option("--initial-frequency", initial_frequency, "df(0) [Hz]");
  attack->add_option("--out", out_file, "Attack JSON");

  // simulate
  std::string mode_arg = "discrete", attack_arg = "none";
  double horizon_seconds = 900.0, dt = 1e-3;
  int dwell = 15;
  auto* simulate = app.add_subcommand("simulate", "Simulate the closed AGC loop");
  simulate->add_option("--model", model_file, "Model JSON");
  simulate->add_option("--controller", controller_file, "Controller JSON");
  simulate->add_option("--bounds", bounds_arg, "physical | resilient:<result.json>");
  simulate->add_option("--horizon", horizon_seconds, "Simulated time [s]");
  simulate->add_option("--mode", mode_arg, "discrete | continuous");
  simulate->add_option("--attack", attack_arg, "none | attack JSON");
  simulate->add_option("--dwell", dwell, "Disturbance dwell [steps]");
  simulate->add_option("--dt", dt, "RK4 step for continuous mode [s]");
  simulate->add_option("--initial-frequency", initial_frequency, "df(0) [Hz]");
  simulate->add_option("--out", out_file, "Trajectory CSV");

  // report
  std::string in_dir;
  auto* report = app.add_subcommand("report", "Render report.md from a run directory");
  report->add_option("--in", in_dir, "Run directory (defaults to --out-dir)");

  // run
  auto* run = app.add_subcommand("run", "Full pipeline from a --config scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*build) {
      const ModelConfig m = load_model(model_file);
      const double period = tau > 0.0 ? tau : m.tau;
      const ContinuousModel cont = build_continuous(m.params);
      const DiscreteModel d = discretize(cont, period);
      const auto stability = check_schur_stability(d.A);
      Json j;
      const auto rows = [](const Eigen::MatrixXd& mat) {
        Json r = Json::array();
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
          Json row = Json::array();
          for (Eigen::Index k = 0; k < mat.cols(); ++k) row.push_back(mat(i, k));
          r.push_back(std::move(row));
        }
        return r;
      };
      j["tau"] = period;
      j["state_labels"] = cont.state_labels;
      j["A_c"] = rows(cont.A);
      j["B_c"] = rows(cont.B);
      j["H_c"] = rows(cont.H);
      j["A"] = rows(d.A);
      j["B"] = rows(d.B);
      j["H"] = rows(d.H);
      j["spectral_radius"] = stability.spectral_radius;
      const fs::path out = output(out_file, "discrete_model.json");
      write_json_file(out, j);
      std::cout << "n=" << d.state_dim() << " m=" << d.input_dim()
                << " spectral_radius=" << format_number(stability.spectral_radius) << " -> "
                << out.string() << '\n';
      return kOk;
    }

    if (*synth) {
      const ModelConfig m = load_model(model_file);
      const DiscreteModel d = discretize(build_continuous(m.params), m.tau);
      std::vector<double> grid = default_a_grid();
      if (!grid_arg.empty()) {
        grid = parse_grid(grid_arg);
      } else if (const auto* s = scenario()) {
        grid = s->a_grid;
      }
      SynthesisProblem problem{d, Bounds{m.params.power_rate_bounds(), m.params.disturbance_bound},
                               load_unsafe(unsafe_arg, m.params.state_dim()), grid,
                               parse_channel_normalization(normalization_arg), shape_cap};
      const ResilientResult r = synthesize(problem);
      const fs::path out = output(out_file, "result.json");
      write_json_file(out, result_to_json(r));
      print_number_line("gamma_hat", r.gamma_hat);
      std::cout << "a " << format_number(r.a) << " objective " << format_number(r.objective) << " -> "
                << out.string() << '\n';
      return kOk;
    }

    if (*verify) {
      const ModelConfig m = load_model(model_file);
      const DiscreteModel d = discretize(build_continuous(m.params), m.tau);
      const ResilientResult r = result_from_json(read_json_file(result_file));
      VerifyOptions opts;
      opts.trials = trials;
      opts.horizon = horizon_steps;
      opts.seed = seed_or(1);
      opts.initial_state = frequency_state(m, initial_frequency);
      const CertificateReport rep =
          verify_certificate(d, r, load_unsafe(unsafe_arg, m.params.state_dim()),
                             Bounds{m.params.power_rate_bounds(), m.params.disturbance_bound}, opts);
      const fs::path out = output(out_file, "certificate.json");
      write_json_file(out, certificate_to_json(rep));
      for (const auto& c : rep.checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " residual=" << format_number(c.residual)
                  << ' ' << c.detail << '\n';
      }
      if (rep.initial_lyapunov) {
        std::cout << "V(0)=" << format_number(*rep.initial_lyapunov)
                  << (rep.initial_outside ? " (initial state outside the ellipsoid)" : "") << '\n';
      }
      return rep.passed ? kOk : kCertificateFailed;
    }

    if (*attack) {
      const ModelConfig m = load_model(model_file);
      const DiscreteModel d = discretize(build_continuous(m.params), m.tau);
      const Eigen::VectorXd bounds = load_bounds(bounds_arg, m);
      const AttackType type = parse_attack_type(type_arg);
      const Direction dir = parse_direction(direction_arg);
      const Eigen::VectorXd x0 = frequency_state(m, initial_frequency);
      AttackFile file;
      if (type == AttackType::kRandom) {
        if (attack_horizon < 1) throw ConfigError("--horizon must be >= 1");
        const auto signal = random_setpoint_attack(bounds, attack_horizon, seed_or(1));
        const auto states = propagate(d, x0, signal, {});
        file = make_attack_file(signal);
        file.achieved_deviation = states.back()(0);
        for (const auto& x : states) file.peak_deviation = std::max(file.peak_deviation, std::abs(x(0)));
      } else {
        AttackOptions opts{attack_horizon, dir, parse_disturbance_policy(disturbance_arg),
                           m.params.disturbance_bound, x0};
        AttackResult r;
        if (type == AttackType::kOptimalSetpoint) {
          r = optimal_setpoint_attack(d, bounds, opts);
        } else {
          AgcController ctrl(load_controller(controller_file), bounds);
          r = optimal_sensor_attack(d, ctrl, bounds, opts);
        }
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
        file = make_attack_file(type, dir, r);
      }
      const fs::path out = output(out_file, "attack.json");
      write_json_file(out, attack_to_json(file));
      std::cout << to_string(type) << " df(N)=" << format_number(file.achieved_deviation)
                << " peak=" << format_number(file.peak_deviation) << " -> " << out.string() << '\n';
      return kOk;
    }

    if (*simulate) {
      const ModelConfig m = load_model(model_file);
      const ContinuousModel cont = build_continuous(m.params);
      const DiscreteModel d = discretize(cont, m.tau);
      AgcController ctrl(load_controller(controller_file), load_bounds(bounds_arg, m));
      const int steps = static_cast<int>(std::lround(horizon_seconds / m.tau));
      if (steps < 1) throw ConfigError("--horizon must cover at least one controller period");
      const std::uint64_t seed = Rng::stream(seed_or(1), 1).next();
      const auto w = generate_disturbance({m.params.disturbance_bound, dwell, seed}, steps);
      Attack hook = NoAttack{};
      if (attack_arg != "none") {
        hook = to_simulation_attack(attack_from_json(read_json_file(attack_arg)), steps,
                                    m.params.input_dim());
      }
      const Eigen::VectorXd x0 = frequency_state(m, initial_frequency);
      Trajectory t;
      if (parse_simulation_mode(mode_arg) == SimulationMode::kDiscrete) {
        t = simulate_discrete(d, ctrl, w, steps, x0, hook);
      } else {
        t = simulate_continuous(cont, ctrl, {m.tau, steps * m.tau, dt, 0}, w, x0, hook);
      }
      const fs::path out = output(out_file, "trajectory.csv");
      write_trajectory_csv(out, t);
      std::cout << "max|df|=" << format_number(t.max_abs_frequency())
                << " saturation_events=" << t.saturation_events() << " -> " << out.string() << '\n';
      return kOk;
    }

    if (*report) {
      const fs::path dir = in_dir.empty() ? fs::path(globals.out_dir) : fs::path(in_dir);
      const RunReport r = report_from_json(read_json_file(dir / "report.json"));
      const std::string md = report_to_markdown(r);
      write_text_file(dir / "report.md", md);
      std::cout << md;
      return kOk;
    }

    if (*run) {
      if (globals.config.empty()) throw ConfigError("run requires --config");
      ScenarioConfig cfg = *scenario();
      if (globals.seed) cfg.seed = *globals.seed;
      if (app.get_option("--out-dir")->count() > 0) cfg.out_dir = globals.out_dir;
      const RunReport r = run_scenario(cfg);
      std::cout << report_to_markdown(r);
      if (const StageStatus* f = r.failure()) {
        std::cerr << "stage '" << f->name << "' failed: " << f->message << '\n';
        if (f->error == "infeasible") return kInfeasible;
        if (f->error == "certificate") return kCertificateFailed;
        if (f->error == "config") return kConfigError;
        return kFailure;
      }
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
