#include "resilient/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "resilient/error.hpp"
#include "resilient/plots.hpp"
#include "resilient/random.hpp"
#include "resilient/reachability.hpp"

namespace resilient {

namespace {

// Sub-stream indices derived from the scenario seed.
constexpr std::uint64_t kDisturbanceStream = 1;
constexpr std::uint64_t kVerifyStream = 2;
constexpr std::uint64_t kPlotStream = 3;
constexpr std::uint64_t kRandomAttackStream = 1u << 20;

Json load_reference(const Json& j, const std::filesystem::path& base) {
  if (j.is_string()) return read_json_file(base / j.get<std::string>());
  return j;
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario key '") + key + "': " + e.what());
  }
}

std::string bounds_name(bool resilient) { return resilient ? "resilient" : "physical"; }

std::vector<double> frequency_series(const Trajectory& t) {
  std::vector<double> y;
  for (const auto& x : t.states) y.push_back(x(0));
  if (t.final_state.size() > 0) y.push_back(t.final_state(0));
  return y;
}

std::vector<double> time_series(const Trajectory& t) {
  std::vector<double> x = t.times;
  if (t.final_state.size() > 0) x.push_back(t.final_time);
  return x;
}

std::optional<double> settle_time(const Trajectory& t) {
  const auto xs = time_series(t);
  const auto ys = frequency_series(t);
  for (std::size_t k = 0; k < ys.size(); ++k) {
    if (std::abs(ys[k]) < kSettleBand) return xs[k];
  }
  return std::nullopt;
}

Eigen::VectorXd initial_state(const ScenarioConfig& c) {
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(c.model.params.state_dim());
  x0(0) = c.initial_frequency;
  return x0;
}

class Runner {
 public:
  explicit Runner(const ScenarioConfig& config) : c_(config) {}

  RunReport run() {
    std::filesystem::create_directories(c_.out_dir);
    if (!stage("build", [&] { build(); })) {
      skip({"synthesize", "verify", "attack", "simulate", "plot"});
      return std::move(report_);
    }
    const bool synthesized = stage("synthesize", [&] { synthesize(); });
    if (synthesized) {
      stage("verify", [&] { verify(); });
    } else {
      skip({"verify"});
    }
    stage("attack", [&] { attacks(); });
    stage("simulate", [&] { simulate(); });
    stage("plot", [&] { plots(); });
    return std::move(report_);
  }

 private:
  template <typename F>
  bool stage(const std::string& name, F&& body) {
    try {
      body();
      report_.stages.push_back({name, "ok", "", ""});
      return true;
    } catch (const ConfigError& e) {
      report_.stages.push_back({name, "failed", e.what(), "config"});
    } catch (const InfeasibleError& e) {
      report_.stages.push_back({name, "failed", e.what(), "infeasible"});
    } catch (const CertificateError& e) {
      report_.stages.push_back({name, "failed", e.what(), "certificate"});
    } catch (const std::exception& e) {
      report_.stages.push_back({name, "failed", e.what(), "other"});
    }
    return false;
  }

  void skip(std::initializer_list<const char*> names) {
    for (const char* n : names) report_.stages.push_back({n, "skipped", "an earlier stage failed", ""});
  }

  std::filesystem::path path(const std::string& rel) {
    report_.files.push_back(rel);
    return c_.out_dir / rel;
  }

  void build() {
    continuous_ = build_continuous(c_.model.params);
    discrete_ = discretize(continuous_, c_.model.tau);
    unsafe_.emplace(c_.unsafe_set());
    gamma_ = c_.model.params.power_rate_bounds();
    if (c_.controller.participation.size() != discrete_.input_dim()) {
      throw ConfigError("controller participation has " +
                        std::to_string(c_.controller.participation.size()) +
                        " entries but the model has " + std::to_string(discrete_.input_dim()) +
                        " inputs");
    }
    const auto stability = check_schur_stability(discrete_.A);
    Json j;
    const auto matrix = [](const Eigen::MatrixXd& m) {
      Json rows = Json::array();
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(r, k));
        rows.push_back(std::move(row));
      }
      return rows;
    };
    j["tau"] = discrete_.sample_time;
    j["state_labels"] = continuous_.state_labels;
    j["A"] = matrix(discrete_.A);
    j["B"] = matrix(discrete_.B);
    j["H"] = matrix(discrete_.H);
    j["spectral_radius"] = stability.spectral_radius;
    write_json_file(path("discrete_model.json"), j);
  }

  void synthesize() {
    SynthesisProblem problem{discrete_, Bounds{gamma_, c_.model.params.disturbance_bound},
                             *unsafe_, c_.a_grid, c_.normalization, c_.shape_cap};
    try {
      report_.result = resilient::synthesize(problem);
    } catch (const InfeasibleError& e) {
      write_json_file(path("result.json"), Json{{"status", "infeasible"}, {"message", e.what()}});
      throw;
    }
    write_json_file(path("result.json"), result_to_json(*report_.result));
  }

  void verify() {
    VerifyOptions opts;
    opts.trials = c_.verify_trials;
    opts.horizon = c_.verify_horizon;
    opts.seed = Rng::stream(c_.seed, kVerifyStream).next();
    opts.initial_state = initial_state(c_);
    report_.certificate = verify_certificate(
        discrete_, *report_.result, *unsafe_,
        Bounds{gamma_, c_.model.params.disturbance_bound}, opts);
    write_json_file(path("certificate.json"), certificate_to_json(*report_.certificate));
    if (!report_.certificate->passed) throw CertificateError("certificate verification failed");
  }

  std::vector<bool> bound_sets() const {
    std::vector<bool> sets = {false};
    if (report_.result) sets.push_back(true);
    return sets;
  }

  Eigen::VectorXd enforced(bool resilient) const {
    return resilient ? report_.result->gamma_hat.cwiseMax(1e-12) : gamma_;
  }

  void attacks() {
    const Eigen::VectorXd x0 = initial_state(c_);
    const int N = c_.attack_horizon;
    for (bool res : bound_sets()) {
      const Eigen::VectorXd bounds = enforced(res);
      const std::string tag = bounds_name(res);
      LinePlot plot{"Attacks under " + tag + " bounds", "t [s]", "frequency deviation [Hz]", {}, {}};
      for (const auto& h : unsafe_->halfspaces()) {
        if (h.normal.tail(h.normal.size() - 1).norm() == 0.0 && h.normal(0) != 0.0) {
          plot.reference_lines.push_back(h.offset / h.normal(0));
        }
      }
      for (AttackType type : c_.attacks) {
        if (type == AttackType::kRandom) {
          random_attack(bounds, res, x0, plot);
          continue;
        }
        for (Direction dir : {Direction::kMaximize, Direction::kMinimize}) {
          AttackOptions opts{N, dir, c_.attack_disturbance, c_.model.params.disturbance_bound, x0};
          AttackResult r;
          if (type == AttackType::kOptimalSetpoint) {
            r = optimal_setpoint_attack(discrete_, bounds, opts);
          } else {
            AgcController ctrl(c_.controller, bounds);
            r = optimal_sensor_attack(discrete_, ctrl, bounds, opts);
          }
          for (const auto& w : r.warnings) report_.warnings.push_back(std::string(to_string(type)) + ": " + w);
          const std::string stem = std::string("attack_") + to_string(type) + "_" + to_string(dir) + "_" + tag;
          write_json_file(path(stem + ".json"), attack_to_json(make_attack_file(type, dir, r)));
          const Trajectory traj = attack_trajectory(discrete_, r, x0);
          write_trajectory_csv(path(stem + ".csv"), traj);
          report_.attacks.push_back({to_string(type), to_string(dir), tag, r.achieved_deviation,
                                     r.peak_deviation, stem + ".csv"});
          plot.series.push_back({std::string(type == AttackType::kOptimalSetpoint ? "setpoint " : "sensor ") + to_string(dir),
                                 time_series(traj), frequency_series(traj)});
        }
      }
      if (!plot.series.empty()) svg("attacks_" + tag + ".svg", render_line_plot(plot));
    }
    std::ostringstream csv;
    csv << "attack,direction,bounds,final_deviation,peak_deviation,file\n";
    for (const auto& row : report_.attacks) {
      csv << row.attack << ',' << row.direction << ',' << row.bounds << ','
          << format_number(row.final_deviation) << ',' << format_number(row.peak_deviation) << ','
          << row.file << '\n';
    }
    write_text_file(path("attacks.csv"), csv.str());
  }

  void random_attack(const Eigen::VectorXd& enforced_bounds, bool res, const Eigen::VectorXd& x0,
                     LinePlot& plot) {
    const int N = c_.attack_horizon;
    const std::string tag = bounds_name(res);
    std::vector<std::vector<double>> rows;
    double worst_peak = -1.0;
    int worst_trial = 0;
    Trajectory worst;
    std::vector<Eigen::VectorXd> worst_signal;
    for (int trial = 0; trial < c_.random_trials; ++trial) {
      // Drawn within the physical ranges; local saturation enforces the bounds.
      const std::uint64_t seed = Rng::stream(c_.seed, kRandomAttackStream + trial).next();
      auto signal = random_setpoint_attack(gamma_, N, seed);
      std::vector<double> w(static_cast<std::size_t>(N), 0.0);
      if (c_.attack_disturbance == DisturbancePolicy::kWorstCaseConstant) {
        std::fill(w.begin(), w.end(), (trial % 2 ? -1.0 : 1.0) * c_.model.params.disturbance_bound);
      }
      AgcController ctrl(c_.controller, enforced_bounds);
      Trajectory t = simulate_discrete(discrete_, ctrl, w, N, x0, SetpointAttack{signal});
      const double peak = t.max_abs_frequency();
      rows.push_back({static_cast<double>(trial), t.final_state(0), peak});
      if (peak > worst_peak) {
        worst_peak = peak;
        worst_trial = trial;
        worst = std::move(t);
        worst_signal = std::move(signal);
      }
    }
    if (rows.empty()) return;
    const std::string stem = "attack_random_" + tag;
    write_csv(path(stem + "_trials.csv"), {"trial", "final_deviation", "peak_deviation"}, rows);
    AttackFile file = make_attack_file(worst_signal);
    file.achieved_deviation = worst.final_state(0);
    file.peak_deviation = worst_peak;
    write_json_file(path(stem + ".json"), attack_to_json(file));
    write_trajectory_csv(path(stem + ".csv"), worst);
    report_.attacks.push_back({"random", "", tag, worst.final_state(0), worst_peak, stem + "_trials.csv"});
    plot.series.push_back({"random, trial " + std::to_string(worst_trial), time_series(worst),
                           frequency_series(worst)});
  }

  void simulate() {
    const int steps = static_cast<int>(std::lround(c_.horizon_seconds / c_.model.tau));
    if (steps < 1) throw ConfigError("simulation horizon shorter than one controller period");
    const DisturbanceModel dist{c_.model.params.disturbance_bound, c_.dwell_steps,
                                Rng::stream(c_.seed, kDisturbanceStream).next()};
    const auto w = generate_disturbance(dist, steps);
    const Eigen::VectorXd x0 = initial_state(c_);
    LinePlot plot{"Normal operation", "t [s]", "frequency deviation [Hz]", {}, {}};
    for (bool res : bound_sets()) {
      AgcController ctrl(c_.controller, enforced(res));
      Trajectory t;
      if (c_.mode == SimulationMode::kDiscrete) {
        t = simulate_discrete(discrete_, ctrl, w, steps, x0);
      } else {
        ContinuousOptions opts{c_.model.tau, steps * c_.model.tau, c_.integration_step, 0};
        t = simulate_continuous(continuous_, ctrl, opts, w, x0);
      }
      const std::string file = "operation_" + bounds_name(res) + ".csv";
      write_trajectory_csv(path(file), t);
      report_.operation.push_back({bounds_name(res), t.saturation_events(), t.max_abs_frequency(),
                                   settle_time(t), file});
      plot.series.push_back({bounds_name(res) + " bounds", time_series(t), frequency_series(t)});
    }
    svg("operation.svg", render_line_plot(plot));
  }

  void plots() {
    // Frequency against the first generator power (or the first other state).
    const int n = discrete_.state_dim();
    if (n < 2) return;
    const int axis_y = 1;
    std::vector<HalfSpace> unsafe(unsafe_->halfspaces().begin(), unsafe_->halfspaces().end());
    const std::uint64_t seed = Rng::stream(c_.seed, kPlotStream).next();
    for (bool res : bound_sets()) {
      const std::string tag = bounds_name(res);
      const Bounds bounds{enforced(res), c_.model.params.disturbance_bound};
      Eigen::MatrixXd w;
      if (res) {
        w = report_.result->w;
      } else {
        w = bounding_ellipsoid(discrete_, bounds, Eigen::VectorXd::Unit(n, 0), c_.a_grid,
                               c_.normalization, c_.shape_cap)
                .w;
      }
      SamplingOptions opts{c_.plot_horizon, c_.plot_trials, seed, InputStrategy::kMixed};
      const ReachableSamples samples = sample_reachable(discrete_, bounds, opts);
      std::vector<std::vector<double>> rows;
      rows.reserve(static_cast<std::size_t>(samples.states.cols()));
      for (Eigen::Index k = 0; k < samples.states.cols(); ++k) {
        rows.push_back({samples.states(0, k), samples.states(axis_y, k)});
      }
      const std::string label_y = continuous_.state_labels[static_cast<std::size_t>(axis_y)];
      write_csv(path("reach_" + tag + ".csv"), {continuous_.state_labels[0], label_y}, rows);
      EllipsePlot plot{"Reachable set, " + tag + " bounds", continuous_.state_labels[0] + " [Hz]",
                       label_y + " [pu]", w, 0, axis_y, unsafe, samples.states};
      svg("ellipse_" + tag + ".svg", render_ellipse_plot(plot));
    }
  }

  void svg(const std::string& rel, const SvgDocument& doc) {
    for (const auto& w : doc.warnings) report_.warnings.push_back(rel + ": " + w);
    write_text_file(path(rel), doc.text);
  }

  const ScenarioConfig& c_;
  RunReport report_;
  ContinuousModel continuous_;
  DiscreteModel discrete_;
  std::optional<UnsafeSet> unsafe_;
  Eigen::VectorXd gamma_;
};

}  // namespace

SimulationMode parse_simulation_mode(const std::string& text) {
  if (text == "discrete") return SimulationMode::kDiscrete;
  if (text == "continuous") return SimulationMode::kContinuous;
  throw ConfigError("simulation mode must be 'discrete' or 'continuous' (got '" + text + "')");
}

UnsafeSet ScenarioConfig::unsafe_set() const {
  const int n = model.params.state_dim();
  if (unsafe.is_string()) return parse_unsafe_argument(unsafe.get<std::string>(), n);
  return unsafe_from_json(unsafe, n);
}

ScenarioConfig scenario_from_json(const Json& j, const std::filesystem::path& base) {
  if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
  ScenarioConfig c;
  if (!j.contains("model")) throw ConfigError("scenario: missing key 'model'");
  if (!j.contains("controller")) throw ConfigError("scenario: missing key 'controller'");
  c.model = model_from_json(load_reference(j["model"], base));
  c.controller = controller_from_json(load_reference(j["controller"], base));
  if (j.contains("unsafe")) {
    const Json& u = j["unsafe"];
    if (u.is_string() && u.get<std::string>().rfind("frequency_limit", 0) != 0) {
      c.unsafe = read_json_file(base / u.get<std::string>());
    } else {
      c.unsafe = u;
    }
  }
  (void)c.unsafe_set();  // validate early

  const Json syn = get_or(j, "synthesis", Json::object());
  if (syn.contains("a_grid")) c.a_grid = parse_grid(syn["a_grid"].get<std::string>());
  c.normalization = parse_channel_normalization(get_or<std::string>(syn, "normalization", "all_channels"));
  c.shape_cap = get_or(syn, "shape_cap", c.shape_cap);

  const Json ver = get_or(j, "verify", Json::object());
  c.verify_trials = get_or(ver, "trials", c.verify_trials);
  c.verify_horizon = get_or(ver, "horizon", c.verify_horizon);

  const Json att = get_or(j, "attacks", Json::object());
  if (att.contains("suite")) {
    c.attacks.clear();
    for (const auto& t : att["suite"]) c.attacks.push_back(parse_attack_type(t.get<std::string>()));
  }
  c.attack_horizon = get_or(att, "horizon", c.attack_horizon);
  c.random_trials = get_or(att, "random_trials", c.random_trials);
  c.attack_disturbance = parse_disturbance_policy(get_or<std::string>(att, "disturbance", "zero"));

  const Json sim = get_or(j, "simulation", Json::object());
  c.initial_frequency = get_or(sim, "initial_frequency", c.initial_frequency);
  c.horizon_seconds = get_or(sim, "horizon_seconds", c.horizon_seconds);
  c.dwell_steps = get_or(sim, "dwell_steps", c.dwell_steps);
  c.mode = parse_simulation_mode(get_or<std::string>(sim, "mode", "discrete"));
  c.integration_step = get_or(sim, "integration_step", c.integration_step);

  const Json plot = get_or(j, "plots", Json::object());
  c.plot_trials = get_or(plot, "trials", c.plot_trials);
  c.plot_horizon = get_or(plot, "horizon", c.plot_horizon);

  if (!j.contains("seed")) throw ConfigError("scenario: 'seed' must be given explicitly");
  c.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("out_dir")) c.out_dir = base / j["out_dir"].get<std::string>();

  if (c.attack_horizon < 1) throw ConfigError("attacks.horizon must be >= 1");
  if (c.random_trials < 0) throw ConfigError("attacks.random_trials must be >= 0");
  if (c.verify_trials < 1 || c.verify_horizon < 1) throw ConfigError("verify trials and horizon must be >= 1");
  if (c.plot_trials < 1 || c.plot_horizon < 1) throw ConfigError("plot trials and horizon must be >= 1");
  if (!(c.horizon_seconds > 0.0)) throw ConfigError("simulation.horizon_seconds must be > 0");
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(read_json_file(path), path.parent_path());
}

bool RunReport::ok() const { return failure() == nullptr; }

const StageStatus* RunReport::failure() const {
  for (const auto& s : stages) {
    if (s.status == "failed") return &s;
  }
  return nullptr;
}

Trajectory attack_trajectory(const DiscreteModel& model, const AttackResult& attack,
                             const Eigen::VectorXd& x0) {
  const auto states = propagate(model, x0, attack.setpoints, attack.disturbance);
  Trajectory t;
  for (std::size_t k = 0; k < attack.setpoints.size(); ++k) {
    t.times.push_back(static_cast<double>(k) * model.sample_time);
    t.states.push_back(states[k]);
    t.setpoints.push_back(attack.setpoints[k]);
    t.raw_setpoints.push_back(attack.setpoints[k]);
    t.disturbance.push_back(k < attack.disturbance.size() ? attack.disturbance[k] : 0.0);
    t.attack_signal.push_back(k < attack.injections.size() ? attack.injections[k] : 0.0);
    t.saturation.push_back(0);
  }
  t.final_time = static_cast<double>(attack.setpoints.size()) * model.sample_time;
  t.final_state = states.back();
  return t;
}

Json report_to_json(const RunReport& report) {
  Json j;
  j["ok"] = report.ok();
  Json stages = Json::array();
  for (const auto& s : report.stages) stages.push_back({{"name", s.name}, {"status", s.status}, {"message", s.message}, {"error", s.error}});
  j["stages"] = std::move(stages);
  if (report.result) j["result"] = result_to_json(*report.result);
  if (report.certificate) j["certificate"] = certificate_to_json(*report.certificate);
  Json attacks = Json::array();
  for (const auto& a : report.attacks) {
    attacks.push_back({{"attack", a.attack}, {"direction", a.direction}, {"bounds", a.bounds},
                       {"final_deviation", a.final_deviation}, {"peak_deviation", a.peak_deviation},
                       {"file", a.file}});
  }
  j["attacks"] = std::move(attacks);
  Json op = Json::array();
  for (const auto& o : report.operation) {
    Json row{{"bounds", o.bounds}, {"saturation_events", o.saturation_events},
             {"max_abs_frequency", o.max_abs_frequency}, {"file", o.file}};
    row["settle_time"] = o.settle_time ? Json(*o.settle_time) : Json(nullptr);
    op.push_back(std::move(row));
  }
  j["operation"] = std::move(op);
  j["files"] = report.files;
  j["warnings"] = report.warnings;
  return j;
}

RunReport report_from_json(const Json& j) {
  RunReport r;
  try {
    for (const auto& s : j.at("stages")) {
      r.stages.push_back({s.at("name").get<std::string>(), s.at("status").get<std::string>(),
                          s.value("message", ""), s.value("error", "")});
    }
    if (j.contains("result")) r.result = result_from_json(j["result"]);
    if (j.contains("certificate")) {
      CertificateReport c;
      const Json& cj = j["certificate"];
      c.passed = cj.at("passed").get<bool>();
      c.max_lyapunov = cj.value("max_lyapunov", 0.0);
      if (cj.contains("initial_lyapunov")) {
        c.initial_lyapunov = cj["initial_lyapunov"].get<double>();
        c.initial_outside = cj.value("initial_outside", false);
      }
      for (const auto& k : cj.at("checks")) {
        c.checks.push_back({k.at("name").get<std::string>(), k.at("passed").get<bool>(),
                            k.value("residual", 0.0), k.value("detail", "")});
      }
      r.certificate = std::move(c);
    }
    for (const auto& a : j.at("attacks")) {
      r.attacks.push_back({a.at("attack").get<std::string>(), a.value("direction", ""),
                           a.at("bounds").get<std::string>(), a.at("final_deviation").get<double>(),
                           a.at("peak_deviation").get<double>(), a.value("file", "")});
    }
    for (const auto& o : j.at("operation")) {
      OperationRow row{o.at("bounds").get<std::string>(), o.at("saturation_events").get<int>(),
                       o.at("max_abs_frequency").get<double>(), std::nullopt, o.value("file", "")};
      if (o.contains("settle_time") && o["settle_time"].is_number()) row.settle_time = o["settle_time"].get<double>();
      r.operation.push_back(std::move(row));
    }
    r.files = j.value("files", std::vector<std::string>{});
    r.warnings = j.value("warnings", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  return r;
}

std::string report_to_markdown(const RunReport& report) {
  std::ostringstream md;
  md << "# Run report\n\n## Stages\n\n| stage | status | message |\n|---|---|---|\n";
  for (const auto& s : report.stages) md << "| " << s.name << " | " << s.status << " | " << s.message << " |\n";
  if (report.result) {
    const auto& r = *report.result;
    md << "\n## Resilient bounds\n\n";
    md << "- a = " << format_number(r.a) << "\n- objective (sum of bounds) = " << format_number(r.objective)
       << "\n- gamma_hat = [";
    for (Eigen::Index i = 0; i < r.gamma_hat.size(); ++i) md << (i ? ", " : "") << format_number(r.gamma_hat(i));
    md << "]\n";
  }
  if (report.certificate) {
    md << "\n## Certificate\n\n| check | passed | residual | detail |\n|---|---|---|---|\n";
    for (const auto& c : report.certificate->checks) {
      md << "| " << c.name << " | " << (c.passed ? "yes" : "no") << " | " << format_number(c.residual)
         << " | " << c.detail << " |\n";
    }
  }
  if (!report.attacks.empty()) {
    md << "\n## Attacks\n\n| attack | direction | bounds | df(N) [Hz] | peak abs df [Hz] | data |\n|---|---|---|---|---|---|\n";
    for (const auto& a : report.attacks) {
      md << "| " << a.attack << " | " << a.direction << " | " << a.bounds << " | "
         << format_number(a.final_deviation) << " | " << format_number(a.peak_deviation) << " | "
         << a.file << " |\n";
    }
  }
  if (!report.operation.empty()) {
    md << "\n## Normal operation\n\n| bounds | saturation events | max abs df [Hz] | first time abs df < "
       << format_number(kSettleBand) << " Hz [s] | data |\n|---|---|---|---|---|\n";
    for (const auto& o : report.operation) {
      md << "| " << o.bounds << " | " << o.saturation_events << " | " << format_number(o.max_abs_frequency)
         << " | " << (o.settle_time ? format_number(*o.settle_time) : std::string("never")) << " | "
         << o.file << " |\n";
    }
  }
  if (!report.warnings.empty()) {
    md << "\n## Warnings\n\n";
    for (const auto& w : report.warnings) md << "- " << w << '\n';
  }
  md << "\n## Files\n\n";
  for (const auto& f : report.files) md << "- " << f << '\n';
  return md.str();
}

RunReport run_scenario(const ScenarioConfig& config) {
  Runner runner(config);
  RunReport report = runner.run();
  // The report files are listed before they are written so they appear in
  // their own manifest.
  report.files.push_back("report.json");
  report.files.push_back("report.md");
  write_json_file(config.out_dir / "report.json", report_to_json(report));
  write_text_file(config.out_dir / "report.md", report_to_markdown(report));
  return report;
}

}  // namespace resilient
