#pragma once

// Command implementations behind the gridseer tool. Each command maps a
// RunConfig to a JSON payload (and optionally DOT text); argument parsing,
// hashing and file output live in the executable.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridseer/attack.hpp"
#include "gridseer/core.hpp"
#include "gridseer/estimator.hpp"
#include "gridseer/grid_model.hpp"
#include "gridseer/observability.hpp"
#include "gridseer/protection.hpp"

namespace gridseer::cli {

struct RunConfig {
  std::string command;
  std::string case_path;
  // A meter file (native JSON or MATPOWER sidecar) or a comma-separated list
  // of meter ids selecting a subset of the case's meters. Empty: all meters.
  std::string meters;
  std::vector<int> targets;           // external bus ids
  std::string mode = "exact";         // protect: exact, tph or both
  std::vector<std::string> secured;   // attack: extra secured meter ids
  std::vector<std::pair<int, int>> unknown_lines;
  std::uint64_t seed = 1;
  double timeout = 60.0;
  double sigma = 0.01;
  double delta = 0.1;
  std::string attack_path;            // estimate: JSON carrying an "a" vector
  std::string gross;                  // estimate: meter id hit by a 10 sigma error
  int trials = 1;
  int jobs = 1;
  bool want_dot = false;
  std::function<void(const nlohmann::json&)> trace;
  bool trace_every_node = false;
};

struct CommandOutput {
  nlohmann::json result;
  std::string dot;
};

// Case plus the meter subset a command works on.
struct Inputs {
  Case c;
  std::vector<MeterIdx> meters;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline std::vector<BusIdx> bus_indices(const Case& c, const std::vector<int>& ids) {
  std::vector<BusIdx> out;
  for (int id : ids) {
    auto b = c.network.find_bus(id);
    if (!b) fail(ErrorKind::kInvalidInput, "unknown target bus " + std::to_string(id));
    out.push_back(*b);
  }
  return out;
}

inline nlohmann::json bus_ids(const Case& c, const std::vector<BusIdx>& buses) {
  nlohmann::json out = nlohmann::json::array();
  for (BusIdx b : buses) out.push_back(c.network.bus_id(b));
  return out;
}

inline nlohmann::json meter_ids(const Case& c, std::span<const MeterIdx> meters) {
  nlohmann::json out = nlohmann::json::array();
  for (MeterIdx p : meters) out.push_back(c.meters[p].id);
  return out;
}

inline nlohmann::json vector_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

// Per-bus view of a state vector; the reference bus reads 0.
inline nlohmann::json state_by_bus(const Case& c, const Eigen::VectorXd& theta) {
  nlohmann::json out = nlohmann::json::object();
  for (BusIdx b = 0; b < c.network.bus_count(); ++b) {
    auto col = c.network.column(b);
    out[std::to_string(c.network.bus_id(b))] =
        col ? theta(static_cast<Eigen::Index>(*col)) : 0.0;
  }
  return out;
}

inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace detail

inline Inputs load_inputs(const RunConfig& cfg) {
  if (cfg.case_path.empty()) fail(ErrorKind::kUsage, "--case is required");
  const bool meter_file =
      !cfg.meters.empty() && std::filesystem::is_regular_file(cfg.meters);
  Inputs in{load_case(cfg.case_path, meter_file ? cfg.meters : std::string()), {}};
  if (cfg.meters.empty() || meter_file) {
    in.meters = in.c.all_meters();
  } else {
    auto ids = detail::split_list(cfg.meters);
    if (ids.empty()) fail(ErrorKind::kUsage, "--meters names no meters");
    for (const auto& id : ids) in.meters.push_back(in.c.require_meter(id));
    std::sort(in.meters.begin(), in.meters.end());
    in.meters.erase(std::unique(in.meters.begin(), in.meters.end()), in.meters.end());
  }
  return in;
}

inline CommandOutput cmd_inspect(const RunConfig&, const Inputs& in) {
  const Case& c = in.c;
  const PowerNetwork& net = c.network;
  ObservabilityReport obs = is_observable(c, in.meters);
  std::size_t flows = 0;
  for (MeterIdx p : in.meters) flows += c.meters[p].kind == MeterKind::kFlow ? 1 : 0;
  nlohmann::json result = {
      {"buses", net.bus_count()},
      {"lines", net.line_count()},
      {"n", net.state_count()},
      {"m", in.meters.size()},
      {"flow_meters", flows},
      {"injection_meters", in.meters.size() - flows},
      {"reference", net.bus_id(net.reference())},
      {"description", c.description},
      {"observable", obs.observable},
      {"unobservable_buses", detail::bus_ids(c, obs.unobservable_buses)},
      {"certificate", obs.observable ? nlohmann::json(nullptr)
                                     : detail::state_by_bus(c, obs.certificate)}};
  return {result, {}};
}

inline CommandOutput cmd_emst(const RunConfig& cfg, const Inputs& in) {
  const Case& c = in.c;
  MeasuredSubgraph g = measured_subgraph(c, in.meters);
  BasicSet basic = find_basic_set(c, in.meters);
  EmstStats stats;
  Emst t = construct_emst(c, g, basic, &stats);
  EmstValidation check = validate_emst(c, in.meters, t);
  if (!check.valid) fail(ErrorKind::kInternal, "constructed EMST failed validation");
  nlohmann::json result = to_json(c, t);
  result["basic_set"] = detail::meter_ids(c, basic.meters);
  result["spanning"] = t.vertices.size() == c.network.bus_count();
  result["valid"] = check.valid;
  result["exchange_fallback"] = stats.used_exchange_fallback;
  return {result, cfg.want_dot ? to_dot(c, t) : std::string()};
}

inline CommandOutput cmd_protect(const RunConfig& cfg, const Inputs& in) {
  const Case& c = in.c;
  if (cfg.mode != "exact" && cfg.mode != "tph" && cfg.mode != "both") {
    fail(ErrorKind::kUsage, "--mode must be exact, tph or both");
  }
  ProtectionTarget target{detail::bus_indices(c, cfg.targets)};
  nlohmann::json result = {{"targets", cfg.targets}, {"mode", cfg.mode}};
  std::string dot;
  std::optional<double> exact_cost, tph_cost;
  if (cfg.mode != "exact") {
    TphTrace rounds;
    ProtectionPlan plan = protect_tph(c, in.meters, target, &rounds);
    nlohmann::json j = to_json(c, plan);
    j["verified"] = verify_protection(c, plan, target);
    nlohmann::json r = nlohmann::json::array();
    for (const auto& round : rounds.rounds) r.push_back(detail::bus_ids(c, round));
    j["rounds"] = r;
    result["tph"] = j;
    tph_cost = plan.cost;
    if (cfg.want_dot) dot = to_dot(c, plan.witness);
  }
  if (cfg.mode != "tph") {
    ProtectionOptions opt;
    opt.time_limit_seconds = cfg.timeout;
    opt.trace = cfg.trace;
    opt.trace_every_node = cfg.trace_every_node;
    SolverStats stats;
    ProtectionPlan plan = protect_exact(c, in.meters, target, opt, &stats);
    nlohmann::json j = to_json(c, plan);
    j["verified"] = verify_protection(c, plan, target);
    j["stats"] = {{"nodes", stats.nodes},
                  {"lp_iterations", stats.lp_iterations},
                  {"cuts", stats.cuts},
                  {"best_bound", stats.best_bound},
                  {"timed_out", stats.timed_out},
                  {"incumbent_from_heuristic", stats.incumbent_from_heuristic}};
    result["exact"] = j;
    exact_cost = plan.cost;
    if (cfg.want_dot) dot = to_dot(c, plan.witness);
  }
  if (exact_cost && tph_cost) result["tph_gap"] = *tph_cost - *exact_cost;
  return {result, dot};
}

namespace detail {

// Clean and attacked estimation on one simulated measurement draw.
inline nlohmann::json estimator_demo(const Case& c, const JacobianMatrix& h,
                                     const Eigen::VectorXd& a, double sigma,
                                     std::uint64_t seed) {
  std::mt19937_64 rng = seeded_rng(seed);
  StateVector theta = random_state(c.network.state_count(), 0.2, rng);
  MeasurementVector z = simulate_measurements(h, theta, sigma, rng);
  EstimatorConfig ecfg;
  ecfg.noise_sigma = sigma;
  BddConfig bcfg{chi_square_tau(h.values.rows(), h.values.cols(), sigma)};
  EstimationResult clean = estimate_and_detect(h, z, ecfg, bcfg);
  EstimationResult attacked = estimate_and_detect(h, z + a, ecfg, bcfg);
  return {{"tau", std::isfinite(bcfg.tau) ? nlohmann::json(bcfg.tau) : nlohmann::json(nullptr)},
          {"clean_residual", clean.residual_norm},
          {"attacked_residual", attacked.residual_norm},
          {"clean_detected", clean.detected},
          {"attacked_detected", attacked.detected},
          {"theta_shift", vector_json(attacked.theta_hat - clean.theta_hat)}};
}

}  // namespace detail

inline CommandOutput cmd_attack(const RunConfig& cfg, const Inputs& in) {
  const Case& c = in.c;
  AttackTarget target;
  target.buses = detail::bus_indices(c, cfg.targets);
  target.delta = cfg.delta;
  for (const auto& id : cfg.secured) target.secured.push_back(c.require_meter(id));
  for (auto [u, v] : cfg.unknown_lines) {
    auto a = c.network.find_bus(u);
    auto b = c.network.find_bus(v);
    auto l = a && b ? c.network.find_line(*a, *b) : std::nullopt;
    if (!l) {
      fail(ErrorKind::kInvalidInput,
           "unknown line (" + std::to_string(u) + "," + std::to_string(v) + ")");
    }
    target.unknown_lines.push_back(*l);
  }
  AttackPlan plan = min_cut_attack(c, in.meters, target);
  JacobianMatrix h = build_jacobian(c, canonical_meters(c, in.meters));
  nlohmann::json result = to_json(c, plan);
  result["targets"] = cfg.targets;
  result["virtual_terminal"] = cfg.targets.size() > 1;
  result["undetectable"] = verify_undetectable(h, plan.vector);
  result["demo"] = detail::estimator_demo(c, h, plan.vector.a, cfg.sigma, cfg.seed);
  return {result, cfg.want_dot ? to_dot(c, plan) : std::string()};
}

namespace detail {

// Reads an attack vector from an attack report, a bare plan, or {"a": [...]}.
inline Eigen::VectorXd read_attack_vector(const std::string& path, std::size_t m) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kInvalidInput, "attack file is not valid JSON: " + std::string(e.what()));
  }
  if (doc.contains("result")) doc = doc["result"];
  if (!doc.contains("a") || !doc["a"].is_array()) {
    fail(ErrorKind::kInvalidInput, "attack file has no 'a' array");
  }
  std::vector<double> a;
  try {
    a = doc["a"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::kInvalidInput, "attack vector 'a' must hold numbers");
  }
  if (a.size() != m) {
    fail(ErrorKind::kInvalidInput, "attack vector has length " + std::to_string(a.size()) +
                                       ", expected " + std::to_string(m));
  }
  return Eigen::Map<Eigen::VectorXd>(a.data(), static_cast<Eigen::Index>(a.size()));
}

struct Trial {
  std::uint64_t stream = 0;
  StateVector theta;
  MeasurementVector z;
  EstimationResult clean;
  std::optional<EstimationResult> attacked;
};

}  // namespace detail

inline CommandOutput cmd_estimate(const RunConfig& cfg, const Inputs& in) {
  const Case& c = in.c;
  if (cfg.trials < 1) fail(ErrorKind::kUsage, "--trials must be at least 1");
  if (cfg.jobs < 1) fail(ErrorKind::kUsage, "--jobs must be at least 1");
  if (!(cfg.sigma >= 0.0)) fail(ErrorKind::kUsage, "--sigma must be nonnegative");
  std::vector<MeterIdx> active = canonical_meters(c, in.meters);
  JacobianMatrix h = build_jacobian(c, active);
  require_full_rank(h, c.network);
  const auto m = static_cast<std::size_t>(h.values.rows());

  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  bool attacked = false;
  if (!cfg.attack_path.empty()) {
    a = detail::read_attack_vector(cfg.attack_path, m);
    attacked = true;
  }
  if (!cfg.gross.empty()) {
    MeterIdx p = c.require_meter(cfg.gross);
    auto it = std::find(h.rows.begin(), h.rows.end(), p);
    if (it == h.rows.end()) fail(ErrorKind::kInvalidInput, "--gross meter is not active");
    a(it - h.rows.begin()) += 10.0 * std::max(cfg.sigma, kNumericTolerance);
    attacked = true;
  }

  EstimatorConfig ecfg;
  ecfg.noise_sigma = cfg.sigma;
  BddConfig bcfg{chi_square_tau(m, c.network.state_count(), cfg.sigma)};

  std::vector<detail::Trial> trials(static_cast<std::size_t>(cfg.trials));
  auto run = [&](std::size_t k) {
    detail::Trial& t = trials[k];
    t.stream = k;
    std::mt19937_64 rng = detail::seeded_rng(cfg.seed, k);
    t.theta = random_state(c.network.state_count(), 0.2, rng);
    t.z = simulate_measurements(h, t.theta, cfg.sigma, rng);
    t.clean = estimate_and_detect(h, t.z, ecfg, bcfg);
    if (attacked) t.attacked = estimate_and_detect(h, t.z + a, ecfg, bcfg);
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), trials.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < trials.size(); ++k) run(k);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t k = w; k < trials.size(); k += workers) run(k);
      });
    }
    for (auto& th : pool) th.join();
  }

  nlohmann::json result = {
      {"sigma", cfg.sigma},
      {"tau", std::isfinite(bcfg.tau) ? nlohmann::json(bcfg.tau) : nlohmann::json(nullptr)},
      {"m", m},
      {"n", c.network.state_count()},
      {"trials", cfg.trials},
      {"attacked", attacked}};
  if (attacked) result["undetectable"] = verify_undetectable(h, a);
  if (cfg.trials == 1) {
    const detail::Trial& t = trials.front();
    result["theta_true"] = detail::state_by_bus(c, t.theta);
    result["clean"] = to_json(t.clean, t.z);
    result["clean"]["theta_hat"] = detail::state_by_bus(c, t.clean.theta_hat);
    if (t.attacked) {
      result["attack"] = to_json(*t.attacked, t.z + a);
      result["attack"]["theta_hat"] = detail::state_by_bus(c, t.attacked->theta_hat);
      result["theta_shift"] =
          detail::state_by_bus(c, t.attacked->theta_hat - t.clean.theta_hat);
    }
  } else {
    std::size_t clean_alarms = 0, attack_alarms = 0;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& t : trials) {
      clean_alarms += t.clean.detected ? 1 : 0;
      nlohmann::json row = {{"trial", t.stream},
                            {"clean_residual", t.clean.residual_norm},
                            {"clean_detected", t.clean.detected}};
      if (t.attacked) {
        attack_alarms += t.attacked->detected ? 1 : 0;
        row["attacked_residual"] = t.attacked->residual_norm;
        row["attacked_detected"] = t.attacked->detected;
      }
      rows.push_back(row);
    }
    const double total = static_cast<double>(trials.size());
    result["false_alarm_rate"] = static_cast<double>(clean_alarms) / total;
    if (attacked) result["detection_rate"] = static_cast<double>(attack_alarms) / total;
    result["per_trial"] = rows;
  }
  return {result, {}};
}

inline CommandOutput run_command(const RunConfig& cfg) {
  Inputs in = load_inputs(cfg);
  if (cfg.command == "inspect") return cmd_inspect(cfg, in);
  if (cfg.command == "emst") return cmd_emst(cfg, in);
  if (cfg.command == "protect") return cmd_protect(cfg, in);
  if (cfg.command == "attack") return cmd_attack(cfg, in);
  if (cfg.command == "estimate") return cmd_estimate(cfg, in);
  fail(ErrorKind::kUsage, "unknown command '" + cfg.command + "'");
}

}  // namespace gridseer::cli
