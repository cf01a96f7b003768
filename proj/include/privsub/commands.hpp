#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "privsub/adversary.hpp"
#include "privsub/async_engine.hpp"
#include "privsub/discoverability.hpp"
#include "privsub/errors.hpp"
#include "privsub/io.hpp"
#include "privsub/metrics.hpp"
#include "privsub/scenario.hpp"
#include "privsub/sync_engine.hpp"

namespace privsub {

enum class Command { RunSync, RunAsync, AttackConsensus, AttackDssoa, AttackAsync, AnalyzeDiscoverability };

inline std::optional<Command> parse_command(const std::string& s) {
  if (s == "run-sync") return Command::RunSync;
  if (s == "run-async") return Command::RunAsync;
  if (s == "attack-consensus") return Command::AttackConsensus;
  if (s == "attack-dssoa") return Command::AttackDssoa;
  if (s == "attack-async") return Command::AttackAsync;
  if (s == "analyze-discoverability") return Command::AnalyzeDiscoverability;
  return std::nullopt;
}

inline const char* command_name(Command c) {
  switch (c) {
    case Command::RunSync: return "run-sync";
    case Command::RunAsync: return "run-async";
    case Command::AttackConsensus: return "attack-consensus";
    case Command::AttackDssoa: return "attack-dssoa";
    case Command::AttackAsync: return "attack-async";
    case Command::AnalyzeDiscoverability: return "analyze-discoverability";
  }
  return "?";
}

enum ExitCode { kExitOk = 0, kExitInternal = 1, kExitConfiguration = 2, kExitVerdict = 3 };

struct ExecuteOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<long> horizon;
  // Attack an existing visible trace file instead of simulating one.
  std::optional<std::string> trace_path;
};

struct ExecuteResult {
  int exit_code = kExitOk;
  json report;
};

namespace cmd_detail {

using scenario_detail::to_json;

inline json quantiles(std::vector<double> v) {
  return {{"median", median(v)}, {"p90", quantile(v, 0.9)}, {"max", quantile(v, 1.0)}, {"count", v.size()}};
}

inline json recovery_to_json(const RecoveryReport& rep) {
  json j;
  json windows = json::array();
  for (std::size_t i = 0; i < rep.windows.size(); ++i) {
    const auto& w = rep.windows[i];
    json e = {{"window", w.window}, {"start", w.start}, {"conditioning", w.conditioning}, {"singular", w.singular}};
    if (rep.errors) e["frobenius_error"] = rep.errors->window_errors[i];
    windows.push_back(e);
  }
  j["windows"] = windows;
  j["verdict"] = rep.recovered() ? "recovered" : "singular";
  if (rep.final_estimate) {
    const auto& w = *rep.final_estimate;
    j["final_window"] = rep.final_window;
    j["final_estimate"] = {{"A", to_json(Eigen::MatrixXd(w.leftCols(w.cols() - 1)))},
                           {"b", to_json(Eigen::VectorXd(w.col(w.cols() - 1)))}};
  }
  if (rep.errors && rep.errors->subgradient_errors.size()) {
    const auto& e = rep.errors->subgradient_errors;
    std::vector<double> all(e.data(), e.data() + e.size());
    j["subgradient_error"] = quantiles(all);
    const Eigen::Index late = std::min<Eigen::Index>(50, e.rows());
    const Eigen::MatrixXd tail = e.bottomRows(late);
    j["subgradient_error_last50"] = quantiles(std::vector<double>(tail.data(), tail.data() + tail.size()));
  }
  return j;
}

inline void write_trace_files(const std::filesystem::path& dir, const Scenario& s, const Trace& t) {
  std::ostringstream vis, ora;
  write_visible_csv(vis, t.visible);
  write_oracle_csv(ora, t.oracle, t.visible);
  write_text((dir / s.outputs.trace).string(), vis.str());
  write_text((dir / s.outputs.oracle).string(), ora.str());
}

inline json summary_json(const Trace& t, const std::vector<ObjectiveSpec>& all_specs) {
  json j;
  j["final_disagreement"] = disagreement(t.visible.states.back());
  std::vector<ObjectiveSpec> specs;
  for (int a : t.visible.agents) specs.push_back(all_specs[static_cast<std::size_t>(a)]);
  try {
    const auto opt = sum_minimizer(specs, std::nullopt);
    const auto sum = summarize(t.visible, specs, opt.point, opt.value);
    j["optimum"] = to_json(opt.point);
    j["optimal_value"] = opt.value;
    j["final_gap"] = sum.final_gap;
    j["final_max_error"] = sum.final_max_error;
  } catch (const ConfigurationError&) {
  }
  j["final_average"] = to_json(average(t.visible.states.back()));
  return j;
}

}  // namespace cmd_detail

inline ExecuteResult execute(const Scenario& scenario_in, Command command, const ExecuteOptions& opt = {}) {
  using namespace cmd_detail;
  Scenario s = scenario_in;
  if (opt.seed) s.seed = *opt.seed;
  if (opt.horizon) s.horizon = *opt.horizon;
  const std::filesystem::path dir(opt.out_dir);
  std::filesystem::create_directories(dir);

  ExecuteResult res;
  json& rep = res.report;
  rep["command"] = command_name(command);
  rep["seed"] = s.seed;

  const bool attack = command == Command::AttackConsensus || command == Command::AttackDssoa ||
                      command == Command::AttackAsync || command == Command::AnalyzeDiscoverability;
  if (attack && !s.malicious)
    throw ConfigurationError(std::string(command_name(command)) + " needs a 'malicious' agent in the scenario");
  if (opt.trace_path && !(command == Command::AttackConsensus || command == Command::AttackDssoa ||
                          command == Command::AttackAsync))
    throw ConfigurationError("--trace only applies to attack commands");

  auto real = realize(s);
  const int n = s.size();
  const int m = s.dimension;

  switch (command) {
    case Command::RunSync:
    case Command::RunAsync: {
      auto input = realize_input(s.input, n, m, s.horizon, real.rng);
      if (input && !s.malicious) throw ConfigurationError("an injected input needs a 'malicious' agent");
      Trace t;
      if (command == Command::RunSync) {
        t = run_sync(SyncProblem{real.network, s.stepsize}, s.horizon, input);
      } else {
        AsyncProblem p{real.network, required_schedules(s, input.has_value()), *real.projection, s.window};
        t = run_async(p, s.horizon, input);
        std::vector<UpdateSchedule> sim;
        for (int a : t.visible.agents) sim.push_back(p.schedules[static_cast<std::size_t>(a)]);
        const long window = s.window.value_or(default_window(sim));
        const auto reg = verify_update_regularity(sim, window, s.horizon);
        rep["window"] = window;
        rep["updates_per_window"] = reg.updates_per_window;
        if (reg.validated_horizon) rep["validated_horizon"] = *reg.validated_horizon;
        double wmax = 0.0;
        const long last_start = (s.horizon / window - 1) * window;
        for (long k = std::max(0L, last_start); last_start >= 0 && k < last_start + window; ++k)
          wmax = std::max(wmax, t.oracle.omega[static_cast<std::size_t>(k)].rowwise().norm().maxCoeff());
        rep["final_window_max_omega"] = wmax;
      }
      rep["horizon"] = s.horizon;
      rep["summary"] = summary_json(t, s.objectives);
      if (input) {
        const auto part = partition(real.network.weights, s.malicious_index());
        try {
          std::vector<ObjectiveSpec> specs;
          for (int a : t.visible.agents) specs.push_back(s.objectives[static_cast<std::size_t>(a)]);
          const double L = subgradient_bound(specs, real.projection);
          const double bound = input_boundedness_bound(t.visible.states.front(), max_abs_input(t.visible),
                                                       command == Command::RunSync ? s.stepsize.cap() : 1.0, L, part.A);
          rep["boundedness"] = {{"bound", bound}, {"max_abs_state", max_abs_state(t.visible)}};
        } catch (const NumericVerdict&) {
          rep["boundedness"] = "inapplicable";
        }
      }
      write_trace_files(dir, s, t);
      break;
    }

    case Command::AnalyzeDiscoverability: {
      const auto part = partition(real.network.weights, s.malicious_index());
      json coords = json::array();
      bool all = true;
      for (int c = 0; c < m; ++c) {
        Eigen::VectorXd x0(part.regular_count());
        const auto ids = part.regular_agents();
        for (std::size_t r = 0; r < ids.size(); ++r) x0(static_cast<Eigen::Index>(r)) = real.network.initial(ids[r], c);
        const auto v = analyze_discoverability(part, x0);
        json e = {{"coord", c},
                  {"span_rank", v.span_rank},
                  {"controllability_rank", v.controllability_rank},
                  {"required_rank", part.regular_count()},
                  {"discoverable", v.discoverable}};
        if (v.certificate)
          e["certificate"] = {{"A", to_json(v.certificate->A)}, {"b", to_json(v.certificate->b)}};
        if (!v.discoverable && !v.certificate_constructible) e["certificate"] = "not-constructible";
        all = all && v.discoverable;
        coords.push_back(e);
      }
      rep["coordinates"] = coords;
      rep["A"] = to_json(part.A);
      rep["b"] = to_json(part.b);
      rep["verdict"] = all ? "discoverable" : "not discoverable";
      if (!all) res.exit_code = kExitVerdict;
      break;
    }

    case Command::AttackConsensus:
    case Command::AttackDssoa:
    case Command::AttackAsync: {
      const auto part = partition(real.network.weights, s.malicious_index());
      const long len = 2L * n - 1;
      std::optional<Trace> sim;
      VisibleTrace visible;
      long horizon = command == Command::AttackConsensus ? len : s.horizon;
      if (horizon < len) throw ConfigurationError("horizon must cover at least one probe window of length " + std::to_string(len));
      if (opt.trace_path) {
        visible = read_visible_csv(*opt.trace_path);
      } else {
        auto input = realize_input(Scenario::Input{"probe", 1.0, {}}, n, m, horizon, real.rng);
        NetworkProblem net = real.network;
        if (command == Command::AttackConsensus)
          net.objectives.assign(static_cast<std::size_t>(n), ObjectiveSpec::constant(0.0, m));
        if (command == Command::AttackAsync) {
          AsyncProblem p{net, required_schedules(s, true), *real.projection, s.window};
          sim = run_async(p, horizon, input);
        } else {
          sim = run_sync(SyncProblem{net, s.stepsize}, horizon, input);
        }
        visible = sim->visible;
        write_trace_files(dir, s, *sim);
      }
      const ProbeSchedule probe{n, visible.horizon() / len};
      RecoveryReport r = command == Command::AttackConsensus ? attack_consensus(visible)
                         : command == Command::AttackDssoa  ? attack_dssoa(visible, probe, s.stepsize)
                                                            : attack_async(visible, probe, s.stepsize);
      if (sim) score_report(r, part.stacked(), sim->oracle.subgradients);
      else score_report(r, part.stacked());
      rep["horizon"] = visible.horizon();
      rep["recovery"] = recovery_to_json(r);
      if (!r.recovered()) res.exit_code = kExitVerdict;
      break;
    }
  }

  write_text((dir / s.outputs.report).string(), rep.dump(2) + "\n");
  return res;
}

}  // namespace privsub
