// snd: command-line front end.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "snd/format.hpp"
#include "snd/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::vector<std::string> instance;
  std::vector<std::string> scenario;
  std::vector<std::string> variant;
  std::uint64_t seed = 1;
  int replications = 30;
  std::string out;
  bool no_split = false;
  int sim_runs = 5;
  bool trace = false;
  std::string config;
  std::string surrogate;
  std::string solution;
  int iterations = 2000;
  int max_paths = 64;
  int solutions = 50;
  // generate
  int requests = 50;
  int terminals = 10;
  int services = 82;
  double fleet_factor = 0.5;
};

void write_text(const fs::path& p, const std::string& s) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << s;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  return json::parse(in);
}

// Options missing on the command line are taken from a flat JSON object
// whose keys are the long flag names (dashes or underscores).
void apply_config(CLI::App& cmd, Options& o, const json& j) {
  auto set = [&](const std::string& flag, auto& field) {
    if (cmd.count("--" + flag) > 0) return;
    std::string alt = flag;
    for (auto& ch : alt)
      if (ch == '-') ch = '_';
    for (const auto& key : {flag, alt}) {
      if (!j.contains(key)) continue;
      using T = std::decay_t<decltype(field)>;
      if constexpr (std::is_same_v<T, std::vector<std::string>>) {
        field = j[key].is_array() ? j[key].template get<T>() : T{j[key].template get<std::string>()};
      } else {
        field = j[key].template get<T>();
      }
      return;
    }
  };
  set("instance", o.instance);
  set("scenario", o.scenario);
  set("variant", o.variant);
  set("seed", o.seed);
  set("replications", o.replications);
  set("out", o.out);
  set("no-split", o.no_split);
  set("sim-runs", o.sim_runs);
  set("trace", o.trace);
  set("surrogate", o.surrogate);
  set("solution", o.solution);
  set("iterations", o.iterations);
  set("max-paths", o.max_paths);
  set("solutions", o.solutions);
  set("requests", o.requests);
  set("terminals", o.terminals);
  set("services", o.services);
  set("fleet-factor", o.fleet_factor);
}

const std::string& one(const std::vector<std::string>& v, const char* what) {
  if (v.size() != 1) throw std::invalid_argument(std::string("expected exactly one ") + what);
  return v.front();
}

snd::Instance instance_for(const Options& o, const std::optional<snd::Scenario>& sc) {
  snd::Instance inst = snd::load_instance(one(o.instance, "--instance"));
  return sc ? snd::with_fleet_factor(inst, sc->fleet_factor) : inst;
}

std::optional<snd::Scenario> scenario_for(const Options& o) {
  if (o.scenario.empty()) return std::nullopt;
  return snd::resolve_scenario(one(o.scenario, "--scenario"));
}

snd::Variant variant_for(const Options& o) {
  return o.variant.empty() ? snd::Variant::H : snd::parse_variant(one(o.variant, "--variant"));
}

fs::path out_dir(const Options& o, const char* fallback) { return o.out.empty() ? fs::path(fallback) : fs::path(o.out); }

int cmd_generate(const Options& o) {
  snd::GeneratorParams p;
  p.seed = o.seed;
  p.requests = o.requests;
  p.terminals = o.terminals;
  p.services = o.services;
  p.fleet_factor = o.fleet_factor;
  const fs::path out = o.out.empty() ? fs::path("instance.json") : fs::path(o.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  snd::save_instance(snd::generate_instance(p), out);
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

int cmd_solve(const Options& o) {
  const auto sc = scenario_for(o);
  const snd::Instance inst = instance_for(o, sc);
  const snd::Variant v = variant_for(o);
  snd::PoolOptions po;
  po.max_paths_per_request = static_cast<std::size_t>(o.max_paths);
  const snd::PathPool pool = snd::PathPool::build(inst, snd::variant_buffer(v), po);

  snd::SAConfig cfg;
  cfg.seed = o.seed;
  cfg.split = !o.no_split;
  cfg.sim_runs = o.sim_runs;
  cfg.max_iterations = o.iterations;
  snd::EvalContext ctx{&inst, &pool, sc.value_or(snd::Scenario{}), std::nullopt, cfg.sim_runs, cfg.split};
  if (!o.surrogate.empty()) ctx.surrogate = snd::load_surrogate(o.surrogate);

  const snd::SAResult res = snd::run_sa(v, ctx, cfg);
  const snd::Evaluation det = snd::evaluate(inst, pool, res.best, snd::EvalOptions{cfg.split});
  const fs::path dir = out_dir(o, "solve_out");
  json summary = snd::sa_summary_json(v, res, false);
  summary["seed"] = o.seed;
  summary["deterministic"] = snd::breakdown_to_json(det.profit);
  write_json(dir / "solution.json", summary);
  write_json(dir / "timing.json", {{"seconds", res.seconds}});
  {
    std::ostringstream os;
    snd::write_plan_csv(os, inst, pool, det.plan);
    write_text(dir / "plan.csv", os.str());
  }
  if (o.trace) {
    std::ostringstream os;
    snd::write_sa_trace_csv(os, res);
    write_text(dir / "sa_trace.csv", os.str());
  }
  std::cout << snd::to_string(v) << " best Z " << snd::num(res.best_z) << " (" << res.best.selected_count() << "/"
            << inst.requests.size() << " requests)\n";
  return 0;
}

int cmd_simulate(const Options& o) {
  const auto sc = scenario_for(o).value_or(snd::Scenario{});
  const snd::Instance inst = instance_for(o, sc);
  const snd::Variant v = variant_for(o);
  snd::PoolOptions po;
  po.max_paths_per_request = static_cast<std::size_t>(o.max_paths);
  const snd::PathPool pool = snd::PathPool::build(inst, snd::variant_buffer(v), po);

  snd::Solution sol = snd::Solution::all_truck(inst);
  if (!o.solution.empty()) {
    const json j = read_json(o.solution);
    sol = snd::solution_from_json(j.contains("best") ? j.at("best") : j);
  }
  const snd::Evaluation det = snd::evaluate(inst, pool, sol, snd::EvalOptions{!o.no_split});
  const auto eo = snd::expected_outcome(inst, pool, sol, det.plan, sc, o.seed, o.sim_runs);
  const fs::path dir = out_dir(o, "simulate_out");

  json runs = json::array();
  for (const auto& r : eo.runs) runs.push_back(snd::outcome_to_json(r));
  write_json(dir / "outcome.json", {{"scenario", snd::scenario_to_json(sc)},
                                    {"seed", o.seed},
                                    {"deterministic", snd::breakdown_to_json(det.profit)},
                                    {"mean", snd::outcome_to_json(eo.mean)},
                                    {"runs", runs}});
  if (o.trace) {
    snd::SimOptions so;
    so.trace = true;
    const auto traced = snd::simulate(inst, pool, sol, det.plan, sc, snd::derive_seed(o.seed, {0}), so);
    std::ostringstream os;
    snd::write_trace_csv(os, traced);
    write_text(dir / "trace.csv", os.str());
  }
  std::cout << "mean simulated cost " << snd::num(eo.mean.total_cost()) << " over " << eo.runs.size() << " runs\n";
  return 0;
}

int cmd_fit_surrogate(const Options& o) {
  std::vector<std::pair<std::string, snd::Instance>> instances;
  for (const auto& f : o.instance) instances.emplace_back(fs::path(f).stem().string(), snd::load_instance(f));
  if (instances.empty()) throw std::invalid_argument("fit-surrogate needs at least one --instance");
  std::vector<snd::Scenario> scenarios;
  for (const auto& s : o.scenario) scenarios.push_back(snd::resolve_scenario(s));
  if (scenarios.empty()) scenarios.push_back(*snd::scenario_preset("V-F-"));

  snd::HarvestOptions h;
  h.seed = o.seed;
  h.sim_runs = o.sim_runs;
  h.sa_iterations = o.iterations;
  h.solutions = o.solutions;
  const auto trained = snd::train_surrogate(instances, scenarios, h);
  const fs::path dir = out_dir(o, "surrogate_out");
  fs::create_directories(dir);
  snd::save_surrogate(trained.model, dir / "surrogate.json");
  std::ostringstream os;
  snd::write_samples_csv(os, trained.samples);
  write_text(dir / "samples.csv", os.str());
  std::cout << "fitted on " << trained.samples.size() << " samples, rms residual " << snd::num(trained.model.residual)
            << '\n';
  return 0;
}

int cmd_experiment(CLI::App& cmd, const Options& o, const json& file_cfg, const fs::path& base) {
  snd::ExperimentConfig c = file_cfg.is_null() ? snd::ExperimentConfig{} : snd::experiment_config_from_json(file_cfg, base);
  if (cmd.count("--instance") > 0) {
    c.instances.clear();
    for (const auto& f : o.instance) c.instances.push_back({fs::path(f).stem().string(), fs::path(f), std::nullopt});
  }
  if (cmd.count("--scenario") > 0) {
    c.scenarios.clear();
    for (const auto& s : o.scenario) c.scenarios.push_back(snd::resolve_scenario(s));
  }
  if (cmd.count("--variant") > 0) {
    c.variants.clear();
    for (const auto& v : o.variant) c.variants.push_back(snd::parse_variant(v));
  }
  if (cmd.count("--seed") > 0 || file_cfg.is_null()) c.seed = o.seed;
  if (cmd.count("--replications") > 0 || file_cfg.is_null()) c.replications = o.replications;
  if (cmd.count("--out") > 0) c.out = o.out;
  else if (file_cfg.is_null()) c.out = "experiment_out";
  if (cmd.count("--no-split") > 0) c.sa.split = false;
  if (cmd.count("--sim-runs") > 0) c.sa.sim_runs = o.sim_runs;
  if (cmd.count("--iterations") > 0) c.sa.max_iterations = o.iterations;
  if (cmd.count("--surrogate") > 0) c.surrogate_file = o.surrogate;
  if (c.scenarios.empty()) c.scenarios.push_back(*snd::scenario_preset("V-F-"));
  if (c.variants.empty()) c.variants = {snd::Variant::H, snd::Variant::F, snd::Variant::S};

  const snd::Report report = snd::run_experiment(c);
  write_json(c.out / "config.json", snd::experiment_config_to_json(c));
  for (const auto& r : report.rows)
    std::cout << r.instance << ' ' << r.scenario << ' ' << r.variant << " profit " << snd::num(r.profit_mean) << '\n';
  return 0;
}

int cmd_oracle(const Options& o) {
  const auto sc = scenario_for(o);
  const snd::Instance inst = instance_for(o, sc);
  snd::PoolOptions po;
  po.max_paths_per_request = static_cast<std::size_t>(std::min(o.max_paths, 8));
  const snd::PathPool pool = snd::PathPool::build(inst, 0.0, po);
  const auto res = snd::exact_tiny_oracle(inst, pool);
  const fs::path dir = out_dir(o, "oracle_out");
  write_json(dir / "oracle.json", {{"z", res.z},
                                   {"configurations", res.configurations},
                                   {"solution", snd::solution_to_json(res.solution)},
                                   {"profit", snd::breakdown_to_json(snd::objective(inst, pool, res.solution, res.plan))}});
  std::ostringstream os;
  snd::write_plan_csv(os, inst, pool, res.plan);
  write_text(dir / "plan.csv", os.str());
  std::cout << "optimal Z " << snd::num(res.z) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic service network design toolkit"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--instance", o.instance, "Instance JSON file(s)");
    c->add_option("--scenario", o.scenario, "Scenario preset (V-F+, V+F+, V-F-, V+F-) or JSON file");
    c->add_option("--variant", o.variant, "h|b|f|a|s");
    c->add_option("--seed", o.seed, "Master seed");
    c->add_option("--replications", o.replications, "SA replications per cell");
    c->add_option("--out", o.out, "Output file or directory");
    c->add_flag("--no-split", o.no_split, "Move whole requests in the reassignment loop");
    c->add_option("--sim-runs", o.sim_runs, "Simulation runs per evaluation");
    c->add_flag("--trace", o.trace, "Write traces");
    c->add_option("--config", o.config, "JSON config; command-line flags win");
    c->add_option("--surrogate", o.surrogate, "Surrogate model JSON");
    c->add_option("--iterations", o.iterations, "SA iterations");
    c->add_option("--max-paths", o.max_paths, "Pool paths kept per request");
  };

  auto* gen = app.add_subcommand("generate", "Generate a synthetic instance");
  add_common(gen);
  gen->add_option("--requests", o.requests, "Number of requests");
  gen->add_option("--terminals", o.terminals, "Number of terminals");
  gen->add_option("--services", o.services, "Number of scheduled departures");
  gen->add_option("--fleet-factor", o.fleet_factor, "Trucks per request");
  auto* solve = app.add_subcommand("solve", "Run one SA variant");
  add_common(solve);
  auto* sim = app.add_subcommand("simulate", "Simulate a solution");
  add_common(sim);
  sim->add_option("--solution", o.solution, "Solution JSON (x, y) or a solve summary");
  auto* fitc = app.add_subcommand("fit-surrogate", "Harvest samples and fit the delay surrogate");
  add_common(fitc);
  fitc->add_option("--solutions", o.solutions, "Solutions harvested per instance and scenario");
  auto* exp = app.add_subcommand("experiment", "Run an experiment grid");
  add_common(exp);
  auto* orc = app.add_subcommand("oracle", "Exhaustive optimum of a tiny instance");
  add_common(orc);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* cmd = app.get_subcommands().front();
    json file_cfg;
    fs::path base;
    if (!o.config.empty()) {
      file_cfg = read_json(o.config);
      base = fs::path(o.config).parent_path();
      if (cmd != exp) apply_config(*cmd, o, file_cfg);
    }
    if (cmd == gen) return cmd_generate(o);
    if (cmd == solve) return cmd_solve(o);
    if (cmd == sim) return cmd_simulate(o);
    if (cmd == fitc) return cmd_fit_surrogate(o);
    if (cmd == exp) return cmd_experiment(*cmd, o, file_cfg, base);
    if (cmd == orc) return cmd_oracle(o);
  } catch (const snd::InstanceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& d : e.details()) std::cerr << "  " << d << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
