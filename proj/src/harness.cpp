#include "snd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "snd/format.hpp"
#include "snd/rng.hpp"

namespace snd {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Oracle

namespace {

struct Split {
  std::vector<int> counts;  // per pool path
  double value = 0.0;       // reward minus path and booking cost
};

void compositions(int remaining, std::size_t k, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (k + 1 == cur.size()) {
    cur[k] = remaining;
    out.push_back(cur);
    return;
  }
  for (int c = remaining; c >= 0; --c) {
    cur[k] = c;
    compositions(remaining - c, k + 1, cur, out);
  }
}

}  // namespace

OracleResult exact_tiny_oracle(const Instance& inst, const PathPool& pool, const OracleLimits& limits) {
  const std::size_t R = inst.requests.size(), L = inst.legs.size();
  if (R > limits.max_requests)
    throw OracleSizeError("oracle: " + std::to_string(R) + " requests exceed the limit of " +
                          std::to_string(limits.max_requests));
  for (RequestId r = 0; r < R; ++r)
    if (pool.paths(r).size() > limits.max_paths)
      throw OracleSizeError("oracle: request " + inst.requests[r].name + " has " +
                            std::to_string(pool.paths(r).size()) + " paths, limit " +
                            std::to_string(limits.max_paths));
  for (const auto& l : inst.legs)
    if (l.capacity > limits.max_capacity)
      throw OracleSizeError("oracle: leg capacity " + std::to_string(l.capacity) + " exceeds the limit of " +
                            std::to_string(limits.max_capacity));

  // Per request: every integer split of d_r over its paths, best first.
  std::vector<std::vector<Split>> options(R);
  std::vector<double> bound(R + 1, 0.0);  // optimistic value of requests r..R-1
  for (RequestId r = 0; r < R; ++r) {
    const auto& req = inst.requests[r];
    const auto paths = pool.paths(r);
    std::vector<double> unit(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
      unit[i] = paths[i].cost.total();
      for (const auto& leg : paths[i].legs)
        if (leg.scheduled()) unit[i] += inst.legs[*leg.service_leg].booking_cost;
    }
    std::vector<std::vector<int>> comps;
    std::vector<int> cur(paths.size(), 0);
    compositions(req.size, 0, cur, comps);
    for (auto& c : comps) {
      Split s{std::move(c), req.reward};
      for (std::size_t i = 0; i < paths.size(); ++i) s.value -= s.counts[i] * unit[i];
      options[r].push_back(std::move(s));
    }
    std::stable_sort(options[r].begin(), options[r].end(),
                     [](const Split& a, const Split& b) { return a.value > b.value; });
  }
  for (std::size_t r = R; r-- > 0;) bound[r] = bound[r + 1] + std::max(0.0, options[r].front().value);

  OracleResult best;
  best.z = 0.0;  // rejecting everything
  std::vector<int> choice(R, -1), best_choice(R, -1);
  std::vector<int> load(L, 0);

  auto apply = [&](RequestId r, const Split& s, int sign) {
    bool ok = true;
    const auto paths = pool.paths(r);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      if (s.counts[i] == 0) continue;
      for (const auto& leg : paths[i].legs)
        if (leg.scheduled()) {
          int& q = load[*leg.service_leg];
          q += sign * s.counts[i];
          if (q > inst.legs[*leg.service_leg].capacity) ok = false;
        }
    }
    return ok;
  };

  std::size_t configs = 0;
  auto dfs = [&](auto&& self, RequestId r, double value) -> void {
    if (r == R) {
      ++configs;
      if (value > best.z + 1e-9) {
        best.z = value;
        best_choice = choice;
      }
      return;
    }
    if (value + bound[r] <= best.z + 1e-9) return;
    for (std::size_t k = 0; k < options[r].size(); ++k) {
      const Split& s = options[r][k];
      if (value + s.value + bound[r + 1] <= best.z + 1e-9) break;  // sorted: the rest is no better
      if (apply(r, s, +1)) {
        choice[r] = static_cast<int>(k);
        self(self, r + 1, value + s.value);
      }
      apply(r, s, -1);
    }
    choice[r] = -1;
    self(self, r + 1, value);
  };
  dfs(dfs, 0, 0.0);

  best.solution = Solution::empty(inst);
  best.plan.z.assign(R, {});
  best.plan.leg_load.assign(L, 0);
  for (RequestId r = 0; r < R; ++r) {
    if (best_choice[r] < 0) continue;
    best.solution.x[r] = 1;
    const Split& s = options[r][static_cast<std::size_t>(best_choice[r])];
    for (std::size_t i = 0; i < s.counts.size(); ++i) {
      if (s.counts[i] == 0) continue;
      best.plan.z[r].push_back({i, s.counts[i]});
      for (const auto& leg : pool.path(r, i).legs)
        if (leg.scheduled()) best.plan.leg_load[*leg.service_leg] += s.counts[i];
    }
  }
  best.solution.y = best.plan.leg_load;
  best.z = objective(inst, pool, best.solution, best.plan).total();
  best.configurations = configs;
  return best;
}

GeneratorParams tiny_generator_params(std::uint64_t seed, int max_requests) {
  Rng rng(derive_seed(seed, {hash_tag("tiny")}));
  GeneratorParams p;
  p.seed = seed;
  p.terminals = 4;
  p.services = uniform_int(rng, 1, 3);
  p.requests = uniform_int(rng, 1, std::max(1, max_requests));
  p.min_request_size = 1;
  p.max_request_size = 3;
  p.min_capacity = 2;
  p.max_capacity = 6;
  p.horizon = 72.0;
  p.fleet_factor = 0.5;
  p.region_width_km = 400.0;
  p.region_height_km = 300.0;
  return p;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: size mismatch");
  if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 points");
  auto ranks = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Surrogate training

std::vector<SamplePoint> harvest_samples(const Instance& inst, const PathPool& pool, const Scenario& sc,
                                         const HarvestOptions& opts) {
  if (opts.solutions < 1 || opts.sa_iterations < 1 || opts.sim_runs < 1 || opts.runs < 1)
    throw std::invalid_argument("harvest: solutions, sa_iterations, sim_runs and runs must be >= 1");

  // Stages are log-spaced: an anneal moves fast early and then settles, so
  // even spacing would mostly pick near-copies of the final solution.
  std::vector<std::pair<Solution, TransportPlan>> picked;
  EvalContext ctx{&inst, &pool, sc, std::nullopt, opts.sim_runs, true};
  for (int run = 0; run < opts.runs; ++run) {
    const int quota = opts.solutions / opts.runs + (run < opts.solutions % opts.runs ? 1 : 0);
    if (quota == 0) continue;
    std::vector<int> stages;
    for (int k = 1; k <= quota; ++k) {
      const int at = static_cast<int>(std::lround(std::pow(opts.sa_iterations, static_cast<double>(k) / quota)));
      stages.push_back(std::min(opts.sa_iterations, std::max(at, stages.empty() ? 1 : stages.back() + 1)));
    }
    SAConfig cfg;
    cfg.max_iterations = opts.sa_iterations;
    cfg.seed = derive_seed(opts.seed, {hash_tag("harvest-sa"), hash_tag(opts.tag), static_cast<std::uint64_t>(run)});
    std::size_t next = 0;
    run_sa(Variant::B, ctx, cfg, [&](int it, const Solution& sol, const VariantEval& ev) {
      while (next < stages.size() && stages[next] == it) {
        picked.emplace_back(sol, ev.det.plan);
        ++next;
      }
    });
  }

  std::vector<SamplePoint> out;
  out.reserve(picked.size());
  for (std::size_t k = 0; k < picked.size(); ++k) {
    const auto& [sol, plan] = picked[k];
    const auto eo = expected_outcome(inst, pool, sol, plan, sc,
                                     derive_seed(opts.seed, {hash_tag("harvest-sim"), hash_tag(opts.tag), k}),
                                     opts.sim_runs);
    out.push_back({compute_gamma(inst, pool, sol, plan), eo.mean.delay, opts.tag + "#" + std::to_string(k)});
  }
  return out;
}

TrainingResult train_surrogate(const std::vector<std::pair<std::string, Instance>>& instances,
                               const std::vector<Scenario>& scenarios, const HarvestOptions& opts) {
  TrainingResult res;
  for (const auto& [name, base] : instances) {
    for (const auto& sc : scenarios) {
      const Instance inst = with_fleet_factor(base, sc.fleet_factor);
      const PathPool pool = PathPool::build(inst, variant_buffer(Variant::B));
      HarvestOptions o = opts;
      o.tag = (opts.tag.empty() ? "" : opts.tag + "/") + name + "/" + sc.name;
      auto s = harvest_samples(inst, pool, sc, o);
      res.samples.insert(res.samples.end(), s.begin(), s.end());
    }
  }
  res.model = fit(res.samples);
  return res;
}

// ---------------------------------------------------------------------------
// Config

namespace {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& [k, v] : j.items())
    if (std::find(known.begin(), known.end(), k) == known.end())
      throw std::invalid_argument(where + ": unknown key '" + k + "'");
}

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_relative() && !base.empty() ? base / p : p; }

}  // namespace

SAConfig sa_config_from_json(const nlohmann::json& j, SAConfig c) {
  reject_unknown(j,
                 {"max_iterations", "no_improve_reheat", "T0", "T_reheat", "cooling_rate_init", "cooling_rate_min",
                  "cooling_rate_max", "window", "n1", "n2", "n3", "theta", "sim_runs", "seed", "split", "select_all",
                  "weights"},
                 "sa config");
  read_opt(j, "max_iterations", c.max_iterations);
  read_opt(j, "no_improve_reheat", c.no_improve_reheat);
  read_opt(j, "T0", c.T0);
  read_opt(j, "T_reheat", c.T_reheat);
  read_opt(j, "cooling_rate_init", c.cooling_rate_init);
  read_opt(j, "cooling_rate_min", c.cooling_rate_min);
  read_opt(j, "cooling_rate_max", c.cooling_rate_max);
  read_opt(j, "window", c.window);
  read_opt(j, "n1", c.n1);
  read_opt(j, "n2", c.n2);
  read_opt(j, "n3", c.n3);
  read_opt(j, "theta", c.theta);
  read_opt(j, "sim_runs", c.sim_runs);
  read_opt(j, "seed", c.seed);
  read_opt(j, "split", c.split);
  read_opt(j, "select_all", c.select_all);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    reject_unknown(w, {"toggle", "shift", "open_path", "close_leg"}, "sa weights");
    read_opt(w, "toggle", c.weights.toggle);
    read_opt(w, "shift", c.weights.shift);
    read_opt(w, "open_path", c.weights.open_path);
    read_opt(w, "close_leg", c.weights.close_leg);
  }
  if (auto errors = c.validate(); !errors.empty()) throw std::invalid_argument("sa config: " + errors.front());
  return c;
}

nlohmann::json sa_config_to_json(const SAConfig& c) {
  return {{"max_iterations", c.max_iterations},
          {"no_improve_reheat", c.no_improve_reheat},
          {"T0", c.T0},
          {"T_reheat", c.T_reheat},
          {"cooling_rate_init", c.cooling_rate_init},
          {"cooling_rate_min", c.cooling_rate_min},
          {"cooling_rate_max", c.cooling_rate_max},
          {"window", c.window},
          {"n1", c.n1},
          {"n2", c.n2},
          {"n3", c.n3},
          {"theta", c.theta},
          {"sim_runs", c.sim_runs},
          {"seed", c.seed},
          {"split", c.split},
          {"select_all", c.select_all},
          {"weights",
           {{"toggle", c.weights.toggle},
            {"shift", c.weights.shift},
            {"open_path", c.weights.open_path},
            {"close_leg", c.weights.close_leg}}}};
}

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> v;
  if (replications < 1) v.push_back("replications must be >= 1");
  if (instances.empty()) v.push_back("no instances");
  if (scenarios.empty()) v.push_back("no scenarios");
  if (variants.empty()) v.push_back("no variants");
  if (final_sim_runs < 1) v.push_back("final_sim_runs must be >= 1");
  std::set<std::string> names;
  for (const auto& s : instances) {
    if (s.name.empty()) v.push_back("instance without a name");
    if (!names.insert(s.name).second) v.push_back("duplicate instance name " + s.name);
    if (s.file.has_value() == s.generate.has_value())
      v.push_back("instance " + s.name + ": give exactly one of file or generate");
    if (s.name.find_first_of(",\"\n") != std::string::npos) v.push_back("instance name " + s.name + " has , \" or newline");
  }
  std::set<std::string> sc_names;
  for (const auto& s : scenarios) {
    for (const auto& e : validate_scenario(s)) v.push_back(e);
    if (!sc_names.insert(s.name).second) v.push_back("duplicate scenario name " + s.name);
  }
  for (const auto& e : sa.validate()) v.push_back("sa: " + e);
  return v;
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const fs::path& base) {
  reject_unknown(j,
                 {"instances", "scenarios", "variants", "replications", "seed", "out", "sa", "final_sim_runs",
                  "sim_runs", "split", "select_all", "surrogate", "training", "reference_costs", "resume"},
                 "experiment config");
  ExperimentConfig c;
  for (const auto& e : j.value("instances", nlohmann::json::array())) {
    InstanceSource s;
    if (e.is_string()) {
      s.file = resolve(base, e.get<std::string>());
      s.name = s.file->stem().string();
    } else {
      reject_unknown(e, {"name", "file", "generate"}, "instance entry");
      if (e.contains("file")) s.file = resolve(base, e.at("file").get<std::string>());
      if (e.contains("generate")) s.generate = generator_params_from_json(e.at("generate"));
      s.name = e.value("name", s.file ? s.file->stem().string() : std::string{});
    }
    c.instances.push_back(std::move(s));
  }
  for (const auto& e : j.value("scenarios", nlohmann::json::array())) {
    if (e.is_string()) {
      const auto name = e.get<std::string>();
      if (auto p = scenario_preset(name)) c.scenarios.push_back(*p);
      else c.scenarios.push_back(resolve_scenario(resolve(base, name).string()));
    } else {
      c.scenarios.push_back(scenario_from_json(e));
    }
  }
  for (const auto& e : j.value("variants", nlohmann::json::array())) c.variants.push_back(parse_variant(e.get<std::string>()));
  read_opt(j, "replications", c.replications);
  read_opt(j, "seed", c.seed);
  if (j.contains("out")) c.out = resolve(base, j.at("out").get<std::string>());
  if (j.contains("sa")) c.sa = sa_config_from_json(j.at("sa"), c.sa);
  read_opt(j, "sim_runs", c.sa.sim_runs);
  read_opt(j, "split", c.sa.split);
  read_opt(j, "select_all", c.select_all);
  read_opt(j, "final_sim_runs", c.final_sim_runs);
  if (j.contains("surrogate")) c.surrogate_file = resolve(base, j.at("surrogate").get<std::string>());
  if (j.contains("training")) {
    const auto& t = j.at("training");
    reject_unknown(t, {"solutions", "runs", "sa_iterations", "sim_runs"}, "training");
    read_opt(t, "solutions", c.training.solutions);
    read_opt(t, "runs", c.training.runs);
    read_opt(t, "sa_iterations", c.training.sa_iterations);
    read_opt(t, "sim_runs", c.training.sim_runs);
  }
  read_opt(j, "reference_costs", c.reference_costs);
  read_opt(j, "resume", c.resume);
  return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json inst = nlohmann::json::array();
  for (const auto& s : c.instances) {
    nlohmann::json e{{"name", s.name}};
    if (s.file) e["file"] = s.file->string();
    if (s.generate) e["generate"] = generator_params_to_json(*s.generate);
    inst.push_back(e);
  }
  nlohmann::json sc = nlohmann::json::array();
  for (const auto& s : c.scenarios) sc.push_back(scenario_to_json(s));
  nlohmann::json vs = nlohmann::json::array();
  for (auto v : c.variants) vs.push_back(to_string(v));
  nlohmann::json j{{"instances", inst},
                   {"scenarios", sc},
                   {"variants", vs},
                   {"replications", c.replications},
                   {"seed", c.seed},
                   {"out", c.out.string()},
                   {"sa", sa_config_to_json(c.sa)},
                   {"final_sim_runs", c.final_sim_runs},
                   {"select_all", c.select_all},
                   {"training",
                    {{"solutions", c.training.solutions},
                     {"runs", c.training.runs},
                     {"sa_iterations", c.training.sa_iterations},
                     {"sim_runs", c.training.sim_runs}}},
                   {"reference_costs", c.reference_costs},
                   {"resume", c.resume}};
  if (c.surrogate_file) j["surrogate"] = c.surrogate_file->string();
  return j;
}

// ---------------------------------------------------------------------------
// Descriptors

SolutionDescriptors describe_solution(const Instance& inst, const Solution& sol, const Evaluation& det,
                                      const ExpectedOutcome& eo) {
  SolutionDescriptors d;
  const SimOutcome& m = eo.mean;
  d.revenue = det.profit.revenue;
  d.booking = det.profit.booking;
  d.transit = m.transit;
  d.transfer = m.transfer;
  d.store = m.store;
  d.delay = m.delay;
  d.profit = d.revenue - d.booking - m.total_cost();
  d.truck_hours = m.truck_hours_loaded + m.truck_hours_empty;
  const std::size_t R = inst.requests.size();
  d.selected_share = R == 0 ? 0.0 : static_cast<double>(sol.selected_count()) / static_cast<double>(R);
  for (LegId l = 0; l < inst.legs.size(); ++l)
    d.booked_capacity += sol.y[l] * inst.distance(inst.legs[l].from, inst.legs[l].to);

  const double runs = static_cast<double>(eo.runs.size());
  double used_ratio = 0.0;
  for (const auto& run : eo.runs) {
    int road = 0, multi = 0, sched = 0;
    for (RequestId r = 0; r < R; ++r) {
      if (!sol.x[r] || run.containers[r] == 0) continue;
      if (!run.used_scheduled[r]) ++road;
      else if (run.used_road[r]) ++multi;
      else ++sched;
    }
    const int served = road + multi + sched;
    if (served > 0) {
      d.sigma_road += static_cast<double>(road) / served / runs;
      d.sigma_multimodal += static_cast<double>(multi) / served / runs;
      d.sigma_scheduled += static_cast<double>(sched) / served / runs;
    }
    if (d.booked_capacity > 0.0) {
      double used = 0.0;
      for (LegId l = 0; l < inst.legs.size(); ++l)
        used += run.leg_used[l] * inst.distance(inst.legs[l].from, inst.legs[l].to);
      used_ratio += used / d.booked_capacity / runs;
    }
  }
  // Nothing booked: nothing wasted.
  d.used_ratio = d.booked_capacity > 0.0 ? used_ratio : 1.0;
  return d;
}

// ---------------------------------------------------------------------------
// Cells

namespace {

nlohmann::json descriptors_to_json(const SolutionDescriptors& d) {
  return {{"profit", d.profit},
          {"revenue", d.revenue},
          {"booking", d.booking},
          {"transit", d.transit},
          {"transfer", d.transfer},
          {"store", d.store},
          {"delay", d.delay},
          {"selected_share", d.selected_share},
          {"sigma_road", d.sigma_road},
          {"sigma_multimodal", d.sigma_multimodal},
          {"sigma_scheduled", d.sigma_scheduled},
          {"truck_hours", d.truck_hours},
          {"booked_capacity", d.booked_capacity},
          {"used_ratio", d.used_ratio}};
}

SolutionDescriptors descriptors_from_json(const nlohmann::json& j) {
  SolutionDescriptors d;
  d.profit = j.at("profit");
  d.revenue = j.at("revenue");
  d.booking = j.at("booking");
  d.transit = j.at("transit");
  d.transfer = j.at("transfer");
  d.store = j.at("store");
  d.delay = j.at("delay");
  d.selected_share = j.at("selected_share");
  d.sigma_road = j.at("sigma_road");
  d.sigma_multimodal = j.at("sigma_multimodal");
  d.sigma_scheduled = j.at("sigma_scheduled");
  d.truck_hours = j.at("truck_hours");
  d.booked_capacity = j.at("booked_capacity");
  d.used_ratio = j.at("used_ratio");
  return d;
}

std::string file_safe(const std::string& s) {
  std::string out = s;
  for (auto& ch : out)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '.' && ch != '_') ch = '_';
  return out;
}

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

nlohmann::json cell_to_json(const CellResult& c, const std::string& config_key) {
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : c.reps)
    reps.push_back({{"replication", r.replication},
                    {"seed", r.seed},
                    {"det_z", r.det_z},
                    {"det_cost", r.det_cost},
                    {"final", descriptors_to_json(r.final)},
                    {"timing", {{"seconds", r.seconds}}}});
  return {{"instance", c.instance},
          {"scenario", c.scenario},
          {"variant", to_string(c.variant)},
          {"config_key", config_key},
          {"replications", reps}};
}

CellResult cell_from_json(const nlohmann::json& j) {
  CellResult c;
  c.instance = j.at("instance");
  c.scenario = j.at("scenario");
  c.variant = parse_variant(j.at("variant").get<std::string>());
  for (const auto& r : j.at("replications")) {
    ReplicationResult x;
    x.replication = r.at("replication");
    x.seed = r.at("seed");
    x.det_z = r.at("det_z");
    x.det_cost = r.at("det_cost");
    x.final = descriptors_from_json(r.at("final"));
    if (r.contains("timing")) x.seconds = r["timing"].value("seconds", 0.0);
    c.reps.push_back(x);
  }
  return c;
}

Report run_experiment(const ExperimentConfig& cfg) {
  if (auto errors = cfg.validate(); !errors.empty()) throw std::invalid_argument("experiment config: " + errors.front());
  fs::create_directories(cfg.out / "cells");

  std::vector<std::pair<std::string, Instance>> instances;
  for (const auto& s : cfg.instances)
    instances.emplace_back(s.name, s.file ? load_instance(*s.file) : generate_instance(*s.generate));

  const bool needs_model = std::any_of(cfg.variants.begin(), cfg.variants.end(),
                                       [](Variant v) { return v == Variant::F || v == Variant::A; });
  std::optional<SurrogateModel> model;
  if (needs_model) {
    if (cfg.surrogate_file) {
      model = load_surrogate(*cfg.surrogate_file);
    } else {
      HarvestOptions h = cfg.training;
      h.seed = derive_seed(cfg.seed, {hash_tag("training")});
      auto trained = train_surrogate(instances, cfg.scenarios, h);
      model = trained.model;
      save_surrogate(*model, cfg.out / "surrogate.json");
      std::ofstream samples(cfg.out / "surrogate_samples.csv");
      write_samples_csv(samples, trained.samples);
    }
  }

  struct Job {
    std::size_t instance, scenario;
    Variant variant;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < instances.size(); ++i)
    for (std::size_t s = 0; s < cfg.scenarios.size(); ++s)
      for (Variant v : cfg.variants) jobs.push_back({i, s, v});

  std::vector<CellResult> cells(jobs.size());
  auto run_job = [&](const Job& job) -> CellResult {
    const auto& [name, base] = instances[job.instance];
    const Scenario& sc = cfg.scenarios[job.scenario];
    const bool uses_model = job.variant == Variant::F || job.variant == Variant::A;
    nlohmann::json key_src{{"instance", instance_to_json(base)},
                           {"scenario", scenario_to_json(sc)},
                           {"variant", to_string(job.variant)},
                           {"replications", cfg.replications},
                           {"seed", cfg.seed},
                           {"sa", sa_config_to_json(cfg.sa)},
                           {"final_sim_runs", cfg.final_sim_runs},
                           {"select_all", cfg.select_all}};
    if (uses_model) key_src["surrogate"] = surrogate_to_json(*model);
    const std::string key = hex(hash_tag(key_src.dump()));
    const fs::path file = cfg.out / "cells" / (file_safe(name) + "__" + file_safe(sc.name) + "__" +
                                               to_string(job.variant) + ".json");
    if (cfg.resume && fs::exists(file)) {
      std::ifstream in(file);
      const auto j = nlohmann::json::parse(in, nullptr, false);
      if (!j.is_discarded() && j.value("config_key", "") == key) return cell_from_json(j);
    }

    const Instance inst = with_fleet_factor(base, sc.fleet_factor);
    const PathPool pool = PathPool::build(inst, variant_buffer(job.variant));
    CellResult cell{name, sc.name, job.variant, {}};
    for (int rep = 0; rep < cfg.replications; ++rep) {
      ReplicationResult r;
      r.replication = rep;
      r.seed = derive_seed(cfg.seed, {hash_tag(name), hash_tag(sc.name), hash_tag(to_string(job.variant)),
                                      static_cast<std::uint64_t>(rep)});
      SAConfig sa = cfg.sa;
      sa.seed = r.seed;
      sa.select_all = sa.select_all || cfg.select_all;
      EvalContext ctx{&inst, &pool, sc, uses_model ? model : std::nullopt, sa.sim_runs, sa.split};
      const SAResult res = run_sa(job.variant, ctx, sa);
      r.seconds = res.seconds;
      r.det_z = res.best_z;
      const Evaluation det = evaluate(inst, pool, res.best, EvalOptions{sa.split});
      r.det_cost = det.profit.booking + det.profit.operating();
      const auto eo = expected_outcome(inst, pool, res.best, det.plan, sc, derive_seed(r.seed, {hash_tag("final")}),
                                       cfg.final_sim_runs);
      r.final = describe_solution(inst, res.best, det, eo);
      cell.reps.push_back(r);
    }
    write_json(file, cell_to_json(cell, key));
    return cell;
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs.size(), std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k; (k = next++) < jobs.size();) {
      try {
        cells[k] = run_job(jobs[k]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  Report report;
  report.reference_costs = cfg.reference_costs;
  for (const auto& c : cells) report.rows.push_back(aggregate(c));
  emit_report(report, cfg.out);
  return report;
}

}  // namespace snd
