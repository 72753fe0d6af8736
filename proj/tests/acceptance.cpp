// Acceptance suite. Prints one [PASS]/[FAIL] line per criterion; exits
// nonzero if any selected criterion fails. Usage: snd_acceptance [N ...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "snd/harness.hpp"
#include "toys.hpp"

using namespace snd;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path work_dir(const std::string& name) {
  const fs::path p = fs::current_path() / "acceptance_work" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// 50-request synthetic instance used by criteria 6, 8, 10 and 11.
GeneratorParams fifty_requests() {
  GeneratorParams p;
  p.seed = 3;
  p.requests = 50;
  p.fleet_factor = 0.25;
  return p;
}

// ---------------------------------------------------------------------------

Verdict oracle_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  int hits = 0, exceed = 0, runs = 0;
  double worst_gap = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Instance inst = generate_instance(tiny_generator_params(seed));
    const auto pool = PathPool::build(inst, 0.0, PoolOptions{true, 8});
    const auto oracle = exact_tiny_oracle(inst, pool);
    EvalContext ctx;
    ctx.inst = &inst;
    ctx.pool = &pool;
    SAConfig cfg;
    cfg.seed = seed;
    const auto sa = run_sa(Variant::H, ctx, cfg);
    const double tol = 1e-6 * std::max(1.0, std::abs(oracle.z));
    ++runs;
    if (sa.best_z > oracle.z + tol) ++exceed;
    if (std::abs(sa.best_z - oracle.z) <= tol) ++hits;
    worst_gap = std::max(worst_gap, oracle.z - sa.best_z);
  }
  const double secs = since(t0);
  return {hits >= 45 && exceed == 0 && secs < 60.0,
          fmt("%d/%d at the optimum, %d above it, worst gap %.2f EUR, %.1f s", hits, runs, exceed, worst_gap, secs)};
}

Verdict evaluation_feasibility() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  int pairs = 0, violated = 0, over_bound = 0;
  std::size_t max_iter = 0;
  for (int k = 0; k < 200; ++k) {
    GeneratorParams p;
    p.seed = 1000 + static_cast<std::uint64_t>(k);
    p.requests = uniform_int(rng, 3, 40);
    p.services = uniform_int(rng, 5, 60);
    p.min_capacity = 1;
    p.max_capacity = uniform_int(rng, 2, 20);
    const Instance inst = generate_instance(p);
    const auto pool = PathPool::build(inst, uniform01(rng) < 0.5 ? 0.0 : 0.1);
    for (int s = 0; s < 5; ++s) {
      Solution sol = Solution::empty(inst);
      const double px = uniform01(rng);
      for (auto& x : sol.x) x = uniform01(rng) < px;
      for (LegId l = 0; l < inst.legs.size(); ++l)
        sol.y[l] = uniform01(rng) < 0.3 ? 0 : uniform_int(rng, 0, inst.legs[l].capacity);
      const bool split = s != 4;
      const auto ev = evaluate(inst, pool, sol, EvalOptions{split});
      int demand = 0;
      for (RequestId r = 0; r < inst.requests.size(); ++r) demand += inst.requests[r].size * sol.x[r];
      ++pairs;
      if (!check_constraints(inst, pool, sol, ev.plan).empty()) ++violated;
      if (ev.plan.reassign_iterations > static_cast<std::size_t>(demand)) ++over_bound;
      max_iter = std::max(max_iter, ev.plan.reassign_iterations);
    }
  }
  const double secs = since(t0);
  return {violated == 0 && over_bound == 0 && secs < 60.0,
          fmt("%d pairs, %d with violations, %d over the sum-of-demand bound (max %zu iterations), %.1f s", pairs,
              violated, over_bound, max_iter, secs)};
}

Verdict nonbinding_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  int toys_run = 0, mismatches = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; toys_run < 20; ++seed) {
    const auto params = tiny_generator_params(100 + seed, 3);
    Instance inst = generate_instance(params);
    const int demand = inst.total_demand();
    for (auto& leg : inst.legs) leg.capacity = std::max(leg.capacity, demand);
    const auto pool = PathPool::build(inst, seed % 2 ? 0.0 : 0.1, PoolOptions{false, 8});
    Rng rng(seed);
    Solution sol = Solution::empty(inst);
    for (auto& x : sol.x) x = uniform01(rng) < 0.8;
    for (auto& y : sol.y) y = demand;
    const double z = evaluate(inst, pool, sol).profit.total();

    // Exhaustive: every combination of one path per selected request.
    double booking = 0.0, revenue = 0.0;
    for (LegId l = 0; l < inst.legs.size(); ++l) booking += inst.legs[l].booking_cost * sol.y[l];
    std::vector<RequestId> sel;
    for (RequestId r = 0; r < inst.requests.size(); ++r)
      if (sol.x[r]) {
        sel.push_back(r);
        revenue += inst.requests[r].reward;
      }
    double best = -1e300;
    std::vector<std::size_t> idx(sel.size(), 0);
    for (;;) {
      double cost = 0.0;
      for (std::size_t i = 0; i < sel.size(); ++i)
        cost += inst.requests[sel[i]].size * pool.path(sel[i], idx[i]).cost.total();
      best = std::max(best, revenue - booking - cost);
      std::size_t i = 0;
      while (i < sel.size() && ++idx[i] == pool.paths(sel[i]).size()) idx[i++] = 0;
      if (i == sel.size()) break;
    }
    const double gap = std::abs(best - z);
    worst = std::max(worst, gap);
    if (gap > 1e-9 * std::max(1.0, std::abs(best))) ++mismatches;
    ++toys_run;
  }
  return {mismatches == 0, fmt("%d toys, %d mismatches, max |diff| %.3g EUR, %.2f s", toys_run, mismatches, worst,
                               since(t0))};
}

Verdict travel_time_envelope() {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = 1000000;
  const double tbar = 10.0;
  bool ok = true;
  std::string detail;
  for (const auto& name : scenario_preset_names()) {
    for (double eta : {1.0, 0.0}) {
      Scenario sc = *scenario_preset(name);
      sc.eta_max = eta;
      sc.disruption_mean_interarrival = 2.0;  // dense, so that most trips see a disruption
      Rng rng(derive_seed(17, {hash_tag(name), static_cast<std::uint64_t>(eta)}));
      const double lo = (1.0 + sc.eps_min) * tbar, hi = (1.0 + sc.eta_max) * (1.0 + sc.eps_max) * tbar;
      DisruptionTimeline tl;
      double sum = 0.0, mn = 1e300, mx = -1e300;
      for (int i = 0; i < n; ++i) {
        if (i % 1000 == 0) tl = generate_disruptions(2, 150.0, sc, rng);
        const double t = sample_travel_time(tbar, 0, 1, uniform(rng, 0.0, 150.0), tl, sc, rng);
        sum += t / tbar;
        mn = std::min(mn, t);
        mx = std::max(mx, t);
      }
      const bool inside = mn >= lo - 1e-12 && mx <= hi + 1e-12;
      bool mean_ok = true;
      if (eta == 0.0) {
        const double expect = 1.0 + (sc.eps_min + sc.eps_max) / 2.0;
        mean_ok = std::abs(sum / n - expect) <= 0.002;
        detail += fmt("%s mean %.5f vs %.5f; ", name.c_str(), sum / n, expect);
      } else {
        detail += fmt("%s [%.3f, %.3f] within [%.3f, %.3f]; ", name.c_str(), mn, mx, lo, hi);
      }
      ok = ok && inside && mean_ok;
    }
  }
  return {ok, detail + fmt("%.1f s", since(t0))};
}

Verdict disruption_process() {
  Scenario sc = *scenario_preset("V+F+");
  sc.disruption_mean_interarrival = 15.0;
  double total = 0.0;
  bool ranges = true;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Rng rng(seed);
    const auto tl = generate_disruptions(10, 150.0, sc, rng);
    total += static_cast<double>(tl.events.size());
    for (const auto& e : tl.events) {
      ranges = ranges && e.duration >= 1.0 && e.duration <= 10.0 && e.severity >= 0.0 && e.severity <= sc.eta_max &&
               e.start >= 0.0 && e.start < 150.0;
    }
  }
  const double mean = total / 1000.0;
  return {std::abs(mean - 10.0) <= 1.0 && ranges,
          fmt("mean %.3f events over 1000 seeds, durations/severities %s", mean, ranges ? "in range" : "OUT OF RANGE")};
}

Verdict conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Instance base = generate_instance(fifty_requests());
  const auto pool = PathPool::build(base, 0.1);
  // A few plans with real bookings: SA_B optima of short runs plus random ones.
  std::vector<Solution> sols;
  EvalContext ctx;
  ctx.inst = &base;
  ctx.pool = &pool;
  SAConfig cfg;
  cfg.max_iterations = 500;
  for (std::uint64_t s = 1; s <= 2; ++s) {
    cfg.seed = s;
    sols.push_back(run_sa(Variant::B, ctx, cfg).best);
  }
  Rng rng(77);
  for (int k = 0; k < 2; ++k) {
    Solution sol = Solution::all_truck(base);
    for (LegId l = 0; l < base.legs.size(); ++l) sol.y[l] = uniform_int(rng, 0, base.legs[l].capacity);
    sols.push_back(sol);
  }
  int runs = 0, lost = 0, nonmono = 0, overuse = 0, replans = 0;
  for (int k = 0; k < 200; ++k) {
    const Solution& sol = sols[static_cast<std::size_t>(k) % sols.size()];
    const Scenario sc = *scenario_preset(k % 2 ? "V+F-" : "V-F-");
    const Instance inst = with_fleet_factor(base, sc.fleet_factor);
    const auto det = evaluate(inst, pool, sol);
    const auto o = simulate(inst, pool, sol, det.plan, sc, derive_seed(606, {static_cast<std::uint64_t>(k)}));
    ++runs;
    for (RequestId r = 0; r < inst.requests.size(); ++r) {
      const int shipped = inst.requests[r].size * sol.x[r];
      if (o.containers[r] != shipped || o.delivered[r] != shipped) ++lost;
    }
    if (!o.monotone) ++nonmono;
    for (LegId l = 0; l < inst.legs.size(); ++l)
      if (o.leg_used[l] > sol.y[l]) ++overuse;
    replans += o.replanning_actions();
  }
  const double secs = since(t0);
  return {lost == 0 && nonmono == 0 && overuse == 0 && secs < 300.0,
          fmt("%d runs: %d requests with lost containers, %d non-monotone runs, %d leg overuses "
              "(%d replanning actions exercised), %.1f s",
              runs, lost, nonmono, overuse, replans, secs)};
}

Verdict noise_free_degeneracy() {
  const auto t0 = std::chrono::steady_clock::now();
  double d_delay = 0.0, d_transit = 0.0, d_transfer = 0.0, d_store = 0.0;
  int replans = 0, legs = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratorParams p = fifty_requests();
    p.seed = seed;
    const Instance base = generate_instance(p);
    const auto pool = PathPool::build(base, 0.0);
    EvalContext ctx;
    ctx.inst = &base;
    ctx.pool = &pool;
    SAConfig cfg;
    cfg.seed = seed;
    cfg.max_iterations = 1000;
    const Solution sol = run_sa(Variant::H, ctx, cfg).best;
    const auto det = evaluate(base, pool, sol);
    const Instance inst = toys::with_ample_fleet(base, pool, det.plan);
    const auto o = simulate(inst, pool, sol, det.plan, noise_free_scenario(1.0), seed);
    const auto& b = det.profit;
    d_delay = std::max(d_delay, std::abs(o.delay - b.delay));
    // Planned transit has no empty repositioning; compare loaded truck and scheduled transit.
    d_transit = std::max(d_transit, std::abs(o.transit_truck_loaded + o.transit_scheduled - b.transit));
    d_transfer = std::max(d_transfer, std::abs(o.transfer - b.transfer));
    d_store = std::max(d_store, std::abs(o.store - b.store));
    replans += o.replanning_actions();
    for (int u : o.leg_used) legs += u > 0;
  }
  const bool ok = d_delay <= 1e-6 && d_transit <= 1.0 && d_transfer <= 1.0 && d_store <= 1.0 && replans == 0;
  return {ok, fmt("max |diff| delay %.2g, transit %.3g, transfer %.3g, store %.3g EUR; %d replanning actions; "
                  "%d scheduled legs used; %.1f s",
                  d_delay, d_transit, d_transfer, d_store, replans, legs, since(t0))};
}

Verdict gamma_delay_correlation() {
  const auto t0 = std::chrono::steady_clock::now();
  const Scenario sc = *scenario_preset("V-F-");
  const Instance inst = with_fleet_factor(generate_instance(fifty_requests()), sc.fleet_factor);
  const auto pool = PathPool::build(inst, 0.1);
  HarvestOptions opts;
  opts.solutions = 200;
  opts.seed = 8;
  opts.tag = "c8";
  const auto samples = harvest_samples(inst, pool, sc, opts);
  std::vector<double> g, c;
  for (const auto& s : samples) {
    g.push_back(s.gamma);
    c.push_back(s.cost);
  }
  const double rho = spearman(g, c);
  return {samples.size() >= 200 && rho >= 0.5,
          fmt("%zu solutions, %d trucks, Spearman %.3f, %.1f s", samples.size(), inst.fleet.truck_count, rho,
              since(t0))};
}

Verdict surrogate_recovery() {
  std::vector<SamplePoint> s;
  for (int i = 0; i < 40; ++i) {
    const double g = 0.05 * i;
    s.push_back({g, 5 + 2 * g + g * g * g, ""});
  }
  const auto m = fit(s);
  const std::array<double, 4> truth{5, 2, 0, 1};
  double worst_rel = 0.0;
  for (std::size_t k = 0; k < 4; ++k)
    worst_rel = std::max(worst_rel, std::abs(m.a[k] - truth[k]) / std::max(1.0, std::abs(truth[k])));

  Rng rng(99);
  const double theta = 0.1;
  int updates = 0, breaches = 0;
  double worst_step = 0.0;
  for (int k = 0; k < 20000; ++k) {
    SurrogateModel cur;
    for (auto& a : cur.a) a = uniform(rng, -50.0, 50.0);
    std::vector<SamplePoint> fresh;
    const int n = uniform_int(rng, 1, 8);
    for (int i = 0; i < n; ++i) fresh.push_back({uniform(rng, 0.0, 3.0), uniform(rng, 0.0, 5000.0), ""});
    if (k % 3 == 0)
      for (auto& f : fresh) f.gamma = std::round(f.gamma);  // few distinct values: scaling branch
    SurrogateModel next;
    try {
      next = adaptive_update(cur, fresh, theta);
    } catch (const FitError&) {
      continue;
    }
    ++updates;
    for (std::size_t i = 0; i < 4; ++i) {
      const double step = std::abs(next.a[i] - cur.a[i]) / std::abs(cur.a[i]);
      worst_step = std::max(worst_step, step);
      if (step > theta + 1e-12) ++breaches;
    }
  }
  return {worst_rel <= 1e-6 && breaches == 0 && updates > 10000,
          fmt("max relative coefficient error %.2g; %d updates, max relative step %.6f, %d above %.2f", worst_rel,
              updates, worst_step, breaches, theta)};
}

struct TrendResult {
  std::map<std::string, ReportRow> rows;
  double seconds = 0.0;
};

const TrendResult& trend_experiment() {
  static const TrendResult result = [] {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.instances.push_back({"G50", std::nullopt, fifty_requests()});
    cfg.scenarios.push_back(*scenario_preset("V-F-"));
    cfg.variants = {Variant::H, Variant::F, Variant::S};
    cfg.replications = 10;
    cfg.seed = 2025;
    cfg.final_sim_runs = 10;
    cfg.resume = false;
    cfg.out = work_dir("trend");
    const Report report = run_experiment(cfg);
    TrendResult r;
    for (const auto& row : report.rows) r.rows[row.variant] = row;
    r.seconds = since(t0);
    return r;
  }();
  return result;
}

Verdict small_fleet_trend() {
  const auto& t = trend_experiment();
  const double h = t.rows.at("SA_H").profit_mean, f = t.rows.at("SA_F").profit_mean,
               s = t.rows.at("SA_S").profit_mean;
  const double gap = (s - f) / std::abs(s);
  const bool ok = s >= f && f >= h && gap <= 0.15 && h < f && h < s;
  return {ok, fmt("mean profit SA_S %.0f, SA_F %.0f, SA_H %.0f; (S-F)/|S| = %.1f%%; %.0f s", s, f, h, 100 * gap,
                  t.seconds)};
}

Verdict speedup() {
  const auto& t = trend_experiment();
  const double f = t.rows.at("SA_F").cpu_total, s = t.rows.at("SA_S").cpu_total;
  return {f * 10.0 <= s, fmt("SA_F %.2f s vs SA_S %.2f s total (ratio 1/%.0f)", f, s, s / std::max(f, 1e-9))};
}

// ---- CLI determinism ------------------------------------------------------

void strip_timing(nlohmann::json& j) {
  if (j.is_object()) {
    for (const char* k : {"timing", "seconds"}) j.erase(k);
    for (auto& [k, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

std::string comparable(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  if (p.extension() != ".json") return ss.str();
  auto j = nlohmann::json::parse(ss.str());
  strip_timing(j);
  return j.dump();
}

bool run_cli_session(const fs::path& dir) {
  fs::create_directories(dir);
  save_instance(generate_instance(tiny_generator_params(4)), dir / "tiny.json");
  const std::string snd = SND_CLI_PATH;
  const std::vector<std::string> cmds{
      "generate --requests 12 --services 20 --seed 5 --out inst.json",
      "solve --instance inst.json --variant h --seed 3 --iterations 300 --out solve_h --trace",
      "solve --instance inst.json --variant s --seed 3 --iterations 100 --sim-runs 2 --out solve_s --no-split",
      "fit-surrogate --instance inst.json --seed 3 --solutions 30 --iterations 300 --sim-runs 2 --out surr",
      "solve --instance inst.json --variant f --surrogate surr/surrogate.json --seed 3 --iterations 300 --out solve_f",
      "simulate --instance inst.json --solution solve_h/solution.json --scenario V+F- --seed 4 --sim-runs 3 "
      "--trace --out sim",
      "oracle --instance tiny.json --out oracle",
      "experiment --instance inst.json --variant h --variant f --replications 2 --iterations 200 --sim-runs 2 "
      "--seed 9 --out exp",
  };
  for (const auto& c : cmds) {
    const std::string line = "cd \"" + dir.string() + "\" && \"" + snd + "\" " + c + " > cli.log 2>&1";
    if (std::system(line.c_str()) != 0) {
      std::printf("  command failed: snd %s\n", c.c_str());
      return false;
    }
  }
  return true;
}

Verdict cli_determinism() {
  const fs::path root = work_dir("cli");
  if (!run_cli_session(root / "a") || !run_cli_session(root / "b")) return {false, "a CLI command failed"};
  int files = 0, differ = 0;
  std::string first_diff;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto ext = e.path().extension();
    const auto name = e.path().filename().string();
    if ((ext != ".csv" && ext != ".json") || name == "timing.csv" || name == "timing.json") continue;
    const fs::path rel = fs::relative(e.path(), root / "a");
    ++files;
    if (!fs::exists(root / "b" / rel) || comparable(e.path()) != comparable(root / "b" / rel)) {
      ++differ;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  return {files > 10 && differ == 0,
          fmt("%d CSV/JSON outputs compared, %d differ%s%s", files, differ, first_diff.empty() ? "" : ": ",
              first_diff.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"oracle optimality on tiny instances", oracle_optimality},
      {"evaluation feasibility", evaluation_feasibility},
      {"non-binding capacity exactness", nonbinding_exactness},
      {"travel-time envelope", travel_time_envelope},
      {"disruption process", disruption_process},
      {"simulation conservation and capacity", conservation},
      {"noise-free degeneracy", noise_free_degeneracy},
      {"gamma-delay rank correlation", gamma_delay_correlation},
      {"surrogate fit and capped updates", surrogate_recovery},
      {"small-fleet profit trend", small_fleet_trend},
      {"surrogate speedup", speedup},
      {"CLI determinism", cli_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("[%s] %d %s: %s\n", v.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
