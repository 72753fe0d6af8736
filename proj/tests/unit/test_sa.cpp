#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "snd/sa.hpp"
#include "../toys.hpp"

using namespace snd;

namespace {

// Five requests along a corridor with one cheap train between the terminals.
Instance corridor_toy() {
  toys::Builder b({{"O", -20.0}, {"T1", 0.0}, {"T2", 300.0}, {"D", 320.0}}, 120.0);
  b.service("rail", {{1, 2, 6.0, 12.0, 8, 5.0}, {2, 3, 12.5, 13.5, 8, 1.0}});
  for (int k = 0; k < 5; ++k) b.request(k % 2 ? 0 : 1, 2, 1 + k % 3, 600.0, 0.0, 60.0);
  b.trucks(3, 1);
  return b.build();
}

EvalContext context(const Instance& inst, const PathPool& pool) {
  EvalContext ctx;
  ctx.inst = &inst;
  ctx.pool = &pool;
  ctx.scenario = *scenario_preset("V-F-");
  return ctx;
}

}  // namespace

TEST_CASE("zero budget returns the all-truck start") {
  const Instance inst = corridor_toy();
  const auto pool = PathPool::build(inst, 0.0);
  SAConfig cfg;
  cfg.max_iterations = 0;
  const auto res = run_sa(Variant::H, context(inst, pool), cfg);
  CHECK(res.best == Solution::all_truck(inst));
  CHECK(res.trace.empty());
}

TEST_CASE("SA_H improves on the all-truck plan and is reproducible") {
  const Instance inst = corridor_toy();
  const auto pool = PathPool::build(inst, 0.0);
  SAConfig cfg;
  cfg.seed = 9;
  const auto a = run_sa(Variant::H, context(inst, pool), cfg);
  const double truck_z = evaluate(inst, pool, Solution::all_truck(inst)).profit.total();
  CHECK(a.best_z >= a.initial_z);
  CHECK(a.best_z >= truck_z);
  CHECK(a.best_z > truck_z);  // the train is worth using
  CHECK(evaluate(inst, pool, a.best).profit.total() == doctest::Approx(a.best_z));

  const auto b = run_sa(Variant::H, context(inst, pool), cfg);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].current_z == b.trace[i].current_z);
    CHECK(a.trace[i].temperature == b.trace[i].temperature);
  }
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    if (i > 0) CHECK(a.trace[i].best_z >= a.trace[i - 1].best_z);
    CHECK(a.trace[i].cooling_rate >= cfg.cooling_rate_min);
    CHECK(a.trace[i].cooling_rate <= cfg.cooling_rate_max);
  }
}

TEST_CASE("neighborhood moves") {
  const Instance inst = corridor_toy();
  const auto pool = PathPool::build(inst, 0.0);
  Rng rng(1);

  SUBCASE("toggle flips one request") {
    Solution s = Solution::all_truck(inst);
    s.x[2] = 0;
    const Solution n = propose_neighbor(inst, pool, s, {1, 0, 0, 0}, rng);
    int flips = 0;
    for (std::size_t r = 0; r < s.x.size(); ++r) flips += n.x[r] != s.x[r];
    CHECK(flips == 1);
    CHECK(n.y == s.y);
  }
  SUBCASE("shift stays within capacity") {
    Solution s = Solution::all_truck(inst);
    for (LegId l = 0; l < inst.legs.size(); ++l) s.y[l] = inst.legs[l].capacity;
    for (int k = 0; k < 200; ++k) {
      s = propose_neighbor(inst, pool, s, {0, 1, 0, 0}, rng);
      for (LegId l = 0; l < inst.legs.size(); ++l) {
        CHECK(s.y[l] >= 0);
        CHECK(s.y[l] <= inst.legs[l].capacity);
      }
    }
  }
  SUBCASE("close leg zeroes a booking") {
    Solution s = Solution::all_truck(inst);
    s.y = {3, 0};
    const Solution n = propose_neighbor(inst, pool, s, {0, 0, 0, 1}, rng);
    CHECK(n.y[0] == 0);
  }
}

TEST_CASE("open-path move books the request size on every leg") {
  // The only scheduled path of the request rides both legs of the service.
  toys::Builder b({{"T1", 0.0}, {"T2", 300.0}, {"T3", 600.0}}, 120.0);
  b.service("rail", {{0, 1, 6.0, 12.0, 8, 1.0}, {1, 2, 12.5, 18.0, 8, 1.0}});
  b.request(0, 2, 3, 2000.0, 0.0, 60.0);
  b.trucks(1);
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.0, PoolOptions{true, 64});
  std::vector<std::size_t> two_leg;
  for (std::size_t i = 0; i < pool.paths(0).size(); ++i)
    if (pool.path(0, i).scheduled_leg_count() == 2) two_leg.push_back(i);
  REQUIRE(two_leg.size() == 1);

  // Drive the move until it picks the two-leg path.
  Rng rng(4);
  bool seen = false;
  for (int k = 0; k < 50 && !seen; ++k) {
    Solution s{{1}, {2, 0}};
    const Solution n = propose_neighbor(inst, pool, s, {0, 0, 1, 0}, rng);
    if (n.y[0] != 2 && n.y[1] != 0) {
      CHECK(n.y[0] == 5);
      CHECK(n.y[1] == 3);
      seen = true;
    }
  }
  CHECK(seen);
}

TEST_CASE("Metropolis acceptance") {
  SAState s;
  s.temperature = 10.0;
  s.scale = 3.0;
  Rng rng(123);
  CHECK(accept_move(10.0, s, rng));
  int accepted = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) accepted += accept_move(-s.temperature * s.scale, s, rng);
  CHECK(std::abs(static_cast<double>(accepted) / n - 0.3679) <= 0.01);

  s.temperature = 1e-300;
  int late = 0;
  for (int i = 0; i < 1000; ++i) late += accept_move(-1.0, s, rng);
  CHECK(late == 0);
}

TEST_CASE("cooling and reheating") {
  SAConfig cfg;
  SAState s;
  s.temperature = cfg.T0;
  s.cooling_rate = cfg.cooling_rate_init;
  update_temperature(s, cfg, 1.0, true, true);
  CHECK(s.temperature == doctest::Approx(990.0));

  SAState t;
  t.temperature = cfg.T0;
  t.cooling_rate = cfg.cooling_rate_init;
  for (int i = 0; i < 99; ++i) {
    update_temperature(t, cfg, -1.0, false, false);
    CHECK(t.temperature < cfg.T_reheat + 500.0);
  }
  CHECK(t.reheats == 0);
  update_temperature(t, cfg, -1.0, false, false);
  CHECK(t.reheats == 1);
  CHECK(t.temperature == cfg.T_reheat);
  CHECK(t.since_improvement == 0);
  CHECK(t.cooling_rate <= cfg.cooling_rate_max);

  // A stream of improving moves is always accepted.
  Rng rng(5);
  for (int i = 0; i < 100; ++i) CHECK(accept_move(static_cast<double>(i), t, rng));
}

TEST_CASE("variant evaluators") {
  toys::Builder b({{"T1", 0.0}, {"T2", 300.0}}, 120.0);
  b.service("rail", {{0, 1, 6.0, 12.0, 8, 2.0}});
  b.request(0, 1, 2, 800.0, 0.0, 60.0);
  b.trucks(2);
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.1);
  EvalContext ctx = context(inst, pool);
  ctx.surrogate = SurrogateModel{{50.0, 3.0, 2.0, 1.0}};

  for (Variant v : all_variants()) CHECK(evaluate_variant(v, ctx, Solution::empty(inst), 1).z == 0.0);

  // Rail only: no truck legs, gamma 0, the prediction is a0.
  const Solution rail{{1}, {2}};
  const auto f = evaluate_variant(Variant::F, ctx, rail, 1);
  CHECK(f.gamma == 0.0);
  CHECK(f.det.profit.delay == 0.0);
  CHECK(f.z == doctest::Approx(f.det.profit.total() - 50.0));

  ctx.scenario = noise_free_scenario(1.0);
  const auto s = evaluate_variant(Variant::S, ctx, rail, 1);
  CHECK(s.z == doctest::Approx(s.det.profit.total()).epsilon(1e-9));
}

TEST_CASE("SA_F and SA_A agree until adaptation starts") {
  const Instance inst = corridor_toy();
  const auto pool = PathPool::build(inst, 0.1);
  EvalContext ctx = context(inst, pool);
  ctx.surrogate = SurrogateModel{{20.0, 100.0, 10.0, 1.0}};
  SAConfig cfg;
  cfg.max_iterations = 700;
  cfg.sim_runs = 2;
  const auto f = run_sa(Variant::F, ctx, cfg);
  const auto a = run_sa(Variant::A, ctx, cfg);
  for (int i = 0; i < cfg.n3; ++i) CHECK(f.trace[static_cast<std::size_t>(i)].current_z == a.trace[static_cast<std::size_t>(i)].current_z);
  CHECK(a.surrogate_updates == 3);  // iterations 500, 600, 700
  CHECK_FALSE(f.surrogate_updates);
}

TEST_CASE("select_all keeps every request") {
  const Instance inst = corridor_toy();
  const auto pool = PathPool::build(inst, 0.0);
  SAConfig cfg;
  cfg.select_all = true;
  cfg.max_iterations = 300;
  const auto res = run_sa(Variant::H, context(inst, pool), cfg);
  CHECK(res.best.selected_count() == inst.requests.size());
}

TEST_CASE("variant names") {
  CHECK(parse_variant("h") == Variant::H);
  CHECK(parse_variant("SA_S") == Variant::S);
  CHECK(to_string(Variant::F) == "SA_F");
  CHECK_THROWS(parse_variant("x"));
  CHECK(variant_buffer(Variant::H) == 0.0);
  CHECK(variant_buffer(Variant::B) == doctest::Approx(0.1));
}
