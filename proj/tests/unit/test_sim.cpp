#include <doctest.h>

#include <cmath>

#include "snd/sim.hpp"
#include "../toys.hpp"

using namespace snd;

TEST_CASE("travel time substitution") {
  DisruptionTimeline tl;
  tl.events.push_back({0, 1, 0.0, 5.0, 1.0});
  Rng rng(1);
  Scenario hi;
  hi.eps_min = hi.eps_max = 0.25;
  CHECK(sample_travel_time(10.0, 0, 1, 2.0, tl, hi, rng) == doctest::Approx(25.0));
  Scenario lo;
  lo.eps_min = lo.eps_max = -0.1;
  CHECK(sample_travel_time(10.0, 0, 1, 7.0, tl, lo, rng) == doctest::Approx(9.0));
  CHECK(sample_travel_time(10.0, 1, 0, 2.0, tl, lo, rng) == doctest::Approx(9.0));  // other direction
  CHECK(sample_travel_time(10.0, 0, 1, 7.0, tl, noise_free_scenario(1.0), rng) == 10.0);
}

TEST_CASE("epsilon is symmetric around the midpoint") {
  Scenario sc = *scenario_preset("V+F+");
  Rng rng(2);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double e = sample_epsilon(sc, rng);
    REQUIRE(e >= sc.eps_min);
    REQUIRE(e <= sc.eps_max);
    sum += e;
  }
  CHECK(sum / n == doctest::Approx((sc.eps_min + sc.eps_max) / 2).epsilon(0.01));
}

TEST_CASE("disruption timelines") {
  Scenario sc = *scenario_preset("V-F-");
  sc.eta_max = 0.0;
  Rng a(7), b(7);
  const auto ta = generate_disruptions(10, 150.0, sc, a);
  const auto tb = generate_disruptions(10, 150.0, sc, b);
  CHECK(ta == tb);
  CHECK(!ta.events.empty());
  for (const auto& e : ta.events) {
    CHECK(e.severity == 0.0);
    CHECK(e.from != e.to);
    CHECK(e.start < 150.0);
  }
}

namespace {

// Depot A at 0, B at 100, C at 300.
struct LineFleet {
  Instance inst;
  FleetView view;
  explicit LineFleet(int trucks) {
    toys::Builder b({{"A", 0.0}, {"B", 100.0}, {"C", 300.0}}, 100.0);
    b.request(1, 2, 1, 100.0, 0.0, 50.0);
    b.trucks(trucks);
    inst = b.build();
    view.inst = &inst;
    view.horizon = inst.horizon;
    view.depots.assign(static_cast<std::size_t>(trucks), 0);
    view.anchors.assign(static_cast<std::size_t>(trucks), TruckAnchor{0, 0.0});
    view.routes.assign(static_cast<std::size_t>(trucks), {});
  }
};

}  // namespace

TEST_CASE("insertion into an empty route") {
  LineFleet f(1);
  f.view.anchors[0] = {1, 0.0};  // idle at the pickup
  TruckTask t{0, 0, 1, 2, 0.0, 10.0, TaskKind::direct};
  const auto ins = best_insertion(f.view, t);
  REQUIRE(ins);
  // leg 200 km plus the longer way home (300 instead of 100)
  CHECK(ins->added_km == doctest::Approx(200.0 + 200.0));
  CHECK(ins->position == 0);
  CHECK(ins->shift == 0.0);
}

TEST_CASE("insertion keeps later windows") {
  LineFleet f(1);
  // Task u is due to start at 2 at B; anything before it would make it late.
  TruckTask u{1, 1, 1, 2, 2.0, 2.0, TaskKind::first_mile};
  f.view.routes[0] = {&u};
  TruckTask t{2, 0, 0, 1, 0.0, 100.0, TaskKind::direct};
  const auto ins = best_insertion(f.view, t);
  REQUIRE(ins);
  CHECK(ins->position == 1);

  TruckTask tight{3, 2, 0, 1, 0.0, 0.5, TaskKind::direct};
  CHECK_FALSE(best_insertion(f.view, tight));
}

TEST_CASE("saturated fleet offers no insertion") {
  LineFleet f(2);
  for (auto& a : f.view.anchors) a = {0, 40.0};
  TruckTask t{0, 0, 1, 2, 0.0, 10.0, TaskKind::direct};
  CHECK_FALSE(best_insertion(f.view, t));
  CHECK_FALSE(best_insertion(f.view, t, 0));
}

namespace {

// O -> T by truck (2 h), then one of two trains T -> D.
struct RailToy {
  Instance inst;
  PathPool pool;
  Solution sol;
  Evaluation det;
  RailToy() {
    toys::Builder b({{"O", 0.0}, {"T", 160.0}, {"D", 560.0}}, 60.0);
    b.service("early", {{1, 2, 4.5, 10.0, 4, 1.0}});
    b.service("late", {{1, 2, 8.0, 14.0, 4, 1.0}});
    b.request(0, 2, 1, 2000.0, 0.0, 10.0);
    b.trucks(1);
    b.inst.costs.delay_penalty_rate = 10.0;
    inst = b.build();
    pool = PathPool::build(inst, 0.0);
    sol = Solution{{1}, {1, 1}};
    det = evaluate(inst, pool, sol);
  }
};

}  // namespace

TEST_CASE("noise-free run follows the plan") {
  RailToy t;
  REQUIRE(t.det.plan.leg_load[0] == 1);
  const auto o = simulate(t.inst, t.pool, t.sol, t.det.plan, noise_free_scenario(1.0), 1);
  CHECK(o.replanning_actions() == 0);
  CHECK(o.leg_used[0] == 1);
  CHECK(o.delay == doctest::Approx(t.det.profit.delay));
  CHECK(o.delivered[0] == 1);
  CHECK(o.transit_scheduled + o.transit_truck_loaded == doctest::Approx(t.det.profit.transit));
  CHECK(o.monotone);
}

TEST_CASE("missed first train is rebooked on the later one") {
  RailToy t;
  SimOptions opts;
  opts.disruptions = DisruptionTimeline{{{0, 1, 0.0, 10.0, 1.0}}};
  opts.trace = true;
  const auto o = simulate(t.inst, t.pool, t.sol, t.det.plan, noise_free_scenario(1.0), 1, opts);
  CHECK(o.leg_used[0] == 0);
  CHECK(o.leg_used[1] == 1);
  CHECK(o.reroutes >= 1);
  CHECK(o.delivered[0] == 1);
  CHECK(o.delay == doctest::Approx(40.0));  // 4 h late at 10 per hour
  CHECK(!o.trace.empty());
}

TEST_CASE("without a spare booking the container falls back to a truck") {
  RailToy t;
  Solution only_early{{1}, {1, 0}};
  const auto det = evaluate(t.inst, t.pool, only_early);
  SimOptions opts;
  opts.disruptions = DisruptionTimeline{{{0, 1, 0.0, 10.0, 1.0}}};
  const auto o = simulate(t.inst, t.pool, only_early, det.plan, noise_free_scenario(1.0), 1, opts);
  CHECK(o.leg_used[0] == 0);
  CHECK(o.leg_used[1] == 0);
  CHECK(o.replanning_actions() >= 1);
  CHECK(o.delay > 0.0);
  CHECK(o.delivered[0] == 1);
}

TEST_CASE("one truck for two distant simultaneous trips") {
  toys::Builder b({{"A", 0.0}, {"B", 200.0}, {"C", 600.0}, {"D", 800.0}}, 100.0);
  b.request(0, 1, 1, 1000.0, 0.0, 4.0);
  b.request(2, 3, 1, 1000.0, 0.0, 4.0);
  b.trucks(1);
  b.inst.costs.delay_penalty_rate = 10.0;
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.0);
  const Solution sol = Solution::all_truck(inst);
  const auto det = evaluate(inst, pool, sol);
  CHECK(det.profit.delay == 0.0);
  const auto o = simulate(inst, pool, sol, det.plan, noise_free_scenario(1.0), 1);
  CHECK((o.delay > 0.0 || o.replanning_actions() >= 1));
  CHECK(o.delivered[0] == 1);
  CHECK(o.delivered[1] == 1);
}

TEST_CASE("ample fleet needs no replanning") {
  GeneratorParams p;
  p.seed = 4;
  p.requests = 20;
  const Instance base = generate_instance(p);
  const auto pool = PathPool::build(base, 0.0);
  Solution sol = Solution::all_truck(base);
  for (LegId l = 0; l < base.legs.size(); ++l) sol.y[l] = base.legs[l].capacity;
  const auto det = evaluate(base, pool, sol);
  const Instance inst = toys::with_ample_fleet(base, pool, det.plan);
  const auto o = simulate(inst, pool, sol, det.plan, noise_free_scenario(1.0), 1);
  CHECK(o.reassignments == 0);
  CHECK(o.fallbacks == 0);
  CHECK(o.delay == doctest::Approx(det.profit.delay));
  CHECK(o.transfer == doctest::Approx(det.profit.transfer));
  CHECK(o.transit_truck_loaded + o.transit_scheduled == doctest::Approx(det.profit.transit));
}

TEST_CASE("expected outcome averages independent runs") {
  GeneratorParams p;
  p.seed = 6;
  p.requests = 15;
  const Instance inst = generate_instance(p);
  const auto pool = PathPool::build(inst, 0.1);
  Solution sol = Solution::all_truck(inst);
  for (LegId l = 0; l < inst.legs.size(); ++l) sol.y[l] = inst.legs[l].capacity / 2;
  const auto det = evaluate(inst, pool, sol);
  const Scenario sc = *scenario_preset("V+F-");
  const Instance small = with_fleet_factor(inst, sc.fleet_factor);

  const auto eo = expected_outcome(small, pool, sol, det.plan, sc, 42, 2);
  REQUIRE(eo.runs.size() == 2);
  const auto r0 = simulate(small, pool, sol, det.plan, sc, derive_seed(42, {0}));
  const auto r1 = simulate(small, pool, sol, det.plan, sc, derive_seed(42, {1}));
  CHECK(eo.mean.delay == doctest::Approx((r0.delay + r1.delay) / 2));
  CHECK(eo.mean.transit == doctest::Approx((r0.transit + r1.transit) / 2));
  CHECK(eo.mean.store == doctest::Approx((r0.store + r1.store) / 2));
  CHECK(eo.mean.transfer == doctest::Approx((r0.transfer + r1.transfer) / 2));

  const auto one = expected_outcome(small, pool, sol, det.plan, sc, 42, 1);
  CHECK(one.mean.total_cost() == doctest::Approx(r0.total_cost()));

  const auto quiet = expected_outcome(small, pool, sol, det.plan, noise_free_scenario(0.25), 42, 3);
  CHECK(quiet.runs[0].total_cost() == quiet.runs[1].total_cost());
  CHECK(quiet.runs[1].total_cost() == quiet.runs[2].total_cost());
}
