#include <doctest.h>

#include <algorithm>

#include "snd/paths.hpp"
#include "../toys.hpp"

using namespace snd;

TEST_CASE("service chains respect the transfer time") {
  for (double dep2 : {12.0, 10.5}) {
    toys::Builder b({{"A", 0.0}, {"B", 100.0}, {"C", 200.0}});
    b.service("s1", {{0, 1, 5.0, 10.0}});
    b.service("s2", {{1, 2, dep2, 15.0}});
    b.request(0, 2, 1, 100.0, 0.0, 50.0);
    b.trucks(1);
    const auto chains = enumerate_service_chains(b.build());
    const bool found = chains.count({0, 2}) > 0;
    CHECK(found == (dep2 == 12.0));
  }
}

TEST_CASE("consecutive legs of one service chain without transfer") {
  toys::Builder b({{"A", 0.0}, {"B", 100.0}, {"C", 200.0}});
  b.service("s1", {{0, 1, 5.0, 10.0}, {1, 2, 10.2, 15.0}});
  b.request(0, 2, 1, 100.0, 0.0, 50.0);
  b.trucks(1);
  const auto chains = enumerate_service_chains(b.build());
  REQUIRE(chains.count({0, 2}) == 1);
  CHECK(chains.at({0, 2}).front().legs.size() == 2);
}

namespace {

// Customer O, terminal T `km` away, train T -> D departing at 5.
Instance first_mile_toy(double km) {
  toys::Builder b({{"O", 0.0}, {"T", km}, {"D", km + 400.0}});
  b.service("s1", {{1, 2, 5.0, 20.0}});
  b.request(0, 2, 1, 1000.0, 0.0, 100.0);
  b.trucks(1);
  return b.build();
}

bool has_scheduled_path(const std::vector<Path>& paths) {
  return std::any_of(paths.begin(), paths.end(), [](const Path& p) { return p.scheduled_leg_count() > 0; });
}

}  // namespace

TEST_CASE("first-mile timing decides chain paths") {
  {
    const Instance inst = first_mile_toy(160.0);  // 2 h drive
    const auto paths = build_request_paths(inst, inst.requests[0], enumerate_service_chains(inst), 0.0);
    CHECK(has_scheduled_path(paths));
    CHECK(std::count_if(paths.begin(), paths.end(), [](const Path& p) { return p.is_direct_truck(); }) == 1);
  }
  {
    const Instance inst = first_mile_toy(384.0);  // 4.8 h drive
    const auto paths = build_request_paths(inst, inst.requests[0], enumerate_service_chains(inst), 0.10);
    CHECK_FALSE(has_scheduled_path(paths));
    CHECK(paths.size() == 1);
  }
}

TEST_CASE("tight window leaves only the direct truck") {
  toys::Builder b({{"O", 0.0}, {"T", 80.0}, {"D", 480.0}});
  b.service("s1", {{1, 2, 1.0, 6.0}});
  b.request(0, 2, 1, 1000.0, 0.0, 100.0);
  b.trucks(1);
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.0);
  CHECK(pool.paths(0).size() == 1);
  CHECK(pool.paths(0)[0].is_direct_truck());
}

TEST_CASE("path cost components") {
  toys::Builder b({{"O", 0.0}, {"D", 400.0}});
  b.request(0, 1, 1, 1000.0, 0.0, 3.0);
  b.trucks(1);
  b.inst.costs.delay_penalty_rate = 10.0;
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.0);
  const Path& direct = pool.path(0, pool.direct_index(0));
  // 0.5 load + 5 h + 0.5 unload = arrival at 6, due 3
  CHECK(direct.planned_arrival() == doctest::Approx(6.0));
  CHECK(direct.cost.delay == doctest::Approx(30.0));
  CHECK(direct.cost.transfer == 0.0);
  CHECK(direct.cost.store == 0.0);
  CHECK(direct.cost.transit == doctest::Approx(400.0));
}

TEST_CASE("two scheduled legs with truck interfaces count three transfers") {
  toys::Builder b({{"O", 0.0}, {"T1", 80.0}, {"T2", 480.0}, {"T3", 880.0}, {"D", 960.0}}, 200.0);
  b.service("s1", {{1, 2, 5.0, 10.0}});
  b.service("s2", {{2, 3, 12.0, 17.0}});
  b.request(0, 4, 1, 5000.0, 0.0, 100.0);
  b.trucks(1);
  b.inst.costs.transfer_cost = 7.0;
  b.inst.costs.storage_cost_rate = 2.0;
  const Instance inst = b.build();
  const auto paths = build_request_paths(inst, inst.requests[0], enumerate_service_chains(inst), 0.0);
  const auto it = std::find_if(paths.begin(), paths.end(), [](const Path& p) { return p.scheduled_leg_count() == 2; });
  REQUIRE(it != paths.end());
  CHECK(it->legs.size() == 4);
  CHECK(it->vehicle_count(inst) == 4);
  CHECK(it->cost.transfer == doctest::Approx(21.0));
  // Dwell at T1: truck arrives 2, ready 3, train at 5 -> 2 h. T2: arrive 10, ready 11, next 12 -> 1 h.
  CHECK(it->cost.store == doctest::Approx(2.0 * 3.0));
  CHECK(check_path_structure(inst, inst.requests[0], *it).empty());
}

TEST_CASE("filter_pool keeps paths whose legs are booked") {
  toys::Builder b({{"O", 0.0}, {"T1", 40.0}, {"T2", 440.0}, {"D", 480.0}});
  b.service("s1", {{1, 2, 5.0, 10.0}});
  b.service("s2", {{1, 2, 6.0, 11.0}});
  b.request(0, 3, 1, 5000.0, 0.0, 100.0);
  b.trucks(1);
  const Instance inst = b.build();
  const auto pool = PathPool::build(inst, 0.0);
  REQUIRE(pool.paths(0).size() == 3);

  std::vector<int> none{0, 0}, only1{1, 0}, all{1, 1};
  auto f = filter_pool(pool, none);
  REQUIRE(f[0].size() == 1);
  CHECK(pool.path(0, f[0][0]).is_direct_truck());

  f = filter_pool(pool, only1);
  CHECK(f[0].size() == 2);
  for (std::size_t i : f[0]) CHECK_FALSE(pool.path(0, i).uses_leg(1));

  f = filter_pool(pool, all);
  CHECK(f[0].size() == 3);
  CHECK(std::is_sorted(f[0].begin(), f[0].end()));
}

TEST_CASE("generated pools satisfy the path invariants") {
  GeneratorParams p;
  p.seed = 5;
  p.requests = 20;
  const Instance inst = generate_instance(p);
  for (double buffer : {0.0, 0.1}) {
    const auto pool = PathPool::build(inst, buffer);
    const auto again = PathPool::build(inst, buffer);
    for (RequestId r = 0; r < inst.requests.size(); ++r) {
      const auto paths = pool.paths(r);
      REQUIRE(!paths.empty());
      const double direct = pool.path(r, pool.direct_index(r)).cost.total();
      CHECK(paths.front().cost.total() <= direct);
      for (std::size_t i = 0; i < paths.size(); ++i) {
        CHECK(check_path_structure(inst, inst.requests[r], paths[i]).empty());
        if (i > 0) CHECK(paths[i - 1].cost.total() <= paths[i].cost.total());
        CHECK(paths[i].id == again.paths(r)[i].id);
        CHECK(paths[i].legs == again.paths(r)[i].legs);
      }
    }
    // Enlarging the booking never shrinks a filtered pool.
    std::vector<int> some(inst.legs.size(), 0), more(inst.legs.size(), 0);
    for (std::size_t l = 0; l < inst.legs.size(); ++l) {
      some[l] = l % 3 == 0;
      more[l] = l % 3 != 2;
    }
    const auto a = filter_pool(pool, some), b = filter_pool(pool, more);
    for (RequestId r = 0; r < inst.requests.size(); ++r)
      CHECK(std::includes(b[r].begin(), b[r].end(), a[r].begin(), a[r].end()));
  }
}
