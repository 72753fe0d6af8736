#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snd/model.hpp"
#include "snd/paths.hpp"
#include "snd/rng.hpp"
#include "snd/tactical.hpp"

namespace snd {

struct Disruption {
  NodeId from = 0;
  NodeId to = 0;
  double start = 0.0;
  double duration = 0.0;
  double severity = 0.0;
  bool operator==(const Disruption&) const = default;
};

struct DisruptionTimeline {
  std::vector<Disruption> events;

  /// Largest severity active on (i, j) at time t; 0 when none.
  double severity(NodeId i, NodeId j, double t) const;
  bool operator==(const DisruptionTimeline&) const = default;
};

double effective_horizon(const Instance& inst, const Scenario& sc);

/// One Poisson stream over the horizon; each event hits a uniformly drawn
/// directed arc.
DisruptionTimeline generate_disruptions(const Instance& inst, const Scenario& sc, Rng& rng);
DisruptionTimeline generate_disruptions(std::size_t node_count, double horizon, const Scenario& sc, Rng& rng);

/// Beta(2,2) draw scaled to [eps_min, eps_max].
double sample_epsilon(const Scenario& sc, Rng& rng);

/// (1 + severity) (1 + eps) tbar, with eps drawn per trip.
double sample_travel_time(double tbar, NodeId i, NodeId j, double departure, const DisruptionTimeline& timeline,
                          const Scenario& sc, Rng& rng);

enum class TaskKind { first_mile, last_mile, direct, fallback };

/// One truck leg of one container.
struct TruckTask {
  std::size_t id = 0;
  std::size_t container = 0;
  NodeId from = 0;
  NodeId to = 0;
  double earliest = 0.0;
  double latest = std::numeric_limits<double>::infinity();  // latest load start
  TaskKind kind = TaskKind::direct;
};

/// Where and when a truck is next free, under expected travel times.
struct TruckAnchor {
  NodeId node = 0;
  double time = 0.0;
};

struct Insertion {
  std::size_t truck = 0;
  std::size_t position = 0;
  double added_km = 0.0;
  double shift = 0.0;
};

/// Routing view used by best_insertion: per truck an anchor and the ordered
/// unstarted tasks.
struct FleetView {
  const Instance* inst = nullptr;
  double buffer = 0.0;
  double horizon = 0.0;
  std::vector<NodeId> depots;
  std::vector<TruckAnchor> anchors;
  std::vector<std::vector<const TruckTask*>> routes;

  double expected_travel(NodeId i, NodeId j) const;
  /// Projected load-start times of a route; nullopt if any window breaks or
  /// the depot return misses the horizon.
  std::optional<std::vector<double>> project(std::size_t truck, const std::vector<const TruckTask*>& route,
                                             bool enforce_return = true) const;
  double route_km(std::size_t truck, const std::vector<const TruckTask*>& route) const;
};

/// Cheapest feasible insertion by added km, then total start shift, truck id
/// and position. `skip_truck` is excluded from the search.
std::optional<Insertion> best_insertion(const FleetView& fleet, const TruckTask& task,
                                        std::optional<std::size_t> skip_truck = std::nullopt);

struct TraceRow {
  double time = 0.0;
  std::string kind;
  std::size_t entity = 0;
  std::string detail;
};

struct SimOptions {
  bool trace = false;
  /// Replaces the sampled disruption timeline when set.
  std::optional<DisruptionTimeline> disruptions;
};

struct SimOutcome {
  // Realized cost components, EUR.
  double transit = 0.0;
  double transfer = 0.0;
  double store = 0.0;
  double delay = 0.0;
  double transit_truck_loaded = 0.0;
  double transit_truck_empty = 0.0;
  double transit_scheduled = 0.0;

  double truck_hours_loaded = 0.0;
  double truck_hours_empty = 0.0;
  double truck_km_loaded = 0.0;
  double truck_km_empty = 0.0;

  std::vector<double> delivery_time;  // per request, last container; NaN if unselected
  std::vector<double> lateness;       // per request, hours of the latest container
  std::vector<int> delivered;         // per request, containers delivered
  std::vector<int> containers;        // per request, containers shipped
  std::vector<int> used_road;         // per request: any truck leg ridden
  std::vector<int> used_scheduled;    // per request: any scheduled leg ridden
  std::vector<int> leg_used;          // per service leg, containers carried

  int reassignments = 0;  // tasks moved to another truck
  int reroutes = 0;       // containers put on another pooled path
  int fallbacks = 0;      // direct-truck fallbacks
  std::size_t events = 0;
  bool monotone = true;
  std::vector<TraceRow> trace;

  double total_cost() const { return transit + transfer + store + delay; }
  int replanning_actions() const { return reassignments + reroutes + fallbacks; }
};

SimOutcome simulate(const Instance& inst, const PathPool& pool, const Solution& sol, const TransportPlan& plan,
                    const Scenario& sc, std::uint64_t seed, const SimOptions& opts = {});

struct ExpectedOutcome {
  SimOutcome mean;  // cost and hour fields averaged; per-request vectors from run 0
  std::vector<SimOutcome> runs;
};

/// Mean of `runs` simulations; run k uses derive_seed(seed, {k}).
ExpectedOutcome expected_outcome(const Instance& inst, const PathPool& pool, const Solution& sol,
                                 const TransportPlan& plan, const Scenario& sc, std::uint64_t seed, int runs = 5);

nlohmann::json outcome_to_json(const SimOutcome& o);
void write_trace_csv(std::ostream& out, const SimOutcome& o);

}  // namespace snd
