#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace snd {

using NodeId = std::size_t;
using LegId = std::size_t;
using RequestId = std::size_t;

enum class Mode { truck, train, barge };
enum class NodeKind { terminal, customer };

std::string_view to_string(Mode m);
std::string_view to_string(NodeKind k);
Mode parse_mode(std::string_view s);

struct Node {
  std::string name;
  NodeKind kind = NodeKind::terminal;
  bool operator==(const Node&) const = default;
};

/// One timetable segment of a scheduled service. Times are hours from the
/// start of the planning horizon.
struct ServiceLeg {
  std::size_t service = 0;
  NodeId from = 0;
  NodeId to = 0;
  double departure = 0.0;
  double arrival = 0.0;
  int capacity = 0;            // e_l, containers
  double booking_cost = 0.0;   // g_l, EUR per container
  bool operator==(const ServiceLeg&) const = default;
};

struct Service {
  std::string name;
  Mode mode = Mode::train;
  std::vector<LegId> legs;  // indices into Instance::legs, in travel order
  bool operator==(const Service&) const = default;
};

struct Request {
  std::string name;
  NodeId origin = 0;
  NodeId destination = 0;
  int size = 1;          // d_r, containers
  double reward = 0.0;   // b_r, EUR
  double release = 0.0;  // hard earliest pickup
  double due = 0.0;      // soft latest delivery
  bool operator==(const Request&) const = default;
};

struct FleetConfig {
  int truck_count = 0;
  std::vector<NodeId> depots;  // one per truck
  double speed_kmh = 60.0;
  double load_time = 0.5;
  double unload_time = 0.5;
  double cost_per_km = 1.0;
  double cost_per_hour = 30.0;
  bool operator==(const FleetConfig&) const = default;
};

struct CostParams {
  double transfer_cost = 0.0;        // EUR per container per transshipment
  double storage_cost_rate = 0.0;    // EUR per container-hour at terminals
  double delay_penalty_rate = 0.0;   // EUR per container-hour late
  double train_cost_per_km = 0.0;    // EUR per container-km
  double barge_cost_per_km = 0.0;    // EUR per container-km

  double scheduled_rate(Mode m) const {
    return m == Mode::barge ? barge_cost_per_km : train_cost_per_km;
  }
  bool operator==(const CostParams&) const = default;
};

/// Travel-time variability and fleet-size setting of one experiment cell.
struct Scenario {
  std::string name = "custom";
  double eps_min = -0.1;
  double eps_max = 0.1;
  double eta_max = 1.0;
  double disruption_mean_interarrival = 15.0;
  double disruption_duration_min = 1.0;
  double disruption_duration_max = 10.0;
  double fleet_factor = 0.5;
  double horizon = 0.0;  // 0 = use the instance horizon

  bool operator==(const Scenario&) const = default;
};

/// The four fleet/variability presets: "V-F+", "V+F+", "V-F-", "V+F-".
std::optional<Scenario> scenario_preset(std::string_view name);
const std::vector<std::string>& scenario_preset_names();
/// A scenario without any travel-time noise or disruptions.
Scenario noise_free_scenario(double fleet_factor);
std::vector<std::string> validate_scenario(const Scenario& s);

struct Instance {
  std::vector<Node> nodes;
  std::vector<double> distances;  // row-major |N| x |N|, km
  std::vector<Service> services;
  std::vector<ServiceLeg> legs;
  std::vector<Request> requests;
  FleetConfig fleet;
  CostParams costs;
  double horizon = 0.0;
  double transfer_time = 1.0;  // handling hours between two vehicles

  std::size_t node_count() const { return nodes.size(); }
  double distance(NodeId i, NodeId j) const {
    return distances[i * nodes.size() + j];
  }
  Mode leg_mode(LegId l) const { return services[legs[l].service].mode; }
  int total_demand() const;

  bool operator==(const Instance&) const = default;
};

class InstanceError : public std::runtime_error {
 public:
  explicit InstanceError(std::string what, std::vector<std::string> details = {});
  const std::vector<std::string>& details() const { return details_; }

 private:
  std::vector<std::string> details_;
};

/// Baseline truck travel time: distance / speed. Throws std::out_of_range
/// for unknown nodes.
double baseline_travel_time(const Instance& inst, NodeId i, NodeId j);

/// Returns one message per broken invariant; empty iff the instance is valid.
std::vector<std::string> validate_instance(const Instance& inst);

/// ceil(requests * kappa), with a tolerance so exact products do not round up.
int fleet_size_for(std::size_t request_count, double fleet_factor);

/// Copy of `inst` whose fleet is resized to `count`; depots keep cycling
/// through the existing depot pattern (terminals in order when empty).
Instance with_fleet_size(const Instance& inst, int count);
Instance with_fleet_factor(const Instance& inst, double fleet_factor);

// Serialization. Throws InstanceError on parse, schema and invariant errors.
Instance instance_from_json(const nlohmann::json& j);
nlohmann::json instance_to_json(const Instance& inst);
Instance load_instance(const std::filesystem::path& path);
void save_instance(const Instance& inst, const std::filesystem::path& path);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
/// Accepts a preset name or a path to a scenario JSON file.
Scenario resolve_scenario(const std::string& name_or_path);

struct GeneratorParams {
  int terminals = 10;
  int customers = 0;
  int services = 82;
  int requests = 50;
  double fleet_factor = 0.5;
  std::uint64_t seed = 1;
  double horizon = 168.0;          // span of releases and timetables, h
  int min_request_size = 1;
  int max_request_size = 8;
  double min_od_km = 0.0;          // request OD distance filter
  double max_od_km = 1e9;
  int min_capacity = 8;
  int max_capacity = 30;
  double region_width_km = 600.0;
  double region_height_km = 400.0;
};

std::vector<std::string> validate_generator_params(const GeneratorParams& p);
/// Synthetic instance shaped like a 10-terminal multimodal network.
/// Pure function of `p`. Throws std::invalid_argument on inconsistent params.
Instance generate_instance(const GeneratorParams& p);

nlohmann::json generator_params_to_json(const GeneratorParams& p);
GeneratorParams generator_params_from_json(const nlohmann::json& j);

}  // namespace snd
