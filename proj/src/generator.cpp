#include <algorithm>
#include <cmath>
#include <numeric>

#include "snd/model.hpp"
#include "snd/rng.hpp"

namespace snd {

namespace {

// Cost and speed constants of the synthetic network. Rates are per container
// for scheduled modes and per truck (one container per truck) for road.
constexpr double kTruckSpeed = 65.0;
constexpr double kTruckPerKm = 1.1;
constexpr double kTruckPerHour = 35.0;
constexpr double kHandling = 0.5;
constexpr double kTrainSpeed = 50.0;
constexpr double kBargeSpeed = 14.0;
constexpr double kTrainPerKm = 0.10;
constexpr double kBargePerKm = 0.06;
constexpr double kTrainBookingPerKm = 0.12;
constexpr double kBargeBookingPerKm = 0.07;
constexpr double kRoadCircuity = 1.25;
constexpr double kHorizonSlack = 48.0;

double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace

std::vector<std::string> validate_generator_params(const GeneratorParams& p) {
  std::vector<std::string> v;
  if (p.terminals < 2) v.push_back("generator: need at least 2 terminals");
  if (p.customers < 0) v.push_back("generator: negative customer count");
  if (p.services < 0) v.push_back("generator: negative service count");
  if (p.requests < 0) v.push_back("generator: negative request count");
  if (!(p.fleet_factor > 0.0)) v.push_back("generator: fleet_factor must be > 0");
  if (!(p.horizon > 0.0)) v.push_back("generator: horizon must be > 0");
  if (p.min_request_size < 1 || p.max_request_size < p.min_request_size)
    v.push_back("generator: bad request size range");
  if (p.min_capacity < 0 || p.max_capacity < p.min_capacity)
    v.push_back("generator: bad capacity range");
  if (p.min_od_km > p.max_od_km) v.push_back("generator: bad OD distance range");
  if (!(p.region_width_km > 0.0 && p.region_height_km > 0.0))
    v.push_back("generator: region must have positive size");
  return v;
}

Instance generate_instance(const GeneratorParams& p) {
  if (auto errors = validate_generator_params(p); !errors.empty()) {
    std::string msg = "inconsistent generator params:";
    for (const auto& e : errors) msg += " " + e + ";";
    throw std::invalid_argument(msg);
  }
  Rng rng(derive_seed(p.seed, {hash_tag("generate_instance")}));
  Instance inst;
  inst.horizon = p.horizon + kHorizonSlack;
  inst.transfer_time = 1.0;

  // Node positions; terminals are kept apart so that no road leg is trivial.
  const int n = p.terminals + p.customers;
  std::vector<std::pair<double, double>> pos;
  for (int i = 0; i < n; ++i) {
    std::pair<double, double> xy;
    for (int attempt = 0; attempt < 200; ++attempt) {
      xy = {uniform(rng, 0.0, p.region_width_km), uniform(rng, 0.0, p.region_height_km)};
      bool far = true;
      for (const auto& q : pos)
        if (std::hypot(xy.first - q.first, xy.second - q.second) < 30.0) far = false;
      if (far) break;
    }
    pos.push_back(xy);
    Node node;
    node.kind = i < p.terminals ? NodeKind::terminal : NodeKind::customer;
    node.name = (i < p.terminals ? "T" : "C") + std::to_string(i < p.terminals ? i : i - p.terminals);
    inst.nodes.push_back(node);
  }
  inst.distances.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) {
        const double d = std::hypot(pos[i].first - pos[k].first, pos[i].second - pos[k].second);
        inst.distances[static_cast<std::size_t>(i) * n + k] = std::max(1.0, round_to(d * kRoadCircuity, 0.1));
      }

  inst.fleet.speed_kmh = kTruckSpeed;
  inst.fleet.load_time = kHandling;
  inst.fleet.unload_time = kHandling;
  inst.fleet.cost_per_km = kTruckPerKm;
  inst.fleet.cost_per_hour = kTruckPerHour;
  inst.costs.transfer_cost = 15.0;
  inst.costs.storage_cost_rate = 1.0;
  inst.costs.delay_penalty_rate = 40.0;
  inst.costs.train_cost_per_km = kTrainPerKm;
  inst.costs.barge_cost_per_km = kBargePerKm;

  // Services are departures of a few recurring lines, so that every corridor
  // is served several times across the horizon.
  struct Line {
    Mode mode;
    std::vector<NodeId> stops;
  };
  std::vector<Line> lines;
  const int line_count = p.services == 0 ? 0 : std::max(1, (p.services + 5) / 6);
  for (int k = 0; k < line_count; ++k) {
    Line line;
    line.mode = uniform01(rng) < 0.6 ? Mode::train : Mode::barge;
    const double u = uniform01(rng);
    const int legs = std::min(p.terminals - 1, u < 0.55 ? 1 : (u < 0.9 ? 2 : 3));
    std::vector<NodeId> terms(static_cast<std::size_t>(p.terminals));
    std::iota(terms.begin(), terms.end(), NodeId{0});
    std::shuffle(terms.begin(), terms.end(), rng);
    line.stops.assign(terms.begin(), terms.begin() + legs + 1);
    lines.push_back(std::move(line));
  }
  std::vector<int> per_line(lines.size(), 0);
  for (int s = 0; s < p.services; ++s) per_line[static_cast<std::size_t>(s) % lines.size()]++;

  std::vector<int> departures_done(lines.size(), 0);
  for (int s = 0; s < p.services; ++s) {
    const std::size_t li = static_cast<std::size_t>(s) % lines.size();
    const Line& line = lines[li];
    const bool train = line.mode == Mode::train;
    const double speed = train ? kTrainSpeed : kBargeSpeed;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < line.stops.size(); ++k)
      total += inst.distance(line.stops[k], line.stops[k + 1]) / speed + 1.0 + (k > 0 ? 1.0 : 0.0);
    const double latest_start = std::max(0.0, inst.horizon - 1.0 - total);
    const double window = std::min(latest_start, 0.85 * p.horizon);
    const double period = window / std::max(1, per_line[li]);
    double dep = round_to(std::min(latest_start, period * departures_done[li]++ + uniform(rng, 0.0, period)), 0.25);

    Service svc;
    svc.name = "S" + std::to_string(s);
    svc.mode = line.mode;
    for (std::size_t k = 0; k + 1 < line.stops.size(); ++k) {
      ServiceLeg leg;
      leg.service = inst.services.size();
      leg.from = line.stops[k];
      leg.to = line.stops[k + 1];
      const double km = inst.distance(leg.from, leg.to);
      leg.departure = dep;
      leg.arrival = round_to(dep + km / speed + 1.0, 0.25);
      leg.capacity = uniform_int(rng, p.min_capacity, p.max_capacity);
      leg.booking_cost = std::round(km * (train ? kTrainBookingPerKm : kBargeBookingPerKm) *
                                    uniform(rng, 0.9, 1.1));
      svc.legs.push_back(inst.legs.size());
      inst.legs.push_back(leg);
      dep = leg.arrival + 1.0;
    }
    inst.services.push_back(std::move(svc));
  }

  for (int r = 0; r < p.requests; ++r) {
    Request req;
    req.name = "R" + std::to_string(r);
    bool found = false;
    for (int attempt = 0; attempt < 2000 && !found; ++attempt) {
      req.origin = static_cast<NodeId>(uniform_int(rng, 0, n - 1));
      req.destination = static_cast<NodeId>(uniform_int(rng, 0, n - 1));
      if (req.origin == req.destination) continue;
      const double km = inst.distance(req.origin, req.destination);
      found = km >= p.min_od_km && km <= p.max_od_km;
    }
    if (!found) throw std::invalid_argument("generator: no node pair satisfies the OD distance range");
    const double km = inst.distance(req.origin, req.destination);
    const double drive = km / kTruckSpeed;
    req.size = uniform_int(rng, p.min_request_size, p.max_request_size);
    req.release = round_to(uniform(rng, 0.0, 0.6 * p.horizon), 0.25);
    req.due = round_to(req.release + (drive + 2 * kHandling) * uniform(rng, 1.6, 3.0) + uniform(rng, 8.0, 30.0), 0.25);
    req.due = std::min(req.due, inst.horizon - 12.0);
    if (req.due <= req.release) req.due = req.release + 1.0;
    const double truck_cost = km * kTruckPerKm + drive * kTruckPerHour;
    req.reward = std::round(req.size * truck_cost * uniform(rng, 1.1, 1.5));
    inst.requests.push_back(std::move(req));
  }

  std::vector<NodeId> depot_cycle;
  for (NodeId i = 0; i < static_cast<NodeId>(p.terminals); ++i) depot_cycle.push_back(i);
  std::shuffle(depot_cycle.begin(), depot_cycle.end(), rng);
  inst.fleet.depots = depot_cycle;
  inst.fleet.truck_count = static_cast<int>(depot_cycle.size());
  return with_fleet_factor(inst, p.fleet_factor);
}

nlohmann::json generator_params_to_json(const GeneratorParams& p) {
  return {{"terminals", p.terminals},
          {"customers", p.customers},
          {"services", p.services},
          {"requests", p.requests},
          {"fleet_factor", p.fleet_factor},
          {"seed", p.seed},
          {"horizon", p.horizon},
          {"min_request_size", p.min_request_size},
          {"max_request_size", p.max_request_size},
          {"min_od_km", p.min_od_km},
          {"max_od_km", p.max_od_km},
          {"min_capacity", p.min_capacity},
          {"max_capacity", p.max_capacity},
          {"region_width_km", p.region_width_km},
          {"region_height_km", p.region_height_km}};
}

GeneratorParams generator_params_from_json(const nlohmann::json& j) {
  GeneratorParams p;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
  };
  get("terminals", p.terminals);
  get("customers", p.customers);
  get("services", p.services);
  get("requests", p.requests);
  get("fleet_factor", p.fleet_factor);
  get("seed", p.seed);
  get("horizon", p.horizon);
  get("min_request_size", p.min_request_size);
  get("max_request_size", p.max_request_size);
  get("min_od_km", p.min_od_km);
  get("max_od_km", p.max_od_km);
  get("min_capacity", p.min_capacity);
  get("max_capacity", p.max_capacity);
  get("region_width_km", p.region_width_km);
  get("region_height_km", p.region_height_km);
  return p;
}

}  // namespace snd
