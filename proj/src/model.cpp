#include "snd/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace snd {

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::truck: return "truck";
    case Mode::train: return "train";
    case Mode::barge: return "barge";
  }
  return "?";
}

std::string_view to_string(NodeKind k) {
  return k == NodeKind::terminal ? "terminal" : "customer";
}

Mode parse_mode(std::string_view s) {
  if (s == "train") return Mode::train;
  if (s == "barge") return Mode::barge;
  if (s == "truck") return Mode::truck;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

InstanceError::InstanceError(std::string what, std::vector<std::string> details)
    : std::runtime_error([&] {
        std::string msg = std::move(what);
        for (const auto& d : details) msg += "\n  - " + d;
        return msg;
      }()),
      details_(std::move(details)) {}

int Instance::total_demand() const {
  int total = 0;
  for (const auto& r : requests) total += r.size;
  return total;
}

namespace {

Scenario make_preset(std::string name, double eps_max, double kappa) {
  Scenario s;
  s.name = std::move(name);
  s.eps_min = -0.1;
  s.eps_max = eps_max;
  s.eta_max = 1.0;
  s.disruption_mean_interarrival = 15.0;
  s.disruption_duration_min = 1.0;
  s.disruption_duration_max = 10.0;
  s.fleet_factor = kappa;
  return s;
}

}  // namespace

const std::vector<std::string>& scenario_preset_names() {
  static const std::vector<std::string> names{"V-F+", "V+F+", "V-F-", "V+F-"};
  return names;
}

std::optional<Scenario> scenario_preset(std::string_view name) {
  if (name == "V-F+") return make_preset("V-F+", 0.10, 0.50);
  if (name == "V+F+") return make_preset("V+F+", 0.25, 0.50);
  if (name == "V-F-") return make_preset("V-F-", 0.10, 0.25);
  if (name == "V+F-") return make_preset("V+F-", 0.25, 0.25);
  return std::nullopt;
}

Scenario noise_free_scenario(double fleet_factor) {
  Scenario s;
  s.name = "noise-free";
  s.eps_min = 0.0;
  s.eps_max = 0.0;
  s.eta_max = 0.0;
  s.fleet_factor = fleet_factor;
  return s;
}

std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> v;
  if (!(s.eps_min <= 0.0 && 0.0 <= s.eps_max))
    v.push_back("scenario " + s.name + ": requires eps_min <= 0 <= eps_max");
  if (!(s.eta_max >= 0.0)) v.push_back("scenario " + s.name + ": eta_max < 0");
  if (!(s.fleet_factor > 0.0))
    v.push_back("scenario " + s.name + ": fleet_factor must be > 0");
  if (!(s.disruption_mean_interarrival > 0.0))
    v.push_back("scenario " + s.name + ": disruption interarrival must be > 0");
  if (!(0.0 <= s.disruption_duration_min &&
        s.disruption_duration_min <= s.disruption_duration_max))
    v.push_back("scenario " + s.name + ": bad disruption duration range");
  if (s.horizon < 0.0) v.push_back("scenario " + s.name + ": horizon < 0");
  return v;
}

double baseline_travel_time(const Instance& inst, NodeId i, NodeId j) {
  if (i >= inst.node_count() || j >= inst.node_count())
    throw std::out_of_range("baseline_travel_time: unknown node id");
  return inst.distance(i, j) / inst.fleet.speed_kmh;
}

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> v;
  const std::size_t n = inst.node_count();
  auto node_ok = [n](NodeId id) { return id < n; };

  if (inst.distances.size() != n * n) {
    v.push_back("distance matrix has " + std::to_string(inst.distances.size()) +
                " entries, expected " + std::to_string(n * n));
  } else {
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        const double d = inst.distance(i, j);
        if (!std::isfinite(d)) {
          v.push_back("node " + inst.nodes[i].name + ": non-finite distance to " +
                      inst.nodes[j].name);
        } else if (i == j && d != 0.0) {
          v.push_back("node " + inst.nodes[i].name + ": self distance must be 0");
        } else if (i != j && !(d > 0.0)) {
          v.push_back("node " + inst.nodes[i].name + ": distance to " +
                      inst.nodes[j].name + " must be > 0");
        }
      }
    }
  }

  std::vector<bool> leg_seen(inst.legs.size(), false);
  for (const auto& s : inst.services) {
    const std::string who = "service " + s.name;
    if (s.mode == Mode::truck) v.push_back(who + ": mode must be train or barge");
    if (s.legs.empty()) v.push_back(who + ": has no legs");
    for (std::size_t k = 0; k < s.legs.size(); ++k) {
      const LegId l = s.legs[k];
      if (l >= inst.legs.size()) {
        v.push_back(who + ": leg index " + std::to_string(l) + " out of range");
        continue;
      }
      leg_seen[l] = true;
      const auto& leg = inst.legs[l];
      const std::string lw = who + " leg " + std::to_string(k);
      if (!node_ok(leg.from) || !node_ok(leg.to)) {
        v.push_back(lw + ": references an unknown node");
        continue;
      }
      if (leg.from == leg.to) v.push_back(lw + ": from equals to");
      if (!(leg.arrival > leg.departure)) v.push_back(lw + ": arrival must be after departure");
      if (leg.capacity < 0) v.push_back(lw + ": negative capacity");
      if (leg.booking_cost < 0.0) v.push_back(lw + ": negative booking cost");
      if (leg.departure < 0.0 || leg.arrival > inst.horizon)
        v.push_back(lw + ": schedule outside the planning horizon");
      if (k + 1 < s.legs.size() && s.legs[k + 1] < inst.legs.size()) {
        const auto& next = inst.legs[s.legs[k + 1]];
        if (next.from != leg.to || next.departure < leg.arrival)
          v.push_back(who + ": legs " + std::to_string(k) + " and " +
                      std::to_string(k + 1) + " do not chain");
      }
    }
  }
  for (LegId l = 0; l < inst.legs.size(); ++l) {
    if (!leg_seen[l]) v.push_back("leg " + std::to_string(l) + " belongs to no service");
    else if (inst.legs[l].service >= inst.services.size())
      v.push_back("leg " + std::to_string(l) + " has an invalid service index");
  }

  for (const auto& r : inst.requests) {
    const std::string who = "request " + r.name;
    if (!node_ok(r.origin) || !node_ok(r.destination)) {
      v.push_back(who + ": references an unknown node");
      continue;
    }
    if (r.size < 1) v.push_back(who + ": size must be >= 1");
    if (r.reward < 0.0) v.push_back(who + ": negative reward");
    if (!(r.release < r.due)) v.push_back(who + ": release must precede due");
    if (r.origin == r.destination) v.push_back(who + ": origin equals destination");
  }

  const auto& f = inst.fleet;
  if (f.truck_count < 0) v.push_back("fleet: negative truck count");
  if (static_cast<int>(f.depots.size()) != f.truck_count)
    v.push_back("fleet: depot list size differs from truck count");
  for (NodeId d : f.depots)
    if (!node_ok(d)) v.push_back("fleet: depot references an unknown node");
  if (!(f.speed_kmh > 0.0)) v.push_back("fleet: speed must be > 0");
  if (f.load_time < 0.0 || f.unload_time < 0.0)
    v.push_back("fleet: load/unload times must be >= 0");
  if (f.cost_per_km < 0.0 || f.cost_per_hour < 0.0)
    v.push_back("fleet: truck cost rates must be >= 0");

  const auto& c = inst.costs;
  if (c.transfer_cost < 0.0 || c.storage_cost_rate < 0.0 || c.delay_penalty_rate < 0.0 ||
      c.train_cost_per_km < 0.0 || c.barge_cost_per_km < 0.0)
    v.push_back("costs: all rates must be >= 0");
  if (inst.transfer_time < 0.0) v.push_back("transfer_time must be >= 0");
  if (!(inst.horizon > 0.0)) v.push_back("horizon must be > 0");
  return v;
}

int fleet_size_for(std::size_t request_count, double fleet_factor) {
  return static_cast<int>(std::ceil(static_cast<double>(request_count) * fleet_factor - 1e-9));
}

Instance with_fleet_size(const Instance& inst, int count) {
  Instance out = inst;
  std::vector<NodeId> pattern = inst.fleet.depots;
  if (pattern.empty()) {
    for (NodeId i = 0; i < inst.node_count(); ++i)
      if (inst.nodes[i].kind == NodeKind::terminal) pattern.push_back(i);
    if (pattern.empty())
      for (NodeId i = 0; i < inst.node_count(); ++i) pattern.push_back(i);
  }
  out.fleet.truck_count = std::max(0, count);
  out.fleet.depots.clear();
  for (int t = 0; t < out.fleet.truck_count; ++t)
    out.fleet.depots.push_back(pattern[static_cast<std::size_t>(t) % pattern.size()]);
  return out;
}

Instance with_fleet_factor(const Instance& inst, double fleet_factor) {
  return with_fleet_size(inst, fleet_size_for(inst.requests.size(), fleet_factor));
}

}  // namespace snd
