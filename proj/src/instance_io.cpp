#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "snd/model.hpp"

namespace snd {

using nlohmann::json;

namespace {

/// Collects schema problems while walking a document so that a single load
/// reports every missing or mistyped field at once.
class Reader {
 public:
  std::vector<std::string> errors;

  const json* field(const json& obj, const char* key, const std::string& where,
                    bool required = true) {
    if (!obj.is_object()) {
      errors.push_back(where + ": expected an object");
      return nullptr;
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) errors.push_back(where + ": missing '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  double number(const json& obj, const char* key, const std::string& where,
                std::optional<double> fallback = std::nullopt) {
    const json* v = field(obj, key, where, !fallback.has_value());
    if (!v) return fallback.value_or(0.0);
    if (!v->is_number()) {
      errors.push_back(where + ": '" + key + "' must be a number");
      return 0.0;
    }
    return v->get<double>();
  }

  int integer(const json& obj, const char* key, const std::string& where) {
    const json* v = field(obj, key, where);
    if (!v) return 0;
    if (!v->is_number_integer()) {
      errors.push_back(where + ": '" + key + "' must be an integer");
      return 0;
    }
    return v->get<int>();
  }

  std::string text(const json& obj, const char* key, const std::string& where) {
    const json* v = field(obj, key, where);
    if (!v) return {};
    if (v->is_string()) return v->get<std::string>();
    if (v->is_number_integer()) return std::to_string(v->get<long long>());
    errors.push_back(where + ": '" + key + "' must be a string");
    return {};
  }

  const json& array(const json& obj, const char* key, const std::string& where) {
    static const json empty = json::array();
    const json* v = field(obj, key, where);
    if (!v) return empty;
    if (!v->is_array()) {
      errors.push_back(where + ": '" + key + "' must be an array");
      return empty;
    }
    return *v;
  }
};

}  // namespace

Instance instance_from_json(const json& j) {
  Reader rd;
  Instance inst;
  if (!j.is_object()) throw InstanceError("instance: document must be a JSON object");

  inst.horizon = rd.number(j, "horizon", "instance");
  inst.transfer_time = rd.number(j, "transfer_time", "instance", 1.0);

  std::map<std::string, NodeId> ids;
  const json& nodes = rd.array(j, "nodes", "instance");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "nodes[" + std::to_string(i) + "]";
    Node n;
    n.name = rd.text(nodes[i], "id", where);
    const json* kind = rd.field(nodes[i], "kind", where, false);
    if (kind && kind->is_string() && kind->get<std::string>() == "customer")
      n.kind = NodeKind::customer;
    if (!ids.emplace(n.name, i).second) rd.errors.push_back(where + ": duplicate id '" + n.name + "'");
    inst.nodes.push_back(n);
  }
  const std::size_t n = inst.nodes.size();
  inst.distances.assign(n * n, 0.0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "node " + inst.nodes[i].name;
    const json& row = rd.array(nodes[i], "distances", where);
    if (row.size() != n) {
      rd.errors.push_back(where + ": distance row has " + std::to_string(row.size()) +
                          " entries, expected " + std::to_string(n));
      continue;
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (!row[k].is_number()) {
        rd.errors.push_back(where + ": distances must be numbers");
        break;
      }
      inst.distances[i * n + k] = row[k].get<double>();
    }
  }

  auto resolve = [&](const std::string& id, const std::string& where) -> NodeId {
    auto it = ids.find(id);
    if (it == ids.end()) {
      rd.errors.push_back(where + ": unknown node '" + id + "'");
      return 0;
    }
    return it->second;
  };

  const json& services = rd.array(j, "services", "instance");
  for (std::size_t s = 0; s < services.size(); ++s) {
    Service svc;
    svc.name = rd.text(services[s], "id", "services[" + std::to_string(s) + "]");
    const std::string where = "service " + svc.name;
    try {
      svc.mode = parse_mode(rd.text(services[s], "mode", where));
    } catch (const std::invalid_argument& e) {
      rd.errors.push_back(where + ": " + e.what());
    }
    const json& legs = rd.array(services[s], "legs", where);
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const std::string lw = where + " leg " + std::to_string(k);
      ServiceLeg leg;
      leg.service = s;
      leg.from = resolve(rd.text(legs[k], "from", lw), lw);
      leg.to = resolve(rd.text(legs[k], "to", lw), lw);
      leg.departure = rd.number(legs[k], "dep", lw);
      leg.arrival = rd.number(legs[k], "arr", lw);
      leg.capacity = rd.integer(legs[k], "capacity", lw);
      leg.booking_cost = rd.number(legs[k], "booking_cost", lw);
      svc.legs.push_back(inst.legs.size());
      inst.legs.push_back(leg);
    }
    inst.services.push_back(std::move(svc));
  }

  const json& requests = rd.array(j, "requests", "instance");
  for (std::size_t r = 0; r < requests.size(); ++r) {
    Request req;
    req.name = rd.text(requests[r], "id", "requests[" + std::to_string(r) + "]");
    const std::string where = "request " + req.name;
    req.origin = resolve(rd.text(requests[r], "origin", where), where);
    req.destination = resolve(rd.text(requests[r], "destination", where), where);
    req.size = rd.integer(requests[r], "size", where);
    req.reward = rd.number(requests[r], "reward", where);
    req.release = rd.number(requests[r], "release", where);
    req.due = rd.number(requests[r], "due", where);
    inst.requests.push_back(std::move(req));
  }

  if (const json* fleet = rd.field(j, "fleet", "instance")) {
    auto& f = inst.fleet;
    f.speed_kmh = rd.number(*fleet, "speed", "fleet");
    f.load_time = rd.number(*fleet, "load_time", "fleet");
    f.unload_time = rd.number(*fleet, "unload_time", "fleet");
    f.cost_per_km = rd.number(*fleet, "cost_per_km", "fleet");
    f.cost_per_hour = rd.number(*fleet, "cost_per_hour", "fleet");
    if (fleet->contains("count")) {
      f.truck_count = rd.integer(*fleet, "count", "fleet");
    } else if (fleet->contains("fleet_factor")) {
      f.truck_count = fleet_size_for(inst.requests.size(),
                                     rd.number(*fleet, "fleet_factor", "fleet"));
    } else {
      rd.errors.push_back("fleet: needs 'count' or 'fleet_factor'");
    }
    if (const json* depots = rd.field(*fleet, "depots", "fleet", false)) {
      if (!depots->is_array()) {
        rd.errors.push_back("fleet: 'depots' must be an array");
      } else {
        for (const auto& d : *depots)
          f.depots.push_back(resolve(d.is_string() ? d.get<std::string>() : d.dump(), "fleet depot"));
      }
    }
  }

  if (const json* costs = rd.field(j, "costs", "instance")) {
    auto& c = inst.costs;
    c.transfer_cost = rd.number(*costs, "transfer_cost", "costs");
    c.storage_cost_rate = rd.number(*costs, "storage_cost_rate", "costs");
    c.delay_penalty_rate = rd.number(*costs, "delay_penalty_rate", "costs");
    if (const json* st = rd.field(*costs, "scheduled_transit_cost", "costs")) {
      c.train_cost_per_km = rd.number(*st, "train", "costs.scheduled_transit_cost");
      c.barge_cost_per_km = rd.number(*st, "barge", "costs.scheduled_transit_cost");
    }
  }

  if (!rd.errors.empty()) throw InstanceError("instance schema violation", rd.errors);

  if (inst.fleet.depots.empty() && inst.fleet.truck_count > 0) {
    const int count = inst.fleet.truck_count;
    inst.fleet.truck_count = 0;
    inst = with_fleet_size(inst, count);
  }

  auto violations = validate_instance(inst);
  if (!violations.empty()) throw InstanceError("instance invariant violation", violations);
  return inst;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["horizon"] = inst.horizon;
  j["transfer_time"] = inst.transfer_time;
  const std::size_t n = inst.node_count();
  json nodes = json::array();
  for (NodeId i = 0; i < n; ++i) {
    json row = json::array();
    for (NodeId k = 0; k < n; ++k) row.push_back(inst.distance(i, k));
    nodes.push_back({{"id", inst.nodes[i].name},
                     {"kind", std::string(to_string(inst.nodes[i].kind))},
                     {"distances", row}});
  }
  j["nodes"] = nodes;

  json services = json::array();
  for (const auto& s : inst.services) {
    json legs = json::array();
    for (LegId l : s.legs) {
      const auto& leg = inst.legs[l];
      legs.push_back({{"from", inst.nodes[leg.from].name},
                      {"to", inst.nodes[leg.to].name},
                      {"dep", leg.departure},
                      {"arr", leg.arrival},
                      {"capacity", leg.capacity},
                      {"booking_cost", leg.booking_cost}});
    }
    services.push_back({{"id", s.name}, {"mode", std::string(to_string(s.mode))}, {"legs", legs}});
  }
  j["services"] = services;

  json requests = json::array();
  for (const auto& r : inst.requests) {
    requests.push_back({{"id", r.name},
                        {"origin", inst.nodes[r.origin].name},
                        {"destination", inst.nodes[r.destination].name},
                        {"size", r.size},
                        {"reward", r.reward},
                        {"release", r.release},
                        {"due", r.due}});
  }
  j["requests"] = requests;

  json depots = json::array();
  for (NodeId d : inst.fleet.depots) depots.push_back(inst.nodes[d].name);
  j["fleet"] = {{"count", inst.fleet.truck_count},
                {"speed", inst.fleet.speed_kmh},
                {"load_time", inst.fleet.load_time},
                {"unload_time", inst.fleet.unload_time},
                {"cost_per_km", inst.fleet.cost_per_km},
                {"cost_per_hour", inst.fleet.cost_per_hour},
                {"depots", depots}};
  j["costs"] = {{"transfer_cost", inst.costs.transfer_cost},
                {"storage_cost_rate", inst.costs.storage_cost_rate},
                {"delay_penalty_rate", inst.costs.delay_penalty_rate},
                {"scheduled_transit_cost",
                 {{"train", inst.costs.train_cost_per_km}, {"barge", inst.costs.barge_cost_per_km}}}};
  return j;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open instance file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InstanceError("instance parse error in " + path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << instance_to_json(inst).dump(1) << '\n';
}

Scenario scenario_from_json(const json& j) {
  Reader rd;
  Scenario s;
  if (j.contains("name") && j["name"].is_string()) s.name = j["name"].get<std::string>();
  s.eps_min = rd.number(j, "eps_min", "scenario", s.eps_min);
  s.eps_max = rd.number(j, "eps_max", "scenario", s.eps_max);
  s.eta_max = rd.number(j, "eta_max", "scenario", s.eta_max);
  s.disruption_mean_interarrival =
      rd.number(j, "disruption_mean_interarrival", "scenario", s.disruption_mean_interarrival);
  if (const json* range = rd.field(j, "disruption_duration_range", "scenario", false)) {
    if (range->is_array() && range->size() == 2 && (*range)[0].is_number() &&
        (*range)[1].is_number()) {
      s.disruption_duration_min = (*range)[0].get<double>();
      s.disruption_duration_max = (*range)[1].get<double>();
    } else {
      rd.errors.push_back("scenario: disruption_duration_range must be [min, max]");
    }
  }
  s.fleet_factor = rd.number(j, "fleet_factor", "scenario", s.fleet_factor);
  s.horizon = rd.number(j, "horizon", "scenario", s.horizon);
  for (auto& e : validate_scenario(s)) rd.errors.push_back(e);
  if (!rd.errors.empty()) throw InstanceError("invalid scenario", rd.errors);
  return s;
}

json scenario_to_json(const Scenario& s) {
  return {{"name", s.name},
          {"eps_min", s.eps_min},
          {"eps_max", s.eps_max},
          {"eta_max", s.eta_max},
          {"disruption_mean_interarrival", s.disruption_mean_interarrival},
          {"disruption_duration_range", {s.disruption_duration_min, s.disruption_duration_max}},
          {"fleet_factor", s.fleet_factor},
          {"horizon", s.horizon}};
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (auto preset = scenario_preset(name_or_path)) return *preset;
  std::ifstream in(name_or_path);
  if (!in) throw InstanceError("unknown scenario '" + name_or_path + "' (not a preset or a readable file)");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InstanceError("scenario parse error in " + name_or_path + ": " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace snd
