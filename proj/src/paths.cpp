#include "snd/paths.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "snd/format.hpp"

namespace snd {

int Path::scheduled_leg_count() const {
  return static_cast<int>(std::count_if(legs.begin(), legs.end(), [](const PathLeg& l) { return l.scheduled(); }));
}

int Path::truck_leg_count() const { return static_cast<int>(legs.size()) - scheduled_leg_count(); }

int Path::vehicle_count(const Instance& inst) const {
  int count = 0;
  for (std::size_t k = 0; k < legs.size(); ++k) {
    const bool same_vehicle = k > 0 && legs[k].scheduled() && legs[k - 1].scheduled() &&
                              inst.legs[*legs[k].service_leg].service == inst.legs[*legs[k - 1].service_leg].service;
    if (!same_vehicle) ++count;
  }
  return count;
}

bool Path::uses_leg(LegId l) const {
  return std::any_of(legs.begin(), legs.end(), [l](const PathLeg& pl) { return pl.service_leg == l; });
}

namespace {

bool same_service(const Instance& inst, const PathLeg& a, const PathLeg& b) {
  return a.scheduled() && b.scheduled() && inst.legs[*a.service_leg].service == inst.legs[*b.service_leg].service;
}

PathLeg scheduled_leg(const Instance& inst, LegId l) {
  const auto& sl = inst.legs[l];
  return PathLeg{inst.leg_mode(l), sl.from, sl.to, l, sl.departure, sl.arrival};
}

PathLeg truck_leg(const Instance& inst, NodeId from, NodeId to, double start, double buffer) {
  return PathLeg{Mode::truck, from, to, std::nullopt, start, start + truck_leg_duration(inst, from, to, buffer)};
}

}  // namespace

double truck_leg_duration(const Instance& inst, NodeId from, NodeId to, double buffer) {
  return inst.fleet.load_time + (1.0 + buffer) * baseline_travel_time(inst, from, to) + inst.fleet.unload_time;
}

ChainMap enumerate_service_chains(const Instance& inst) {
  ChainMap chains;
  auto add = [&](std::vector<LegId> legs) {
    ServiceChain c;
    c.origin = inst.legs[legs.front()].from;
    c.destination = inst.legs[legs.back()].to;
    c.departure = inst.legs[legs.front()].departure;
    c.arrival = inst.legs[legs.back()].arrival;
    c.legs = std::move(legs);
    chains[{c.origin, c.destination}].push_back(std::move(c));
  };
  for (LegId a = 0; a < inst.legs.size(); ++a) add({a});
  for (LegId a = 0; a < inst.legs.size(); ++a) {
    const auto& la = inst.legs[a];
    for (LegId b = 0; b < inst.legs.size(); ++b) {
      const auto& lb = inst.legs[b];
      if (a == b || lb.from != la.to || lb.to == la.from) continue;
      if (la.service == lb.service) {
        const auto& sl = inst.services[la.service].legs;
        const auto it = std::find(sl.begin(), sl.end(), a);
        if (it + 1 < sl.end() && *(it + 1) == b) add({a, b});
      } else if (lb.departure >= la.arrival + inst.transfer_time) {
        add({a, b});
      }
    }
  }
  return chains;
}

std::vector<std::string> check_path_structure(const Instance& inst, const Request& req, const Path& p) {
  std::vector<std::string> v;
  const std::string who = "path " + std::to_string(p.id) + " of request " + req.name;
  if (p.legs.empty()) return {who + ": no legs"};
  if (p.legs.size() > 4) v.push_back(who + ": more than 4 legs");
  if (p.scheduled_leg_count() > 2) v.push_back(who + ": more than 2 scheduled legs");
  if (p.legs.front().from != req.origin) v.push_back(who + ": does not start at the origin");
  if (p.legs.back().to != req.destination) v.push_back(who + ": does not end at the destination");
  if (p.legs.front().departure < req.release) v.push_back(who + ": departs before release");
  for (std::size_t k = 0; k < p.legs.size(); ++k) {
    const auto& leg = p.legs[k];
    if (!leg.scheduled() && k != 0 && k + 1 != p.legs.size())
      v.push_back(who + ": truck leg in a middle position");
    if (leg.scheduled() && leg.mode == Mode::truck) v.push_back(who + ": scheduled leg with truck mode");
    if (k + 1 < p.legs.size()) {
      const auto& next = p.legs[k + 1];
      if (next.from != leg.to) v.push_back(who + ": legs do not chain in space");
      const double handling = same_service(inst, leg, next) ? 0.0 : inst.transfer_time;
      if (leg.arrival + handling > next.departure + 1e-9) v.push_back(who + ": legs do not chain in time");
      if (!leg.scheduled() && !next.scheduled()) v.push_back(who + ": two consecutive truck legs");
    }
  }
  return v;
}

PathCost path_cost(const Instance& inst, const Request& req, const Path& p) {
  PathCost c;
  const auto& f = inst.fleet;
  for (std::size_t k = 0; k < p.legs.size(); ++k) {
    const auto& leg = p.legs[k];
    const double km = inst.distance(leg.from, leg.to);
    if (leg.scheduled()) {
      c.transit += km * inst.costs.scheduled_rate(leg.mode);
    } else {
      const double drive = leg.arrival - leg.departure - f.load_time - f.unload_time;
      c.transit += km * f.cost_per_km + std::max(0.0, drive) * f.cost_per_hour;
    }
    if (k + 1 < p.legs.size() && !same_service(inst, leg, p.legs[k + 1])) {
      const double ready = leg.arrival + inst.transfer_time;
      c.store += std::max(0.0, p.legs[k + 1].departure - ready) * inst.costs.storage_cost_rate;
    }
  }
  c.transfer = inst.costs.transfer_cost * (p.vehicle_count(inst) - 1);
  c.delay = inst.costs.delay_penalty_rate * std::max(0.0, p.planned_arrival() - req.due);
  return c;
}

std::vector<Path> build_request_paths(const Instance& inst, const Request& req, const ChainMap& chains,
                                      double buffer, std::size_t next_id) {
  std::vector<Path> out;
  auto emit = [&](std::vector<PathLeg> legs) {
    Path p;
    p.id = next_id++;
    p.request = 0;
    p.legs = std::move(legs);
    p.cost = path_cost(inst, req, p);
    out.push_back(std::move(p));
  };
  emit({truck_leg(inst, req.origin, req.destination, req.release, buffer)});

  for (const auto& [od, list] : chains) {
    const auto [a, b] = od;
    if (a == req.destination || b == req.origin) continue;
    for (const auto& chain : list) {
      std::vector<PathLeg> legs;
      if (a != req.origin) {
        PathLeg first = truck_leg(inst, req.origin, a, req.release, buffer);
        if (first.arrival + inst.transfer_time > chain.departure) continue;
        legs.push_back(first);
      } else if (chain.departure < req.release) {
        continue;
      }
      for (LegId l : chain.legs) legs.push_back(scheduled_leg(inst, l));
      if (b != req.destination)
        legs.push_back(truck_leg(inst, b, req.destination, chain.arrival + inst.transfer_time, buffer));
      emit(std::move(legs));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Path& x, const Path& y) {
    const double cx = x.cost.total(), cy = y.cost.total();
    if (cx != cy) return cx < cy;
    if (x.legs.size() != y.legs.size()) return x.legs.size() < y.legs.size();
    return x.id < y.id;
  });
  return out;
}

PathPool PathPool::build(const Instance& inst, double buffer, const PoolOptions& opts) {
  PathPool pool;
  pool.buffer_ = buffer;
  pool.by_leg_.assign(inst.legs.size(), {});
  const ChainMap chains = enumerate_service_chains(inst);
  std::size_t next_id = 0;
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    auto paths = build_request_paths(inst, inst.requests[r], chains, buffer, next_id);
    next_id += paths.size();
    double direct_cost = 0.0;
    for (const auto& p : paths)
      if (p.is_direct_truck()) direct_cost = p.cost.total();
    std::vector<Path> kept;
    for (auto& p : paths) {
      if (p.is_direct_truck() || !opts.prune_dominated || p.cost.total() <= direct_cost) kept.push_back(std::move(p));
    }
    if (kept.size() > opts.max_paths_per_request) {
      const auto direct = std::find_if(kept.begin(), kept.end(), [](const Path& p) { return p.is_direct_truck(); });
      if (static_cast<std::size_t>(direct - kept.begin()) >= opts.max_paths_per_request) {
        std::rotate(kept.begin() + static_cast<std::ptrdiff_t>(opts.max_paths_per_request) - 1, direct, direct + 1);
      }
      kept.resize(std::max<std::size_t>(1, opts.max_paths_per_request));
    }
    for (auto& p : kept) p.request = r;
    std::size_t direct_idx = 0;
    for (std::size_t i = 0; i < kept.size(); ++i) {
      if (kept[i].is_direct_truck()) direct_idx = i;
      for (const auto& leg : kept[i].legs)
        if (leg.scheduled()) pool.by_leg_[*leg.service_leg].push_back({r, i});
    }
    pool.direct_.push_back(direct_idx);
    pool.paths_.push_back(std::move(kept));
  }
  return pool;
}

std::size_t PathPool::total_paths() const {
  std::size_t n = 0;
  for (const auto& p : paths_) n += p.size();
  return n;
}

FilteredPool filter_pool(const PathPool& pool, std::span<const int> booked) {
  FilteredPool out(pool.request_count());
  for (RequestId r = 0; r < pool.request_count(); ++r) {
    const auto paths = pool.paths(r);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const bool ok = std::all_of(paths[i].legs.begin(), paths[i].legs.end(), [&](const PathLeg& leg) {
        return !leg.scheduled() || booked[*leg.service_leg] > 0;
      });
      if (ok) out[r].push_back(i);
    }
  }
  return out;
}

std::string describe_path(const Instance& inst, const Path& p) {
  std::ostringstream os;
  for (std::size_t k = 0; k < p.legs.size(); ++k) {
    const auto& leg = p.legs[k];
    if (k == 0) os << inst.nodes[leg.from].name;
    os << " -" << to_string(leg.mode);
    if (leg.scheduled()) os << ":" << inst.services[inst.legs[*leg.service_leg].service].name << "#" << *leg.service_leg;
    os << "-> " << inst.nodes[leg.to].name;
  }
  return os.str();
}

void write_pool_csv(std::ostream& out, const Instance& inst, const PathPool& pool, RequestId r) {
  out << "path_id,legs,departure,arrival,transit,transfer,store,delay,total\n";
  for (const auto& p : pool.paths(r)) {
    out << p.id << ",\"" << describe_path(inst, p) << "\"," << num(p.legs.front().departure) << ','
        << num(p.planned_arrival()) << ',' << num(p.cost.transit) << ',' << num(p.cost.transfer) << ','
        << num(p.cost.store) << ',' << num(p.cost.delay) << ',' << num(p.cost.total()) << '\n';
  }
}

}  // namespace snd
