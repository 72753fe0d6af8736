#include "snd/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <sstream>

#include "snd/format.hpp"

namespace snd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTol = 1e-9;

}  // namespace

double DisruptionTimeline::severity(NodeId i, NodeId j, double t) const {
  double s = 0.0;
  for (const auto& e : events)
    if (e.from == i && e.to == j && e.start <= t && t < e.start + e.duration) s = std::max(s, e.severity);
  return s;
}

double effective_horizon(const Instance& inst, const Scenario& sc) {
  return sc.horizon > 0.0 ? sc.horizon : inst.horizon;
}

DisruptionTimeline generate_disruptions(std::size_t node_count, double horizon, const Scenario& sc, Rng& rng) {
  DisruptionTimeline tl;
  if (node_count < 2) return tl;
  std::exponential_distribution<double> gap(1.0 / sc.disruption_mean_interarrival);
  const int n = static_cast<int>(node_count);
  for (double t = gap(rng); t < horizon; t += gap(rng)) {
    Disruption d;
    d.from = static_cast<NodeId>(uniform_int(rng, 0, n - 1));
    d.to = static_cast<NodeId>(uniform_int(rng, 0, n - 2));
    if (d.to >= d.from) ++d.to;
    d.start = t;
    d.duration = uniform(rng, sc.disruption_duration_min, sc.disruption_duration_max);
    d.severity = uniform(rng, 0.0, sc.eta_max);
    tl.events.push_back(d);
  }
  return tl;
}

DisruptionTimeline generate_disruptions(const Instance& inst, const Scenario& sc, Rng& rng) {
  return generate_disruptions(inst.node_count(), effective_horizon(inst, sc), sc, rng);
}

double sample_epsilon(const Scenario& sc, Rng& rng) {
  // The median of three uniforms has density 6u(1-u), i.e. Beta(2,2).
  double u[3] = {uniform01(rng), uniform01(rng), uniform01(rng)};
  std::sort(u, u + 3);
  return sc.eps_min + (sc.eps_max - sc.eps_min) * u[1];
}

double sample_travel_time(double tbar, NodeId i, NodeId j, double departure, const DisruptionTimeline& timeline,
                          const Scenario& sc, Rng& rng) {
  const double eps = sample_epsilon(sc, rng);
  return (1.0 + timeline.severity(i, j, departure)) * (1.0 + eps) * tbar;
}

// ---------------------------------------------------------------------------
// Insertion

double FleetView::expected_travel(NodeId i, NodeId j) const {
  return (1.0 + buffer) * baseline_travel_time(*inst, i, j);
}

namespace {

double task_duration(const FleetView& v, const TruckTask& t) {
  return v.inst->fleet.load_time + v.expected_travel(t.from, t.to) + v.inst->fleet.unload_time;
}

bool has_fallback(const std::vector<const TruckTask*>& route) {
  return std::any_of(route.begin(), route.end(), [](const TruckTask* t) { return t->kind == TaskKind::fallback; });
}

}  // namespace

std::optional<std::vector<double>> FleetView::project(std::size_t truck, const std::vector<const TruckTask*>& route,
                                                      bool enforce_return) const {
  std::vector<double> starts;
  starts.reserve(route.size());
  NodeId node = anchors[truck].node;
  double time = anchors[truck].time;
  for (const TruckTask* t : route) {
    const double start = std::max(time + expected_travel(node, t->from), t->earliest);
    if (start > t->latest + kTol) return std::nullopt;
    starts.push_back(start);
    time = start + task_duration(*this, *t);
    node = t->to;
  }
  if (enforce_return && time + expected_travel(node, depots[truck]) > horizon + kTol) return std::nullopt;
  return starts;
}

double FleetView::route_km(std::size_t truck, const std::vector<const TruckTask*>& route) const {
  double km = 0.0;
  NodeId node = anchors[truck].node;
  for (const TruckTask* t : route) {
    km += inst->distance(node, t->from) + inst->distance(t->from, t->to);
    node = t->to;
  }
  return km + inst->distance(node, depots[truck]);
}

std::optional<Insertion> best_insertion(const FleetView& v, const TruckTask& task, std::optional<std::size_t> skip) {
  std::optional<Insertion> best;
  for (std::size_t k = 0; k < v.anchors.size(); ++k) {
    if (skip && *skip == k) continue;
    const auto& route = v.routes[k];
    const bool enforce = task.kind != TaskKind::fallback && !has_fallback(route);
    const auto base = v.project(k, route, enforce);
    if (!base) continue;
    const std::size_t n = route.size();
    for (std::size_t pos = 0; pos <= n; ++pos) {
      NodeId prev_node = v.anchors[k].node;
      double prev_time = v.anchors[k].time;
      if (pos > 0) {
        prev_node = route[pos - 1]->to;
        prev_time = (*base)[pos - 1] + task_duration(v, *route[pos - 1]);
      }
      const double s = std::max(prev_time + v.expected_travel(prev_node, task.from), task.earliest);
      if (s > task.latest + kTol) continue;
      double shift = s - task.earliest;
      double time = s + task_duration(v, task);
      NodeId node = task.to;
      bool ok = true, settled = false;
      for (std::size_t i = pos; i < n; ++i) {
        const TruckTask& t = *route[i];
        const double si = std::max(time + v.expected_travel(node, t.from), t.earliest);
        if (si > t.latest + kTol) {
          ok = false;
          break;
        }
        if (si <= (*base)[i] + kTol) {
          settled = true;
          break;
        }
        shift += si - (*base)[i];
        time = si + task_duration(v, t);
        node = t.to;
      }
      if (!ok) continue;
      if (!settled && enforce && time + v.expected_travel(node, v.depots[k]) > v.horizon + kTol) continue;
      const NodeId next_node = pos < n ? route[pos]->from : v.depots[k];
      const auto& d = [&](NodeId a, NodeId b) { return v.inst->distance(a, b); };
      const double added = d(prev_node, task.from) + d(task.from, task.to) + d(task.to, next_node) -
                           d(prev_node, next_node);
      const bool better = !best || added < best->added_km - kTol ||
                          (added <= best->added_km + kTol && shift < best->shift - kTol);
      if (better) best = Insertion{k, pos, added, shift};
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Simulation world

namespace {

enum class EventKind {
  request_release = 0,
  vehicle_arrival = 1,
  unload_start = 2,
  unload_end = 3,
  load_start = 4,
  load_end = 5,
  vehicle_departure = 6,
};

const char* kind_name(EventKind k) {
  switch (k) {
    case EventKind::request_release: return "request-release";
    case EventKind::vehicle_arrival: return "vehicle-arrival";
    case EventKind::unload_start: return "unload-start";
    case EventKind::unload_end: return "unload-end";
    case EventKind::load_start: return "load-start";
    case EventKind::load_end: return "load-end";
    case EventKind::vehicle_departure: return "vehicle-departure";
  }
  return "?";
}

enum class EntityType { truck, leg, request };

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::request_release;
  EntityType type = EntityType::truck;
  std::size_t entity = 0;
  std::uint64_t seq = 0;
  std::uint64_t version = 0;

  std::size_t order_id() const { return static_cast<std::size_t>(type) * (std::size_t{1} << 40) + entity; }
  bool operator>(const Event& o) const {
    if (time != o.time) return time > o.time;
    if (kind != o.kind) return kind > o.kind;
    if (order_id() != o.order_id()) return order_id() > o.order_id();
    return seq > o.seq;
  }
};

enum class TaskStatus { pending, routed, active, done, cancelled };

struct Container {
  RequestId request = 0;
  std::vector<PathLeg> legs;
  std::size_t next = 0;
  NodeId node = 0;
  double ready = 0.0;
  bool onboard = false;
  bool delivered = false;
  int vehicles = 0;
  std::vector<std::size_t> tasks;
};

enum class Phase { idle, to_pickup, loading, loaded, unloading };

struct Truck {
  NodeId depot = 0;
  NodeId node = 0;
  double free_at = 0.0;
  bool spot = false;
  Phase phase = Phase::idle;
  std::vector<std::size_t> route;
  std::optional<std::size_t> current;
  std::uint64_t version = 0;
  TruckAnchor anchor;
};

class World {
 public:
  World(const Instance& inst, const PathPool& pool, const Solution& sol, const Scenario& sc, std::uint64_t seed,
        const SimOptions& opts)
      : inst_(inst),
        pool_(pool),
        sol_(sol),
        sc_(sc),
        opts_(opts),
        travel_rng_(derive_seed(seed, {hash_tag("travel")})),
        horizon_(effective_horizon(inst, sc)),
        buffer_(pool.buffer()) {
    if (opts.disruptions) {
      timeline_ = *opts.disruptions;
    } else {
      Rng drng(derive_seed(seed, {hash_tag("disruptions")}));
      timeline_ = generate_disruptions(inst, sc, drng);
    }
    const std::size_t R = inst.requests.size();
    out_.delivery_time.assign(R, std::numeric_limits<double>::quiet_NaN());
    out_.lateness.assign(R, 0.0);
    out_.delivered.assign(R, 0);
    out_.containers.assign(R, 0);
    out_.used_road.assign(R, 0);
    out_.used_scheduled.assign(R, 0);
    out_.leg_used.assign(inst.legs.size(), 0);
    reserved_.assign(inst.legs.size(), 0);
    leg_scheduled_.assign(inst.legs.size(), false);
    departed_.assign(inst.legs.size(), false);
    riding_.assign(inst.legs.size(), {});
    for (int k = 0; k < inst.fleet.truck_count; ++k) {
      Truck t;
      t.depot = t.node = inst.fleet.depots[static_cast<std::size_t>(k)];
      t.anchor = {t.node, 0.0};
      trucks_.push_back(t);
    }
    fleet_size_ = trucks_.size();
  }

  SimOutcome run(const TransportPlan& plan) {
    operationalize(plan);
    while (!queue_.empty()) {
      const Event e = queue_.top();
      queue_.pop();
      if (e.time < now_ - 1e-12) out_.monotone = false;
      now_ = e.time;
      ++out_.events;
      handle(e);
    }
    for (auto& t : trucks_) {
      if (t.spot || t.node == t.depot) continue;
      drive(t, t.node, t.depot, /*loaded=*/false);
      t.node = t.depot;
    }
    out_.transit = out_.transit_truck_loaded + out_.transit_truck_empty + out_.transit_scheduled;
    return std::move(out_);
  }

 private:
  // ---- setup -------------------------------------------------------------

  void operationalize(const TransportPlan& plan) {
    for (RequestId r = 0; r < plan.z.size(); ++r) {
      const auto& req = inst_.requests[r];
      if (!plan.z[r].empty()) push({req.release, EventKind::request_release, EntityType::request, r});
      for (const auto& a : plan.z[r]) {
        const Path& p = pool_.path(r, a.path);
        for (int k = 0; k < a.containers; ++k) {
          Container c;
          c.request = r;
          c.legs = p.legs;
          c.node = req.origin;
          c.ready = req.release;
          containers_.push_back(std::move(c));
          const std::size_t id = containers_.size() - 1;
          out_.containers[r]++;
          reserve_legs(id, +1);
          make_tasks(id, req.release);
        }
      }
    }
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < tasks_.size(); ++i) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto& ta = tasks_[a];
      const auto& tb = tasks_[b];
      if (ta.earliest != tb.earliest) return ta.earliest < tb.earliest;
      return containers_[ta.container].request < containers_[tb.container].request;
    });
    for (std::size_t id : order) {
      if (status_[id] != TaskStatus::pending) continue;
      if (!place(id, std::nullopt)) recover(id);
    }
    for (std::size_t k = 0; k < trucks_.size(); ++k) dispatch(k);
  }

  /// Creates the truck tasks of a container's remaining legs, timed from
  /// `ready`. Returns false if some hard window is already empty.
  bool make_tasks(std::size_t cid, double ready) {
    Container& c = containers_[cid];
    const auto& req = inst_.requests[c.request];
    const auto& f = inst_.fleet;
    double t = ready;
    for (std::size_t k = c.next; k < c.legs.size(); ++k) {
      const PathLeg& leg = c.legs[k];
      if (leg.scheduled()) {
        t = leg.arrival + inst_.transfer_time;
        continue;
      }
      TruckTask task;
      task.id = tasks_.size();
      task.container = cid;
      task.from = leg.from;
      task.to = leg.to;
      task.earliest = t;
      const double dur = f.load_time + expected(leg.from, leg.to) + f.unload_time;
      if (k + 1 < c.legs.size()) {
        task.kind = TaskKind::first_mile;
        task.latest = c.legs[k + 1].departure - inst_.transfer_time - dur;
      } else {
        task.kind = c.legs.size() == 1 ? TaskKind::direct : TaskKind::last_mile;
        task.latest = std::max(task.earliest, req.due - dur);
      }
      tasks_.push_back(task);
      status_.push_back(TaskStatus::pending);
      owner_.push_back(kNone);
      c.tasks.push_back(task.id);
      if (task.latest < task.earliest - kTol) return false;
      t = task.earliest + dur + inst_.transfer_time;
    }
    return true;
  }

  void reserve_legs(std::size_t cid, int sign) {
    const Container& c = containers_[cid];
    for (std::size_t k = c.next; k < c.legs.size(); ++k) {
      if (!c.legs[k].scheduled()) continue;
      const LegId l = *c.legs[k].service_leg;
      reserved_[l] += sign;
      if (sign > 0 && !leg_scheduled_[l]) {
        leg_scheduled_[l] = true;
        push({inst_.legs[l].departure, EventKind::vehicle_departure, EntityType::leg, l});
        push({inst_.legs[l].arrival, EventKind::vehicle_arrival, EntityType::leg, l});
      }
    }
  }

  // ---- fleet view / placement -------------------------------------------

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  double expected(NodeId i, NodeId j) const { return (1.0 + buffer_) * baseline_travel_time(inst_, i, j); }

  TruckAnchor anchor_of(const Truck& t) const {
    if (t.phase == Phase::idle) return {t.node, std::max(now_, t.free_at)};
    return t.anchor;
  }

  FleetView view() const {
    FleetView v;
    v.inst = &inst_;
    v.buffer = buffer_;
    v.horizon = horizon_;
    for (std::size_t k = 0; k < fleet_size_; ++k) {
      const Truck& t = trucks_[k];
      v.depots.push_back(t.depot);
      v.anchors.push_back(anchor_of(t));
      std::vector<const TruckTask*> route;
      for (std::size_t id : t.route) route.push_back(&tasks_[id]);
      v.routes.push_back(std::move(route));
    }
    return v;
  }

  void insert_task(std::size_t truck, std::size_t pos, std::size_t id) {
    auto& route = trucks_[truck].route;
    route.insert(route.begin() + static_cast<std::ptrdiff_t>(pos), id);
    status_[id] = TaskStatus::routed;
    owner_[id] = truck;
    if (trucks_[truck].phase == Phase::idle && pos == 0) dispatch(truck);
  }

  void unroute(std::size_t id) {
    if (status_[id] != TaskStatus::routed) return;
    Truck& t = trucks_[owner_[id]];
    const auto it = std::find(t.route.begin(), t.route.end(), id);
    const bool front = it == t.route.begin();
    t.route.erase(it);
    status_[id] = TaskStatus::pending;
    const std::size_t k = owner_[id];
    owner_[id] = kNone;
    if (front && t.phase == Phase::idle) dispatch(k);
  }

  std::size_t add_spot_truck(const TruckTask& task) {
    Truck t;
    t.depot = t.node = task.from;
    t.free_at = task.earliest;
    t.spot = true;
    t.anchor = {t.node, t.free_at};
    trucks_.push_back(t);
    return trucks_.size() - 1;
  }

  /// best_insertion over the fleet; spot trucking when the fleet is empty.
  bool place(std::size_t id, std::optional<std::size_t> skip) {
    if (fleet_size_ == 0) {
      insert_task(add_spot_truck(tasks_[id]), 0, id);
      return true;
    }
    const auto ins = best_insertion(view(), tasks_[id], skip);
    if (!ins) return false;
    insert_task(ins->truck, ins->position, id);
    return true;
  }

  /// Appends a task to the truck that can start it soonest.
  void place_fallback(std::size_t id) {
    TruckTask& task = tasks_[id];
    task.kind = TaskKind::fallback;
    task.latest = kInf;
    if (fleet_size_ == 0) {
      insert_task(add_spot_truck(task), 0, id);
      return;
    }
    const FleetView v = view();
    std::size_t best = 0;
    double best_start = kInf;
    for (std::size_t k = 0; k < fleet_size_; ++k) {
      auto route = v.routes[k];
      route.push_back(&task);
      // Windows of the existing route are unaffected by an appended task;
      // relax them so a broken route still yields a start estimate.
      NodeId node = v.anchors[k].node;
      double time = v.anchors[k].time;
      double start = 0.0;
      for (const TruckTask* t : route) {
        start = std::max(time + v.expected_travel(node, t->from), t->earliest);
        time = start + inst_.fleet.load_time + v.expected_travel(t->from, t->to) + inst_.fleet.unload_time;
        node = t->to;
      }
      if (start < best_start - kTol) {
        best_start = start;
        best = k;
      }
    }
    insert_task(best, trucks_[best].route.size(), id);
  }

  // ---- rerouting ---------------------------------------------------------

  void cancel_task(std::size_t id) {
    if (status_[id] == TaskStatus::routed) unroute(id);
    // An active task whose container is not on board is a truck still on its
    // way to the pickup; it turns back on arrival.
    if (status_[id] == TaskStatus::pending || status_[id] == TaskStatus::active) status_[id] = TaskStatus::cancelled;
  }

  void cancel_tasks(std::size_t cid) {
    for (std::size_t id : containers_[cid].tasks) cancel_task(id);
    containers_[cid].tasks.clear();
  }

  /// Puts a waiting container on the cheapest pooled path suffix that starts
  /// at its node, fits residual booked capacity and admits truck insertions;
  /// otherwise on a direct truck.
  void reroute(std::size_t cid, double ready) {
    Container& c = containers_[cid];
    const auto& req = inst_.requests[c.request];
    if (c.node == req.destination) return;
    if (c.onboard) throw std::logic_error("simulate: cannot reroute a container in transit");
    cancel_tasks(cid);
    reserve_legs(cid, -1);
    const NodeId here = c.node;
    c.ready = ready;

    for (const Path& p : pool_.paths(c.request)) {
      std::size_t k0 = 0;
      while (k0 < p.legs.size() && p.legs[k0].from != here) ++k0;
      if (k0 == p.legs.size()) continue;
      std::vector<PathLeg> suffix(p.legs.begin() + static_cast<std::ptrdiff_t>(k0), p.legs.end());
      if (suffix.size() == 1 && !suffix[0].scheduled()) continue;  // same as the fallback
      if (!suffix_capacity_ok(suffix, ready)) continue;
      const std::vector<PathLeg> old_legs = c.legs;
      const std::size_t old_next = c.next;
      c.legs = suffix;
      c.next = 0;
      const std::size_t first_task = tasks_.size();
      bool ok = make_tasks(cid, ready);
      std::vector<std::size_t> placed;
      for (std::size_t id = first_task; ok && id < tasks_.size(); ++id) {
        if (place(id, std::nullopt)) placed.push_back(id);
        else ok = false;
      }
      if (ok) {
        reserve_legs(cid, +1);
        ++out_.reroutes;
        trace("reroute", cid, "path " + std::to_string(p.id));
        return;
      }
      for (std::size_t id : placed) unroute(id);
      for (std::size_t id = first_task; id < tasks_.size(); ++id) status_[id] = TaskStatus::cancelled;
      c.tasks.clear();
      c.legs = old_legs;
      c.next = old_next;
    }

    c.legs = {PathLeg{Mode::truck, here, req.destination, std::nullopt, ready,
                      ready + inst_.fleet.load_time + expected(here, req.destination) + inst_.fleet.unload_time}};
    c.next = 0;
    make_tasks(cid, ready);
    place_fallback(c.tasks.back());
    ++out_.fallbacks;
    trace("fallback", cid, "direct truck from " + inst_.nodes[here].name);
  }

  bool suffix_capacity_ok(const std::vector<PathLeg>& legs, double ready) const {
    double t = ready;
    for (std::size_t k = 0; k < legs.size(); ++k) {
      const PathLeg& leg = legs[k];
      if (leg.scheduled()) {
        const LegId l = *leg.service_leg;
        if (departed_[l] || leg.departure < t - kTol) return false;
        if (reserved_[l] + 1 > sol_.y[l]) return false;
        t = leg.arrival + inst_.transfer_time;
      } else {
        t += inst_.fleet.load_time + expected(leg.from, leg.to) + inst_.fleet.unload_time + inst_.transfer_time;
      }
    }
    return true;
  }

  /// Re-offers unstarted tasks of truck k whose window no longer holds.
  void check_route(std::size_t k) {
    if (trucks_[k].spot) return;
    for (;;) {
      const FleetView v = view();
      const auto& route = v.routes[k];
      std::optional<std::size_t> broken;
      NodeId node = v.anchors[k].node;
      double time = v.anchors[k].time;
      for (std::size_t i = 0; i < route.size(); ++i) {
        const double s = std::max(time + v.expected_travel(node, route[i]->from), route[i]->earliest);
        if (s > route[i]->latest + kTol) {
          broken = i;
          break;
        }
        time = s + inst_.fleet.load_time + v.expected_travel(route[i]->from, route[i]->to) + inst_.fleet.unload_time;
        node = route[i]->to;
      }
      if (!broken) return;
      const std::size_t id = trucks_[k].route[*broken];
      unroute(id);
      if (place(id, k)) {
        ++out_.reassignments;
        trace("reassign", id, "task moved to truck " + std::to_string(owner_[id]));
        continue;
      }
      recover(id);
    }
  }

  /// A task no truck can serve in time: reroute its container if it waits at
  /// the pickup node, otherwise keep the leg and accept lateness.
  void recover(std::size_t id) {
    const TruckTask& task = tasks_[id];
    const Container& c = containers_[task.container];
    if (task.kind != TaskKind::fallback && !c.onboard && c.node == task.from) {
      reroute(task.container, std::max(now_, c.ready));
    } else {
      place_fallback(id);
      ++out_.fallbacks;
      trace("fallback", task.container, "late truck leg");
    }
  }

  // ---- execution ---------------------------------------------------------

  void push(Event e) {
    e.seq = seq_++;
    queue_.push(e);
  }

  void trace(const char* kind, std::size_t entity, std::string detail) {
    if (opts_.trace) out_.trace.push_back({now_, kind, entity, std::move(detail)});
  }

  void dispatch(std::size_t k) {
    Truck& t = trucks_[k];
    if (t.phase != Phase::idle) return;
    ++t.version;
    if (t.route.empty()) return;
    const TruckTask& task = tasks_[t.route.front()];
    const double avail = std::max(now_, t.free_at);
    if (t.node == task.from) {
      push({std::max(avail, task.earliest), EventKind::load_start, EntityType::truck, k, 0, t.version});
    } else {
      const double dep = std::max(avail, task.earliest - expected(t.node, task.from));
      push({dep, EventKind::vehicle_departure, EntityType::truck, k, 0, t.version});
    }
  }

  void drive(Truck& t, NodeId from, NodeId to, bool loaded, double duration = -1.0) {
    const double km = inst_.distance(from, to);
    const double h = duration >= 0.0 ? duration
                                     : sample_travel_time(baseline_travel_time(inst_, from, to), from, to, now_,
                                                          timeline_, sc_, travel_rng_);
    const double cost = km * inst_.fleet.cost_per_km + h * inst_.fleet.cost_per_hour;
    if (loaded) {
      out_.truck_km_loaded += km;
      out_.truck_hours_loaded += h;
      out_.transit_truck_loaded += cost;
    } else {
      out_.truck_km_empty += km;
      out_.truck_hours_empty += h;
      out_.transit_truck_empty += cost;
    }
    (void)t;
  }

  void commit_front(std::size_t k) {
    Truck& t = trucks_[k];
    const std::size_t id = t.route.front();
    t.route.erase(t.route.begin());
    t.current = id;
    status_[id] = TaskStatus::active;
  }

  void handle(const Event& e) {
    if (opts_.trace)
      out_.trace.push_back({e.time, kind_name(e.kind), e.entity,
                            e.type == EntityType::truck ? "truck" : (e.type == EntityType::leg ? "leg" : "request")});
    switch (e.type) {
      case EntityType::request: return;
      case EntityType::leg: return handle_leg(e);
      case EntityType::truck: return handle_truck(e);
    }
  }

  void handle_leg(const Event& e) {
    const LegId l = e.entity;
    const ServiceLeg& sl = inst_.legs[l];
    if (e.kind == EventKind::vehicle_departure) {
      departed_[l] = true;
      std::vector<std::size_t> missed;
      for (std::size_t cid = 0; cid < containers_.size(); ++cid) {
        Container& c = containers_[cid];
        if (c.delivered || c.next >= c.legs.size() || c.legs[c.next].service_leg != l) continue;
        const bool continuing = c.onboard && c.node == sl.from;
        if (!continuing && (c.onboard || c.node != sl.from || c.ready > sl.departure + kTol)) {
          missed.push_back(cid);
          continue;
        }
        if (!continuing) {
          charge_storage(c, sl.departure);
          board(c);
        }
        out_.leg_used[l]++;
        out_.used_scheduled[c.request] = 1;
        out_.transit_scheduled +=
            inst_.distance(sl.from, sl.to) * inst_.costs.scheduled_rate(inst_.services[sl.service].mode);
        riding_[l].push_back(cid);
      }
      // A container still waiting at the terminal is rerouted now; one that
      // is elsewhere drops its onward truck legs and is rerouted when it
      // reaches the terminal.
      for (std::size_t cid : missed) {
        Container& c = containers_[cid];
        trace("missed-connection", cid, "leg " + std::to_string(l));
        if (!c.onboard && c.node == sl.from) {
          reroute(cid, std::max(now_, c.ready));
          continue;
        }
        for (std::size_t id : c.tasks)
          if (tasks_[id].kind == TaskKind::last_mile) cancel_task(id);
      }
      return;
    }
    for (std::size_t cid : riding_[l]) {
      Container& c = containers_[cid];
      c.node = sl.to;
      c.next++;
      if (c.node == inst_.requests[c.request].destination) {
        c.onboard = false;
        deliver(c, sl.arrival);
        continue;
      }
      const bool stays = c.next < c.legs.size() && c.legs[c.next].scheduled() &&
                         inst_.legs[*c.legs[c.next].service_leg].service == sl.service;
      if (!stays) {
        c.onboard = false;
        c.ready = sl.arrival + inst_.transfer_time;
      }
    }
    riding_[l].clear();
  }

  void charge_storage(const Container& c, double start) {
    if (c.node == inst_.requests[c.request].origin) return;
    out_.store += std::max(0.0, start - c.ready) * inst_.costs.storage_cost_rate;
  }

  void board(Container& c) {
    if (c.vehicles > 0) out_.transfer += inst_.costs.transfer_cost;
    c.vehicles++;
    c.onboard = true;
  }

  void deliver(Container& c, double t) {
    c.delivered = true;
    const auto& req = inst_.requests[c.request];
    const double late = std::max(0.0, t - req.due);
    out_.delay += late * inst_.costs.delay_penalty_rate;
    out_.delivered[c.request]++;
    double& dt = out_.delivery_time[c.request];
    dt = std::isnan(dt) ? t : std::max(dt, t);
    out_.lateness[c.request] = std::max(out_.lateness[c.request], late);
  }

  void handle_truck(const Event& e) {
    const std::size_t k = e.entity;
    Truck& t = trucks_[k];
    const auto& f = inst_.fleet;
    if (e.version == 0 && !t.current) throw std::logic_error("simulate: truck event without a current task");
    switch (e.kind) {
      case EventKind::vehicle_departure: {
        if (e.version != 0) {
          if (t.phase != Phase::idle || e.version != t.version || t.route.empty()) return;
          commit_front(k);
          const TruckTask& task = tasks_[*t.current];
          t.phase = Phase::to_pickup;
          const double exp_start = std::max(now_ + expected(t.node, task.from), task.earliest);
          t.anchor = {task.to, exp_start + f.load_time + expected(task.from, task.to) + f.unload_time};
          const double tbar = baseline_travel_time(inst_, t.node, task.from);
          const double h = sample_travel_time(tbar, t.node, task.from, now_, timeline_, sc_, travel_rng_);
          drive(t, t.node, task.from, false, h);
          push({now_ + h, EventKind::vehicle_arrival, EntityType::truck, k});
        } else {
          const TruckTask& task = tasks_[*t.current];
          t.phase = Phase::loaded;
          t.anchor = {task.to, now_ + expected(task.from, task.to) + f.unload_time};
          const double tbar = baseline_travel_time(inst_, task.from, task.to);
          const double h = sample_travel_time(tbar, task.from, task.to, now_, timeline_, sc_, travel_rng_);
          drive(t, task.from, task.to, true, h);
          push({now_ + h, EventKind::vehicle_arrival, EntityType::truck, k});
        }
        return;
      }
      case EventKind::vehicle_arrival: {
        const TruckTask& task = tasks_[*t.current];
        if (t.phase == Phase::to_pickup) {
          t.node = task.from;
          if (status_[*t.current] == TaskStatus::cancelled) {
            t.current.reset();
            t.phase = Phase::idle;
            t.free_at = now_;
            dispatch(k);
            check_route(k);
            return;
          }
          const double start = std::max(now_, task.earliest);
          t.anchor = {task.to, start + f.load_time + expected(task.from, task.to) + f.unload_time};
          push({start, EventKind::load_start, EntityType::truck, k});
        } else {
          t.node = task.to;
          t.anchor = {task.to, now_ + f.unload_time};
          push({now_, EventKind::unload_start, EntityType::truck, k});
        }
        check_route(k);
        return;
      }
      case EventKind::load_start: {
        if (e.version != 0) {
          if (t.phase != Phase::idle || e.version != t.version || t.route.empty()) return;
          commit_front(k);
        }
        if (status_[*t.current] == TaskStatus::cancelled) {
          t.current.reset();
          t.phase = Phase::idle;
          t.free_at = now_;
          dispatch(k);
          return;
        }
        const TruckTask& task = tasks_[*t.current];
        Container& c = containers_[task.container];
        if (c.onboard || c.node != task.from)
          throw std::logic_error("simulate: container " + std::to_string(task.container) + " not at pickup of task " +
                                 std::to_string(task.id) + " (kind " + std::to_string(static_cast<int>(task.kind)) +
                                 ", node " + std::to_string(c.node) + " vs " + std::to_string(task.from) +
                                 (c.onboard ? ", onboard" : "") + ", t=" + num(now_) + ")");
        if (c.ready > now_ + kTol) {
          t.phase = Phase::to_pickup;
          push({c.ready, EventKind::load_start, EntityType::truck, k});
          return;
        }
        charge_storage(c, now_);
        board(c);
        out_.used_road[c.request] = 1;
        t.phase = Phase::loading;
        t.anchor = {task.to, now_ + f.load_time + expected(task.from, task.to) + f.unload_time};
        push({now_ + f.load_time, EventKind::load_end, EntityType::truck, k});
        return;
      }
      case EventKind::load_end:
        push({now_, EventKind::vehicle_departure, EntityType::truck, k});
        return;
      case EventKind::unload_start:
        t.phase = Phase::unloading;
        push({now_ + f.unload_time, EventKind::unload_end, EntityType::truck, k});
        return;
      case EventKind::unload_end: {
        const std::size_t id = *t.current;
        const TruckTask& task = tasks_[id];
        status_[id] = TaskStatus::done;
        t.current.reset();
        t.phase = Phase::idle;
        t.free_at = now_;
        Container& c = containers_[task.container];
        c.onboard = false;
        c.node = task.to;
        c.next++;
        auto& ct = c.tasks;
        ct.erase(std::remove(ct.begin(), ct.end(), id), ct.end());
        if (c.node == inst_.requests[c.request].destination) {
          deliver(c, now_);
        } else {
          c.ready = now_ + inst_.transfer_time;
          const PathLeg& next = c.legs[c.next];
          if (next.scheduled() && c.ready > next.departure + kTol) {
            trace("missed-connection", task.container, "leg " + std::to_string(*next.service_leg));
            reroute(task.container, c.ready);
          }
        }
        dispatch(k);
        return;
      }
      case EventKind::request_release:
        return;
    }
  }

  const Instance& inst_;
  const PathPool& pool_;
  const Solution& sol_;
  const Scenario& sc_;
  const SimOptions& opts_;
  Rng travel_rng_;
  DisruptionTimeline timeline_;
  double horizon_;
  double buffer_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;

  std::deque<TruckTask> tasks_;
  std::vector<TaskStatus> status_;
  std::vector<std::size_t> owner_;
  std::vector<Container> containers_;
  std::vector<Truck> trucks_;
  std::size_t fleet_size_ = 0;
  std::vector<int> reserved_;
  std::vector<bool> leg_scheduled_;
  std::vector<bool> departed_;
  std::vector<std::vector<std::size_t>> riding_;
  SimOutcome out_;
};

}  // namespace

SimOutcome simulate(const Instance& inst, const PathPool& pool, const Solution& sol, const TransportPlan& plan,
                    const Scenario& sc, std::uint64_t seed, const SimOptions& opts) {
  World world(inst, pool, sol, sc, seed, opts);
  return world.run(plan);
}

ExpectedOutcome expected_outcome(const Instance& inst, const PathPool& pool, const Solution& sol,
                                 const TransportPlan& plan, const Scenario& sc, std::uint64_t seed, int runs) {
  if (runs < 1) throw std::invalid_argument("expected_outcome: runs must be >= 1");
  ExpectedOutcome eo;
  for (int k = 0; k < runs; ++k)
    eo.runs.push_back(simulate(inst, pool, sol, plan, sc, derive_seed(seed, {static_cast<std::uint64_t>(k)})));
  SimOutcome m = eo.runs.front();
  m.trace.clear();
  auto avg = [&](double SimOutcome::*field) {
    double s = 0.0;
    for (const auto& o : eo.runs) s += o.*field;
    m.*field = s / runs;
  };
  for (auto field : {&SimOutcome::transit, &SimOutcome::transfer, &SimOutcome::store, &SimOutcome::delay,
                     &SimOutcome::transit_truck_loaded, &SimOutcome::transit_truck_empty,
                     &SimOutcome::transit_scheduled, &SimOutcome::truck_hours_loaded, &SimOutcome::truck_hours_empty,
                     &SimOutcome::truck_km_loaded, &SimOutcome::truck_km_empty})
    avg(field);
  eo.mean = std::move(m);
  return eo;
}

nlohmann::json outcome_to_json(const SimOutcome& o) {
  nlohmann::json delivery = nlohmann::json::array();
  for (double d : o.delivery_time) delivery.push_back(std::isnan(d) ? nlohmann::json(nullptr) : nlohmann::json(d));
  return {{"transit", o.transit},
          {"transfer", o.transfer},
          {"store", o.store},
          {"delay", o.delay},
          {"total_cost", o.total_cost()},
          {"transit_truck_loaded", o.transit_truck_loaded},
          {"transit_truck_empty", o.transit_truck_empty},
          {"transit_scheduled", o.transit_scheduled},
          {"truck_hours_loaded", o.truck_hours_loaded},
          {"truck_hours_empty", o.truck_hours_empty},
          {"truck_km_loaded", o.truck_km_loaded},
          {"truck_km_empty", o.truck_km_empty},
          {"delivery_time", delivery},
          {"lateness", o.lateness},
          {"delivered", o.delivered},
          {"containers", o.containers},
          {"leg_used", o.leg_used},
          {"reassignments", o.reassignments},
          {"reroutes", o.reroutes},
          {"fallbacks", o.fallbacks},
          {"events", o.events}};
}

void write_trace_csv(std::ostream& out, const SimOutcome& o) {
  out << "time,kind,entity,detail\n";
  for (const auto& r : o.trace) out << num(r.time) << ',' << r.kind << ',' << r.entity << ",\"" << r.detail << "\"\n";
}

}  // namespace snd
