#include "snd/tactical.hpp"

#include <algorithm>
#include <numeric>

namespace snd {

Solution Solution::all_truck(const Instance& inst) {
  return Solution{std::vector<int>(inst.requests.size(), 1), std::vector<int>(inst.legs.size(), 0)};
}

Solution Solution::empty(const Instance& inst) {
  return Solution{std::vector<int>(inst.requests.size(), 0), std::vector<int>(inst.legs.size(), 0)};
}

std::size_t Solution::selected_count() const {
  return static_cast<std::size_t>(std::count(x.begin(), x.end(), 1));
}

bool TransportPlan::uses(const PathPool& pool, RequestId r, LegId l) const {
  return std::any_of(z[r].begin(), z[r].end(), [&](const Assignment& a) {
    return a.containers > 0 && pool.path(r, a.path).uses_leg(l);
  });
}

int TransportPlan::assigned(RequestId r) const {
  int n = 0;
  for (const auto& a : z[r]) n += a.containers;
  return n;
}

std::vector<std::string> check_constraints(const Instance& inst, const PathPool& pool, const Solution& sol,
                                           const TransportPlan& plan) {
  std::vector<std::string> v;
  const std::size_t R = inst.requests.size(), L = inst.legs.size();
  if (sol.x.size() != R) v.push_back("x has " + std::to_string(sol.x.size()) + " entries, expected " + std::to_string(R));
  if (sol.y.size() != L) v.push_back("y has " + std::to_string(sol.y.size()) + " entries, expected " + std::to_string(L));
  if (plan.z.size() != R) v.push_back("plan covers " + std::to_string(plan.z.size()) + " requests, expected " + std::to_string(R));
  if (plan.leg_load.size() != L) v.push_back("plan leg loads have wrong size");
  if (!v.empty()) return v;

  std::vector<int> load(L, 0);
  for (RequestId r = 0; r < R; ++r) {
    const auto& req = inst.requests[r];
    if (sol.x[r] != 0 && sol.x[r] != 1) v.push_back("request " + req.name + ": x is not binary");
    int total = 0;
    for (const auto& a : plan.z[r]) {
      if (a.path >= pool.paths(r).size()) {
        v.push_back("request " + req.name + ": unknown path index " + std::to_string(a.path));
        continue;
      }
      if (a.containers < 0) v.push_back("request " + req.name + ": negative container count");
      total += a.containers;
      for (const auto& leg : pool.path(r, a.path).legs)
        if (leg.scheduled()) load[*leg.service_leg] += a.containers;
    }
    if (total != req.size * sol.x[r])
      v.push_back("request " + req.name + ": assigns " + std::to_string(total) + " containers, expected " +
                  std::to_string(req.size * sol.x[r]));
  }
  for (LegId l = 0; l < L; ++l) {
    const std::string who = "leg " + std::to_string(l) + " (service " + inst.services[inst.legs[l].service].name + ")";
    if (load[l] != plan.leg_load[l]) v.push_back(who + ": recorded load differs from path flows");
    if (load[l] > sol.y[l])
      v.push_back(who + ": load " + std::to_string(load[l]) + " exceeds booking " + std::to_string(sol.y[l]));
    if (sol.y[l] < 0 || sol.y[l] > inst.legs[l].capacity)
      v.push_back(who + ": booking " + std::to_string(sol.y[l]) + " outside [0, " +
                  std::to_string(inst.legs[l].capacity) + "]");
  }
  return v;
}

ProfitBreakdown objective(const Instance& inst, const PathPool& pool, const Solution& sol,
                          const TransportPlan& plan) {
  ProfitBreakdown b;
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    b.revenue += inst.requests[r].reward * sol.x[r];
    for (const auto& a : plan.z[r]) {
      const auto& c = pool.path(r, a.path).cost;
      b.transit += a.containers * c.transit;
      b.transfer += a.containers * c.transfer;
      b.store += a.containers * c.store;
      b.delay += a.containers * c.delay;
    }
  }
  for (LegId l = 0; l < inst.legs.size(); ++l) b.booking += inst.legs[l].booking_cost * sol.y[l];
  return b;
}

AssignmentState::AssignmentState(const Instance& inst, const PathPool& pool, const Solution& sol, EvalOptions opts)
    : inst_(inst), pool_(pool), sol_(sol), opts_(opts), filtered_(filter_pool(pool, sol.y)) {
  plan_.z.assign(inst.requests.size(), {});
  plan_.leg_load.assign(inst.legs.size(), 0);
}

void AssignmentState::assign_cheapest() {
  for (RequestId r = 0; r < inst_.requests.size(); ++r) {
    if (sol_.x[r] == 0) continue;
    const std::size_t p = filtered_[r].front();
    plan_.z[r].push_back({p, inst_.requests[r].size});
    for (const auto& leg : pool_.path(r, p).legs)
      if (leg.scheduled()) plan_.leg_load[*leg.service_leg] += inst_.requests[r].size;
  }
}

void AssignmentState::move(RequestId r, std::size_t from, std::size_t to, int containers) {
  auto& zr = plan_.z[r];
  auto src = std::find_if(zr.begin(), zr.end(), [&](const Assignment& a) { return a.path == from; });
  src->containers -= containers;
  if (src->containers == 0) zr.erase(src);
  auto dst = std::find_if(zr.begin(), zr.end(), [&](const Assignment& a) { return a.path == to; });
  if (dst == zr.end()) zr.push_back({to, containers});
  else dst->containers += containers;
  for (const auto& leg : pool_.path(r, from).legs)
    if (leg.scheduled()) plan_.leg_load[*leg.service_leg] -= containers;
  for (const auto& leg : pool_.path(r, to).legs)
    if (leg.scheduled()) plan_.leg_load[*leg.service_leg] += containers;
}

int AssignmentState::residual(RequestId r, std::size_t path) const {
  int res = std::numeric_limits<int>::max();
  for (const auto& leg : pool_.path(r, path).legs)
    if (leg.scheduled()) res = std::min(res, cap(*leg.service_leg) - plan_.leg_load[*leg.service_leg]);
  return res;
}

int AssignmentState::on_path(RequestId r, std::size_t path) const {
  for (const auto& a : plan_.z[r])
    if (a.path == path) return a.containers;
  return 0;
}

std::optional<Alternative> next_cheapest_alternative(const AssignmentState& state, LegId l) {
  const auto& pool = state.pool();
  const int over = state.plan().leg_load[l] - state.cap(l);
  if (over <= 0) return std::nullopt;
  std::optional<Alternative> best;
  std::size_t best_path_id = 0;
  for (RequestId r = 0; r < state.instance().requests.size(); ++r) {
    for (const auto& a : state.plan().z[r]) {
      if (a.containers <= 0) continue;
      const Path& src = pool.path(r, a.path);
      if (!src.uses_leg(l)) continue;
      for (std::size_t p : state.filtered()[r]) {
        const Path& dst = pool.path(r, p);
        if (dst.uses_leg(l)) continue;
        const int res = state.residual(r, p);
        const int need = state.options().split ? 1 : a.containers;
        if (res < need) continue;
        const double inc = dst.cost.total() - src.cost.total();
        const bool better = !best || inc < best->increase ||
                            (inc == best->increase && (r < best->request ||
                                                       (r == best->request && dst.id < best_path_id)));
        if (!better) continue;
        const int delta = state.options().split ? std::min({over, a.containers, res}) : a.containers;
        best = Alternative{r, a.path, p, delta, inc};
        best_path_id = dst.id;
      }
    }
  }
  return best;
}

Evaluation evaluate(const Instance& inst, const PathPool& pool, const Solution& sol, EvalOptions opts) {
  AssignmentState state(inst, pool, sol, opts);
  state.assign_cheapest();
  std::size_t iterations = 0;
  for (const auto& svc : inst.services) {
    for (LegId l : svc.legs) {
      while (state.overload(l) > 0) {
        const auto alt = next_cheapest_alternative(state, l);
        // The direct truck is uncapacitated and never uses l, so an
        // alternative always exists while l is overloaded.
        if (!alt) throw std::logic_error("evaluate: no alternative for an overloaded leg");
        state.move(alt->request, alt->from_path, alt->to_path, alt->delta);
        ++iterations;
      }
    }
  }
  Evaluation ev;
  ev.plan = state.take_plan();
  ev.plan.reassign_iterations = iterations;
  for (auto& zr : ev.plan.z)
    std::sort(zr.begin(), zr.end(), [](const Assignment& a, const Assignment& b) { return a.path < b.path; });
  ev.profit = objective(inst, pool, sol, ev.plan);
  return ev;
}

nlohmann::json breakdown_to_json(const ProfitBreakdown& b) {
  return {{"revenue", b.revenue}, {"booking", b.booking}, {"transit", b.transit}, {"transfer", b.transfer},
          {"store", b.store},     {"delay", b.delay},     {"profit", b.total()}};
}

nlohmann::json solution_to_json(const Solution& s) { return {{"x", s.x}, {"y", s.y}}; }

Solution solution_from_json(const nlohmann::json& j) {
  return Solution{j.at("x").get<std::vector<int>>(), j.at("y").get<std::vector<int>>()};
}

void write_plan_csv(std::ostream& out, const Instance& inst, const PathPool& pool, const TransportPlan& plan) {
  out << "request,path_id,legs,containers\n";
  for (RequestId r = 0; r < plan.z.size(); ++r)
    for (const auto& a : plan.z[r])
      out << inst.requests[r].name << ',' << pool.path(r, a.path).id << ",\""
          << describe_path(inst, pool.path(r, a.path)) << "\"," << a.containers << '\n';
}

}  // namespace snd
