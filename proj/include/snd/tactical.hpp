#pragma once

#include <limits>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "snd/model.hpp"
#include "snd/paths.hpp"

namespace snd {

/// x: request selection (0/1); y: booked slots per service leg.
struct Solution {
  std::vector<int> x;
  std::vector<int> y;

  /// All requests selected, nothing booked.
  static Solution all_truck(const Instance& inst);
  static Solution empty(const Instance& inst);
  std::size_t selected_count() const;
  bool operator==(const Solution&) const = default;
};

struct Assignment {
  std::size_t path = 0;  // index into the request's pool
  int containers = 0;
  bool operator==(const Assignment&) const = default;
};

struct TransportPlan {
  /// z: per request, the pool paths carrying its containers.
  std::vector<std::vector<Assignment>> z;
  std::vector<int> leg_load;  // q_l
  std::size_t reassign_iterations = 0;

  /// q_{r,l}: whether request r sends any container over leg l.
  bool uses(const PathPool& pool, RequestId r, LegId l) const;
  int assigned(RequestId r) const;
  bool operator==(const TransportPlan&) const = default;
};

struct ProfitBreakdown {
  double revenue = 0.0;
  double booking = 0.0;
  double transit = 0.0;
  double transfer = 0.0;
  double store = 0.0;
  double delay = 0.0;

  double operating() const { return transit + transfer + store + delay; }
  double total() const { return revenue - booking - operating(); }
};

std::vector<std::string> check_constraints(const Instance& inst, const PathPool& pool, const Solution& sol,
                                           const TransportPlan& plan);

ProfitBreakdown objective(const Instance& inst, const PathPool& pool, const Solution& sol,
                          const TransportPlan& plan);

struct EvalOptions {
  /// false: every request rides one path, and overload resolution moves
  /// whole requests.
  bool split = true;
};

/// Working state of the reassignment loop: the filtered pool, the booking
/// caps and the current z with its leg loads.
class AssignmentState {
 public:
  AssignmentState(const Instance& inst, const PathPool& pool, const Solution& sol, EvalOptions opts = {});

  /// Every selected request on its cheapest filtered path.
  void assign_cheapest();
  void move(RequestId r, std::size_t from, std::size_t to, int containers);

  int overload(LegId l) const { return std::max(0, plan_.leg_load[l] - cap(l)); }
  int cap(LegId l) const { return sol_.y[l]; }
  /// Smallest y_l - q_l over the path's scheduled legs; unbounded for pure
  /// truck paths.
  int residual(RequestId r, std::size_t path) const;
  int on_path(RequestId r, std::size_t path) const;

  const Instance& instance() const { return inst_; }
  const PathPool& pool() const { return pool_; }
  const Solution& solution() const { return sol_; }
  const FilteredPool& filtered() const { return filtered_; }
  const EvalOptions& options() const { return opts_; }
  const TransportPlan& plan() const { return plan_; }
  TransportPlan take_plan() { return std::move(plan_); }

 private:
  const Instance& inst_;
  const PathPool& pool_;
  const Solution& sol_;
  EvalOptions opts_;
  FilteredPool filtered_;
  TransportPlan plan_;
};

struct Alternative {
  RequestId request = 0;
  std::size_t from_path = 0;
  std::size_t to_path = 0;
  int delta = 0;
  double increase = 0.0;  // per container
};

/// Cheapest per-container move of containers off overloaded leg l. Ties:
/// smaller increase, then request id, then target path id.
std::optional<Alternative> next_cheapest_alternative(const AssignmentState& state, LegId l);

struct Evaluation {
  TransportPlan plan;
  ProfitBreakdown profit;
};

/// Deterministic evaluation heuristic: cheapest filtered path per request,
/// then overloaded legs are relieved by cheapest reassignments.
Evaluation evaluate(const Instance& inst, const PathPool& pool, const Solution& sol, EvalOptions opts = {});

nlohmann::json breakdown_to_json(const ProfitBreakdown& b);
nlohmann::json solution_to_json(const Solution& s);
Solution solution_from_json(const nlohmann::json& j);
void write_plan_csv(std::ostream& out, const Instance& inst, const PathPool& pool, const TransportPlan& plan);

}  // namespace snd
