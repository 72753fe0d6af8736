#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "snd/model.hpp"

namespace snd {

/// One vehicle movement of a path. Truck legs span load start to unload end;
/// scheduled legs carry the timetable times of their service leg.
struct PathLeg {
  Mode mode = Mode::truck;
  NodeId from = 0;
  NodeId to = 0;
  std::optional<LegId> service_leg;
  double departure = 0.0;
  double arrival = 0.0;

  bool scheduled() const { return service_leg.has_value(); }
  bool operator==(const PathLeg&) const = default;
};

/// Per-container cost components of a path, EUR.
struct PathCost {
  double transit = 0.0;
  double transfer = 0.0;
  double store = 0.0;
  double delay = 0.0;

  double total() const { return transit + transfer + store + delay; }
  bool operator==(const PathCost&) const = default;
};

struct Path {
  std::size_t id = 0;
  RequestId request = 0;
  std::vector<PathLeg> legs;
  PathCost cost;

  bool is_direct_truck() const { return legs.size() == 1 && !legs.front().scheduled(); }
  int scheduled_leg_count() const;
  int truck_leg_count() const;
  /// Number of distinct vehicles; consecutive legs of one service share one.
  int vehicle_count(const Instance& inst) const;
  bool uses_leg(LegId l) const;
  double planned_arrival() const { return legs.back().arrival; }
};

/// A ride on one or two scheduled legs with at most one change of service.
struct ServiceChain {
  std::vector<LegId> legs;
  NodeId origin = 0;
  NodeId destination = 0;
  double departure = 0.0;
  double arrival = 0.0;
};

using ChainMap = std::map<std::pair<NodeId, NodeId>, std::vector<ServiceChain>>;

ChainMap enumerate_service_chains(const Instance& inst);

/// Structural check of a path: chaining in space and time, at most four legs,
/// at most two scheduled legs, trucks only in first/last-mile positions.
std::vector<std::string> check_path_structure(const Instance& inst, const Request& req, const Path& p);

PathCost path_cost(const Instance& inst, const Request& req, const Path& p);

/// Expected truck leg duration, load through unload, with travel-time buffer.
double truck_leg_duration(const Instance& inst, NodeId from, NodeId to, double buffer);

/// Feasible paths of one request, priced, sorted by (cost, legs, id). The
/// direct truck path is always first-class member of the result. Path ids are
/// assigned from `next_id` onwards in construction order.
std::vector<Path> build_request_paths(const Instance& inst, const Request& req,
                                      const ChainMap& chains, double buffer,
                                      std::size_t next_id = 0);

struct PoolOptions {
  /// Drop paths whose per-container cost exceeds the direct truck's; such a
  /// path is never picked by the evaluation heuristic.
  bool prune_dominated = true;
  std::size_t max_paths_per_request = 64;
};

struct PathRef {
  RequestId request = 0;
  std::size_t index = 0;  // position within the request's pool
};

/// Feasible paths of every request for one travel-time buffer. Immutable
/// after construction.
class PathPool {
 public:
  static PathPool build(const Instance& inst, double buffer, const PoolOptions& opts = {});

  double buffer() const { return buffer_; }
  std::size_t request_count() const { return paths_.size(); }
  std::span<const Path> paths(RequestId r) const { return paths_[r]; }
  const Path& path(RequestId r, std::size_t index) const { return paths_[r][index]; }
  std::size_t direct_index(RequestId r) const { return direct_[r]; }
  /// P_l: every pooled path that uses service leg l.
  const std::vector<PathRef>& paths_using(LegId l) const { return by_leg_[l]; }
  std::size_t total_paths() const;

 private:
  double buffer_ = 0.0;
  std::vector<std::vector<Path>> paths_;
  std::vector<std::size_t> direct_;
  std::vector<std::vector<PathRef>> by_leg_;
};

/// P': per request, indices of pool paths whose scheduled legs all carry a
/// booking. Cost order is preserved; the direct truck is always retained.
using FilteredPool = std::vector<std::vector<std::size_t>>;

FilteredPool filter_pool(const PathPool& pool, std::span<const int> booked);

std::string describe_path(const Instance& inst, const Path& p);
void write_pool_csv(std::ostream& out, const Instance& inst, const PathPool& pool, RequestId r);

}  // namespace snd
