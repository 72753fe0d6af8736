#include "snd/sa.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numeric>

#include "snd/format.hpp"

namespace snd {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::H: return "SA_H";
    case Variant::B: return "SA_B";
    case Variant::F: return "SA_F";
    case Variant::A: return "SA_A";
    case Variant::S: return "SA_S";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  std::string t(s);
  for (auto& ch : t) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  if (t.rfind("SA_", 0) == 0) t = t.substr(3);
  if (t == "H") return Variant::H;
  if (t == "B") return Variant::B;
  if (t == "F") return Variant::F;
  if (t == "A") return Variant::A;
  if (t == "S") return Variant::S;
  throw std::invalid_argument("unknown variant '" + std::string(s) + "' (expected h|b|f|a|s)");
}

const std::vector<Variant>& all_variants() {
  static const std::vector<Variant> v{Variant::H, Variant::B, Variant::F, Variant::A, Variant::S};
  return v;
}

double variant_buffer(Variant v) { return v == Variant::H ? 0.0 : 0.10; }

std::vector<std::string> SAConfig::validate() const {
  std::vector<std::string> v;
  if (max_iterations < 0) v.push_back("max_iterations must be >= 0");
  if (no_improve_reheat < 1 || window < 1 || n1 < 1 || n2 < 1 || n3 < 0 || sim_runs < 1)
    v.push_back("iteration counts must be positive");
  if (!(cooling_rate_min <= cooling_rate_init && cooling_rate_init <= cooling_rate_max))
    v.push_back("cooling rate bounds must contain the initial rate");
  if (!(T0 > 0.0 && T_reheat > 0.0)) v.push_back("temperatures must be > 0");
  if (theta < 0.0) v.push_back("theta must be >= 0");
  const auto& w = weights;
  if (w.toggle < 0 || w.shift < 0 || w.open_path < 0 || w.close_leg < 0 ||
      w.toggle + w.shift + w.open_path + w.close_leg <= 0)
    v.push_back("move weights must be >= 0 with a positive sum");
  return v;
}

bool accept_move(double delta_z, const SAState& state, Rng& rng) {
  if (delta_z >= 0.0) return true;
  const double denom = state.temperature * std::max(state.scale, kMinScale);
  if (!(denom > 0.0)) return false;
  return uniform01(rng) < std::exp(delta_z / denom);
}

void update_temperature(SAState& s, const SAConfig& cfg, double delta_z, bool accepted, bool improved) {
  const auto window = static_cast<std::size_t>(cfg.window);
  s.recent_delta.push_back(std::abs(delta_z));
  if (s.recent_delta.size() > window) s.recent_delta.pop_front();
  s.recent_accept.push_back(accepted ? 1 : 0);
  if (s.recent_accept.size() > window) s.recent_accept.pop_front();
  const double mean_delta =
      std::accumulate(s.recent_delta.begin(), s.recent_delta.end(), 0.0) / static_cast<double>(s.recent_delta.size());
  s.scale = std::max(kMinScale, mean_delta);

  s.since_improvement = improved ? 0 : s.since_improvement + 1;
  s.temperature *= s.cooling_rate;
  if (s.since_improvement >= cfg.no_improve_reheat) {
    s.temperature = cfg.T_reheat;
    s.since_improvement = 0;
    ++s.reheats;
  }
  const double ratio = std::accumulate(s.recent_accept.begin(), s.recent_accept.end(), 0.0) /
                       static_cast<double>(s.recent_accept.size());
  if (ratio > 0.5) s.cooling_rate = std::max(cfg.cooling_rate_min, s.cooling_rate * 0.999);
  else if (ratio < 0.1) s.cooling_rate = std::min(cfg.cooling_rate_max, s.cooling_rate / 0.999);
}

namespace {

enum class Move { toggle, shift, open_path, close_leg };

Move draw_move(const MoveWeights& w, Rng& rng) {
  const double total = w.toggle + w.shift + w.open_path + w.close_leg;
  double u = uniform01(rng) * total;
  if ((u -= w.toggle) < 0) return Move::toggle;
  if ((u -= w.shift) < 0) return Move::shift;
  if ((u -= w.open_path) < 0) return Move::open_path;
  return Move::close_leg;
}

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(n) - 1)); }

}  // namespace

Solution propose_neighbor(const Instance& inst, const PathPool& pool, const Solution& sol, const MoveWeights& w,
                          Rng& rng) {
  Solution next = sol;
  const std::size_t R = inst.requests.size(), L = inst.legs.size();
  if (R == 0) return next;
  Move m = draw_move(w, rng);
  const Move fallback = w.toggle > 0 ? Move::toggle : Move::shift;
  if (L == 0) {
    if (w.toggle <= 0) return next;
    m = Move::toggle;
  }

  if (m == Move::open_path) {
    std::vector<RequestId> selected;
    for (RequestId r = 0; r < R; ++r)
      if (sol.x[r]) selected.push_back(r);
    if (!selected.empty()) {
      const RequestId r = selected[pick(rng, selected.size())];
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < pool.paths(r).size(); ++i)
        if (pool.path(r, i).scheduled_leg_count() > 0) candidates.push_back(i);
      if (!candidates.empty()) {
        const Path& p = pool.path(r, candidates[pick(rng, candidates.size())]);
        for (const auto& leg : p.legs)
          if (leg.scheduled()) {
            const LegId l = *leg.service_leg;
            next.y[l] = std::min(inst.legs[l].capacity, next.y[l] + inst.requests[r].size);
          }
        return next;
      }
    }
    m = fallback;
  }
  switch (m) {
    case Move::toggle: {
      const RequestId r = pick(rng, R);
      next.x[r] = 1 - next.x[r];
      break;
    }
    case Move::shift: {
      const LegId l = pick(rng, L);
      const double avg = static_cast<double>(inst.total_demand()) / static_cast<double>(R);
      const int step = uniform01(rng) < 0.5 ? 1 : static_cast<int>(std::ceil(avg));
      const int sign = uniform01(rng) < 0.5 ? -1 : 1;
      next.y[l] = std::clamp(next.y[l] + sign * step, 0, inst.legs[l].capacity);
      break;
    }
    case Move::close_leg: {
      std::vector<LegId> booked;
      for (LegId l = 0; l < L; ++l)
        if (sol.y[l] > 0) booked.push_back(l);
      const LegId l = booked.empty() ? pick(rng, L) : booked[pick(rng, booked.size())];
      next.y[l] = 0;
      break;
    }
    case Move::open_path: break;
  }
  return next;
}

VariantEval evaluate_variant(Variant v, const EvalContext& ctx, const Solution& sol, std::uint64_t sim_seed) {
  VariantEval out;
  out.det = evaluate(*ctx.inst, *ctx.pool, sol, EvalOptions{ctx.split});
  const ProfitBreakdown& p = out.det.profit;
  switch (v) {
    case Variant::H:
    case Variant::B:
      out.z = p.total();
      break;
    case Variant::F:
    case Variant::A: {
      if (!ctx.surrogate) throw std::invalid_argument(to_string(v) + " needs a fitted surrogate model");
      out.gamma = compute_gamma(*ctx.inst, *ctx.pool, sol, out.det.plan);
      out.predicted_delay = sol.selected_count() == 0 ? 0.0 : predict_delay_cost(*ctx.surrogate, out.gamma);
      // The predicted stochastic delay replaces the planned delay.
      out.z = p.total() + p.delay - out.predicted_delay;
      break;
    }
    case Variant::S: {
      const auto eo = expected_outcome(*ctx.inst, *ctx.pool, sol, out.det.plan, ctx.scenario, sim_seed, ctx.sim_runs);
      out.z = p.revenue - p.booking - eo.mean.total_cost();
      out.sim = eo.mean;
      break;
    }
  }
  return out;
}

SAResult run_sa(Variant v, const EvalContext& ctx_in, const SAConfig& cfg, const SAObserver& observer) {
  if (auto errors = cfg.validate(); !errors.empty()) throw std::invalid_argument("invalid SA config: " + errors.front());
  const auto t0 = std::chrono::steady_clock::now();
  EvalContext ctx = ctx_in;
  MoveWeights weights = cfg.weights;
  if (cfg.select_all) weights.toggle = 0.0;
  ctx.sim_runs = cfg.sim_runs;
  ctx.split = cfg.split;
  const Instance& inst = *ctx.inst;
  Rng rng(derive_seed(cfg.seed, {hash_tag("sa-moves")}));
  auto sim_seed = [&](int it) { return derive_seed(cfg.seed, {hash_tag("sa-sim"), static_cast<std::uint64_t>(it)}); };

  SAState s;
  s.current = Solution::all_truck(inst);
  s.current_z = evaluate_variant(v, ctx, s.current, sim_seed(0)).z;
  s.best = s.current;
  s.best_z = s.current_z;
  s.temperature = cfg.T0;
  s.cooling_rate = cfg.cooling_rate_init;
  s.scale = std::max(kMinScale, std::abs(s.current_z) / 100.0);

  SAResult res;
  res.initial_z = s.current_z;
  std::deque<Solution> recent;  // candidates for surrogate adaptation

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    s.iteration = it;
    Solution cand = propose_neighbor(inst, *ctx.pool, s.current, weights, rng);
    const VariantEval ev = evaluate_variant(v, ctx, cand, sim_seed(it));
    if (observer) observer(it, cand, ev);
    const double delta = ev.z - s.current_z;
    const bool accepted = accept_move(delta, s, rng);
    if (v == Variant::A) {
      recent.push_back(cand);
      while (recent.size() > static_cast<std::size_t>(std::max(0, cfg.n2 - 1))) recent.pop_front();
    }
    if (accepted) {
      s.current = std::move(cand);
      s.current_z = ev.z;
    }
    const bool improved = s.current_z > s.best_z;
    if (improved) {
      s.best = s.current;
      s.best_z = s.current_z;
    }
    update_temperature(s, cfg, delta, accepted, improved);
    res.trace.push_back({it, s.current_z, s.best_z, s.temperature, s.cooling_rate, accepted});

    if (v == Variant::A && it >= cfg.n3 && it % cfg.n1 == 0) {
      std::vector<Solution> picked{s.current};
      for (auto r = recent.rbegin(); r != recent.rend() && picked.size() < static_cast<std::size_t>(cfg.n2); ++r)
        picked.push_back(*r);
      std::vector<SamplePoint> fresh;
      for (std::size_t k = 0; k < picked.size(); ++k) {
        const Evaluation det = evaluate(inst, *ctx.pool, picked[k], EvalOptions{ctx.split});
        const auto eo = expected_outcome(inst, *ctx.pool, picked[k], det.plan, ctx.scenario,
                                         derive_seed(cfg.seed, {hash_tag("sa-adapt"), static_cast<std::uint64_t>(it), k}),
                                         cfg.sim_runs);
        fresh.push_back({compute_gamma(inst, *ctx.pool, picked[k], det.plan), eo.mean.delay, "adapt"});
      }
      ctx.surrogate = adaptive_update(*ctx.surrogate, fresh, cfg.theta);
      ++res.surrogate_updates;
    }
  }
  res.best = std::move(s.best);
  res.best_z = s.best_z;
  res.reheats = s.reheats;
  res.surrogate = ctx.surrogate;
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

void write_sa_trace_csv(std::ostream& out, const SAResult& r) {
  out << "iteration,z_current,z_best,temperature,cooling_rate,accepted\n";
  for (const auto& t : r.trace)
    out << t.iteration << ',' << num(t.current_z) << ',' << num(t.best_z) << ',' << num(t.temperature) << ','
        << num(t.cooling_rate) << ',' << (t.accepted ? 1 : 0) << '\n';
}

nlohmann::json sa_summary_json(Variant v, const SAResult& r, bool include_timing) {
  nlohmann::json j = {{"variant", to_string(v)},
                      {"best_z", r.best_z},
                      {"initial_z", r.initial_z},
                      {"iterations", r.trace.size()},
                      {"reheats", r.reheats},
                      {"surrogate_updates", r.surrogate_updates},
                      {"best", solution_to_json(r.best)}};
  if (r.surrogate) j["surrogate"] = surrogate_to_json(*r.surrogate);
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

}  // namespace snd
