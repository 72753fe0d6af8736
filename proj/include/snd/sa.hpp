#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snd/model.hpp"
#include "snd/paths.hpp"
#include "snd/rng.hpp"
#include "snd/sim.hpp"
#include "snd/surrogate.hpp"
#include "snd/tactical.hpp"

namespace snd {

enum class Variant { H, B, F, A, S };

std::string to_string(Variant v);  // "SA_H", ...
/// Accepts "h", "H", "SA_H", "sa_h".
Variant parse_variant(std::string_view s);
const std::vector<Variant>& all_variants();
/// 0 for SA_H, 0.10 otherwise.
double variant_buffer(Variant v);

struct MoveWeights {
  double toggle = 0.3;
  double shift = 0.3;
  double open_path = 0.3;
  double close_leg = 0.1;
};

struct SAConfig {
  int max_iterations = 2000;
  int no_improve_reheat = 100;
  double T0 = 1000.0;
  double T_reheat = 500.0;
  double cooling_rate_init = 0.99;
  double cooling_rate_min = 0.95;
  double cooling_rate_max = 0.999;
  int window = 50;  // acceptance-ratio and scale window
  int n1 = 100;
  int n2 = 1;
  int n3 = 500;
  double theta = 0.1;
  int sim_runs = 5;
  std::uint64_t seed = 1;
  bool split = true;
  bool select_all = false;  // keep every request selected; toggles disabled
  MoveWeights weights;

  std::vector<std::string> validate() const;
};

struct SAState {
  Solution current;
  double current_z = 0.0;
  Solution best;
  double best_z = 0.0;
  double temperature = 0.0;
  double cooling_rate = 0.0;
  int iteration = 0;
  int since_improvement = 0;
  double scale = 1.0;  // s: mean |dZ| over the window
  std::deque<double> recent_delta;
  std::deque<int> recent_accept;
  int reheats = 0;
};

constexpr double kMinScale = 1e-6;

/// Maximization Metropolis rule on dZ / (T s).
bool accept_move(double delta_z, const SAState& state, Rng& rng);

/// Records the iteration's |dZ| and acceptance, cools, reheats after the
/// configured stagnation and adapts the cooling rate.
void update_temperature(SAState& state, const SAConfig& cfg, double delta_z, bool accepted, bool improved);

Solution propose_neighbor(const Instance& inst, const PathPool& pool, const Solution& sol, const MoveWeights& w,
                          Rng& rng);

/// Everything the evaluators need besides the solution.
struct EvalContext {
  const Instance* inst = nullptr;
  const PathPool* pool = nullptr;
  Scenario scenario;
  std::optional<SurrogateModel> surrogate;
  int sim_runs = 5;
  bool split = true;
};

struct VariantEval {
  double z = 0.0;
  Evaluation det;
  double gamma = 0.0;
  double predicted_delay = 0.0;
  std::optional<SimOutcome> sim;  // mean outcome, SA_S only
};

VariantEval evaluate_variant(Variant v, const EvalContext& ctx, const Solution& sol, std::uint64_t sim_seed);

struct SATraceRow {
  int iteration = 0;
  double current_z = 0.0;
  double best_z = 0.0;
  double temperature = 0.0;
  double cooling_rate = 0.0;
  bool accepted = false;
};

struct SAResult {
  Solution best;
  double best_z = 0.0;
  double initial_z = 0.0;
  std::vector<SATraceRow> trace;
  std::optional<SurrogateModel> surrogate;  // final model (SA_F/SA_A)
  int reheats = 0;
  int surrogate_updates = 0;
  double seconds = 0.0;
};

/// Called after every neighbor evaluation.
using SAObserver = std::function<void(int iteration, const Solution& neighbor, const VariantEval& eval)>;

SAResult run_sa(Variant v, const EvalContext& ctx, const SAConfig& cfg, const SAObserver& observer = {});

void write_sa_trace_csv(std::ostream& out, const SAResult& r);
nlohmann::json sa_summary_json(Variant v, const SAResult& r, bool include_timing);

}  // namespace snd
