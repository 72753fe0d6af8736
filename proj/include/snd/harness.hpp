#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snd/model.hpp"
#include "snd/paths.hpp"
#include "snd/sa.hpp"
#include "snd/sim.hpp"
#include "snd/surrogate.hpp"
#include "snd/tactical.hpp"

namespace snd {

// ---------------------------------------------------------------------------
// Exhaustive oracle for tiny instances

struct OracleLimits {
  std::size_t max_requests = 6;
  std::size_t max_paths = 8;
  int max_capacity = 6;
};

class OracleSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  double z = 0.0;
  Solution solution;
  TransportPlan plan;
  std::size_t configurations = 0;
};

/// Enumerates selection and integer path splits of every request; bookings
/// equal the resulting leg loads.
OracleResult exact_tiny_oracle(const Instance& inst, const PathPool& pool, const OracleLimits& limits = {});

/// Small instance within the oracle limits: 4 terminals, up to 3 services,
/// up to `max_requests` requests of 1-3 containers.
GeneratorParams tiny_generator_params(std::uint64_t seed, int max_requests = 4);

/// Rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Surrogate training

struct HarvestOptions {
  int solutions = 50;  // in total, split over the runs
  int runs = 4;        // independent SA_B runs
  int sa_iterations = 2000;
  int sim_runs = 5;
  std::uint64_t seed = 1;
  std::string tag;
};

/// Runs SA_B several times and simulates solutions visited at log-spaced
/// stages; each sample is (gamma, mean simulated delay cost).
std::vector<SamplePoint> harvest_samples(const Instance& inst, const PathPool& pool, const Scenario& sc,
                                         const HarvestOptions& opts);

struct TrainingResult {
  SurrogateModel model;
  std::vector<SamplePoint> samples;
};

/// Harvests on every (instance, scenario) pair, the fleet resized per
/// scenario, and fits one model.
TrainingResult train_surrogate(const std::vector<std::pair<std::string, Instance>>& instances,
                               const std::vector<Scenario>& scenarios, const HarvestOptions& opts);

// ---------------------------------------------------------------------------
// Experiments

struct InstanceSource {
  std::string name;
  std::optional<std::filesystem::path> file;
  std::optional<GeneratorParams> generate;
};

struct ExperimentConfig {
  std::vector<InstanceSource> instances;
  std::vector<Scenario> scenarios;
  std::vector<Variant> variants;
  int replications = 30;
  std::uint64_t seed = 1;
  std::filesystem::path out = "out";
  SAConfig sa;
  int final_sim_runs = 5;
  bool select_all = false;
  std::optional<std::filesystem::path> surrogate_file;
  HarvestOptions training;
  std::map<std::string, double> reference_costs;  // Table-4 layout reference column
  bool resume = true;

  std::vector<std::string> validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json experiment_config_to_json(const ExperimentConfig& c);
SAConfig sa_config_from_json(const nlohmann::json& j, SAConfig base = {});
nlohmann::json sa_config_to_json(const SAConfig& c);

/// Re-simulated figures of one solution.
struct SolutionDescriptors {
  double profit = 0.0;
  double revenue = 0.0;
  double booking = 0.0;
  double transit = 0.0;
  double transfer = 0.0;
  double store = 0.0;
  double delay = 0.0;
  double selected_share = 0.0;
  double sigma_road = 0.0;
  double sigma_multimodal = 0.0;
  double sigma_scheduled = 0.0;
  double truck_hours = 0.0;
  double booked_capacity = 0.0;  // container-km
  double used_ratio = 0.0;
};

SolutionDescriptors describe_solution(const Instance& inst, const Solution& sol, const Evaluation& det,
                                      const ExpectedOutcome& eo);

struct ReplicationResult {
  int replication = 0;
  std::uint64_t seed = 0;
  double det_z = 0.0;        // best Z under the variant's own evaluator
  double det_cost = 0.0;     // deterministic total cost of the best solution
  SolutionDescriptors final; // re-simulated
  double seconds = 0.0;
};

struct CellResult {
  std::string instance;
  std::string scenario;
  Variant variant = Variant::H;
  std::vector<ReplicationResult> reps;
};

struct ReportRow {
  std::string instance;
  std::string scenario;
  std::string variant;
  int replications = 0;
  double profit_mean = 0.0;
  double profit_best = 0.0;
  double profit_std = 0.0;
  double det_cost_best = 0.0;
  double det_cost_mean = 0.0;
  SolutionDescriptors means;
  double cpu_mean = 0.0;
  double cpu_total = 0.0;
};

struct Report {
  std::vector<ReportRow> rows;
  std::map<std::string, double> reference_costs;
};

ReportRow aggregate(const CellResult& cell);

nlohmann::json cell_to_json(const CellResult& c, const std::string& config_key);
CellResult cell_from_json(const nlohmann::json& j);

/// Runs every (instance, scenario, variant) cell. Cells already present
/// under out/cells with a matching config key are loaded, not recomputed.
Report run_experiment(const ExperimentConfig& cfg);

/// Writes report.csv, timing.csv, table4.md, table6.md and table7.md.
void emit_report(const Report& report, const std::filesystem::path& dir);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

/// One Table-4 layout row, e.g. "R-5 | 4269 | 4240 | 4262 | -0.2%".
std::string table4_row(const std::string& name, std::optional<double> reference, double best, double avg);
/// Integer with a space every three digits from 10 000 up.
std::string group_thousands(double v);

}  // namespace snd
