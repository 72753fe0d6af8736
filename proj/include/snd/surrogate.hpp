#pragma once

#include <array>
#include <filesystem>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "snd/model.hpp"
#include "snd/paths.hpp"
#include "snd/tactical.hpp"

namespace snd {

/// Cubic delay-cost model f(g) = a0 + a1 g + a2 g^2 + a3 g^3, clamped at 0.
struct SurrogateModel {
  std::array<double, 4> a{};
  std::size_t samples = 0;
  double residual = 0.0;  // RMS of the fit, EUR

  double raw(double gamma) const { return a[0] + gamma * (a[1] + gamma * (a[2] + gamma * a[3])); }
  bool operator==(const SurrogateModel&) const = default;
};

struct SamplePoint {
  double gamma = 0.0;
  double cost = 0.0;  // mean simulated delay cost, EUR
  std::string tag;
};

class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GammaLeg {
  int containers = 0;
  double hours = 0.0;  // expected truck time incl. loading and unloading
};

/// Truck container-hours over available truck hours N * W.
double compute_gamma(std::span<const GammaLeg> legs, int trucks, double window);

/// gamma of a plan: truck legs of every assigned path, W = max due - min
/// release over selected requests.
double compute_gamma(const Instance& inst, const PathPool& pool, const Solution& sol, const TransportPlan& plan);

SurrogateModel fit(std::span<const SamplePoint> samples);
double predict_delay_cost(const SurrogateModel& m, double gamma);

/// One capped adaptation step. Fewer than four distinct gamma values: all
/// coefficients scale by clamp(observed / max(predicted, floor), 1 -+ theta).
/// Otherwise: refit, then clamp each coefficient's relative change to theta.
SurrogateModel adaptive_update(const SurrogateModel& m, std::span<const SamplePoint> fresh, double theta,
                               double floor = 1.0);

nlohmann::json surrogate_to_json(const SurrogateModel& m);
SurrogateModel surrogate_from_json(const nlohmann::json& j);
void save_surrogate(const SurrogateModel& m, const std::filesystem::path& path);
SurrogateModel load_surrogate(const std::filesystem::path& path);
void write_samples_csv(std::ostream& out, std::span<const SamplePoint> samples);

}  // namespace snd
