#include "snd/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Dense>

#include "snd/format.hpp"

namespace snd {

double compute_gamma(std::span<const GammaLeg> legs, int trucks, double window) {
  double load = 0.0;
  for (const auto& l : legs) load += l.containers * l.hours;
  if (load == 0.0) return 0.0;
  if (trucks <= 0 || !(window > 0.0)) throw std::invalid_argument("compute_gamma: needs trucks > 0 and window > 0");
  return load / (trucks * window);
}

double compute_gamma(const Instance& inst, const PathPool& pool, const Solution& sol, const TransportPlan& plan) {
  std::vector<GammaLeg> legs;
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (RequestId r = 0; r < inst.requests.size(); ++r) {
    if (!sol.x[r]) continue;
    const auto& req = inst.requests[r];
    lo = any ? std::min(lo, req.release) : req.release;
    hi = any ? std::max(hi, req.due) : req.due;
    any = true;
    for (const auto& a : plan.z[r])
      for (const auto& leg : pool.path(r, a.path).legs)
        if (!leg.scheduled()) legs.push_back({a.containers, leg.arrival - leg.departure});
  }
  if (!any) return 0.0;
  return compute_gamma(legs, inst.fleet.truck_count, hi - lo);
}

SurrogateModel fit(std::span<const SamplePoint> samples) {
  std::set<double> distinct;
  for (const auto& s : samples) distinct.insert(s.gamma);
  if (samples.size() < 4 || distinct.size() < 4)
    throw FitError("surrogate fit needs at least 4 distinct gamma values, got " + std::to_string(distinct.size()));
  const Eigen::Index n = static_cast<Eigen::Index>(samples.size());
  Eigen::MatrixXd A(n, 4);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = samples[static_cast<std::size_t>(i)].gamma;
    A(i, 0) = 1.0;
    A(i, 1) = g;
    A(i, 2) = g * g;
    A(i, 3) = g * g * g;
    b(i) = samples[static_cast<std::size_t>(i)].cost;
  }
  const Eigen::VectorXd x = A.colPivHouseholderQr().solve(b);
  SurrogateModel m;
  for (int k = 0; k < 4; ++k) m.a[static_cast<std::size_t>(k)] = x(k);
  m.samples = samples.size();
  m.residual = std::sqrt((A * x - b).squaredNorm() / static_cast<double>(n));
  return m;
}

double predict_delay_cost(const SurrogateModel& m, double gamma) { return std::max(0.0, m.raw(gamma)); }

SurrogateModel adaptive_update(const SurrogateModel& m, std::span<const SamplePoint> fresh, double theta,
                               double floor) {
  if (fresh.empty()) return m;
  std::set<double> distinct;
  for (const auto& s : fresh) distinct.insert(s.gamma);
  SurrogateModel out = m;
  if (distinct.size() >= 4) {
    const SurrogateModel refit = fit(fresh);
    for (std::size_t k = 0; k < 4; ++k) {
      const double band = theta * std::abs(m.a[k]);
      out.a[k] = std::clamp(refit.a[k], m.a[k] - band, m.a[k] + band);
    }
    return out;
  }
  double observed = 0.0, predicted = 0.0;
  for (const auto& s : fresh) {
    observed += s.cost;
    predicted += std::max(predict_delay_cost(m, s.gamma), floor);
  }
  const double r = std::clamp(observed / predicted, 1.0 - theta, 1.0 + theta);
  for (auto& c : out.a) c *= r;
  return out;
}

nlohmann::json surrogate_to_json(const SurrogateModel& m) {
  return {{"a0", m.a[0]}, {"a1", m.a[1]}, {"a2", m.a[2]}, {"a3", m.a[3]},
          {"meta", {{"samples", m.samples}, {"residual", m.residual}}}};
}

SurrogateModel surrogate_from_json(const nlohmann::json& j) {
  SurrogateModel m;
  m.a = {j.at("a0").get<double>(), j.at("a1").get<double>(), j.at("a2").get<double>(), j.at("a3").get<double>()};
  if (j.contains("meta")) {
    m.samples = j["meta"].value("samples", std::size_t{0});
    m.residual = j["meta"].value("residual", 0.0);
  }
  for (double c : m.a)
    if (!std::isfinite(c)) throw std::invalid_argument("surrogate: non-finite coefficient");
  return m;
}

void save_surrogate(const SurrogateModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << surrogate_to_json(m).dump(2) << '\n';
}

SurrogateModel load_surrogate(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return surrogate_from_json(nlohmann::json::parse(in));
}

void write_samples_csv(std::ostream& out, std::span<const SamplePoint> samples) {
  out << "gamma,cost,provenance\n";
  for (const auto& s : samples) out << num(s.gamma) << ',' << num(s.cost) << ',' << s.tag << '\n';
}

}  // namespace snd
