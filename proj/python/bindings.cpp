// Python bindings. Structured values cross the boundary as JSON text and are
// turned into dicts on the Python side; Instance and PathPool stay opaque.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snd/harness.hpp"
#include "snd/sa.hpp"
#include "snd/sim.hpp"
#include "snd/surrogate.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
json from_py(const py::object& o) { return json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

snd::Solution solution_of(const py::object& o) { return snd::solution_from_json(from_py(o)); }

snd::Scenario scenario_of(const std::string& name_or_path) { return snd::resolve_scenario(name_or_path); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic service network design core";

  py::register_exception<snd::FitError>(m, "FitError", PyExc_ValueError);
  py::register_exception<snd::OracleSizeError>(m, "OracleSizeError", PyExc_ValueError);

  py::class_<snd::Instance>(m, "Instance")
      .def_static("from_dict", [](const py::object& o) { return snd::instance_from_json(from_py(o)); })
      .def_static("load", [](const std::string& path) { return snd::load_instance(path); })
      .def_static(
          "generate",
          [](const py::object& params) {
            return snd::generate_instance(snd::generator_params_from_json(params.is_none() ? json::object() : from_py(params)));
          },
          py::arg("params") = py::none())
      .def_static(
          "tiny", [](std::uint64_t seed, int max_requests) { return snd::generate_instance(snd::tiny_generator_params(seed, max_requests)); },
          py::arg("seed"), py::arg("max_requests") = 4)
      .def("to_dict", [](const snd::Instance& i) { return to_py(snd::instance_to_json(i)); })
      .def("save", [](const snd::Instance& i, const std::string& path) { snd::save_instance(i, path); })
      .def("validate", &snd::validate_instance)
      .def("with_fleet_factor", &snd::with_fleet_factor)
      .def("with_fleet_size", &snd::with_fleet_size)
      .def_property_readonly("node_count", [](const snd::Instance& i) { return i.nodes.size(); })
      .def_property_readonly("leg_count", [](const snd::Instance& i) { return i.legs.size(); })
      .def_property_readonly("request_count", [](const snd::Instance& i) { return i.requests.size(); })
      .def_property_readonly("truck_count", [](const snd::Instance& i) { return i.fleet.truck_count; });

  py::class_<snd::PathPool>(m, "PathPool")
      .def(py::init([](const snd::Instance& inst, double buffer, std::size_t max_paths) {
             snd::PoolOptions o;
             o.max_paths_per_request = max_paths;
             return snd::PathPool::build(inst, buffer, o);
           }),
           py::arg("instance"), py::arg("buffer") = 0.0, py::arg("max_paths") = snd::PoolOptions{}.max_paths_per_request)
      .def_property_readonly("buffer", &snd::PathPool::buffer)
      .def_property_readonly("total_paths", &snd::PathPool::total_paths)
      .def("size", [](const snd::PathPool& p, std::size_t r) { return p.paths(r).size(); })
      .def("describe", [](const snd::PathPool& p, const snd::Instance& inst, std::size_t r, std::size_t k) {
        return snd::describe_path(inst, p.path(r, k));
      });

  m.def(
      "evaluate",
      [](const snd::Instance& inst, const snd::PathPool& pool, const py::object& sol, bool split) {
        const auto ev = snd::evaluate(inst, pool, solution_of(sol), {split});
        return to_py(snd::breakdown_to_json(ev.profit));
      },
      py::arg("instance"), py::arg("pool"), py::arg("solution"), py::arg("split") = true,
      "Deterministic profit breakdown of a solution {x, y}.");

  m.def(
      "solve",
      [](const std::string& variant, const snd::Instance& inst, const snd::PathPool& pool, const std::string& scenario,
         const py::object& config, const py::object& surrogate) {
        const auto v = snd::parse_variant(variant);
        const auto cfg = snd::sa_config_from_json(config.is_none() ? json::object() : from_py(config));
        snd::EvalContext ctx{&inst, &pool, scenario_of(scenario), std::nullopt, cfg.sim_runs, cfg.split};
        if (!surrogate.is_none()) ctx.surrogate = snd::surrogate_from_json(from_py(surrogate));
        snd::SAResult res;
        {
          py::gil_scoped_release nogil;
          res = snd::run_sa(v, ctx, cfg);
        }
        json out = snd::sa_summary_json(v, res, true);
        out["solution"] = snd::solution_to_json(res.best);
        return to_py(out);
      },
      py::arg("variant"), py::arg("instance"), py::arg("pool"), py::arg("scenario") = "V-F-",
      py::arg("config") = py::none(), py::arg("surrogate") = py::none());

  m.def(
      "simulate",
      [](const snd::Instance& inst, const snd::PathPool& pool, const py::object& sol, const std::string& scenario,
         std::uint64_t seed) {
        const auto s = solution_of(sol);
        const auto det = snd::evaluate(inst, pool, s);
        const auto sc = scenario_of(scenario);
        snd::SimOutcome o;
        {
          py::gil_scoped_release nogil;
          o = snd::simulate(inst, pool, s, det.plan, sc, seed);
        }
        return to_py(snd::outcome_to_json(o));
      },
      py::arg("instance"), py::arg("pool"), py::arg("solution"), py::arg("scenario") = "V-F-", py::arg("seed") = 1);

  m.def(
      "gamma",
      [](const snd::Instance& inst, const snd::PathPool& pool, const py::object& sol) {
        const auto s = solution_of(sol);
        return snd::compute_gamma(inst, pool, s, snd::evaluate(inst, pool, s).plan);
      },
      py::arg("instance"), py::arg("pool"), py::arg("solution"));

  m.def(
      "fit_surrogate",
      [](const std::vector<double>& gamma, const std::vector<double>& cost) {
        if (gamma.size() != cost.size()) throw std::invalid_argument("gamma and cost differ in length");
        std::vector<snd::SamplePoint> s;
        for (std::size_t k = 0; k < gamma.size(); ++k) s.push_back({gamma[k], cost[k], ""});
        return to_py(snd::surrogate_to_json(snd::fit(s)));
      },
      py::arg("gamma"), py::arg("cost"));

  m.def(
      "predict_delay_cost",
      [](const py::object& model, double gamma) {
        return snd::predict_delay_cost(snd::surrogate_from_json(from_py(model)), gamma);
      },
      py::arg("model"), py::arg("gamma"));

  m.def(
      "oracle",
      [](const snd::Instance& inst, const snd::PathPool& pool) {
        const auto r = snd::exact_tiny_oracle(inst, pool);
        return to_py({{"z", r.z}, {"solution", snd::solution_to_json(r.solution)}, {"configurations", r.configurations}});
      },
      py::arg("instance"), py::arg("pool"));

  m.def("spearman", [](const std::vector<double>& x, const std::vector<double>& y) { return snd::spearman(x, y); });
  m.def("scenario_presets", &snd::scenario_preset_names);
}
