#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "impulse_game/grid.hpp"
#include "impulse_game/model.hpp"
#include "impulse_game/quantizer.hpp"
#include "impulse_game/simulator.hpp"
#include "impulse_game/solver.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace impulse_game;

namespace {

Player to_player(int p) {
  if (p != 1 && p != 2) throw py::value_error("player must be 1 or 2");
  return static_cast<Player>(p);
}

py::array_t<double> field_array(const ValueField& v, const Grid& g) {
  py::array_t<double> out({v.slices(), g.nx(), g.ny(), g.ny()});
  std::copy(v.data().begin(), v.data().end(), out.mutable_data());
  return out;
}

// Action codes: 0 wait, 1 intervene, 2 endure; zeta is NaN unless intervening.
py::tuple policy_arrays(const PolicyField& p, const Grid& g) {
  py::array_t<std::int8_t> tags({p.slices(), g.nx(), g.ny(), g.ny()});
  py::array_t<double> zeta({p.slices(), g.nx(), g.ny(), g.ny()});
  auto* t = tags.mutable_data();
  auto* z = zeta.mutable_data();
  std::size_t i = 0;
  for (int k = 0; k < p.slices(); ++k) {
    for (const Action& a : p.slice(k)) {
      t[i] = static_cast<std::int8_t>(a.tag);
      z[i] = a.tag == ActionTag::Intervene ? g.zeta()[a.zeta_index] : NAN;
      ++i;
    }
  }
  return py::make_tuple(tags, zeta);
}

PolicyField policy_from_arrays(const py::tuple& policy, const Grid& g) {
  if (policy.size() != 2) throw py::value_error("policy must be an (actions, zeta) pair");
  using Tags = py::array_t<std::int8_t, py::array::c_style | py::array::forcecast>;
  using Zeta = py::array_t<double, py::array::c_style | py::array::forcecast>;
  const auto tags = Tags::ensure(policy[0]);
  const auto zeta = Zeta::ensure(policy[1]);
  if (!tags || !zeta) throw py::value_error("policy arrays must be numeric");
  PolicyField p(g);
  const std::size_t size = static_cast<std::size_t>(p.slices()) * g.nodes_per_slice();
  if (static_cast<std::size_t>(tags.size()) != size || static_cast<std::size_t>(zeta.size()) != size) {
    throw py::value_error("policy arrays do not match the grid");
  }
  const auto* t = tags.data();
  const auto* z = zeta.data();
  std::size_t i = 0;
  for (int k = 0; k < p.slices(); ++k) {
    for (Action& a : p.slice(k)) {
      a.tag = static_cast<ActionTag>(t[i]);
      if (a.tag == ActionTag::Intervene) {
        const auto& zs = g.zeta();
        a.zeta_index = static_cast<int>(std::min_element(zs.begin(), zs.end(), [&](double l, double r) {
                                          return std::abs(l - z[i]) < std::abs(r - z[i]);
                                        }) - zs.begin());
      }
      ++i;
    }
  }
  return p;
}

py::dict report_dict(const SolveReport& r) {
  return py::dict("residual_history"_a = r.residual_history, "relaxation_history"_a = r.relaxation_history,
                  "iterations_used"_a = r.iterations_used, "converged"_a = r.converged, "wall_time"_a = r.wall_time,
                  "final_threshold"_a = r.final_threshold,
                  "max_constraint_violation"_a = r.max_constraint_violation,
                  "inner_iterations"_a = r.inner_iterations);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Quantized dynamic programming solver for a two-player stochastic impulse game";

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init<>())
      .def_readwrite("T", &ModelParams::T)
      .def_readwrite("mu", &ModelParams::mu)
      .def_readwrite("sigma", &ModelParams::sigma)
      .def_readwrite("rho1", &ModelParams::rho1)
      .def_readwrite("rho2", &ModelParams::rho2)
      .def_readwrite("lambda_", &ModelParams::lambda)
      .def_readwrite("zeta_min", &ModelParams::zeta_min)
      .def_readwrite("zeta_max", &ModelParams::zeta_max)
      .def_readwrite("delta", &ModelParams::delta)
      .def_readwrite("k1", &ModelParams::k1)
      .def_readwrite("k2", &ModelParams::k2)
      .def_readwrite("phi1", &ModelParams::phi1)
      .def_readwrite("phi2", &ModelParams::phi2)
      .def_readwrite("kappa", &ModelParams::kappa)
      .def("validate", [](const ModelParams& p) { validate(p); });

  py::class_<GridSpec>(m, "GridSpec")
      .def(py::init<>())
      .def_readwrite("m_time", &GridSpec::m_time)
      .def_readwrite("n_x", &GridSpec::n_x)
      .def_readwrite("n_y", &GridSpec::n_y)
      .def_readwrite("x_min", &GridSpec::x_min)
      .def_readwrite("x_max", &GridSpec::x_max)
      .def_readwrite("y_min", &GridSpec::y_min)
      .def_readwrite("y_max", &GridSpec::y_max)
      .def_readwrite("n_zeta", &GridSpec::n_zeta);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &SolverConfig::epsilon)
      .def_readwrite("n_max", &SolverConfig::n_max)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("r0", &SolverConfig::r0)
      .def_readwrite("inner_epsilon", &SolverConfig::inner_epsilon)
      .def_readwrite("inner_n_max", &SolverConfig::inner_n_max);

  py::class_<Grid>(m, "Grid")
      .def(py::init<const GridSpec&, const ModelParams&>(), "spec"_a, "params"_a)
      .def_property_readonly("h", &Grid::h)
      .def_property_readonly("steps", &Grid::steps)
      .def_property_readonly("x", [](const Grid& g) { return g.x().nodes(); })
      .def_property_readonly("y", [](const Grid& g) { return g.y().nodes(); })
      .def_property_readonly("zeta", &Grid::zeta);

  py::class_<Quantizer>(m, "Quantizer")
      .def(py::init<>())
      .def_readwrite("points", &Quantizer::points)
      .def_readwrite("weights", &Quantizer::weights)
      .def("__len__", &Quantizer::size);

  py::enum_<ActionTag>(m, "Action")
      .value("WAIT", ActionTag::Wait)
      .value("INTERVENE", ActionTag::Intervene)
      .value("ENDURE", ActionTag::Endure);

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<QuantizerError>(m, "QuantizerError", PyExc_RuntimeError);

  m.def("build_gaussian_quantizer", &build_gaussian_quantizer, "n"_a, "tol"_a = 1e-10, "max_iter"_a = 10'000);
  m.def(
      "quantizer_moments",
      [](const Quantizer& q) {
        const auto mo = quantizer_moments(q);
        return py::dict("mass"_a = mo.mass, "mean"_a = mo.mean, "second_moment"_a = mo.second_moment);
      },
      "q"_a);
  m.def("market_share", &market_share, "y_own"_a, "y_opp"_a, "delta"_a);
  m.def(
      "corner_line_value",
      [](double t, double x, const ModelParams& p, int player) { return corner_line_value(t, x, p, to_player(player)); },
      "t"_a, "x"_a, "params"_a, "player"_a);

  m.def(
      "no_impulse_value",
      [](int player, const Grid& g, const Quantizer& q, const ModelParams& p) {
        return field_array(no_impulse_value(to_player(player), g, q, p), g);
      },
      "player"_a, "grid"_a, "quantizer"_a, "params"_a);

  m.def(
      "solve_system",
      [](const Grid& g, const Quantizer& q, const ModelParams& p, const SolverConfig& cfg) {
        SystemSolution sol;
        {
          py::gil_scoped_release release;
          sol = solve_system(g, q, p, cfg);
        }
        return py::dict("v1"_a = field_array(sol.value[0], g), "v2"_a = field_array(sol.value[1], g),
                        "policy1"_a = policy_arrays(sol.policy[0], g), "policy2"_a = policy_arrays(sol.policy[1], g),
                        "report"_a = report_dict(sol.report));
      },
      "grid"_a, "quantizer"_a, "params"_a, "config"_a = SolverConfig{},
      "Returns value arrays v1, v2 of shape (M+1, n_x, n_y, n_y), policies as (action codes, zeta) pairs of "
      "shape (M, n_x, n_y, n_y), and the solve report.");

  m.def(
      "simulate_path",
      [](py::tuple policy1, py::tuple policy2, std::tuple<double, double, double> initial, std::uint64_t seed,
         const Grid& g, const ModelParams& p) {
        const std::array<PolicyField, 2> pol{policy_from_arrays(policy1, g),
                                             policy_from_arrays(policy2, g)};
        const auto [x0, y1, y2] = initial;
        const PathRecord r = simulate_path(pol, {x0, y1, y2}, seed, g, p);
        py::list interventions;
        for (const auto& iv : r.interventions) {
          interventions.append(py::make_tuple(iv.t, static_cast<int>(iv.player), iv.zeta, iv.cost));
        }
        return py::dict("t"_a = r.times, "x"_a = r.x, "y1"_a = r.y1, "y2"_a = r.y2,
                        "interventions"_a = interventions, "realized_payoffs"_a = r.realized_payoffs);
      },
      "policy1"_a, "policy2"_a, "initial"_a, "seed"_a, "grid"_a, "params"_a);

  m.def(
      "simulate_ensemble",
      [](std::size_t n_paths, py::tuple policy1, py::tuple policy2, std::tuple<double, double, double> initial,
         std::uint64_t base_seed, const Grid& g, const ModelParams& p) {
        const std::array<PolicyField, 2> pol{policy_from_arrays(policy1, g),
                                             policy_from_arrays(policy2, g)};
        const auto [x0, y1, y2] = initial;
        EnsembleSummary s;
        {
          py::gil_scoped_release release;
          s = simulate_ensemble(n_paths, pol, {x0, y1, y2}, base_seed, g, p);
        }
        return py::dict("t"_a = s.times, "mean_x"_a = s.mean[0], "mean_y1"_a = s.mean[1], "mean_y2"_a = s.mean[2],
                        "se_x"_a = s.se[0], "se_y1"_a = s.se[1], "se_y2"_a = s.se[2],
                        "mean_abs_spread"_a = s.mean_abs_spread, "payoff_mean"_a = s.payoff_mean,
                        "payoff_se"_a = s.payoff_se, "interventions_mean"_a = s.interventions_mean);
      },
      "n_paths"_a, "policy1"_a, "policy2"_a, "initial"_a, "base_seed"_a, "grid"_a, "params"_a);
}
