// bindings.cpp - Python module thermowork._core
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thermowork/config.hpp"
#include "thermowork/ed_oracle.hpp"
#include "thermowork/errors.hpp"
#include "thermowork/pipeline.hpp"
#include "thermowork/workstats.hpp"

namespace py = pybind11;
using namespace thermowork;

namespace {

py::list poles_to_list(const ResponsePoles& p) {
  py::list out;
  for (const auto& pole : p.poles) out.append(py::make_tuple(pole.omega, pole.residue));
  return out;
}

py::list weights_to_list(const RelaxationSpectrum& s) {
  py::list out;
  for (const auto& w : s.nonadiabatic) out.append(py::make_tuple(w.omega, w.weight));
  return out;
}

LrOptions lr_options(double mixing, double tolerance, std::size_t max_iter) {
  LrOptions o;
  o.scf.mixing = mixing;
  o.scf.tolerance = tolerance;
  o.scf.max_iter = max_iter;
  return o;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Thermal linear-response work statistics of driven Hubbard chains";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<StabilityError>(m, "StabilityError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::enum_<Boundary>(m, "Boundary")
      .value("open", Boundary::open)
      .value("periodic", Boundary::periodic);
  py::enum_<EnsembleKind>(m, "EnsembleKind")
      .value("grand_canonical", EnsembleKind::grand_canonical)
      .value("canonical", EnsembleKind::canonical);
  py::enum_<DriveShape>(m, "DriveShape")
      .value("linear_ramp", DriveShape::linear_ramp)
      .value("sudden", DriveShape::sudden);

  py::class_<LatticeSpec>(m, "LatticeSpec")
      .def(py::init<>())
      .def_readwrite("L", &LatticeSpec::L)
      .def_readwrite("J", &LatticeSpec::J)
      .def_readwrite("U", &LatticeSpec::U)
      .def_readwrite("boundary", &LatticeSpec::boundary)
      .def_readwrite("pattern", &LatticeSpec::pattern)
      .def("weights", &LatticeSpec::weights)
      .def("validate", &LatticeSpec::validate);
  m.def("make_chain", &make_chain, py::arg("L"), py::arg("U"),
        py::arg("boundary") = Boundary::open, py::arg("J") = 1.0);

  py::class_<EnsembleSpec>(m, "EnsembleSpec")
      .def(py::init<>())
      .def_readwrite("kind", &EnsembleSpec::kind)
      .def_readwrite("beta", &EnsembleSpec::beta)
      .def_readwrite("target_n", &EnsembleSpec::target_n)
      .def_readwrite("n_up", &EnsembleSpec::n_up)
      .def_readwrite("n_down", &EnsembleSpec::n_down)
      .def("particle_number", &EnsembleSpec::particle_number);
  m.def("half_filling", &half_filling, py::arg("L"), py::arg("beta"),
        py::arg("kind") = EnsembleKind::grand_canonical);

  py::class_<DriveProtocol>(m, "DriveProtocol")
      .def(py::init([](double v0, double dv, double tau, DriveShape shape) {
             DriveProtocol p{v0, dv, tau, shape};
             p.validate();
             return p;
           }),
           py::arg("v0"), py::arg("dv") = 0.01, py::arg("tau") = 0.0,
           py::arg("shape") = DriveShape::linear_ramp)
      .def_readwrite("v0", &DriveProtocol::v0)
      .def_readwrite("dv", &DriveProtocol::dv)
      .def_readwrite("tau", &DriveProtocol::tau)
      .def_readwrite("shape", &DriveProtocol::shape);

  m.def(
      "hxc_potential",
      [](double n, double U, double beta) {
        const auto h = hxc_potential(n, U, beta);
        return py::dict(py::arg("v_hxc") = h.v_hxc, py::arg("gamma") = h.gamma,
                        py::arg("f_hxc") = h.f_hxc, py::arg("clamped") = h.clamped);
      },
      py::arg("n"), py::arg("U"), py::arg("beta"));

  py::class_<ThermalKsState>(m, "ThermalKsState")
      .def_readonly("densities", &ThermalKsState::densities)
      .def_readonly("v_ext", &ThermalKsState::v_ext)
      .def_readonly("vks", &ThermalKsState::vks)
      .def_readonly("energies", &ThermalKsState::energies)
      .def_readonly("orbitals", &ThermalKsState::orbitals)
      .def_readonly("mu", &ThermalKsState::mu)
      .def_readonly("iterations", &ThermalKsState::iterations)
      .def_readonly("residual", &ThermalKsState::residual)
      .def_readonly("warnings", &ThermalKsState::warnings);
  m.def(
      "scf_solve",
      [](const LatticeSpec& spec, const EnsembleSpec& ens, std::vector<double> v_ext, double mixing,
         double tolerance, std::size_t max_iter) {
        return scf_solve(spec, ens, v_ext, lr_options(mixing, tolerance, max_iter).scf);
      },
      py::arg("spec"), py::arg("ensemble"), py::arg("v_ext"), py::arg("mixing") = 0.3,
      py::arg("tolerance") = 1e-10, py::arg("max_iter") = 5000);
  m.def("staggered_potential", &staggered_potential, py::arg("spec"), py::arg("amplitude"));

  py::class_<RelaxationSpectrum>(m, "RelaxationSpectrum")
      .def_readonly("beta", &RelaxationSpectrum::beta)
      .def_readonly("psi_ad", &RelaxationSpectrum::psi_ad)
      .def_property_readonly("nonadiabatic", &weights_to_list)
      .def("nonadiabatic_total", &RelaxationSpectrum::nonadiabatic_total)
      .def("total", &RelaxationSpectrum::total)
      .def("relaxation_function",
           [](const RelaxationSpectrum& s, double t) { return relaxation_function(s, t); });

  py::class_<CumulantValue>(m, "CumulantValue")
      .def_readonly("order", &CumulantValue::order)
      .def_readonly("adiabatic", &CumulantValue::adiabatic)
      .def_readonly("nonadiabatic", &CumulantValue::nonadiabatic)
      .def("total", &CumulantValue::total);
  py::class_<CumulantReport>(m, "CumulantReport")
      .def_readonly("beta", &CumulantReport::beta)
      .def_readonly("cumulants", &CumulantReport::cumulants)
      .def_readonly("beta_fano", &CumulantReport::beta_fano)
      .def("order", &CumulantReport::order, py::return_value_policy::reference_internal);
  m.def("cumulant_report", &cumulant_report, py::arg("spectrum"), py::arg("protocol"),
        py::arg("max_order") = 4, py::arg("U") = 0.0);

  py::class_<LrPoint>(m, "LrPoint")
      .def_readonly("state", &LrPoint::state)
      .def_readonly("isothermal", &LrPoint::isothermal)
      .def_readonly("ks_isothermal", &LrPoint::ks_isothermal)
      .def_readonly("sudden_work", &LrPoint::sudden_work)
      .def_readonly("spectrum", &LrPoint::spectrum)
      .def_property_readonly("ks_poles", [](const LrPoint& p) { return poles_to_list(p.ks); })
      .def_property_readonly("dressed_poles", [](const LrPoint& p) { return poles_to_list(p.dressed); });
  m.def(
      "run_lr_point",
      [](const LatticeSpec& spec, const EnsembleSpec& ens, double v0, double mixing,
         double tolerance, std::size_t max_iter) {
        return run_lr_point(spec, ens, v0, lr_options(mixing, tolerance, max_iter));
      },
      py::arg("spec"), py::arg("ensemble"), py::arg("v0"), py::arg("mixing") = 0.3,
      py::arg("tolerance") = 1e-10, py::arg("max_iter") = 5000);

  py::class_<ExactPoint>(m, "ExactPoint")
      .def_readonly("relaxation", &ExactPoint::relaxation)
      .def_readonly("isothermal", &ExactPoint::isothermal)
      .def_property_readonly("densities",
                             [](const ExactPoint& p) { return exact_densities(p.spectrum); })
      .def_property_readonly("poles",
                             [](const ExactPoint& p) { return poles_to_list(exact_response(p.spectrum)); })
      .def_property_readonly("log_z", [](const ExactPoint& p) { return p.spectrum.log_z; })
      .def_property_readonly("dim", [](const ExactPoint& p) { return p.spectrum.dim(); });
  m.def(
      "run_exact_point",
      [](const LatticeSpec& spec, const EnsembleSpec& ens, double v0) {
        return run_exact_point(spec, ens, v0);
      },
      py::arg("spec"), py::arg("ensemble"), py::arg("v0"));

  py::class_<BenchmarkRow>(m, "BenchmarkRow")
      .def_readonly("U", &BenchmarkRow::U)
      .def_readonly("v0", &BenchmarkRow::v0)
      .def_readonly("tau", &BenchmarkRow::tau)
      .def_readonly("lr", &BenchmarkRow::lr)
      .def_readonly("exact", &BenchmarkRow::exact)
      .def_readonly("rel_err", &BenchmarkRow::rel_err);
  py::class_<BenchmarkTable>(m, "BenchmarkTable")
      .def_readonly("rows", &BenchmarkTable::rows)
      .def_readonly("mean_rel_err", &BenchmarkTable::mean_rel_err);
  m.def(
      "benchmark_dimer",
      [](EnsembleKind kind, double beta, double dv, std::vector<double> U, std::vector<double> v0,
         std::vector<double> tau) {
        BenchmarkGrid grid;
        if (!U.empty()) grid.U = std::move(U);
        if (!v0.empty()) grid.v0 = std::move(v0);
        if (!tau.empty()) grid.tau = std::move(tau);
        return benchmark_dimer(grid, kind, beta, dv);
      },
      py::arg("kind") = EnsembleKind::canonical, py::arg("beta") = 1.0, py::arg("dv") = 0.01,
      py::arg("U") = std::vector<double>{}, py::arg("v0") = std::vector<double>{},
      py::arg("tau") = std::vector<double>{});

  m.def("crossover_time", [](std::vector<double> taus, std::vector<double> k3) {
    return crossover_time(taus, k3);
  });
  m.def("log_grid", &log_grid, py::arg("lo"), py::arg("hi"), py::arg("count"));
  m.def("preset_names", &preset_names);
  m.def("preset_json", [](const std::string& name) { return serialize_config(preset(name)); });
}
