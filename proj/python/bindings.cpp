#include "marangoni/cli.hpp"
#include "marangoni/coefficients.hpp"
#include "marangoni/diagnostics.hpp"
#include "marangoni/dynamics.hpp"
#include "marangoni/steady.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace marangoni;

namespace {

py::array_t<double> as_array(const std::vector<double>& v, int rows, int cols)
{
    py::array_t<double> a({rows, cols});
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a, int rows,
                               int cols, const char* what)
{
    if (a.ndim() != 2 || a.shape(0) != rows || a.shape(1) != cols)
        throw std::invalid_argument(std::string(what) + ": expected shape (" + std::to_string(rows) + ", " +
                                    std::to_string(cols) + ")");
    return {a.data(), a.data() + a.size()};
}

py::dict record_dict(const DiagnosticsRecord& r)
{
    py::dict d;
    d["step"] = r.step;
    d["t"] = r.t;
    d["u_l2_sq"] = r.u_l2_sq;
    d["grad_u_l2_sq"] = r.grad_u_l2_sq;
    d["mixing_energy"] = r.mixing_energy;
    d["isothermal_energy"] = r.isothermal_energy;
    d["total_energy"] = r.total_energy;
    d["H"] = r.H;
    d["Y"] = r.Y;
    d["ac_residual_l2"] = r.ac_residual_l2;
    d["theta_linf"] = r.theta_linf;
    d["phi_min"] = r.phi_min;
    d["phi_max"] = r.phi_max;
    d["div_u_linf"] = r.div_u_linf;
    d["energy_law_residual"] = r.energy_law_residual;
    d["energy_law_tol"] = r.energy_law_tol;
    return d;
}

const char* status_name(CheckStatus s)
{
    switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skip: return "skip";
    }
    return "?";
}

// A config paired with the thresholds it implies, stepping one state.
class Simulation {
public:
    explicit Simulation(RunConfig c)
        : cfg_(std::move(c)),
          thr_(compute_thresholds(cfg_.params, resolve_constants(cfg_), cfg_.omega)),
          state_(make_initial_state(cfg_, thr_.theta2))
    {
        cfg_.step.validate(cfg_.grid(), cfg_.params, cfg_.params.isothermal ? 0.0 : state_.theta0.max_abs());
        prev_ = measure(state_, nullptr, cfg_.step.dt, thr_, cfg_.params, cfg_.eta);
    }

    void step(long n)
    {
        for (long k = 0; k < n; ++k) {
            const ScalarField theta_prev = state_.theta;
            state_ = advance(state_, cfg_.step, cfg_.params);
            DiagnosticsRecord r = measure(state_, &theta_prev, cfg_.step.dt, thr_, cfg_.params, cfg_.eta);
            r.energy_law_residual = energy_law_residual(prev_, r, cfg_.step.dt, thr_, cfg_.params);
            r.energy_law_tol = energy_law_tolerance(prev_.total_energy, cfg_.step.dt, cfg_.grid().min_spacing());
            prev_ = r;
        }
    }

    const SimState& state() const { return state_; }
    const RunConfig& config() const { return cfg_; }
    const Thresholds& thresholds() const { return thr_; }
    const DiagnosticsRecord& last() const { return prev_; }

private:
    RunConfig cfg_;
    Thresholds thr_;
    SimState state_;
    DiagnosticsRecord prev_;
};

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Thermocapillary phase-field solver";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

    py::class_<RunConfig>(m, "Config")
        .def(py::init([] { return RunConfig{}; }))
        .def_static("parse", &parse_config, py::arg("text"))
        .def_static("load", &load_config, py::arg("path"))
        .def("serialize", &serialize)
        .def_readwrite("nx", &RunConfig::nx)
        .def_readwrite("ny", &RunConfig::ny)
        .def_readwrite("t_end", &RunConfig::t_end)
        .def_readwrite("omega", &RunConfig::omega)
        .def_readwrite("output_dir", &RunConfig::output_dir)
        .def_readwrite("snapshot_every", &RunConfig::snapshot_every)
        .def_property(
            "dt", [](const RunConfig& c) { return c.step.dt; }, [](RunConfig& c, double dt) { c.step.dt = dt; })
        .def_property(
            "eps", [](const RunConfig& c) { return c.params.eps; },
            [](RunConfig& c, double e) { c.params.eps = e; })
        .def_property_readonly("isothermal", [](const RunConfig& c) { return c.params.isothermal; })
        .def("total_steps", &RunConfig::total_steps)
        .def("__repr__", [](const RunConfig& c) { return "<Config nx=" + std::to_string(c.nx) + " ny=" +
                                                         std::to_string(c.ny) + ">"; });

    m.def(
        "run",
        [](const RunConfig& c) {
            std::ostringstream log;
            int code;
            {
                py::gil_scoped_release nogil;
                code = run(c, log);
            }
            return py::make_tuple(code, log.str());
        },
        py::arg("config"), "Run to t_end; returns (exit_code, log).");

    m.def(
        "audit",
        [](const std::string& dir) {
            const AuditReport rep = audit(dir);
            py::list checks;
            for (const auto& c : rep.checks)
                checks.append(py::make_tuple(c.name, status_name(c.status), c.detail));
            py::dict d;
            d["ok"] = rep.ok();
            d["checks"] = checks;
            d["flagged_steps"] = rep.flagged_steps;
            return d;
        },
        py::arg("run_dir"));

    m.def(
        "thresholds",
        [](const RunConfig& c) {
            const Thresholds t = compute_thresholds(c.params, resolve_constants(c), c.omega);
            py::dict d;
            d["theta1"] = t.theta1;
            d["theta2"] = t.theta2;
            d["zeta"] = t.zeta;
            d["c1"] = t.constants.c1;
            d["c2"] = t.constants.c2;
            d["c3"] = t.constants.c3;
            d["cP"] = t.constants.cP;
            d["estimated"] = t.constants.estimated;
            return d;
        },
        py::arg("config"));

    m.def(
        "read_diagnostics",
        [](const std::string& path) {
            std::ifstream is(path);
            if (!is)
                throw std::runtime_error("cannot open '" + path + "'");
            py::list rows;
            for (const auto& r : read_diagnostics_csv(is))
                rows.append(record_dict(r));
            return rows;
        },
        py::arg("path"));

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<RunConfig>(), py::arg("config"))
        .def("step", &Simulation::step, py::arg("n") = 1, py::call_guard<py::gil_scoped_release>())
        .def_property_readonly("t", [](const Simulation& s) { return s.state().t; })
        .def_property_readonly("steps", [](const Simulation& s) { return s.state().step; })
        .def_property_readonly("phi", [](const Simulation& s) {
            const auto& g = s.state().grid();
            return as_array(s.state().phi.values, g.ny(), g.nx());
        })
        .def_property_readonly("theta", [](const Simulation& s) {
            const auto& g = s.state().grid();
            return as_array(s.state().theta.values, g.ny(), g.nx());
        })
        .def_property_readonly("pressure", [](const Simulation& s) {
            const auto& g = s.state().grid();
            return as_array(s.state().p.values, g.ny(), g.nx());
        })
        .def_property_readonly("u", [](const Simulation& s) {
            const auto& g = s.state().grid();
            return as_array(s.state().u.u, g.ny(), g.nx() + 1);
        })
        .def_property_readonly("v", [](const Simulation& s) {
            const auto& g = s.state().grid();
            return as_array(s.state().u.v, g.ny() + 1, g.nx());
        })
        .def("diagnostics", [](const Simulation& s) { return record_dict(s.last()); })
        .def("max_principle_ok", [](const Simulation& s) { return max_principle_report(s.state()).ok; });

    m.def(
        "solve_steady",
        [](const RunConfig& c, std::optional<py::array_t<double>> guess) {
            const Grid g = c.grid();
            const BoundaryData bd = make_phase_boundary(c);
            ScalarField init = make_initial_state(c, 0.0).phi;
            if (guess)
                init.values = from_array(*guess, g.ny(), g.nx(), "guess");
            const SteadyResult r = solve_steady_phase(bd, init, g, c.params);
            py::dict d;
            d["phi"] = as_array(r.phi.values, g.ny(), g.nx());
            d["converged"] = r.converged;
            d["iterations"] = r.iterations;
            d["residual"] = r.residual;
            return d;
        },
        py::arg("config"), py::arg("guess") = py::none());

    m.def(
        "double_well",
        [](double phi, double eps) {
            const DoubleWell w = double_well(phi, eps);
            return py::make_tuple(w.w, w.wprime);
        },
        py::arg("phi"), py::arg("eps"));
    m.def(
        "kirchhoff", [](double s, const std::string& law) { return kirchhoff(s, CoefficientFn::parse(law)); },
        py::arg("theta"), py::arg("kappa"));
    m.def(
        "inverse_kirchhoff",
        [](double v, const std::string& law) { return inverse_kirchhoff(v, CoefficientFn::parse(law)); },
        py::arg("value"), py::arg("kappa"));
}
