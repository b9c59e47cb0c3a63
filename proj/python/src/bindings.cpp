#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "photocount/cli.hpp"
#include "photocount/ensembles.hpp"
#include "photocount/genfn.hpp"
#include "photocount/montecarlo.hpp"
#include "photocount/pmf.hpp"

namespace py = pybind11;
using namespace photocount;

namespace {

Statistics stats_from(const std::string& s) {
    if (s == "bose") return Statistics::Bose;
    if (s == "fermi") return Statistics::Fermi;
    throw Error(ErrorCode::Config, "statistics must be 'bose' or 'fermi'");
}

// mu: float occupation (scalar on the input modes of t) or a complex matrix.
// t: complex matrix or 1-d array of transmission eigenvalues.
TransmissionSpec to_transmission(const py::object& t) {
    py::array arr = py::array::ensure(t);
    if (arr && arr.ndim() == 1) return TransmissionSpec::eigenvalues(t.cast<std::vector<double>>());
    return TransmissionSpec::matrix(t.cast<ComplexMatrix>());
}

ModeCovariance to_covariance(const py::object& mu, const TransmissionSpec& t) {
    if (py::isinstance<py::float_>(mu) || py::isinstance<py::int_>(mu))
        return ModeCovariance::scalar(mu.cast<double>(), t.input_modes());
    return ModeCovariance::matrix(mu.cast<ComplexMatrix>());
}

EigenvalueDensity density(const std::string& name, int modes, double gamma) {
    return {ensemble_from_string(name), modes, gamma};
}

py::dict cumulant_dict(const CumulantSummary& c) {
    py::dict d;
    d["mean"] = c.mean;
    d["variance"] = c.variance;
    d["fano"] = c.fano;
    d["c3"] = c.c3;
    return d;
}

py::dict distribution_dict(const CountDistribution& d) {
    py::dict out;
    out["p"] = py::array_t<double>(d.p.size(), d.p.data());
    out["log_p"] = py::array_t<double>(d.log_p.size(), d.log_p.data());
    out["method"] = std::string(to_string(d.method));
    out["normalization_defect"] = d.diagnostics.normalization_defect;
    out["truncated_tail_mass_bound"] = d.diagnostics.truncated_tail_mass_bound;
    return out;
}

}  // namespace

PYBIND11_MODULE(_photocount, m) {
    m.doc() = "Photocount statistics of chaotic light through random scatterers";

    static py::exception<Error> error(m, "Error", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            const std::string code(to_string(e.code()));
            py::object exc = py::reinterpret_borrow<py::object>(error.ptr())(code + ": " + e.what());
            exc.attr("code") = code;
            PyErr_SetObject(error.ptr(), exc.ptr());
        }
    });

    m.def(
        "spectrum",
        [](const py::object& mu, const py::object& t) {
            const auto tt = to_transmission(t);
            return reduce_to_spectrum(to_covariance(mu, tt), tt).lambda;
        },
        py::arg("mu"), py::arg("t"), "Eigenvalues of t mu t^dagger, descending.");

    py::class_<GeneratingFunction>(m, "GeneratingFunction")
        .def(py::init([](std::vector<double> lambda, double nu, const std::string& stats) {
                 return GeneratingFunction(SpectralData{std::move(lambda)}, nu, stats_from(stats));
             }),
             py::arg("spectrum"), py::arg("nu") = 1.0, py::arg("statistics") = "bose")
        .def_static(
            "from_density",
            [](const std::string& name, int modes, double gamma, double f, double nu, const std::string& stats) {
                return GeneratingFunction::from_density(density(name, modes, gamma), f, nu, stats_from(stats));
            },
            py::arg("ensemble"), py::arg("modes"), py::arg("gamma"), py::arg("f"), py::arg("nu") = 1.0,
            py::arg("statistics") = "bose")
        .def_static(
            "lorentzian",
            [](const std::string& name, int modes, double gamma, double f_max, double nu, int points, double span) {
                return GeneratingFunction::from_profile(density(name, modes, gamma),
                                                        lorentzian_profile(f_max, nu, points, span));
            },
            py::arg("ensemble"), py::arg("modes"), py::arg("gamma"), py::arg("f_max"), py::arg("nu") = 1.0,
            py::arg("points") = 10000, py::arg("span") = 100.0)
        .def("__call__", &GeneratingFunction::eval_real, py::arg("xi"))
        .def("derivative", &GeneratingFunction::derivative, py::arg("xi"), py::arg("k"))
        .def("eval_complex", &GeneratingFunction::eval_complex, py::arg("s"))
        .def_property_readonly("xi_max", &GeneratingFunction::xi_max)
        .def_property_readonly("lambda_max", &GeneratingFunction::lambda_max)
        .def("cumulants", [](const GeneratingFunction& g) { return cumulant_dict(g.cumulants()); });

    m.def(
        "pmf",
        [](const GeneratingFunction& g, std::optional<int> n_max) {
            return distribution_dict(invert_fourier(g, n_max ? *n_max : auto_n_max(g)));
        },
        py::arg("g"), py::arg("n_max") = py::none(), "Exact photocount distribution by tilted Fourier inversion.");
    m.def(
        "saddle_point_pmf",
        [](const GeneratingFunction& g, int n_max) { return distribution_dict(saddle_point_pmf(g, n_max)); },
        py::arg("g"), py::arg("n_max"));
    m.def("auto_n_max", &auto_n_max, py::arg("g"), py::arg("tail_mass") = 1e-12);
    m.def("k_distribution_log", &k_distribution_log, py::arg("f"), py::arg("n_bar"), py::arg("n"));
    m.def("closed_form_double_barrier", &closed_form_double_barrier, py::arg("f"), py::arg("nu_n_gamma"),
          py::arg("xi"));
    m.def("tail_rate", py::overload_cast<const GeneratingFunction&>(&tail_rate), py::arg("g"));
    m.def(
        "fit_last_decade",
        [](const GeneratingFunction& g, int n_max) {
            const auto fit = fit_last_decade(invert_fourier(g, n_max));
            return py::make_tuple(fit.slope, fit.n_lo, fit.n_hi);
        },
        py::arg("g"), py::arg("n_max"), "(slope, n_lo, n_hi) of log p_n over its last decade.");

    m.def(
        "fano_haar",
        [](const std::vector<double>& mu, const std::vector<double>& tau) {
            return fano_haar(moment_set(mu), moment_set(tau));
        },
        py::arg("mu_eigenvalues"), py::arg("tau_eigenvalues"));
    m.def(
        "sample_transmission",
        [](const std::string& name, int modes, double gamma, std::uint64_t seed) {
            Rng rng = make_substream(seed, 0);
            return sample_eigenvalues(density(name, modes, gamma), rng);
        },
        py::arg("ensemble"), py::arg("modes"), py::arg("gamma"), py::arg("seed") = 0);

    m.def(
        "sample_counts",
        [](const py::object& mu, const py::object& t, int cells, std::int64_t trials, std::uint64_t seed,
           int threads) {
            const auto tt = to_transmission(t);
            const auto mm = to_covariance(mu, tt);
            std::vector<std::int64_t> counts;
            {
                py::gil_scoped_release release;
                counts = sample_counts(mm, tt, {cells, trials, seed, threads});
            }
            return py::array_t<std::int64_t>(counts.size(), counts.data());
        },
        py::arg("mu"), py::arg("t"), py::arg("cells") = 1, py::arg("trials") = 1000, py::arg("seed") = 0,
        py::arg("threads") = 0);
    m.def(
        "empirical_summary",
        [](std::vector<std::int64_t> counts) {
            const auto s = empirical_summary(counts);
            py::dict d;
            d["trials"] = s.trials;
            d["mean"] = s.mean;
            d["variance"] = s.variance;
            d["fano"] = s.fano;
            d["c3"] = s.c3;
            d["se_mean"] = s.se_mean;
            d["se_variance"] = s.se_variance;
            d["se_fano"] = s.se_fano;
            return d;
        },
        py::arg("counts"));

    m.def(
        "run_scenario",
        [](const std::string& json_text, std::optional<std::uint64_t> seed) {
            const auto out = cli::run_task(cli::parse_scenario(json_text), seed);
            py::list warnings;
            for (const auto& w : out.warnings) warnings.append(py::make_tuple(w.code, w.message));
            return py::make_tuple(out.files, warnings);
        },
        py::arg("scenario_json"), py::arg("seed") = py::none(),
        "Run a scenario in memory; returns ({file name: contents}, [(code, message)]).");
}
