#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "supou/bell.hpp"
#include "supou/cli.hpp"
#include "supou/cumulant_engine.hpp"
#include "supou/errors.hpp"
#include "supou/marginal.hpp"
#include "supou/mixing.hpp"
#include "supou/scaling.hpp"
#include "supou/simulate.hpp"
#include "supou/verify.hpp"

namespace py = pybind11;
using namespace supou;

namespace {

py::dict table_dict(const CumulantTable& t) {
    py::dict d;
    d["kind"] = to_string(t.kind);
    d["method"] = to_string(t.method);
    d["orders"] = t.orders;
    d["times"] = t.times;
    d["values"] = t.values;
    d["factors"] = t.factors;
    if (!t.std_errors.empty()) d["std_errors"] = t.std_errors;
    return d;
}

py::dict fit_dict(const ExponentFit& f) {
    py::dict d;
    d["exponent"] = f.exponent;
    d["estimate"] = f.estimate;
    d["std_error"] = f.std_error;
    d["r2"] = f.r2;
    d["t_min"] = f.t_min;
    d["t_max"] = f.t_max;
    d["n_points"] = f.n_points;
    return d;
}

ScalingFit tau_fit(const std::vector<double>& q, const std::vector<double>& estimates) {
    if (q.size() != estimates.size()) throw ConfigError("q and estimates must have the same length");
    ScalingFit fit;
    fit.quantity = FitQuantity::Tau;
    for (std::size_t i = 0; i < q.size(); ++i) {
        ExponentFit r;
        r.exponent = q[i];
        r.estimate = estimates[i];
        fit.rows.push_back(r);
    }
    return fit;
}

}  // namespace

PYBIND11_MODULE(_supou, m) {
    m.doc() = "supOU cumulant scaling and intermittency toolkit";

    auto base = py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);
    py::register_exception<ComputationError>(m, "ComputationError", PyExc_RuntimeError);
    py::register_exception<UnsupportedOperation>(m, "UnsupportedOperation", PyExc_NotImplementedError);
    (void)base;

    py::class_<MixingMeasure>(m, "MixingMeasure")
        .def_static("degenerate", &MixingMeasure::degenerate, py::arg("rate"))
        .def_static("discrete", &MixingMeasure::discrete, py::arg("rates"), py::arg("weights"))
        .def_static("discrete_power_law", &MixingMeasure::discrete_power_law, py::arg("lam"), py::arg("exponent"),
                    py::arg("max_atoms"), py::arg("mass_tol") = 1e-10)
        .def_static("gamma", &MixingMeasure::gamma, py::arg("alpha"))
        .def_static("mittag_leffler", &MixingMeasure::mittag_leffler, py::arg("alpha"))
        .def_property_readonly("kind", &MixingMeasure::kind)
        .def_property_readonly("tail_index", &MixingMeasure::tail_index)
        .def("pdf", &MixingMeasure::pdf)
        .def("__repr__", [](const MixingMeasure& mm) { return "<MixingMeasure " + mm.kind() + ">"; });

    py::class_<MarginalLaw>(m, "MarginalLaw")
        .def_static("gaussian", &MarginalLaw::gaussian, py::arg("variance"))
        .def_static("gamma", &MarginalLaw::gamma, py::arg("shape"), py::arg("rate"), py::arg("centered") = false)
        .def_static("inverse_gaussian", &MarginalLaw::inverse_gaussian, py::arg("delta"), py::arg("gamma"),
                    py::arg("centered") = false)
        .def_static("nig", &MarginalLaw::nig, py::arg("alpha"), py::arg("beta"), py::arg("delta"), py::arg("mu"),
                    py::arg("centered") = false)
        .def_static("compound_poisson_exponential", &MarginalLaw::compound_poisson_exponential,
                    py::arg("intensity"), py::arg("jump_rate"), py::arg("centered") = false)
        .def_static("compound_poisson_deterministic", &MarginalLaw::compound_poisson_deterministic,
                    py::arg("intensity"), py::arg("jump_size"), py::arg("centered") = false)
        .def_property_readonly("kind", &MarginalLaw::kind)
        .def_property_readonly("centered", &MarginalLaw::centered)
        .def_property_readonly("radius_of_analyticity", &MarginalLaw::radius_of_analyticity)
        .def("cgf", &MarginalLaw::cgf, py::arg("u"))
        .def("bdlp_cgf", &MarginalLaw::bdlp_cgf, py::arg("u"))
        .def("cumulant", &MarginalLaw::cumulant, py::arg("m"))
        .def("cumulants", &MarginalLaw::cumulants, py::arg("max_order"))
        .def("__repr__", [](const MarginalLaw& l) { return "<MarginalLaw " + l.kind() + ">"; });

    m.def("correlation", &correlation, py::arg("mixing"), py::arg("tau"));
    m.def("correlation_quadrature", &correlation_quadrature, py::arg("mixing"), py::arg("tau"));
    m.def("verify_bdlp_integral", &verify_bdlp_integral, py::arg("law"), py::arg("u"), py::arg("tol"));

    m.def(
        "integrated_factor",
        [](const MixingMeasure& mix, unsigned order, double t, const std::string& form) {
            if (form != "direct" && form != "kernel") throw ConfigError("form must be 'direct' or 'kernel'");
            return integrated_factor(mix, order, t, form == "direct" ? IntegratedForm::Direct : IntegratedForm::Kernel);
        },
        py::arg("mixing"), py::arg("m"), py::arg("t"), py::arg("form") = "direct");
    m.def(
        "partial_sum_factor",
        [](const MixingMeasure& mix, unsigned order, double t, const std::string& form) {
            if (form != "expanded" && form != "summed") throw ConfigError("form must be 'expanded' or 'summed'");
            return partial_sum_factor(mix, order, t,
                                      form == "expanded" ? PartialSumForm::Expanded : PartialSumForm::Summed);
        },
        py::arg("mixing"), py::arg("m"), py::arg("t"), py::arg("form") = "expanded");
    m.def(
        "aggregate_cumulant",
        [](const MixingMeasure& mix, const MarginalLaw& law, const std::string& kind, unsigned order, double t) {
            return aggregate_cumulant(mix, law, parse_aggregate_kind(kind), order, t);
        },
        py::arg("mixing"), py::arg("law"), py::arg("kind"), py::arg("m"), py::arg("t"));
    m.def(
        "cumulant_table",
        [](const MixingMeasure& mix, const MarginalLaw& law, const std::string& kind,
           const std::vector<unsigned>& orders, const std::vector<double>& times, unsigned threads) {
            return table_dict(cumulant_table(mix, law, parse_aggregate_kind(kind), orders, times, threads));
        },
        py::arg("mixing"), py::arg("law"), py::arg("kind"), py::arg("orders"), py::arg("times"),
        py::arg("threads") = 1);

    m.def("partial_bell", py::overload_cast<unsigned, unsigned, const std::vector<double>&>(&partial_bell),
          py::arg("m"), py::arg("k"), py::arg("x"));
    m.def("moments_from_cumulants", &moments_from_cumulants, py::arg("kappa"));
    m.def("cumulants_from_moments", &cumulants_from_moments, py::arg("moments"));

    m.def("q_star", &q_star, py::arg("alpha"));
    m.def("theoretical_tau", &theoretical_tau, py::arg("q"), py::arg("alpha"));
    m.def("theoretical_sigma", &theoretical_sigma, py::arg("m"), py::arg("alpha"));
    m.def("default_time_grid", &default_time_grid);
    m.def("log_spaced", &log_spaced, py::arg("lo"), py::arg("hi"), py::arg("count"));
    m.def(
        "fit_power_law",
        [](const std::vector<double>& times, const std::vector<double>& values, double t_min, double t_max) {
            return fit_dict(fit_power_law(times, values, 0.0, FitWindow{t_min, t_max}));
        },
        py::arg("times"), py::arg("values"), py::arg("t_min") = 1e3, py::arg("t_max") = 1e6);
    m.def(
        "scaling_fit",
        [](const MixingMeasure& mix, const MarginalLaw& law, const std::string& kind,
           const std::vector<unsigned>& even_q, double t_min, double t_max, unsigned threads) {
            unsigned top = 0;
            for (unsigned q : even_q) top = std::max(top, q);
            std::vector<unsigned> orders;
            for (unsigned o = 1; o <= top; ++o) orders.push_back(o);
            const auto grid = log_spaced(t_min, t_max, 25);
            const auto table = cumulant_table(mix, law, parse_aggregate_kind(kind), orders, grid, threads);
            const auto moments = moments_from_cumulant_table(table, even_q);
            ScalingFit fit;
            fit.quantity = FitQuantity::Tau;
            py::list rows;
            for (unsigned q : even_q) {
                fit.rows.push_back(fit_tau(moments, q, FitWindow{t_min, t_max}));
                rows.append(fit_dict(fit.rows.back()));
            }
            py::dict d;
            d["tau"] = rows;
            d["verdict"] = to_string(intermittency_test(fit));
            return d;
        },
        py::arg("mixing"), py::arg("law"), py::arg("kind"), py::arg("q"), py::arg("t_min") = 1e3,
        py::arg("t_max") = 1e6, py::arg("threads") = 1);
    m.def(
        "intermittency_test",
        [](const std::vector<double>& q, const std::vector<double>& estimates, double tol) {
            return to_string(intermittency_test(tau_fit(q, estimates), tol));
        },
        py::arg("q"), py::arg("estimates"), py::arg("tol") = kDefaultRatioTolerance);

    m.def(
        "simulate_cumulants",
        [](const MixingMeasure& mix, const MarginalLaw& law, const std::string& kind,
           const std::vector<unsigned>& orders, const std::vector<double>& times, std::size_t replicas,
           double horizon, double step, std::uint64_t seed, unsigned threads) {
            SimConfig cfg;
            cfg.mixing = mix;
            cfg.marginal = law;
            cfg.replicas = replicas;
            cfg.horizon = horizon;
            cfg.step = step;
            cfg.seed = seed;
            cfg.threads = threads;
            const auto ens = superposition_path(cfg);
            const auto agg = aggregate_path(ens, parse_aggregate_kind(kind));
            py::dict d = table_dict(empirical_cumulants(agg, orders, times));
            d["warnings"] = ens.warnings;
            return d;
        },
        py::arg("mixing"), py::arg("law"), py::arg("kind"), py::arg("orders"), py::arg("times"),
        py::arg("replicas") = 1000, py::arg("horizon") = 50.0, py::arg("step") = 0.1, py::arg("seed") = 20240101,
        py::arg("threads") = 1);

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool in process; returns (exit_code, stdout, stderr).");
}
