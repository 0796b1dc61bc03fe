// pybind11 surface: scalar kernels, WLS fit, the exclusion engine, CSV
// loading and the Monte Carlo harness. Structured results come back as
// plain dicts/lists mirroring the CLI's JSON report schema.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "blunderfit/csv.hpp"
#include "blunderfit/errors.hpp"
#include "blunderfit/exclusion.hpp"
#include "blunderfit/report.hpp"
#include "blunderfit/simulation.hpp"
#include "blunderfit/stat_core.hpp"

namespace py = pybind11;

namespace {

using namespace blunderfit;

// (id, y, sigma, design_row)
using Row = std::tuple<std::string, double, double, std::vector<double>>;

py::object json_to_py(const nlohmann::ordered_json& j) {
    using value_t = nlohmann::detail::value_t;
    switch (j.type()) {
        case value_t::null:
            return py::none();
        case value_t::boolean:
            return py::bool_(j.get<bool>());
        case value_t::number_integer:
            return py::int_(j.get<std::int64_t>());
        case value_t::number_unsigned:
            return py::int_(j.get<std::uint64_t>());
        case value_t::number_float:
            return py::float_(j.get<double>());
        case value_t::string:
            return py::str(j.get<std::string>());
        case value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(json_to_py(item));
            return out;
        }
        case value_t::object: {
            py::dict out;
            for (auto it = j.begin(); it != j.end(); ++it)
                out[py::str(it.key())] = json_to_py(it.value());
            return out;
        }
        default:
            throw std::runtime_error("unsupported JSON value type");
    }
}

Dataset dataset_from_rows(const std::vector<Row>& rows) {
    if (rows.empty()) throw std::invalid_argument("rows must be non-empty");
    std::vector<Measurement> measurements;
    measurements.reserve(rows.size());
    for (const auto& [id, y, sigma, design] : rows) measurements.push_back({id, design, y, sigma});
    return Dataset(std::move(measurements), std::get<3>(rows.front()).size());
}

std::vector<Row> rows_from_dataset(const Dataset& data) {
    std::vector<Row> rows;
    rows.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const Measurement& m = data[i];
        rows.emplace_back(m.id, m.observed, m.sigma, m.design_row);
    }
    return rows;
}

ExclusionConfig make_config(double gamma, std::int64_t l_prime, const std::string& kgamma,
                            const std::string& sigma_rescale,
                            std::optional<std::int64_t> min_retained,
                            std::optional<std::int64_t> max_iterations,
                            std::optional<double> baseline_k) {
    ExclusionConfig config;
    config.gamma = Probability(gamma);
    config.l_prime = l_prime;
    if (kgamma == "exact")
        config.kgamma_mode = KGammaMode::exact;
    else if (kgamma == "approx")
        config.kgamma_mode = KGammaMode::approx;
    else
        throw std::invalid_argument("kgamma must be 'exact' or 'approx'");
    if (sigma_rescale == "vf")
        config.sigma_mode = SigmaMode::variance_factor;
    else if (sigma_rescale == "none")
        config.sigma_mode = SigmaMode::none;
    else
        throw std::invalid_argument("sigma_rescale must be 'vf' or 'none'");
    config.min_retained = min_retained;
    config.max_iterations = max_iterations;
    config.baseline_k = baseline_k;
    return config;
}

py::dict solution_to_dict(const FitSolution& sol) {
    py::dict out;
    py::list parameters, residuals, normalized;
    for (Eigen::Index i = 0; i < sol.parameters.size(); ++i)
        parameters.append(sol.parameters[i]);
    py::list covariance;
    for (Eigen::Index r = 0; r < sol.covariance.rows(); ++r) {
        py::list row;
        for (Eigen::Index c = 0; c < sol.covariance.cols(); ++c) row.append(sol.covariance(r, c));
        covariance.append(row);
    }
    for (std::size_t i = 0; i < sol.residuals.size(); ++i) {
        residuals.append(sol.residuals[i]);
        normalized.append(sol.normalized_residuals[i]);
    }
    out["parameters"] = parameters;
    out["covariance"] = covariance;
    out["ids"] = sol.ids;
    out["residuals"] = residuals;
    out["normalized_residuals"] = normalized;
    out["variance_factor"] = sol.variance_factor;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "least-squares fitting with adaptive blunder exclusion";

    py::register_exception<SingularModelError>(m, "SingularModelError");
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError");
    py::register_exception<ParseError>(m, "ParseError");

    m.def(
        "psi", [](double z) { return prob_integral(z).value(); },
        "P(|N(0,1)| < z), the probability integral", py::arg("z"));
    m.def(
        "inv_psi", [](double p) { return inv_prob_integral(Probability(p)); },
        "inverse of psi on [0, 1)", py::arg("p"));
    m.def(
        "kappa_limit", [](std::int64_t n) { return kappa_limit(n).value(); },
        "root of [1 - psi(kappa)] n = 1", py::arg("n"));
    m.def(
        "k_gamma_exact",
        [](std::int64_t n, double gamma) { return k_gamma_exact(n, Probability(gamma)).value(); },
        "root of 1 - psi(k)^n = gamma", py::arg("n"), py::arg("gamma"));
    m.def(
        "k_gamma_approx",
        [](std::int64_t n, double gamma) { return k_gamma_approx(n, Probability(gamma)).value(); },
        "root of [1 - psi(k)] n = gamma", py::arg("n"), py::arg("gamma"));
    m.def(
        "poisson_excess_prob",
        [](std::int64_t l_min) { return poisson_excess_prob(l_min).value(); },
        "P(L >= l_min) for L ~ Poisson(1)", py::arg("l_min"));
    m.def("normal_quantile", &normal_quantile, "standard normal quantile", py::arg("u"));

    m.def(
        "fit_wls",
        [](const std::vector<Row>& rows) { return solution_to_dict(fit_wls(dataset_from_rows(rows))); },
        "weighted least squares over rows of (id, y, sigma, design_row)", py::arg("rows"));

    m.def(
        "run_exclusion",
        [](const std::vector<Row>& rows, double gamma, std::int64_t l_prime,
           const std::string& kgamma, const std::string& sigma_rescale,
           std::optional<std::int64_t> min_retained, std::optional<std::int64_t> max_iterations,
           std::optional<double> baseline_k) {
            const Dataset data = dataset_from_rows(rows);
            const ExclusionConfig config = make_config(gamma, l_prime, kgamma, sigma_rescale,
                                                       min_retained, max_iterations, baseline_k);
            config.validate(data.param_count());

            const auto start = std::chrono::steady_clock::now();
            RunReport report;
            report.outcome = run_exclusion(data, config);
            const auto elapsed = std::chrono::steady_clock::now() - start;
            report.input = {"<rows>", static_cast<std::int64_t>(data.size()),
                            static_cast<std::int64_t>(data.param_count())};
            report.config = config;
            report.timing_ms =
                std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed)
                    .count();
            return json_to_py(to_json(report));
        },
        "iterative fit-and-exclude; returns the full report as a dict", py::arg("rows"),
        py::arg("gamma") = 0.05, py::arg("l_prime") = 2, py::arg("kgamma") = "exact",
        py::arg("sigma_rescale") = "vf", py::arg("min_retained") = std::nullopt,
        py::arg("max_iterations") = std::nullopt, py::arg("baseline_k") = std::nullopt);

    m.def(
        "load_csv",
        [](const std::string& path, std::optional<int> poly_degree) {
            return rows_from_dataset(read_csv_file(path, poly_degree));
        },
        "read measurement CSV into rows of (id, y, sigma, design_row)", py::arg("path"),
        py::arg("poly_degree") = std::nullopt);

    m.def(
        "simulate_null",
        [](std::int64_t n, std::int64_t trials, std::uint64_t seed, std::optional<double> fixed_k) {
            NullSimSpec spec;
            spec.n = n;
            spec.trials = trials;
            spec.seed = seed;
            spec.fixed_k = fixed_k;
            return json_to_py(to_json(simulate_null(spec)));
        },
        "null-hypothesis exceedance study", py::arg("n"), py::arg("trials"), py::arg("seed") = 0,
        py::arg("fixed_k") = std::nullopt);

    m.def(
        "simulate_blunders",
        [](std::int64_t n, std::int64_t blunder_count, double magnitude,
           const std::vector<double>& true_params, std::int64_t trials, std::uint64_t seed,
           double sigma, const std::vector<std::string>& rules, double gamma, std::int64_t l_prime,
           const std::string& kgamma, const std::string& sigma_rescale) {
            BlunderScenario scenario;
            scenario.n = n;
            scenario.blunder_count = blunder_count;
            scenario.blunder_magnitude = magnitude;
            scenario.true_params = Eigen::Map<const Eigen::VectorXd>(
                true_params.data(), static_cast<Eigen::Index>(true_params.size()));
            scenario.sigma = sigma;
            scenario.trials = trials;
            scenario.seed = seed;
            const ExclusionConfig base = make_config(gamma, l_prime, kgamma, sigma_rescale,
                                                     std::nullopt, std::nullopt, std::nullopt);
            return json_to_py(to_json(simulate_blunders(scenario, rules_from_names(rules, base))));
        },
        "contamination study comparing exclusion rules on shared datasets", py::arg("n"),
        py::arg("blunder_count"), py::arg("magnitude"), py::arg("true_params"), py::arg("trials"),
        py::arg("seed") = 0, py::arg("sigma") = 1.0,
        py::arg("rules") = std::vector<std::string>{"adaptive", "baseline3"},
        py::arg("gamma") = 0.05, py::arg("l_prime") = 2, py::arg("kgamma") = "exact",
        py::arg("sigma_rescale") = "vf");
}
