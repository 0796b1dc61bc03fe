// blunderfit command-line front end: fit / thresholds / simulate.
#include <CLI11.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "blunderfit/csv.hpp"
#include "blunderfit/errors.hpp"
#include "blunderfit/exclusion.hpp"
#include "blunderfit/report.hpp"
#include "blunderfit/simulation.hpp"
#include "blunderfit/stat_core.hpp"

namespace {

using namespace blunderfit;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitFit = 2;
constexpr int kExitNotConverged = 3;

struct CommonConfigFlags {
    double gamma = 0.05;
    std::int64_t lprime = 2;
    std::string kgamma = "exact";
    std::string sigma_rescale = "vf";

    void add_to(CLI::App& cmd) {
        cmd.add_option("--gamma", gamma, "max-residual significance level")
            ->capture_default_str();
        cmd.add_option("--lprime", lprime, "retained allowance L'")->capture_default_str();
        cmd.add_option("--kgamma", kgamma, "k_gamma equation")
            ->check(CLI::IsMember({"exact", "approx"}))
            ->capture_default_str();
        cmd.add_option("--sigma-rescale", sigma_rescale, "sigma rescaling between iterations")
            ->check(CLI::IsMember({"none", "vf"}))
            ->capture_default_str();
    }

    ExclusionConfig build() const {
        ExclusionConfig config;
        config.gamma = Probability(gamma);
        config.l_prime = lprime;
        config.kgamma_mode = kgamma == "exact" ? KGammaMode::exact : KGammaMode::approx;
        config.sigma_mode =
            sigma_rescale == "vf" ? SigmaMode::variance_factor : SigmaMode::none;
        return config;
    }
};

std::optional<int> parse_poly_model(const std::string& model) {
    if (model.empty()) return std::nullopt;
    if (!model.starts_with("poly:"))
        throw std::invalid_argument("--model must be 'poly:<degree>'");
    const std::string digits = model.substr(5);
    int degree = -1;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), degree);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || degree < 0)
        throw std::invalid_argument("--model poly degree must be a non-negative integer");
    return degree;
}

void write_output(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
    out << text;
}

void print_fit_summary(const RunReport& report) {
    const auto& outcome = report.outcome;
    std::printf("input: %s (n=%lld, p=%lld)\n", report.input.path.c_str(),
                static_cast<long long>(report.input.n), static_cast<long long>(report.input.p));
    for (const auto& rec : outcome.trace) {
        std::printf("iter %lld: n_in=%lld kappa=%.6f L=%lld k_gamma=%.6f excluded=%lld\n",
                    static_cast<long long>(rec.iteration), static_cast<long long>(rec.n_in),
                    rec.kappa, static_cast<long long>(rec.l_count), rec.k_gamma,
                    static_cast<long long>(rec.excluded_count()));
    }
    std::printf("stop: %s after %zu iteration(s)\n", to_string(outcome.stop_reason),
                outcome.trace.size());
    std::printf("retained %zu of %lld equations\n", outcome.retained_ids.size(),
                static_cast<long long>(report.input.n));
    for (const auto& e : outcome.excluded)
        std::printf("excluded: %s (iteration %lld, %s, |r|=%.4f)\n", e.id.c_str(),
                    static_cast<long long>(e.iteration), to_string(e.reason),
                    e.normalized_residual);
    const auto& sol = outcome.final_solution;
    std::printf("parameters:\n");
    for (Eigen::Index i = 0; i < sol.parameters.size(); ++i)
        std::printf("  [%lld]  % .10e  +/- %.4e\n", static_cast<long long>(i),
                    sol.parameters[i], std::sqrt(sol.covariance(i, i)));
    std::printf("variance factor: %.6f\n", sol.variance_factor);
}

int cmd_fit(const std::string& input_path, const std::string& model,
            const CommonConfigFlags& common, const std::optional<double>& baseline_k,
            const std::optional<std::int64_t>& min_retained,
            const std::optional<std::int64_t>& max_iter, const std::string& out_path) {
    const Dataset data = read_csv_file(input_path, parse_poly_model(model));
    ExclusionConfig config = common.build();
    config.baseline_k = baseline_k;
    config.min_retained = min_retained;
    config.max_iterations = max_iter;
    config.validate(data.param_count());

    const auto start = std::chrono::steady_clock::now();
    ExclusionOutcome outcome = run_exclusion(data, config);
    const auto elapsed = std::chrono::steady_clock::now() - start;

    RunReport report;
    report.input = {input_path, static_cast<std::int64_t>(data.size()),
                    static_cast<std::int64_t>(data.param_count())};
    report.config = config;
    report.outcome = std::move(outcome);
    report.timing_ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(elapsed).count();

    print_fit_summary(report);
    if (!out_path.empty()) {
        write_output(out_path, canonical_json(to_json(report)));
        std::printf("report written to %s\n", out_path.c_str());
    }
    return report.outcome.stop_reason == StopReason::fixpoint ? kExitOk : kExitNotConverged;
}

int cmd_thresholds(const std::vector<std::int64_t>& n_list, double gamma_value) {
    const Probability gamma(gamma_value);
    std::printf("%10s  %10s  %14s  %14s\n", "n", "kappa", "k_gamma_exact", "k_gamma_approx");
    for (const std::int64_t n : n_list) {
        const double kappa = kappa_limit(n).value();
        const double k_exact = k_gamma_exact(n, gamma).value();
        const double k_approx = k_gamma_approx(n, gamma).value();
        std::printf("%10lld  %10.6f  %14.6f  %14.6f\n", static_cast<long long>(n), kappa, k_exact,
                    k_approx);
    }
    return kExitOk;
}

int cmd_simulate(bool null_mode, std::int64_t blunders, std::int64_t n, std::int64_t trials,
                 std::uint64_t seed, const std::optional<double>& fixed_k, double magnitude,
                 const std::vector<double>& true_params, double sigma,
                 const std::vector<std::string>& rule_names, const CommonConfigFlags& common,
                 const std::string& out_path) {
    SimulationReport report;
    if (null_mode) {
        NullSimSpec spec;
        spec.n = n;
        spec.trials = trials;
        spec.seed = seed;
        spec.fixed_k = fixed_k;
        report = simulate_null(spec);
    } else {
        BlunderScenario scenario;
        scenario.n = n;
        scenario.blunder_count = blunders;
        scenario.blunder_magnitude = magnitude;
        scenario.true_params =
            Eigen::Map<const Eigen::VectorXd>(true_params.data(),
                                              static_cast<Eigen::Index>(true_params.size()));
        scenario.sigma = sigma;
        scenario.trials = trials;
        scenario.seed = seed;
        report = simulate_blunders(scenario, rules_from_names(rule_names, common.build()));
    }

    const std::string text = canonical_json(to_json(report));
    if (out_path.empty())
        std::fputs(text.c_str(), stdout);
    else
        write_output(out_path, text);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-squares fitting with adaptive blunder exclusion"};
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "fit a CSV dataset, excluding blunders");
    std::string input_path, model, fit_out;
    std::optional<double> baseline_k;
    std::optional<std::int64_t> min_retained, max_iter;
    CommonConfigFlags fit_common;
    fit->add_option("input", input_path, "CSV file (id,y,sigma,x1,...,xp)")->required();
    fit_common.add_to(*fit);
    fit->add_option("--baseline-k", baseline_k,
                    "use the fixed |eps|/sigma > k rule instead of the adaptive criteria");
    fit->add_option("--min-retained", min_retained, "stop before dropping below this count");
    fit->add_option("--max-iter", max_iter, "iteration budget");
    fit->add_option("--out", fit_out, "write the JSON report here");
    fit->add_option("--model", model, "poly:<degree> to expand an x column");

    // thresholds
    auto* thresholds = app.add_subcommand("thresholds", "print kappa / k_gamma for given n");
    std::vector<std::int64_t> n_list;
    double thresholds_gamma = 0.05;
    thresholds->add_option("--n-list", n_list, "comma-separated n values")
        ->required()
        ->delimiter(',');
    thresholds->add_option("--gamma", thresholds_gamma, "significance level")
        ->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo null / contamination studies");
    bool null_mode = false;
    std::int64_t sim_blunders = 0, sim_n = 100, sim_trials = 1000;
    std::uint64_t sim_seed = 0;
    std::optional<double> sim_fixed_k;
    double sim_magnitude = 10.0, sim_sigma = 1.0;
    std::vector<double> sim_true_params{1.0, 1.0};
    std::vector<std::string> sim_rules{"adaptive", "baseline3"};
    CommonConfigFlags sim_common;
    std::string sim_out;
    auto* null_opt = simulate->add_flag("--null", null_mode, "null-hypothesis exceedance study");
    auto* blunders_opt =
        simulate->add_option("--blunders", sim_blunders, "blunder count per trial");
    null_opt->excludes(blunders_opt);
    simulate->add_option("--n", sim_n, "equations per trial")->capture_default_str();
    simulate->add_option("--trials", sim_trials, "trial count")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
    simulate->add_option("--fixed-k", sim_fixed_k,
                         "also count |r| > k exceedances in --null mode");
    simulate->add_option("--magnitude", sim_magnitude, "blunder size in units of sigma")
        ->capture_default_str();
    simulate->add_option("--true-params", sim_true_params, "generating polynomial coefficients")
        ->delimiter(',')
        ->capture_default_str();
    simulate->add_option("--sigma", sim_sigma, "measurement sigma")->capture_default_str();
    simulate->add_option("--rules", sim_rules, "rules to compare (adaptive, baseline<k>)")
        ->delimiter(',')
        ->capture_default_str();
    sim_common.add_to(*simulate);
    simulate->add_option("--out", sim_out, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (fit->parsed())
            return cmd_fit(input_path, model, fit_common, baseline_k, min_retained, max_iter,
                           fit_out);
        if (thresholds->parsed()) return cmd_thresholds(n_list, thresholds_gamma);
        if (simulate->parsed()) {
            if (!null_mode && blunders_opt->count() == 0)
                throw std::invalid_argument("simulate requires --null or --blunders");
            return cmd_simulate(null_mode, sim_blunders, sim_n, sim_trials, sim_seed, sim_fixed_k,
                                sim_magnitude, sim_true_params, sim_sigma, sim_rules, sim_common,
                                sim_out);
        }
    } catch (const SingularModelError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFit;
    } catch (const InsufficientDataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitFit;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInput;
    }
    return kExitInput;
}
