#include "blunderfit/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "blunderfit/rng.hpp"
#include "blunderfit/stat_core.hpp"

namespace blunderfit {

namespace {

std::string measurement_id(std::int64_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "m%05lld", static_cast<long long>(index));
    return buf;
}

double proportion_se(double p, std::int64_t trials) {
    return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
}

}  // namespace

std::vector<RuleSpec> rules_from_names(const std::vector<std::string>& names,
                                       const ExclusionConfig& base) {
    std::vector<RuleSpec> rules;
    rules.reserve(names.size());
    for (const auto& name : names) {
        RuleSpec rule{name, base};
        if (name != "adaptive") {
            constexpr std::string_view prefix = "baseline";
            if (!name.starts_with(prefix))
                throw std::invalid_argument("unknown rule '" + name +
                                            "' (expected 'adaptive' or 'baseline<k>')");
            const std::string value = name.substr(prefix.size());
            std::size_t used = 0;
            double k = 0.0;
            try {
                k = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size() || value.empty())
                throw std::invalid_argument("cannot parse baseline threshold in rule '" + name +
                                            "'");
            rule.config.baseline_k = k;
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

void NullSimSpec::validate() const {
    if (n < 2) throw std::invalid_argument("null simulation requires n >= 2");
    if (trials < 1) throw std::invalid_argument("null simulation requires trials >= 1");
    if (fixed_k && !(*fixed_k > 0.0 && std::isfinite(*fixed_k)))
        throw std::invalid_argument("fixed_k must be positive and finite");
}

void BlunderScenario::validate() const {
    if (true_params.size() < 1)
        throw std::invalid_argument("scenario needs at least one true parameter");
    if (n <= true_params.size())
        throw std::invalid_argument("scenario requires n > parameter count");
    if (blunder_count < 0 || blunder_count >= n)
        throw std::invalid_argument("blunder_count must lie in [0, n)");
    if (!std::isfinite(blunder_magnitude))
        throw std::invalid_argument("blunder_magnitude must be finite");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("sigma must be positive and finite");
    if (trials < 1) throw std::invalid_argument("scenario requires trials >= 1");
}

SimulationReport simulate_null(const NullSimSpec& spec) {
    spec.validate();

    const double kappa = kappa_limit(spec.n).value();

    double sum_l = 0.0;
    double sum_l2 = 0.0;
    std::int64_t ge2 = 0, ge3 = 0, ge4 = 0;
    double sum_fixed = 0.0;
    double sum_fixed2 = 0.0;

    for (std::int64_t trial = 0; trial < spec.trials; ++trial) {
        SplitMix64 rng(SplitMix64::substream(spec.seed, static_cast<std::uint64_t>(trial)));
        std::int64_t l = 0;
        std::int64_t fixed_hits = 0;
        for (std::int64_t i = 0; i < spec.n; ++i) {
            const double z = std::fabs(normal_quantile(rng.uniform01()));
            if (z > kappa) ++l;
            if (spec.fixed_k && z > *spec.fixed_k) ++fixed_hits;
        }
        const double ld = static_cast<double>(l);
        sum_l += ld;
        sum_l2 += ld * ld;
        if (l >= 2) ++ge2;
        if (l >= 3) ++ge3;
        if (l >= 4) ++ge4;
        if (spec.fixed_k) {
            const double fd = static_cast<double>(fixed_hits);
            sum_fixed += fd;
            sum_fixed2 += fd * fd;
        }
    }

    const double t = static_cast<double>(spec.trials);
    LTailStats stats;
    stats.mean_l = sum_l / t;
    stats.var_l = spec.trials > 1
                      ? std::max(0.0, (sum_l2 - t * stats.mean_l * stats.mean_l) / (t - 1.0))
                      : 0.0;
    stats.se_mean_l = std::sqrt(stats.var_l / t);
    stats.p_ge2 = static_cast<double>(ge2) / t;
    stats.p_ge3 = static_cast<double>(ge3) / t;
    stats.p_ge4 = static_cast<double>(ge4) / t;
    stats.se_p_ge2 = proportion_se(stats.p_ge2, spec.trials);
    stats.se_p_ge3 = proportion_se(stats.p_ge3, spec.trials);
    stats.se_p_ge4 = proportion_se(stats.p_ge4, spec.trials);

    SimulationReport report;
    report.kind = "null";
    report.n = spec.n;
    report.trials = spec.trials;
    report.seed = spec.seed;
    report.null_stats = stats;
    if (spec.fixed_k) {
        const double mean = sum_fixed / t;
        const double var =
            spec.trials > 1 ? std::max(0.0, (sum_fixed2 - t * mean * mean) / (t - 1.0)) : 0.0;
        report.fixed_k = *spec.fixed_k;
        report.fixed_k_mean_exceedances = mean;
        report.fixed_k_se = std::sqrt(var / t);
    }
    return report;
}

Dataset make_trial_dataset(const BlunderScenario& scenario, std::int64_t trial,
                           bool with_blunders, std::vector<std::size_t>* blunder_indices) {
    scenario.validate();

    const auto n = static_cast<std::size_t>(scenario.n);
    const auto p = static_cast<std::size_t>(scenario.true_params.size());
    SplitMix64 rng(SplitMix64::substream(scenario.seed, static_cast<std::uint64_t>(trial)));

    // Noise first, positions second: the clean twin (with_blunders = false)
    // consumes the same draws and therefore shares the noise exactly.
    std::vector<Measurement> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0;
        std::vector<double> design(p);
        double xk = 1.0;
        double predicted = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            design[j] = xk;
            predicted += scenario.true_params[static_cast<Eigen::Index>(j)] * xk;
            xk *= x;
        }
        const double noise = scenario.sigma * normal_quantile(rng.uniform01());
        rows.push_back({measurement_id(static_cast<std::int64_t>(i)), std::move(design),
                        predicted + noise, scenario.sigma});
    }

    std::vector<std::size_t> positions(n);
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    const auto b = static_cast<std::size_t>(scenario.blunder_count);
    for (std::size_t j = 0; j < b; ++j) {
        const std::uint64_t pick = rng.below(static_cast<std::uint64_t>(n - j));
        std::swap(positions[j], positions[j + static_cast<std::size_t>(pick)]);
    }
    positions.resize(b);
    std::sort(positions.begin(), positions.end());

    if (with_blunders) {
        for (std::size_t idx : positions)
            rows[idx].observed += scenario.blunder_magnitude * scenario.sigma;
    }
    if (blunder_indices) *blunder_indices = positions;

    return Dataset(std::move(rows), p);
}

SimulationReport simulate_blunders(const BlunderScenario& scenario,
                                   const std::vector<RuleSpec>& rules) {
    scenario.validate();
    if (rules.empty()) throw std::invalid_argument("simulate_blunders needs at least one rule");
    const auto p = static_cast<std::size_t>(scenario.true_params.size());
    for (const auto& rule : rules) rule.config.validate(p);

    struct Accumulator {
        std::vector<double> err_sum, err_sq;
        double excluded_sum = 0.0;
        double first_pass_sum = 0.0;
        double first_pass_sq = 0.0;
        std::int64_t false_exclusions = 0;
        std::int64_t missed_blunders = 0;
    };
    std::vector<Accumulator> acc(rules.size());
    for (auto& a : acc) {
        a.err_sum.assign(p, 0.0);
        a.err_sq.assign(p, 0.0);
    }

    for (std::int64_t trial = 0; trial < scenario.trials; ++trial) {
        std::vector<std::size_t> blunder_positions;
        const Dataset data = make_trial_dataset(scenario, trial, true, &blunder_positions);
        std::set<std::string> blunder_ids;
        for (std::size_t idx : blunder_positions) blunder_ids.insert(data[idx].id);

        for (std::size_t r = 0; r < rules.size(); ++r) {
            const ExclusionOutcome outcome = run_exclusion(data, rules[r].config);
            auto& a = acc[r];

            for (std::size_t j = 0; j < p; ++j) {
                const double err =
                    outcome.final_solution.parameters[static_cast<Eigen::Index>(j)] -
                    scenario.true_params[static_cast<Eigen::Index>(j)];
                a.err_sum[j] += err;
                a.err_sq[j] += err * err;
            }

            const auto excluded_total = static_cast<double>(outcome.excluded.size());
            a.excluded_sum += excluded_total;
            const double first_pass =
                outcome.trace.empty() ? 0.0
                                      : static_cast<double>(outcome.trace.front().excluded_count());
            a.first_pass_sum += first_pass;
            a.first_pass_sq += first_pass * first_pass;

            for (const auto& exclusion : outcome.excluded)
                if (!blunder_ids.contains(exclusion.id)) ++a.false_exclusions;
            for (const auto& id : outcome.retained_ids)
                if (blunder_ids.contains(id)) ++a.missed_blunders;
        }
    }

    const double t = static_cast<double>(scenario.trials);
    SimulationReport report;
    report.kind = "blunders";
    report.n = scenario.n;
    report.trials = scenario.trials;
    report.seed = scenario.seed;
    report.blunder_count = scenario.blunder_count;
    report.blunder_magnitude = scenario.blunder_magnitude;
    report.rules.reserve(rules.size());
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const auto& a = acc[r];
        RuleSummary summary;
        summary.name = rules[r].name;
        summary.bias.resize(p);
        summary.rmse.resize(p);
        for (std::size_t j = 0; j < p; ++j) {
            summary.bias[j] = a.err_sum[j] / t;
            summary.rmse[j] = std::sqrt(a.err_sq[j] / t);
        }
        summary.mean_excluded = a.excluded_sum / t;
        summary.mean_excluded_first_pass = a.first_pass_sum / t;
        const double fp_var =
            scenario.trials > 1
                ? std::max(0.0, (a.first_pass_sq -
                                 t * summary.mean_excluded_first_pass *
                                     summary.mean_excluded_first_pass) /
                                    (t - 1.0))
                : 0.0;
        summary.se_excluded_first_pass = std::sqrt(fp_var / t);

        const auto clean_total = static_cast<double>(scenario.n - scenario.blunder_count) * t;
        if (clean_total > 0.0)
            summary.false_exclusion_rate = static_cast<double>(a.false_exclusions) / clean_total;
        if (scenario.blunder_count > 0)
            summary.missed_blunder_rate = static_cast<double>(a.missed_blunders) /
                                          (static_cast<double>(scenario.blunder_count) * t);
        report.rules.push_back(std::move(summary));
    }
    return report;
}

}  // namespace blunderfit
