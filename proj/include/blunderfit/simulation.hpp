#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blunderfit/exclusion.hpp"
#include "blunderfit/fitting.hpp"

namespace blunderfit {

/// Null-hypothesis trials: n standard normal deviates per trial taken as
/// normalized residuals, counting exceedances of kappa(n) (and optionally of
/// a fixed threshold).
struct NullSimSpec {
    std::int64_t n = 0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::optional<double> fixed_k;  // also count |r| > fixed_k when set

    void validate() const;
};

/// Contaminated-data trials: a polynomial dataset with normal noise plus
/// blunder_count offsets of blunder_magnitude * sigma at random positions.
struct BlunderScenario {
    std::int64_t n = 0;
    std::int64_t blunder_count = 0;
    double blunder_magnitude = 0.0;  // in units of sigma, sign respected
    Eigen::VectorXd true_params;     // degree = size - 1, x equally spaced on [0, 1]
    double sigma = 1.0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

struct RuleSpec {
    std::string name;
    ExclusionConfig config;
};

/// "adaptive" keeps `base` as configured; "baseline<k>" (e.g. baseline3)
/// additionally sets baseline_k = k. Anything else throws.
std::vector<RuleSpec> rules_from_names(const std::vector<std::string>& names,
                                       const ExclusionConfig& base);

/// Distribution of the exceedance count L over the null trials.
struct LTailStats {
    double mean_l = 0.0;
    double var_l = 0.0;
    double se_mean_l = 0.0;
    double p_ge2 = 0.0, p_ge3 = 0.0, p_ge4 = 0.0;
    double se_p_ge2 = 0.0, se_p_ge3 = 0.0, se_p_ge4 = 0.0;
};

struct RuleSummary {
    std::string name;
    std::vector<double> bias;  // mean(estimate - true), per parameter
    std::vector<double> rmse;
    double mean_excluded = 0.0;
    double mean_excluded_first_pass = 0.0;
    double se_excluded_first_pass = 0.0;
    std::optional<double> false_exclusion_rate;  // clean equations excluded / clean total
    std::optional<double> missed_blunder_rate;   // blunders retained / blunder total
};

struct SimulationReport {
    std::string kind;  // "null" or "blunders"
    std::int64_t n = 0;
    std::int64_t trials = 0;
    std::uint64_t seed = 0;
    std::optional<std::int64_t> blunder_count;
    std::optional<double> blunder_magnitude;
    std::optional<LTailStats> null_stats;
    std::optional<double> fixed_k;
    std::optional<double> fixed_k_mean_exceedances;
    std::optional<double> fixed_k_se;
    std::vector<RuleSummary> rules;
};

SimulationReport simulate_null(const NullSimSpec& spec);

/// Runs every rule on the same per-trial dataset (paired comparison; the
/// trial substream depends only on (seed, trial)).
SimulationReport simulate_blunders(const BlunderScenario& scenario,
                                   const std::vector<RuleSpec>& rules);

/// The dataset rule trials see: deterministic in (scenario, trial). With
/// with_blunders = false the same noise is generated and the offsets are
/// skipped, giving the clean twin of the contaminated dataset.
/// blunder_indices, when non-null, receives the offset positions.
Dataset make_trial_dataset(const BlunderScenario& scenario, std::int64_t trial,
                           bool with_blunders, std::vector<std::size_t>* blunder_indices);

}  // namespace blunderfit
