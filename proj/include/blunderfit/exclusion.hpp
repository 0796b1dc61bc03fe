#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blunderfit/fitting.hpp"
#include "blunderfit/stat_core.hpp"

namespace blunderfit {

enum class KGammaMode { exact, approx };

/// Tuning of the iterative exclusion engine. Optional fields resolve at run
/// start: min_retained to p + 2, max_iterations to the initial N.
struct ExclusionConfig {
    Probability gamma{0.05};
    std::int64_t l_prime = 2;
    KGammaMode kgamma_mode = KGammaMode::exact;
    SigmaMode sigma_mode = SigmaMode::variance_factor;
    std::optional<std::int64_t> min_retained;
    std::optional<std::int64_t> max_iterations;
    /// When set, every pass applies the single fixed rule |eps|/sigma >
    /// baseline_k instead of the adaptive criteria.
    std::optional<double> baseline_k;

    /// Throws std::invalid_argument on violated invariants.
    void validate(std::size_t param_count) const;
};

struct ExcludedEquation {
    std::string id;
    double normalized_residual = 0.0;
};

/// What one pass saw and decided. In baseline mode, kappa and k_gamma both
/// hold baseline_k and exclusions land in excluded_baseline.
struct IterationRecord {
    std::int64_t iteration = 0;
    std::int64_t n_in = 0;
    double kappa = 0.0;
    std::int64_t l_count = 0;  // equations with |eps|/sigma > kappa
    double k_gamma = 0.0;
    std::vector<ExcludedEquation> excluded_step3;
    std::vector<ExcludedEquation> excluded_step4;
    std::vector<ExcludedEquation> excluded_baseline;
    /// Parameters after this pass: the refit once its exclusions are
    /// applied, or the pass's own fit when nothing was (fixpoint /
    /// min_retained stop).
    Eigen::VectorXd parameters_after;

    std::size_t excluded_count() const {
        return excluded_step3.size() + excluded_step4.size() + excluded_baseline.size();
    }
};

struct PassResult {
    std::vector<std::string> excluded_step3_ids;
    std::vector<std::string> excluded_step4_ids;
    std::vector<std::string> excluded_baseline_ids;
    IterationRecord record;
};

enum class ExclusionReason { step3, step4, baseline };
enum class StopReason { fixpoint, max_iterations, min_retained };

struct Exclusion {
    std::string id;
    std::int64_t iteration = 0;
    ExclusionReason reason = ExclusionReason::step4;
    double normalized_residual = 0.0;
};

struct ExclusionOutcome {
    FitSolution final_solution;           // fitted on exactly retained_ids
    std::vector<std::string> retained_ids;  // input order
    std::vector<Exclusion> excluded;
    std::vector<IterationRecord> trace;   // every pass, including the final one
    bool converged = false;               // true iff stop_reason == fixpoint
    StopReason stop_reason = StopReason::fixpoint;
};

/// One pass of the adaptive criteria over a fitted dataset:
///   - kappa(N) for the N equations entering the pass,
///   - L = count of normalized residuals > kappa,
///   - if L > l_prime, the L - l_prime largest go to excluded_step3
///     (descending residual, ties by ascending id),
///   - k_gamma(N) with the same N, remaining residuals > k_gamma go to
///     excluded_step4.
/// With config.baseline_k set, the fixed rule replaces all of the above.
/// `solution` must be the fit of exactly `data`.
PassResult single_pass(const FitSolution& solution, const Dataset& data,
                       const ExclusionConfig& config);

/// The full loop: fit, rescale sigmas, pass, remove, repeat until a pass
/// excludes nothing (fixpoint), the retained count would drop below
/// min_retained (that pass's exclusions are not applied), or max_iterations
/// passes have run.
ExclusionOutcome run_exclusion(const Dataset& data, const ExclusionConfig& config);

const char* to_string(StopReason r);
const char* to_string(ExclusionReason r);
const char* to_string(KGammaMode m);
const char* to_string(SigmaMode m);

}  // namespace blunderfit
