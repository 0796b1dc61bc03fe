#include "blunderfit/exclusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "blunderfit/errors.hpp"

namespace blunderfit {

void ExclusionConfig::validate(std::size_t param_count) const {
    const double g = gamma.value();
    if (!(g > 0.0) || !(g < 1.0)) {
        throw std::invalid_argument("ExclusionConfig: gamma must be in (0, 1)");
    }
    if (l_prime < 1) {
        throw std::invalid_argument("ExclusionConfig: l_prime must be >= 1");
    }
    if (min_retained && *min_retained <= static_cast<std::int64_t>(param_count)) {
        throw std::invalid_argument("ExclusionConfig: min_retained must exceed the parameter count");
    }
    if (max_iterations && *max_iterations < 1) {
        throw std::invalid_argument("ExclusionConfig: max_iterations must be >= 1");
    }
    if (baseline_k && (!std::isfinite(*baseline_k) || *baseline_k <= 0.0)) {
        throw std::invalid_argument("ExclusionConfig: baseline_k must be positive and finite");
    }
}

namespace {

// Indices sorted by descending normalized residual, ties by ascending id.
std::vector<std::size_t> residual_order(const FitSolution& sol) {
    std::vector<std::size_t> order(sol.normalized_residuals.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ra = sol.normalized_residuals[a];
        const double rb = sol.normalized_residuals[b];
        if (ra != rb) return ra > rb;
        return sol.ids[a] < sol.ids[b];
    });
    return order;
}

ExcludedEquation make_excluded(const FitSolution& sol, std::size_t j) {
    return {sol.ids[j], sol.normalized_residuals[j]};
}

}  // namespace

PassResult single_pass(const FitSolution& solution, const Dataset& data,
                       const ExclusionConfig& config) {
    const std::size_t n = data.size();
    if (solution.ids.size() != n) {
        throw std::invalid_argument("single_pass: solution covers " +
                                    std::to_string(solution.ids.size()) + " equations, dataset has " +
                                    std::to_string(n));
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (solution.ids[j] != data[j].id) {
            throw std::invalid_argument("single_pass: solution and dataset disagree at position " +
                                        std::to_string(j));
        }
    }
    if (n < 2) {
        throw std::invalid_argument("single_pass: need at least 2 equations");
    }

    PassResult result;
    IterationRecord& rec = result.record;
    rec.n_in = static_cast<std::int64_t>(n);
    rec.parameters_after = solution.parameters;

    if (config.baseline_k) {
        const double k = *config.baseline_k;
        rec.kappa = k;
        rec.k_gamma = k;
        for (std::size_t j : residual_order(solution)) {
            if (solution.normalized_residuals[j] > k) {
                rec.excluded_baseline.push_back(make_excluded(solution, j));
                result.excluded_baseline_ids.push_back(solution.ids[j]);
            }
        }
        rec.l_count = static_cast<std::int64_t>(rec.excluded_baseline.size());
        return result;
    }

    const double kappa = kappa_limit(static_cast<std::int64_t>(n)).value();
    rec.kappa = kappa;

    const std::vector<std::size_t> order = residual_order(solution);
    std::int64_t l_count = 0;
    for (double r : solution.normalized_residuals) {
        if (r > kappa) ++l_count;
    }
    rec.l_count = l_count;

    std::unordered_set<std::size_t> removed;
    if (l_count > config.l_prime) {
        const std::int64_t cut = l_count - config.l_prime;
        for (std::int64_t i = 0; i < cut; ++i) {
            const std::size_t j = order[static_cast<std::size_t>(i)];
            rec.excluded_step3.push_back(make_excluded(solution, j));
            result.excluded_step3_ids.push_back(solution.ids[j]);
            removed.insert(j);
        }
    }

    // Same N as the kappa step: both criteria describe the sample that
    // entered this iteration.
    const std::int64_t n_threshold = static_cast<std::int64_t>(n);
    const double k_gamma = (config.kgamma_mode == KGammaMode::exact)
                               ? k_gamma_exact(n_threshold, config.gamma).value()
                               : k_gamma_approx(n_threshold, config.gamma).value();
    rec.k_gamma = k_gamma;

    for (std::size_t j : order) {
        if (removed.count(j)) continue;
        if (solution.normalized_residuals[j] > k_gamma) {
            rec.excluded_step4.push_back(make_excluded(solution, j));
            result.excluded_step4_ids.push_back(solution.ids[j]);
        }
    }
    return result;
}

ExclusionOutcome run_exclusion(const Dataset& data, const ExclusionConfig& config) {
    const std::size_t p = data.param_count();
    config.validate(p);

    const std::int64_t n0 = static_cast<std::int64_t>(data.size());
    const std::int64_t min_retained =
        config.min_retained.value_or(static_cast<std::int64_t>(p) + 2);
    if (min_retained <= static_cast<std::int64_t>(p)) {
        throw std::invalid_argument("run_exclusion: min_retained must exceed the parameter count");
    }
    const std::int64_t max_iterations = config.max_iterations.value_or(std::max<std::int64_t>(n0, 1));
    if (n0 < min_retained) {
        throw InsufficientDataError("run_exclusion: " + std::to_string(n0) +
                                    " equations, need at least min_retained = " +
                                    std::to_string(min_retained));
    }

    ExclusionOutcome outcome;
    Dataset current = data;

    auto fit_with_context = [](const Dataset& d, std::int64_t iteration) {
        const std::string ctx = " (iteration " + std::to_string(iteration) + ")";
        try {
            return fit_wls(d);
        } catch (const SingularModelError& e) {
            throw SingularModelError(e.rank(), e.param_count(), ctx);
        } catch (const InsufficientDataError& e) {
            throw InsufficientDataError(std::string(e.what()) + ctx);
        }
    };

    FitSolution fit = fit_with_context(current, 0);
    bool stopped = false;

    for (std::int64_t iter = 0; iter < max_iterations; ++iter) {
        if (config.sigma_mode == SigmaMode::variance_factor) {
            RescaleResult rescaled = rescale_sigmas(current, fit, config.sigma_mode);
            if (!rescaled.perfect_fit_noop && fit.variance_factor != 1.0) {
                current = std::move(rescaled.data);
                fit = fit_with_context(current, iter);
            }
        }

        PassResult pass = single_pass(fit, current, config);
        pass.record.iteration = iter;
        const std::int64_t n_in = pass.record.n_in;
        const auto n_excluded = static_cast<std::int64_t>(pass.record.excluded_count());

        if (n_excluded == 0) {
            outcome.trace.push_back(std::move(pass.record));
            outcome.converged = true;
            outcome.stop_reason = StopReason::fixpoint;
            stopped = true;
            break;
        }
        if (n_in - n_excluded < min_retained) {
            // Applying this pass would leave too few equations; record what
            // it wanted and stop without applying.
            outcome.trace.push_back(std::move(pass.record));
            outcome.converged = false;
            outcome.stop_reason = StopReason::min_retained;
            stopped = true;
            break;
        }

        std::unordered_set<std::string> removed_ids;
        auto stage = [&](const std::vector<ExcludedEquation>& list, ExclusionReason reason) {
            for (const auto& ex : list) {
                outcome.excluded.push_back({ex.id, iter, reason, ex.normalized_residual});
                removed_ids.insert(ex.id);
            }
        };
        stage(pass.record.excluded_step3, ExclusionReason::step3);
        stage(pass.record.excluded_step4, ExclusionReason::step4);
        stage(pass.record.excluded_baseline, ExclusionReason::baseline);
        outcome.trace.push_back(std::move(pass.record));

        std::vector<std::size_t> kept;
        kept.reserve(static_cast<std::size_t>(n_in - n_excluded));
        for (std::size_t j = 0; j < current.size(); ++j) {
            if (!removed_ids.count(current[j].id)) kept.push_back(j);
        }
        current = current.subset(kept);
        fit = fit_with_context(current, iter + 1);
        outcome.trace.back().parameters_after = fit.parameters;
    }

    if (!stopped) {
        outcome.converged = false;
        outcome.stop_reason = StopReason::max_iterations;
    }

    outcome.final_solution = std::move(fit);
    outcome.retained_ids.reserve(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) {
        outcome.retained_ids.push_back(current[j].id);
    }
    return outcome;
}

const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::fixpoint: return "fixpoint";
        case StopReason::max_iterations: return "max_iterations";
        case StopReason::min_retained: return "min_retained";
    }
    return "?";
}

const char* to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::step3: return "step3";
        case ExclusionReason::step4: return "step4";
        case ExclusionReason::baseline: return "baseline";
    }
    return "?";
}

const char* to_string(KGammaMode m) {
    return m == KGammaMode::exact ? "exact" : "approx";
}

const char* to_string(SigmaMode m) {
    return m == SigmaMode::none ? "none" : "vf";
}

}  // namespace blunderfit
