#include "blunderfit/fitting.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "blunderfit/errors.hpp"

namespace blunderfit {

namespace {
constexpr double kRankCutoff = 1e-10;  // relative to the largest singular value

// Below this the residual sum is floating-point rounding, not statistics:
// rescaling sigmas by sqrt(vf) would shrink them by ten orders of magnitude.
constexpr double kPerfectFitVf = 1e-20;
}

Dataset::Dataset(std::vector<Measurement> measurements, std::size_t param_count)
    : measurements_(std::move(measurements)), param_count_(param_count) {
    if (param_count_ == 0) {
        throw std::invalid_argument("Dataset: param_count must be >= 1");
    }
    if (measurements_.empty()) {
        throw std::invalid_argument("Dataset: need at least one measurement");
    }
    std::unordered_set<std::string> seen;
    seen.reserve(measurements_.size());
    for (const auto& m : measurements_) {
        if (!seen.insert(m.id).second) {
            throw std::invalid_argument("Dataset: duplicate measurement id '" + m.id + "'");
        }
        if (m.design_row.size() != param_count_) {
            throw std::invalid_argument("Dataset: measurement '" + m.id + "' has " +
                                        std::to_string(m.design_row.size()) +
                                        " regressors, expected " + std::to_string(param_count_));
        }
        for (double v : m.design_row) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("Dataset: non-finite regressor in measurement '" +
                                            m.id + "'");
            }
        }
        if (!std::isfinite(m.observed)) {
            throw std::invalid_argument("Dataset: non-finite observed value in measurement '" +
                                        m.id + "'");
        }
        if (!std::isfinite(m.sigma) || m.sigma <= 0.0) {
            throw std::invalid_argument("Dataset: measurement '" + m.id +
                                        "' has sigma <= 0 (sigma must be positive)");
        }
    }
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    std::vector<Measurement> kept;
    kept.reserve(indices.size());
    for (std::size_t i : indices) {
        if (i >= measurements_.size()) {
            throw std::invalid_argument("Dataset: subset index " + std::to_string(i) +
                                        " out of range (size " +
                                        std::to_string(measurements_.size()) + ")");
        }
        kept.push_back(measurements_[i]);
    }
    return Dataset(Unchecked{}, std::move(kept), param_count_);
}

Dataset Dataset::with_scaled_sigmas(double factor) const {
    if (!std::isfinite(factor) || factor <= 0.0) {
        throw std::invalid_argument("Dataset: sigma scale factor must be positive and finite");
    }
    std::vector<Measurement> scaled = measurements_;
    for (auto& m : scaled) {
        m.sigma *= factor;
    }
    return Dataset(Unchecked{}, std::move(scaled), param_count_);
}

FitSolution fit_wls(const Dataset& data) {
    const std::size_t n = data.size();
    const std::size_t p = data.param_count();
    if (n <= p) {
        throw InsufficientDataError("fit_wls: need at least p + 1 = " + std::to_string(p + 1) +
                                    " equations, got " + std::to_string(n));
    }

    Eigen::MatrixXd weighted_design(n, p);
    Eigen::VectorXd weighted_obs(n);
    for (std::size_t j = 0; j < n; ++j) {
        const Measurement& m = data[j];
        const double w = 1.0 / m.sigma;
        for (std::size_t k = 0; k < p; ++k) {
            weighted_design(j, k) = m.design_row[k] * w;
        }
        weighted_obs(j) = m.observed * w;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(weighted_design,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    std::size_t rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > kRankCutoff * sv(0)) ++rank;
    }
    if (sv(0) == 0.0 || rank < p) {
        throw SingularModelError(rank, p);
    }

    FitSolution sol;
    sol.parameters = svd.matrixV() * sv.cwiseInverse().asDiagonal() *
                     (svd.matrixU().transpose() * weighted_obs);
    sol.covariance = svd.matrixV() * sv.cwiseAbs2().cwiseInverse().asDiagonal() *
                     svd.matrixV().transpose();

    sol.ids.reserve(n);
    sol.residuals.reserve(n);
    sol.normalized_residuals.reserve(n);
    double chi2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Measurement& m = data[j];
        double predicted = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
            predicted += m.design_row[k] * sol.parameters(k);
        }
        const double eps = m.observed - predicted;
        const double r = std::abs(eps) / m.sigma;
        sol.ids.push_back(m.id);
        sol.residuals.push_back(eps);
        sol.normalized_residuals.push_back(r);
        chi2 += r * r;
    }
    sol.variance_factor = chi2 / static_cast<double>(n - p);
    return sol;
}

RescaleResult rescale_sigmas(const Dataset& data, const FitSolution& solution, SigmaMode mode) {
    if (mode == SigmaMode::none) {
        return {data, false};
    }
    if (solution.variance_factor < kPerfectFitVf) {
        return {data, true};
    }
    if (solution.variance_factor == 1.0) {
        return {data, false};
    }
    return {data.with_scaled_sigmas(std::sqrt(solution.variance_factor)), false};
}

}  // namespace blunderfit
