#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace blunderfit {

/// One conditional equation: a design row, the observed value, and its
/// standard deviation.
struct Measurement {
    std::string id;
    std::vector<double> design_row;
    double observed = 0.0;
    double sigma = 0.0;
};

/// An ordered, validated collection of measurements sharing one parameter
/// count. Immutable once constructed.
class Dataset {
public:
    /// Validates: param_count >= 1, unique ids, design rows of length
    /// param_count, finite entries, sigma > 0.
    Dataset(std::vector<Measurement> measurements, std::size_t param_count);

    std::size_t size() const { return measurements_.size(); }
    std::size_t param_count() const { return param_count_; }
    const std::vector<Measurement>& measurements() const { return measurements_; }
    const Measurement& operator[](std::size_t i) const { return measurements_[i]; }

    /// New dataset keeping the measurements at `indices`, in the given order.
    Dataset subset(const std::vector<std::size_t>& indices) const;

    /// New dataset with every sigma multiplied by `factor` (> 0).
    Dataset with_scaled_sigmas(double factor) const;

private:
    struct Unchecked {};
    Dataset(Unchecked, std::vector<Measurement> measurements, std::size_t param_count)
        : measurements_(std::move(measurements)), param_count_(param_count) {}

    std::vector<Measurement> measurements_;
    std::size_t param_count_ = 0;
};

/// Result of a weighted linear least-squares fit. The residual vectors are
/// parallel to `ids`, which follows the fitted dataset's order.
struct FitSolution {
    Eigen::VectorXd parameters;
    Eigen::MatrixXd covariance;              // inverse weighted normal matrix
    std::vector<std::string> ids;
    std::vector<double> residuals;           // eps_j = observed - prediction
    std::vector<double> normalized_residuals;  // |eps_j| / sigma_j
    double variance_factor = 0.0;            // chi^2 / (N - p)
};

/// Minimizes sum_j (eps_j / sigma_j)^2 through an SVD of the weighted design
/// matrix. Throws InsufficientDataError when N <= p and SingularModelError
/// when the weighted design is rank deficient (relative singular-value
/// cutoff 1e-10).
FitSolution fit_wls(const Dataset& data);

enum class SigmaMode { none, variance_factor };

struct RescaleResult {
    Dataset data;
    /// Set when variance_factor was at rounding level (perfect fit) and
    /// rescaling was a no-op.
    bool perfect_fit_noop = false;
};

/// mode none: identity. mode variance_factor: every sigma multiplied by
/// sqrt(solution.variance_factor); ordering and ids preserved.
RescaleResult rescale_sigmas(const Dataset& data, const FitSolution& solution, SigmaMode mode);

}  // namespace blunderfit
