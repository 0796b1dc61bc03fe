#pragma once

#include <cstdint>

namespace blunderfit {

// Extended-precision scalar used inside the normal-law kernel. The inverse
// round trip through a Probability must stay accurate even where psi is
// numerically flat (z ~ 8, tail mass ~ 1e-15), which exceeds what binary64
// can carry; on x86-64 this is __float128 backed by libquadmath.
#if defined(__SIZEOF_FLOAT128__)
using extended_real = __float128;
#else
using extended_real = long double;
#endif

/// A probability value in [0, 1]. Stores extended precision so that values
/// produced by prob_integral keep enough tail resolution to be inverted.
class Probability {
public:
    Probability() = default;

    /// Validates 0 <= p <= 1.
    explicit Probability(double p);

    double value() const { return static_cast<double>(v_); }
    extended_real extended() const { return v_; }

    static Probability from_extended(extended_real v);

private:
    extended_real v_ = 0;
};

/// A nonnegative exclusion limit in units of normalized residual |eps|/sigma.
class Threshold {
public:
    Threshold() = default;

    /// Validates value >= 0 and finite.
    explicit Threshold(double v);

    double value() const { return v_; }

private:
    double v_ = 0;
};

/// psi(z) = P(|N(0,1)| < z) = sqrt(2/pi) * integral_0^z exp(-t^2/2) dt.
/// Requires z >= 0 and finite. Absolute error well below 1e-12.
Probability prob_integral(double z);

/// Inverse of prob_integral on [0, 1). Throws std::invalid_argument for
/// p >= 1 (p = 1 would require z = infinity).
double inv_prob_integral(Probability p);

/// The limit kappa(n) with [1 - psi(kappa)] * n = 1: the threshold at which
/// the expected number of exceedances among n normal residuals equals one.
/// Requires n >= 2 (n = 1 gives the degenerate kappa = 0). Cached per n.
Threshold kappa_limit(std::int64_t n);

/// The limit k with 1 - [psi(k)]^n = gamma: the threshold exceeded by the
/// largest of n normal residuals with probability gamma. Requires n >= 1 and
/// 0 < gamma < 1. Cached per (n, gamma).
Threshold k_gamma_exact(std::int64_t n, Probability gamma);

/// Low-gamma approximation of k_gamma_exact, solving [1 - psi(k)] * n = gamma.
/// Always >= k_gamma_exact, equal at n = 1. Requires n >= 1, 0 < gamma < n.
Threshold k_gamma_approx(std::int64_t n, Probability gamma);

/// P(L >= l_min) for L ~ Poisson(1), i.e. sum_{i >= l_min} e^-1 / i!.
/// Evaluated as 1 - sum_{i < l_min} e^-1 / i!. Requires l_min >= 0.
Probability poisson_excess_prob(std::int64_t l_min);

/// Standard normal quantile Phi^{-1}(u) for u in (0, 1), double precision.
/// Fast path for simulation draws; the thresholds above use the extended
/// kernel instead.
double normal_quantile(double u);

}  // namespace blunderfit
