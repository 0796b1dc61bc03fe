#include "blunderfit/stat_core.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#if defined(__SIZEOF_FLOAT128__)
#include <quadmath.h>
#endif

namespace blunderfit {

namespace {

#if defined(__SIZEOF_FLOAT128__)
inline extended_real x_erf(extended_real v) { return erfq(v); }
inline extended_real x_erfc(extended_real v) { return erfcq(v); }
inline extended_real x_exp(extended_real v) { return expq(v); }
inline extended_real x_expm1(extended_real v) { return expm1q(v); }
inline extended_real x_log1p(extended_real v) { return log1pq(v); }
inline extended_real x_sqrt(extended_real v) { return sqrtq(v); }
#else
inline extended_real x_erf(extended_real v) { return std::erf(v); }
inline extended_real x_erfc(extended_real v) { return std::erfc(v); }
inline extended_real x_exp(extended_real v) { return std::exp(v); }
inline extended_real x_expm1(extended_real v) { return std::expm1(v); }
inline extended_real x_log1p(extended_real v) { return std::log1p(v); }
inline extended_real x_sqrt(extended_real v) { return std::sqrt(v); }
#endif

const extended_real kOne = 1;
const extended_real kSqrt2 = x_sqrt(extended_real(2));
constexpr double kSqrtPiOver2 = 0.8862269254527580136490837416705725914;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110452530;
constexpr double kSqrt2d = 1.4142135623730950488016887242096980786;

// Solve erfc(x) = q for x >= 0, q in (0, 1]. Double-precision seed,
// then Newton in extended precision (f' = -2/sqrt(pi) exp(-x^2)).
extended_real inv_erfc_ext(extended_real q) {
    if (q >= kOne) return 0;
    const double qd = static_cast<double>(q);
    double seed;
    if (qd <= 0) {
        seed = 40.0;  // below double tail resolution; Newton walks in from here
    } else {
        seed = -normal_quantile(0.5 * qd) / kSqrt2d;
        if (seed < 0) seed = 0;
    }
    extended_real x = seed;
    for (int i = 0; i < 3; ++i) {
        const extended_real f = x_erfc(x) - q;
        x += f * extended_real(kSqrtPiOver2) * x_exp(x * x);
        if (x < 0) x = 0;
    }
    return x;
}

inline Threshold tail_threshold(extended_real two_sided_tail) {
    return Threshold(static_cast<double>(inv_erfc_ext(two_sided_tail) * kSqrt2));
}

struct PairHash {
    std::size_t operator()(const std::pair<std::int64_t, std::uint64_t>& k) const noexcept {
        std::uint64_t h = static_cast<std::uint64_t>(k.first) * 0x9e3779b97f4a7c15ULL;
        h ^= k.second + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return static_cast<std::size_t>(h);
    }
};

std::uint64_t bits_of(double d) {
    std::uint64_t b;
    std::memcpy(&b, &d, sizeof b);
    return b;
}

}  // namespace

Probability::Probability(double p) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw std::invalid_argument("Probability: value must be in [0, 1]");
    }
    v_ = p;
}

Probability Probability::from_extended(extended_real v) {
    if (v < 0) v = 0;
    if (v > 1) v = 1;
    Probability p;
    p.v_ = v;
    return p;
}

Threshold::Threshold(double v) {
    if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("Threshold: value must be finite and >= 0");
    }
    v_ = v;
}

Probability prob_integral(double z) {
    if (!std::isfinite(z) || z < 0.0) {
        throw std::invalid_argument("prob_integral: z must be finite and >= 0");
    }
    const extended_real x = extended_real(z) / kSqrt2;
    // erf below the crossover keeps full relative precision near zero.
    const extended_real p = (z < 1.0) ? x_erf(x) : kOne - x_erfc(x);
    return Probability::from_extended(p);
}

double inv_prob_integral(Probability p) {
    const extended_real pv = p.extended();
    if (pv >= kOne) {
        throw std::invalid_argument("inv_prob_integral: p must be < 1 (p = 1 maps to z = infinity)");
    }
    if (pv == 0) return 0.0;
    const extended_real q = kOne - pv;
    return static_cast<double>(inv_erfc_ext(q) * kSqrt2);
}

Threshold kappa_limit(std::int64_t n) {
    if (n < 2) {
        throw std::invalid_argument("kappa_limit: n must be >= 2 (n = 1 gives the degenerate kappa = 0)");
    }
    thread_local std::unordered_map<std::int64_t, double> cache;
    if (auto it = cache.find(n); it != cache.end()) return Threshold(it->second);
    const Threshold t = tail_threshold(kOne / extended_real(n));
    cache.emplace(n, t.value());
    return t;
}

Threshold k_gamma_exact(std::int64_t n, Probability gamma) {
    const double g = gamma.value();
    if (n < 1) throw std::invalid_argument("k_gamma_exact: n must be >= 1");
    if (!(g > 0.0) || !(g < 1.0)) {
        throw std::invalid_argument("k_gamma_exact: gamma must be in (0, 1)");
    }
    thread_local std::unordered_map<std::pair<std::int64_t, std::uint64_t>, double, PairHash> cache;
    const auto key = std::make_pair(n, bits_of(g));
    if (auto it = cache.find(key); it != cache.end()) return Threshold(it->second);
    // psi(k) = (1 - gamma)^(1/n), i.e. tail = 1 - exp(log1p(-gamma)/n).
    const extended_real tail =
        (n == 1) ? extended_real(g)
                 : -x_expm1(x_log1p(-extended_real(g)) / extended_real(n));
    const Threshold t = tail_threshold(tail);
    cache.emplace(key, t.value());
    return t;
}

Threshold k_gamma_approx(std::int64_t n, Probability gamma) {
    const double g = gamma.value();
    if (n < 1) throw std::invalid_argument("k_gamma_approx: n must be >= 1");
    if (!(g > 0.0) || !(g < static_cast<double>(n))) {
        throw std::invalid_argument("k_gamma_approx: gamma must be in (0, n)");
    }
    thread_local std::unordered_map<std::pair<std::int64_t, std::uint64_t>, double, PairHash> cache;
    const auto key = std::make_pair(n, bits_of(g));
    if (auto it = cache.find(key); it != cache.end()) return Threshold(it->second);
    const Threshold t = tail_threshold(extended_real(g) / extended_real(n));
    cache.emplace(key, t.value());
    return t;
}

Probability poisson_excess_prob(std::int64_t l_min) {
    if (l_min < 0) throw std::invalid_argument("poisson_excess_prob: l_min must be >= 0");
    if (l_min == 0) return Probability(1.0);
    // 1 - e^-1 * sum_{i < l_min} 1/i!
    extended_real sum = 0;
    extended_real term = 1;
    for (std::int64_t i = 0; i < l_min; ++i) {
        if (i > 0) term /= extended_real(i);
        sum += term;
    }
    return Probability::from_extended(kOne - sum * x_exp(extended_real(-1)));
}

double normal_quantile(double u) {
    if (!(u > 0.0) || !(u < 1.0)) {
        throw std::invalid_argument("normal_quantile: u must be in (0, 1)");
    }
    // Acklam's rational approximation (|rel err| < 1.15e-9), then one Halley
    // step through std::erfc for full double precision.
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    double z;
    if (u < plow) {
        const double q = std::sqrt(-2.0 * std::log(u));
        z = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (u <= 1.0 - plow) {
        const double q = u - 0.5;
        const double r = q * q;
        z = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - u));
        z = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (z * z < 1400.0) {  // exp(z^2/2) stays finite
        const double e = 0.5 * std::erfc(-z / kSqrt2d) - u;
        const double f = e * kSqrt2Pi * std::exp(z * z / 2.0);
        z -= f / (1.0 + z * f / 2.0);
    }
    return z;
}

}  // namespace blunderfit
