#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "blunderfit/stat_core.hpp"
#include "oracles.hpp"

using namespace blunderfit;

// Reference values below were frozen from a 50-digit mpmath session solving
// the same equations; the quadrature/series oracles re-derive psi in-process.

TEST_CASE("probability integral matches reference values") {
    CHECK(prob_integral(0.0).value() == 0.0);
    CHECK(prob_integral(1.0).value() == doctest::Approx(0.6826894921370859).epsilon(1e-15));
    CHECK(prob_integral(3.0).value() == doctest::Approx(0.9973002039367398).epsilon(1e-15));
    // the 3-sigma tail, evaluated without cancellation
    const double tail3 = static_cast<double>(extended_real(1) - prob_integral(3.0).extended());
    CHECK(tail3 == doctest::Approx(2.6997960632601913e-3).epsilon(1e-13));
}

TEST_CASE("probability integral agrees with quadrature and series oracles") {
    double worst_q = 0.0, worst_s = 0.0, worst_qs = 0.0;
    for (int i = 0; i <= 320; ++i) {
        const double z = 8.0 * i / 320.0;
        const double lib = prob_integral(z).value();
        const double quad = oracles::psi_quadrature(z);
        const double series = oracles::psi_series(z);
        worst_q = std::max(worst_q, std::fabs(lib - quad));
        worst_s = std::max(worst_s, std::fabs(lib - series));
        worst_qs = std::max(worst_qs, std::fabs(quad - series));
    }
    CHECK(worst_q < 1e-13);
    CHECK(worst_s < 1e-13);
    CHECK(worst_qs < 1e-13);
}

TEST_CASE("inverse probability integral round-trips") {
    for (int i = 0; i <= 160; ++i) {
        const double z = 8.0 * i / 160.0;
        const double back = inv_prob_integral(prob_integral(z));
        CHECK(std::fabs(back - z) < 1e-9);
    }
    CHECK(inv_prob_integral(Probability(0.0)) == 0.0);
    CHECK(inv_prob_integral(Probability(0.5)) ==
          doctest::Approx(0.6744897501960817).epsilon(1e-14));
}

TEST_CASE("inverse probability integral agrees with bisection oracle") {
    for (const double p : {0.1, 0.3, 0.5, 0.8, 0.95, 0.99, 0.9973002039367398}) {
        const double lib = inv_prob_integral(Probability(p));
        const double ref = oracles::inv_psi_bisect(p);
        CHECK(std::fabs(lib - ref) < 1e-9);
    }
    CHECK_THROWS_AS(inv_prob_integral(Probability(1.0)), std::invalid_argument);
}

TEST_CASE("kappa_limit matches reference roots") {
    const struct {
        std::int64_t n;
        double kappa;
    } cases[] = {
        {2, 0.6744897501960817},   {5, 1.2815515655446004},  {10, 1.6448536269514727},
        {20, 1.9599639845400545},  {100, 2.5758293035489007}, {10000, 3.8905918864131340},
    };
    for (const auto& c : cases) {
        CHECK(kappa_limit(c.n).value() == doctest::Approx(c.kappa).epsilon(1e-13));
    }
}

TEST_CASE("kappa_limit satisfies its defining identity in extended precision") {
    for (const std::int64_t n : {2, 5, 10, 100, 10000}) {
        const double kappa = kappa_limit(n).value();
        const extended_real tail = extended_real(1) - prob_integral(kappa).extended();
        const double resid = std::fabs(static_cast<double>(tail * extended_real(n) - extended_real(1)));
        CHECK(resid < 1e-12);
    }
}

TEST_CASE("kappa_limit rejects degenerate n") {
    CHECK_THROWS_AS(kappa_limit(1), std::invalid_argument);
    CHECK_THROWS_AS(kappa_limit(0), std::invalid_argument);
    CHECK_THROWS_AS(kappa_limit(-3), std::invalid_argument);
}

TEST_CASE("k_gamma_exact matches reference roots at gamma = 0.05") {
    const struct {
        std::int64_t n;
        double k;
    } cases[] = {
        {10, 2.7996252193010964},
        {20, 3.0159945334899400},
        {100, 3.4739788691540483},
        {10000, 4.5594279008329137},
    };
    const Probability gamma(0.05);
    for (const auto& c : cases) {
        CHECK(k_gamma_exact(c.n, gamma).value() == doctest::Approx(c.k).epsilon(1e-13));
    }
}

TEST_CASE("k_gamma_approx matches reference roots at gamma = 0.05") {
    const Probability gamma(0.05);
    CHECK(k_gamma_approx(100, gamma).value() ==
          doctest::Approx(3.4807564043462128).epsilon(1e-13));
    CHECK(k_gamma_approx(10000, gamma).value() ==
          doctest::Approx(4.5647877302808843).epsilon(1e-13));
}

TEST_CASE("k_gamma identities hold in extended precision") {
    for (const std::int64_t n : {2, 5, 10, 100, 10000}) {
        for (const double g : {0.01, 0.05, 0.5}) {
            const Probability gamma(g);
            const double k_exact = k_gamma_exact(n, gamma).value();
            const extended_real psi_n = oracles::ipow_ext(prob_integral(k_exact).extended(), n);
            CHECK(std::fabs(static_cast<double>(extended_real(1) - psi_n -
                                                extended_real(g))) < 1e-10);

            const double k_approx = k_gamma_approx(n, gamma).value();
            const extended_real tail = extended_real(1) - prob_integral(k_approx).extended();
            CHECK(std::fabs(static_cast<double>(tail * extended_real(n) - extended_real(g))) <
                  1e-12);
        }
    }
}

TEST_CASE("k_gamma_approx dominates k_gamma_exact, small psi-space gap") {
    for (const std::int64_t n : {2, 5, 10, 100, 10000}) {
        for (const double g : {0.01, 0.05, 0.5}) {
            const Probability gamma(g);
            const double k_exact = k_gamma_exact(n, gamma).value();
            const double k_approx = k_gamma_approx(n, gamma).value();
            CHECK(k_approx >= k_exact);
            // Bernoulli: 1 - (1-g)^{1/n} >= g/n, so the exact rule has the
            // larger per-equation tail; the psi-space gap is tiny whenever
            // g/n is small.
            const double gap = static_cast<double>(prob_integral(k_approx).extended() -
                                                   prob_integral(k_exact).extended());
            CHECK(gap >= 0.0);
            if (g / static_cast<double>(n) <= 5e-4) CHECK(gap < 1e-3);
        }
    }
    // n = 1 degenerates to the same per-equation tail for both forms
    const Probability gamma(0.05);
    CHECK(k_gamma_exact(1, gamma).value() == k_gamma_approx(1, gamma).value());
}

TEST_CASE("k_gamma_exact exceeds kappa_limit for gamma <= 0.5") {
    for (const std::int64_t n : {2, 5, 10, 100, 10000}) {
        for (const double g : {0.01, 0.05, 0.5}) {
            CHECK(k_gamma_exact(n, Probability(g)).value() > kappa_limit(n).value());
        }
    }
}

TEST_CASE("thresholds are monotone") {
    double prev_kappa = 0.0;
    for (const std::int64_t n : {2, 3, 5, 10, 50, 100, 1000, 10000}) {
        const double kappa = kappa_limit(n).value();
        CHECK(kappa > prev_kappa);
        prev_kappa = kappa;
    }
    const Probability lo(0.01), hi(0.5);
    for (const std::int64_t n : {2, 10, 100}) {
        CHECK(k_gamma_exact(n, lo).value() > k_gamma_exact(n, hi).value());
    }
    CHECK(k_gamma_exact(100, lo).value() > k_gamma_exact(10, lo).value());
}

TEST_CASE("k_gamma argument validation") {
    CHECK_THROWS_AS(k_gamma_exact(0, Probability(0.05)), std::invalid_argument);
    CHECK_THROWS_AS(k_gamma_exact(2, Probability(0.0)), std::invalid_argument);
    CHECK_THROWS_AS(k_gamma_exact(2, Probability(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(k_gamma_approx(0, Probability(0.05)), std::invalid_argument);
}

TEST_CASE("poisson_excess_prob matches the exact Poisson(1) tail") {
    CHECK(poisson_excess_prob(0).value() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(poisson_excess_prob(1).value() ==
          doctest::Approx(0.6321205588285577).epsilon(1e-14));
    CHECK(poisson_excess_prob(2).value() ==
          doctest::Approx(0.2642411176571153).epsilon(1e-14));
    CHECK(poisson_excess_prob(3).value() ==
          doctest::Approx(0.0803013970713942).epsilon(1e-14));
    CHECK(poisson_excess_prob(4).value() ==
          doctest::Approx(0.0189881568761538).epsilon(1e-13));
    CHECK_THROWS_AS(poisson_excess_prob(-1), std::invalid_argument);
}

TEST_CASE("normal_quantile hits reference percentiles") {
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(0.975) == doctest::Approx(1.9599639845400545).epsilon(1e-12));
    CHECK(normal_quantile(0.8413447460685429) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(normal_quantile(0.9986501019683699) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(normal_quantile(0.0013498980316301035) == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
}

TEST_CASE("normal_quantile is consistent with the probability integral") {
    for (const double u : {0.51, 0.6, 0.75, 0.9, 0.99, 0.9999, 0.9999999}) {
        const double z = normal_quantile(u);
        // psi(z) = 2u - 1 for u > 1/2
        CHECK(prob_integral(z).value() == doctest::Approx(2.0 * u - 1.0).epsilon(1e-12));
    }
}

TEST_CASE("Probability and Threshold validate their domains") {
    CHECK_THROWS_AS(Probability(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(Probability(1.5), std::invalid_argument);
    CHECK_THROWS_AS(Probability(std::nan("")), std::invalid_argument);
    CHECK(Probability(0.0).value() == 0.0);
    CHECK(Probability(1.0).value() == 1.0);
    CHECK_THROWS_AS(Threshold(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Threshold(std::nan("")), std::invalid_argument);
    CHECK(Threshold(0.0).value() == 0.0);
}
