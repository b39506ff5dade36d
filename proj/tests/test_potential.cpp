#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mobch/potential.hpp"

using namespace mobch;

namespace {
const double kLog3 = 1.0986122886681098; // log(3) to double precision
}

TEST_CASE("w_value on the reference points") {
    const auto dw = PotentialSpec::double_well();
    const auto lg = PotentialSpec::logarithmic(1.0);
    REQUIRE(w_value(dw, 1.0) == 0.0);
    REQUIRE(w_value(lg, 0.0) == 0.0);
    REQUIRE(w_value(dw, 0.0) == 0.25); // (1/4)(0 - 1)^2
    REQUIRE_THROWS_AS(w_value(lg, 1.0), DomainViolation);
    REQUIRE_THROWS_AS(w_value(lg, -1.5), DomainViolation);
}

TEST_CASE("w_prime values and finite-difference consistency") {
    const auto dw = PotentialSpec::double_well();
    const auto lg = PotentialSpec::logarithmic(1.0);
    REQUIRE(w_prime(dw, 0.0) == 0.0);
    REQUIRE(w_prime(dw, 1.0) == 0.0);
    REQUIRE(std::abs(w_prime(lg, 0.5) - (kLog3 - 0.5)) < 1e-14);

    // central difference of w_value matches w_prime to O(h^2)
    for (const auto& spec : {dw, lg, PotentialSpec::polynomial(4.0, 3.0, 3.0, 1.0)}) {
        const double h = 1e-5;
        for (double r : {-0.7, -0.2, 0.31, 0.62}) {
            const double fd = (w_value(spec, r + h) - w_value(spec, r - h)) / (2.0 * h);
            REQUIRE(std::abs(fd - w_prime(spec, r)) < 1e-8);
        }
    }
}

TEST_CASE("beta is W' + lambda*Id and monotone") {
    const auto dw = PotentialSpec::double_well();
    REQUIRE(beta(dw, 0.0) == 0.0);
    REQUIRE(beta(dw, 2.0) == 8.0); // r^3 for lambda = 1
    const auto lg = PotentialSpec::logarithmic(1.0);
    REQUIRE(std::abs(beta(lg, 0.5) - kLog3) < 1e-14);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> dist(-0.99, 0.99);
    for (int i = 0; i < 1000; ++i) {
        const double a = dist(rng), b = dist(rng);
        REQUIRE((beta(lg, a) - beta(lg, b)) * (a - b) >= 0.0);
    }
}

TEST_CASE("potential invariants hold on sampled interior points") {
    const auto specs = {PotentialSpec::double_well(),
                        PotentialSpec::polynomial(4.0, 3.0, 3.0, 1.0),
                        PotentialSpec::polynomial(3.5, 2.0, 1.5, 0.5),
                        PotentialSpec::logarithmic(1.0),
                        PotentialSpec::logarithmic(2.5)};
    for (const auto& spec : specs) {
        REQUIRE(std::abs(w_prime(spec, 0.0)) < 1e-12);
        const double lo = spec.singular() ? -0.999 : -6.0;
        const double hi = spec.singular() ? 0.999 : 6.0;
        for (int i = 0; i <= 400; ++i) {
            const double r = lo + (hi - lo) * i / 400.0;
            REQUIRE(w_second(spec, r) >= -spec.lambda - 1e-10);
            REQUIRE(w_value(spec, r) >=
                    3.0 * spec.lambda * r * r - spec.c_w - 1e-10);
        }
    }

    // singular potentials explode fast enough that W'(r)*r grows near +-1
    const auto lg = PotentialSpec::logarithmic(1.0);
    double prev = 0.0;
    for (double d : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double v = w_prime(lg, 1.0 - d) * (1.0 - d);
        REQUIRE(v > prev);
        prev = v;
    }
}

TEST_CASE("resolvent reference points") {
    const auto dw = PotentialSpec::double_well(); // beta(r) = r^3
    REQUIRE(resolvent(RegularizedPotential(dw, 1), 0.0) == 0.0);
    // unique real root of v + v^3 = 2 is v = 1
    REQUIRE(std::abs(resolvent(RegularizedPotential(dw, 1), 2.0) - 1.0) < 1e-12);

    const auto lg = PotentialSpec::logarithmic(1.0);
    const double v = resolvent(RegularizedPotential(lg, 10), 5.0);
    REQUIRE(v > -1.0);
    REQUIRE(v < 1.0);
    // far outside the domain the resolvent still lands inside
    const double vfar = resolvent(RegularizedPotential(lg, 1000000), 50.0);
    REQUIRE(vfar > -1.0);
    REQUIRE(vfar < 1.0);
}

TEST_CASE("resolvent is 1-Lipschitz on random pairs") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(-8.0, 8.0);
    const RegularizedPotential regs[] = {
        RegularizedPotential(PotentialSpec::double_well(), 3),
        RegularizedPotential(PotentialSpec::logarithmic(1.0), 25)};
    for (const auto& reg : regs) {
        for (int i = 0; i < 10000; ++i) {
            const double r = dist(rng), s = dist(rng);
            const double dr = resolvent(reg, r) - resolvent(reg, s);
            REQUIRE(std::abs(dr) <= std::abs(r - s) + 1e-12);
        }
    }
}

TEST_CASE("yosida_beta reference points and pointwise convergence") {
    const auto dw = PotentialSpec::double_well();
    REQUIRE(yosida_beta(RegularizedPotential(dw, 7), 0.0) == 0.0);
    REQUIRE(std::abs(yosida_beta(RegularizedPotential(dw, 1), 2.0) - 1.0) < 1e-12);
    // large index: beta_n(0.5) approaches beta(0.5) = 0.125
    REQUIRE(std::abs(yosida_beta(RegularizedPotential(dw, 1000000), 0.5) - 0.125) <
            1e-6);

    // |beta_n - beta| nonincreasing in n at fixed interior points
    for (double r : {-0.8, 0.3, 0.9, 2.0}) {
        double prev_gap = std::numeric_limits<double>::infinity();
        for (long n : {10L, 100L, 1000L, 10000L}) {
            const double gap =
                std::abs(yosida_beta(RegularizedPotential(dw, n), r) - beta(dw, r));
            REQUIRE(gap <= prev_gap + 1e-12);
            prev_gap = gap;
        }
    }
}

TEST_CASE("yosida_beta is dominated by beta, sign-consistent, monotone") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> in_i(-0.95, 0.95);
    std::uniform_real_distribution<double> wide(-6.0, 6.0);
    const auto lg = PotentialSpec::logarithmic(1.0);
    const auto dw = PotentialSpec::double_well();
    const RegularizedPotential reg_lg(lg, 50);
    const RegularizedPotential reg_dw(dw, 20);
    for (int i = 0; i < 2000; ++i) {
        const double r = in_i(rng);
        const double bn = yosida_beta(reg_lg, r);
        const double b = beta(lg, r);
        REQUIRE(std::abs(bn) <= std::abs(b) + 1e-12);
        REQUIRE(bn * b >= -1e-18);
    }
    for (int i = 0; i < 2000; ++i) {
        const double r = wide(rng), s = wide(rng);
        REQUIRE((yosida_beta(reg_dw, r) - yosida_beta(reg_dw, s)) * (r - s) >=
                -1e-12);
    }
}

TEST_CASE("w_n_value: envelope properties") {
    const auto dw = PotentialSpec::double_well();
    const auto lg = PotentialSpec::logarithmic(1.0);

    REQUIRE(std::abs(w_n_value(RegularizedPotential(dw, 5), 0.0) - 0.25) < 1e-14);
    REQUIRE(std::abs(w_n_value(RegularizedPotential(lg, 5), 0.0) - 0.0) < 1e-14);
    REQUIRE(std::abs(w_n_value(RegularizedPotential(dw, 1000000), 0.5) - 0.140625) <
            1e-5);
    REQUIRE(std::isfinite(w_n_value(RegularizedPotential(lg, 1), 5.0)));

    // W_n <= W on I
    for (const auto& spec : {dw, lg}) {
        const RegularizedPotential reg(spec, 40);
        const double lim = spec.singular() ? 0.99 : 3.0;
        for (int i = -50; i <= 50; ++i) {
            const double r = lim * i / 50.0;
            REQUIRE(w_n_value(reg, r) <= w_value(spec, r) + 1e-10);
        }
    }

    // quadratic lower bound of the regularized potential at large index
    const RegularizedPotential reg_big(dw, 10000);
    for (int i = -60; i <= 60; ++i) {
        const double r = 3.0 * i / 60.0;
        REQUIRE(w_n_value(reg_big, r) >= 2.0 * dw.lambda * r * r - dw.c_w - 1e-9);
    }

    // d/dr W_n = beta_n - lambda*r, checked by central differences
    const RegularizedPotential reg(dw, 35);
    const double h = 1e-5;
    for (double r : {-2.0, -0.4, 0.1, 1.3}) {
        const double fd = (w_n_value(reg, r + h) - w_n_value(reg, r - h)) / (2.0 * h);
        REQUIRE(std::abs(fd - (yosida_beta(reg, r) - dw.lambda * r)) < 1e-8);
    }
}

TEST_CASE("polynomial potential with p = 4 shares the cubic beta") {
    const auto poly = PotentialSpec::polynomial(4.0, 3.0, 3.0, 1.0);
    const auto dw = PotentialSpec::double_well();
    for (double r : {-1.7, -0.3, 0.8, 2.2}) {
        REQUIRE(std::abs(beta(poly, r) - beta(dw, r)) < 1e-13);
        REQUIRE(std::abs(w_second(poly, r) - w_second(dw, r)) < 1e-13);
    }
    // the coercivity shape of eq-newW holds with equality by construction
    for (double r : {-2.0, 0.5, 1.0}) {
        REQUIRE(std::abs(w_second(poly, r) -
                         (poly.eta * std::pow(std::abs(r), poly.p - 2.0) -
                          poly.lambda)) < 1e-12);
    }
}

TEST_CASE("separating growth test") {
    // the logarithmic potential grows too slowly near +-1
    const auto lg = PotentialSpec::logarithmic(1.0);
    REQUIRE_FALSE(separating_growth_test(lg, 0.01, 0.9));

    // a test-only beta with cubic blowup passes
    const auto fast = [](double r) {
        const double q = 1.0 - r * r;
        return r / (q * q * q);
    };
    REQUIRE(separating_growth_probe(fast, 0.01, 0.9));

    // degenerate single-sample ladder equals the pointwise check
    const double r0 = 0.999999;
    const double d = 1.0 - r0;
    const bool point_ok = fast(r0) >= 0.01 / (d * d * d) &&
                          -fast(-r0) >= 0.01 / (d * d * d);
    REQUIRE(separating_growth_probe(fast, 0.01, r0, 1) == point_ok);

    REQUIRE_THROWS_AS(separating_growth_test(PotentialSpec::double_well(), 0.01, 0.9),
                      DomainViolation);
}

TEST_CASE("regularized potential construction guards") {
    REQUIRE_THROWS_AS(RegularizedPotential(PotentialSpec::double_well(), 0), Error);
    REQUIRE_THROWS_AS(PotentialSpec::polynomial(2.0, 1.0, 1.0, 1.0), Error);
    REQUIRE_THROWS_AS(PotentialSpec::polynomial(4.0, 1.0, 2.0, 1.0), Error);
    REQUIRE_THROWS_AS(PotentialSpec::logarithmic(0.0), Error);
    REQUIRE_THROWS_AS(PotentialSpec::double_well(0.5), Error);
}

TEST_CASE("sampled smoothness of W'' and two-sided blowup of W'(r)r") {
    // W'' varies continuously on a fine interior mesh
    for (const auto& spec : {PotentialSpec::double_well(),
                             PotentialSpec::polynomial(4.0, 3.0, 3.0, 1.0),
                             PotentialSpec::logarithmic(1.0)}) {
        const double lim = spec.singular() ? 0.9 : 3.0;
        double prev = w_second(spec, -lim);
        for (int i = 1; i <= 2000; ++i) {
            const double r = -lim + 2.0 * lim * i / 2000.0;
            const double cur = w_second(spec, r);
            REQUIRE(std::abs(cur - prev) < 1e-1);
            prev = cur;
        }
    }
    const auto lg = PotentialSpec::logarithmic(1.0);
    for (double sgn : {1.0, -1.0}) {
        double prev = 0.0;
        for (double d : {1e-2, 1e-4, 1e-6, 1e-8}) {
            const double r = sgn * (1.0 - d);
            const double v = w_prime(lg, r) * r;
            REQUIRE(v > prev);
            prev = v;
        }
    }
}
