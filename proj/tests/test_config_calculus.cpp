#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "lbd/config_calculus.hpp"
#include "lbd/errors.hpp"
#include "lbd/kernels.hpp"
#include "oracles.hpp"

using namespace lbd;

namespace {

// Random tabulated G with symmetric product-plus-offset components.
TabulatedG random_g(std::mt19937& gen, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TabulatedG g;
    g.g0 = u(gen);
    for (int n = 1; n <= order; ++n) {
        const double c = u(gen);
        const double freq = 1.0 + std::abs(u(gen));
        g.components.push_back([c, freq](const Configuration& eta) {
            double p = c;
            for (int i = 0; i < eta.size(); ++i)
                p *= 1.0 + 0.5 * std::sin(freq * eta.point(i)[0]);
            return p;
        });
    }
    return g;
}

Configuration single(double x) {
    Configuration g(1);
    g.coords = {x};
    return g;
}

}  // namespace

TEST_CASE("e_product") {
    const QPotential half{[](PointRef) { return 0.5; }};
    CHECK(e_product(Configuration(1), half) == 1.0);
    CHECK(e_product(single(0.3), half) == 0.5);

    std::mt19937 gen(3);
    const Configuration g = oracle::random_config(gen, 1, 2.0, 5);
    const QPotential decay{[](PointRef x) { return std::exp(-x.norm()); }};
    double log_sum = 0.0;
    for (int i = 0; i < g.size(); ++i) log_sum += g.point(i).norm();
    CHECK(e_product(g, decay) == doctest::Approx(std::exp(-log_sum)).epsilon(1e-12));
}

TEST_CASE("k_transform basics") {
    const TabulatedG empty_ind = TabulatedG::indicator_empty();
    std::mt19937 gen(5);
    for (int n : {0, 1, 3, 6}) {
        const Configuration g = oracle::random_config(gen, 1, 2.0, n);
        CHECK(k_transform(empty_ind, g) == 1.0);
    }

    // G^{(1)} = theta, all else zero.
    TabulatedG linear;
    linear.g0 = 0.0;
    linear.components.push_back(
        [](const Configuration& eta) { return 1.0 + eta.point(0)[0]; });
    Configuration two(1);
    two.coords = {0.25, -0.75};
    CHECK(k_transform(linear, two) ==
          doctest::Approx((1.0 + 0.25) + (1.0 - 0.75)).epsilon(1e-14));

    Configuration big(1);
    for (int i = 0; i < 21; ++i) big.coords.push_back(0.0);
    CHECK_THROWS_AS(k_transform(empty_ind, big), SizeError);
}

TEST_CASE("k_transform of a product G gives prod (1 + theta)") {
    const ScalarField theta = [](PointRef x) { return 0.3 + 0.1 * x[0] * x[0]; };
    const TabulatedG g = TabulatedG::product_of(theta, 4);
    std::mt19937 gen(9);
    const Configuration gamma = oracle::random_config(gen, 1, 1.5, 4);
    double expected = 1.0;
    for (int i = 0; i < gamma.size(); ++i) expected *= 1.0 + theta(gamma.point(i));
    CHECK(k_transform(g, gamma) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("k_transform treats duplicate points as distinct indices") {
    const ScalarField theta = [](PointRef x) { return 1.0 + x[0]; };
    const TabulatedG g = TabulatedG::product_of(theta, 3);
    Configuration dup(1);
    dup.coords = {0.4, 0.4};  // duplicated point
    // Enumerating subsets by index: 1 + 2 theta(x) + theta(x)^2 = (1+theta)^2.
    const double th = theta(single(0.4).point(0));
    CHECK(k_transform(g, dup) == doctest::Approx((1.0 + th) * (1.0 + th)).epsilon(1e-12));
}

TEST_CASE("star product special cases") {
    std::mt19937 gen(13);
    TabulatedG g1 = random_g(gen, 3), g2 = random_g(gen, 3);
    CHECK(star_product(g1, g2, Configuration(1)) ==
          doctest::Approx(g1.g0 * g2.g0).epsilon(1e-14));

    const TabulatedG ind = TabulatedG::indicator_empty();
    for (int n : {1, 3, 5}) {
        const Configuration eta = oracle::random_config(gen, 1, 2.0, n);
        CHECK(star_product(g1, ind, eta) ==
              doctest::Approx(g1.eval(eta)).epsilon(1e-12));
    }
}

TEST_CASE("K-homomorphism K(G1*G2) = KG1 . KG2") {
    std::mt19937 gen(17);
    std::uniform_int_distribution<int> size(0, 6);
    for (int trial = 0; trial < 200; ++trial) {
        TabulatedG g1 = random_g(gen, 6), g2 = random_g(gen, 6);
        const Configuration gamma = oracle::random_config(gen, 1, 2.0, size(gen));
        TabulatedG star;
        star.g0 = star_product(g1, g2, Configuration(1));
        for (int n = 1; n <= gamma.size(); ++n)
            star.components.push_back([&g1, &g2](const Configuration& eta) {
                return star_product(g1, g2, eta);
            });
        const double lhs = k_transform(star, gamma);
        const double rhs = k_transform(g1, gamma) * k_transform(g2, gamma);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("lp_integral") {
    const Window w{1, 2.0};
    CHECK(lp_integral(TabulatedG::indicator_empty(), 4, w) == 1.0);

    // Single component: integral of theta.
    const ScalarField theta = [](PointRef x) { return 0.2 * std::exp(-x[0] * x[0]); };
    TabulatedG lin;
    lin.g0 = 0.0;
    lin.components.push_back(
        [&theta](const Configuration& eta) { return theta(eta.point(0)); });
    const double mean_theta = oracle::integrate(
        [&theta](double x) { return theta(single(x).point(0)); }, -2.0, 2.0);
    CHECK(lp_integral(lin, 1, w) == doctest::Approx(mean_theta).epsilon(1e-10));

    // Product components approximate the exponential series.
    const TabulatedG prod = TabulatedG::product_of(theta, 4);
    double series = 1.0, term = 1.0;
    for (int n = 1; n <= 4; ++n) {
        term *= mean_theta / n;
        series += term;
    }
    TabulatedG prod_only = prod;
    prod_only.g0 = 1.0;
    CHECK(lp_integral(prod_only, 4, w) == doctest::Approx(series).epsilon(1e-8));

    CHECK_THROWS_AS(lp_integral(prod, 5, w), SizeError);
}

TEST_CASE("factorial_count") {
    const Window w{1, 2.0};
    const Box full = Box::full(w);
    Configuration three(1);
    three.coords = {-1.0, 0.0, 1.0};
    CHECK(factorial_count(three, 2, full) == 6);
    CHECK(factorial_count(three, 4, full) == 0);

    std::mt19937 gen(23);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Configuration g = oracle::random_config(gen, 2, 2.0, trial % 9);
        Box region;
        region.lo = Vec(2);
        region.hi = Vec(2);
        for (int k = 0; k < 2; ++k) {
            const double a = u(gen), b = u(gen);
            region.lo[k] = std::min(a, b);
            region.hi[k] = std::max(a, b);
        }
        for (int n = 1; n <= 3; ++n)
            CHECK(factorial_count(g, n, region) == oracle::count_tuples(g, n, region));
    }
}

TEST_CASE("factorial_count at n = 1 is the window count") {
    std::mt19937 gen(53);
    const Window w{1, 2.0};
    for (int trial = 0; trial < 20; ++trial) {
        const Configuration g = oracle::random_config(gen, 1, 2.0, trial);
        CHECK(factorial_count(g, 1, Box::full(w)) ==
              static_cast<unsigned long long>(g.size()));
    }
}

TEST_CASE("factorial_count monotone in the region") {
    std::mt19937 gen(29);
    const Configuration g = oracle::random_config(gen, 1, 2.0, 8);
    Box small, large;
    small.lo = Vec::Constant(1, -0.5);
    small.hi = Vec::Constant(1, 0.5);
    large.lo = Vec::Constant(1, -1.5);
    large.hi = Vec::Constant(1, 1.5);
    for (int n = 1; n <= 3; ++n)
        CHECK(factorial_count(g, n, small) <= factorial_count(g, n, large));
}

TEST_CASE("spanning subgraph expansion") {
    std::mt19937 gen(31);

    const auto g2 = [](const Configuration& eta) {
        return std::exp(-(eta.point(0) - eta.point(1)).squaredNorm());
    };
    for (int trial = 0; trial < 50; ++trial) {
        const Configuration gamma = oracle::random_config(gen, 1, 2.0, trial % 7);
        const ExpansionSides sides = subgraph_expansion_check(g2, gamma, 2);
        CHECK(sides.lhs == doctest::Approx(sides.rhs).epsilon(1e-10));
    }

    const ExpansionSides lone = subgraph_expansion_check(g2, single(0.7), 2);
    CHECK(lone.lhs == 0.0);
    CHECK(lone.rhs == doctest::Approx(0.0).epsilon(1e-14));

    const auto g3 = [](const Configuration& eta) {
        double p = 1.0;
        for (int i = 0; i < 3; ++i) p *= 1.0 + std::exp(-eta.point(i).squaredNorm());
        return p;
    };
    const Configuration five = oracle::random_config(gen, 1, 2.0, 5);
    const ExpansionSides sides3 = subgraph_expansion_check(g3, five, 3);
    CHECK(sides3.lhs == doctest::Approx(sides3.rhs).epsilon(1e-10));

    CHECK_THROWS_AS(subgraph_expansion_check(g2, five, 4), DomainError);
}

TEST_CASE("f_theta") {
    const ScalarField zero = [](PointRef) { return 0.0; };
    std::mt19937 gen(37);
    CHECK(f_theta(oracle::random_config(gen, 1, 2.0, 5), zero) == 1.0);

    const ScalarField two = [](PointRef) { return 2.0; };
    CHECK(f_theta(single(0.1), two) == 3.0);

    // Matches 1 + sum_n K G_n^theta truncated at n = |gamma|.
    const ScalarField theta = [](PointRef x) { return 0.4 * std::exp(-x[0] * x[0]); };
    const Configuration gamma = oracle::random_config(gen, 1, 2.0, 5);
    double ksum = 1.0;
    for (int n = 1; n <= gamma.size(); ++n) {
        // G_n^theta: nonzero only at order n, the symmetrized theta product.
        TabulatedG gn;
        gn.g0 = 0.0;
        for (int k = 1; k < n; ++k)
            gn.components.push_back([](const Configuration&) { return 0.0; });
        gn.components.push_back([&theta](const Configuration& eta) {
            double p = 1.0;
            for (int i = 0; i < eta.size(); ++i) p *= theta(eta.point(i));
            return p;
        });
        ksum += k_transform(gn, gamma);
    }
    CHECK(f_theta(gamma, theta) == doctest::Approx(ksum).epsilon(1e-12));
}

TEST_CASE("psi_tau") {
    const ScalarField one = [](PointRef) { return 1.0; };
    CHECK(psi_tau(single(0.0), {one}, 0.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    std::mt19937 gen(41);
    const Configuration gamma = oracle::random_config(gen, 1, 2.0, 6);
    CHECK(psi_tau(gamma, {}, 0.25) == 1.0);

    // Each factor is bounded by 1/tau.
    const ScalarField bump = [](PointRef x) { return 3.0 * std::exp(-x[0] * x[0]); };
    for (double tau : {0.1, 0.25, 0.5}) {
        const double value = psi_tau(gamma, {bump}, tau);
        CHECK(value <= 1.0 / tau + 1e-12);
        CHECK(value >= 0.0);
    }
    CHECK_THROWS_AS(psi_tau(gamma, {one}, 0.0), DomainError);
    CHECK_THROWS_AS(psi_tau(gamma, {one}, 0.6), DomainError);
}

TEST_CASE("f_tilde_v") {
    const ScalarField zero = [](PointRef) { return 0.0; };
    const ScalarField one = [](PointRef) { return 1.0; };
    std::mt19937 gen(43);
    CHECK(f_tilde_v(oracle::random_config(gen, 1, 2.0, 4), zero) == 1.0);
    CHECK(f_tilde_v(single(0.0), one) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

    // Product form over 1 + h_v with h_v = e^{-v psi} - 1.
    const ScalarField v = [](PointRef x) { return 0.8 + 0.3 * std::cos(x[0]); };
    const Configuration gamma = oracle::random_config(gen, 1, 2.0, 6);
    double prod = 1.0;
    for (int i = 0; i < gamma.size(); ++i) {
        const auto x = gamma.point(i);
        prod *= 1.0 + (std::exp(-v(x) * psi(x)) - 1.0);
    }
    const double value = f_tilde_v(gamma, v);
    CHECK(value == doctest::Approx(prod).epsilon(1e-12));
    CHECK(value > 0.0);
    CHECK(value <= 1.0);
}
