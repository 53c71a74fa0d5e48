#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lbd/errors.hpp"
#include "lbd/verifier.hpp"
#include "oracles.hpp"

using namespace lbd;

namespace {

// Synthetic binned correlation with constant k1/k2 values.
BinnedCorrelation synthetic_corr(std::vector<double> times, double k1, double k2,
                                 double se) {
    BinnedCorrelation c;
    c.times = times;
    c.replicas = 100;
    c.window_volume = 10.0;
    c.k1.assign(times.size(), k1);
    c.k1_se.assign(times.size(), se);
    const int bins = 4;
    for (int b = 0; b < bins; ++b) {
        c.bin_lo.push_back(b * 0.5);
        c.bin_hi.push_back((b + 1) * 0.5);
        c.shell_volume.push_back(1.0);
    }
    c.k2.assign(times.size(), std::vector<double>(bins, k2));
    c.k2_se.assign(times.size(), std::vector<double>(bins, se));
    c.pair_count.assign(times.size(), std::vector<long>(bins, 50));
    return c;
}

DerivedConstants unit_constants() {
    DerivedConstants c;
    c.norm_b = 1.0;
    c.norm_a = 1.25;
    c.mean_a = 1.0;
    c.mean_psi = 2.0;
    c.mean_b_sigma = 10.0;
    return c;
}

ModelSpec decoupled_spec() {
    ModelSpec spec;
    spec.dim = 1;
    spec.window = 2.0;
    spec.b = {KernelFamily::Constant, 1.0, 0.0};
    spec.m = {KernelFamily::Constant, 1.0, 0.0};
    spec.a = {KernelFamily::Constant, 0.0, 0.0};
    return spec;
}

}  // namespace

TEST_CASE("type growth: pass, fail and inconclusive") {
    const std::vector<double> times = {0.5, 1.0, 2.0};
    const DerivedConstants consts = unit_constants();

    BoundCheck ok = check_type_growth(synthetic_corr(times, 1.8, 3.5, 0.01), 2.0, consts);
    CHECK(ok.verdict == Verdict::Pass);

    // Density at twice the bound.
    BoundCheck bad = check_type_growth(synthetic_corr(times, 5.0, 3.5, 0.01), 2.0, consts);
    CHECK(bad.verdict == Verdict::Fail);

    // Noise larger than half the bound scale.
    BoundCheck noisy = check_type_growth(synthetic_corr(times, 1.8, 3.5, 5.0), 2.0, consts);
    CHECK(noisy.verdict == Verdict::Inconclusive);
}

TEST_CASE("type growth: pure death reduces to the initial type") {
    DerivedConstants consts = unit_constants();
    consts.norm_b = 0.0;  // b = 0
    const BoundCheck c =
        check_type_growth(synthetic_corr({1.0, 5.0}, 1.9, 3.6, 0.01), 2.0, consts);
    CHECK(c.verdict == Verdict::Pass);
    for (const BoundRow& r : c.rows)
        CHECK(r.rhs == doctest::Approx(r.label[1] == '1' ? 2.0 : 4.0));
}

TEST_CASE("convolution bound: equality mode for the decoupled model") {
    const ModelSpec spec = decoupled_spec();
    const KernelSpec theta{KernelFamily::GaussianBump, 0.5, 1.0};
    const double kappa0 = 2.0;

    // Analytic value exp(<rho_t theta> + kappa0 <q_t theta>).
    const auto rhs_at = [&](double t) {
        const double mean_theta = oracle::integrate(
            [&](double x) {
                Vec v(1);
                v << x;
                return theta(v);
            },
            -2.0, 2.0);
        return std::exp(((1.0 - std::exp(-t)) + kappa0 * std::exp(-t)) * mean_theta);
    };

    FunctionalSeries f;
    f.kind = FunctionalKind::FTheta;
    f.times = {0.5, 1.0};
    f.replicas = 100;
    f.value = {rhs_at(0.5) * 1.001, rhs_at(1.0) * 0.999};
    f.se = {rhs_at(0.5) * 0.01, rhs_at(1.0) * 0.01};

    BoundCheck c = check_convolution_bound(f, spec, theta, kappa0);
    CHECK(c.equality);
    CHECK(c.verdict == Verdict::Pass);

    // Too small violates the equality direction.
    FunctionalSeries low = f;
    low.value = {rhs_at(0.5) * 0.5, rhs_at(1.0) * 0.5};
    low.se = {0.001, 0.001};
    BoundCheck fail_low = check_convolution_bound(low, spec, theta, kappa0);
    CHECK(fail_low.verdict == Verdict::Fail);

    // Inflated estimate violates the bound direction even without equality.
    ModelSpec interacting = spec;
    interacting.a = {KernelFamily::TopHat, 1.0, 0.5};
    FunctionalSeries high = f;
    high.value = {rhs_at(0.5) * 2.0, rhs_at(1.0) * 2.0};
    high.se = {0.001, 0.001};
    BoundCheck fail_high = check_convolution_bound(high, interacting, theta, kappa0);
    CHECK_FALSE(fail_high.equality);
    CHECK(fail_high.verdict == Verdict::Fail);
    BoundCheck pass_below = check_convolution_bound(low, interacting, theta, kappa0);
    CHECK(pass_below.verdict == Verdict::Pass);
}

TEST_CASE("convolution bound: theta = 0 gives lhs = rhs = 1") {
    const ModelSpec spec = decoupled_spec();
    const KernelSpec theta{KernelFamily::Constant, 0.0, 0.0};
    FunctionalSeries f;
    f.kind = FunctionalKind::FTheta;
    f.times = {0.5, 2.0};
    f.replicas = 10;
    f.value = {1.0, 1.0};
    f.se = {0.0, 0.0};
    BoundCheck c = check_convolution_bound(f, spec, theta, 3.0);
    CHECK(c.verdict == Verdict::Pass);
    for (const BoundRow& r : c.rows) {
        CHECK(r.lhs == 1.0);
        CHECK(r.rhs == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("global moments: saturation versus runaway growth") {
    ModelSpec spec;
    spec.dim = 1;
    spec.window = 5.0;
    spec.b = {KernelFamily::Constant, 1.0, 0.0};
    spec.m = {KernelFamily::Constant, 0.0, 0.0};
    spec.a = {KernelFamily::TopHat, 1.0, 0.5};
    const DerivedConstants consts = derive_constants(spec);

    MomentSeries saturating;
    saturating.times = {0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
    saturating.order = 2;
    saturating.replicas = 1000;
    // Decaying toward the fixed-point density 1 * |window| = 10.
    saturating.value = {{16.0, 13.0, 11.0, 10.3, 10.1, 10.0},
                        {260.0, 180.0, 130.0, 115.0, 110.0, 108.0}};
    saturating.se = {{0.1, 0.1, 0.1, 0.1, 0.1, 0.1},
                     {2.0, 2.0, 2.0, 2.0, 2.0, 2.0}};
    BoundCheck ok = check_global_moments(saturating, spec, consts);
    CHECK(ok.verdict == Verdict::Pass);

    MomentSeries growing = saturating;
    growing.value = {{2.0, 4.0, 8.0, 12.0, 16.0, 20.0},
                     {6.0, 18.0, 70.0, 150.0, 260.0, 410.0}};
    BoundCheck bad = check_global_moments(growing, spec, consts);
    CHECK(bad.verdict == Verdict::Fail);
}

TEST_CASE("global moments: decoupled fixed point b/m") {
    const ModelSpec spec = decoupled_spec();
    const DerivedConstants consts = derive_constants(spec, true);
    MomentSeries m;
    m.times = {1.0, 2.0, 4.0};
    m.order = 1;
    m.replicas = 500;
    // b/m = 1, |window| = 4: counts hover at 4.
    m.value = {{4.4, 4.1, 3.95}};
    m.se = {{0.05, 0.05, 0.05}};
    const BoundCheck c = check_global_moments(m, spec, consts);
    CHECK(c.verdict == Verdict::Pass);
}

TEST_CASE("cross validate: exact agreement and doctored failure") {
    ModelSpec spec = decoupled_spec();
    CorrelationGrid grid = make_grid(spec.box(), 7, 2);
    fill_poisson(grid, 2.0);
    SolverConfig cfg;
    cfg.dt = 0.005;
    cfg.kappa0 = 2.0;
    cfg.closure = Closure::Zero;
    HierarchySolver zero_solver(spec, grid, cfg);
    cfg.closure = Closure::RuelleCap;
    HierarchySolver cap_solver(spec, grid, cfg);
    const auto zero = zero_solver.integrate_rk4(grid.state, 0.0, {1.0});
    const auto cap = cap_solver.integrate_rk4(grid.state, 0.0, {1.0});

    // k1_t = rho_t + e^{-t} kappa0 = 1 + e^{-1}; k2 its square.
    const double k1 = 1.0 + std::exp(-1.0);
    BinnedCorrelation agree = synthetic_corr({1.0}, k1 + 0.001, k1 * k1 - 0.002, 0.01);
    // Rebuild bins within the solver window so node pairs land inside.
    const BoundCheck ok = cross_validate(agree, grid, zero, cap);
    CHECK(ok.verdict == Verdict::Pass);

    BinnedCorrelation off = synthetic_corr({1.0}, 2.0 * k1, 4.0 * k1 * k1, 0.001);
    const BoundCheck bad = cross_validate(off, grid, zero, cap);
    CHECK(bad.verdict == Verdict::Fail);

    BinnedCorrelation wrong_time = synthetic_corr({0.7}, k1, k1 * k1, 0.01);
    CHECK_THROWS_AS(cross_validate(wrong_time, grid, zero, cap), DomainError);
}

TEST_CASE("verdicts are pure functions of their inputs") {
    const std::vector<double> times = {0.5, 1.0};
    const DerivedConstants consts = unit_constants();
    const BinnedCorrelation corr = synthetic_corr(times, 1.8, 3.5, 0.01);
    const BoundCheck a = check_type_growth(corr, 2.0, consts);
    const BoundCheck b = check_type_growth(corr, 2.0, consts);
    REQUIRE(a.rows.size() == b.rows.size());
    CHECK(a.verdict == b.verdict);
    for (size_t i = 0; i < a.rows.size(); ++i) {
        CHECK(a.rows[i].lhs == b.rows[i].lhs);
        CHECK(a.rows[i].rhs == b.rows[i].rhs);
        CHECK(a.rows[i].se == b.rows[i].se);
    }
}

TEST_CASE("sigma sweep: sigma = 0 reproduces the baseline exactly") {
    ModelSpec spec;
    spec.dim = 1;
    spec.window = 2.0;
    spec.b = {KernelFamily::Constant, 1.0, 0.0};
    spec.m = {KernelFamily::Constant, 1.0, 0.0};
    spec.a = {KernelFamily::TopHat, 0.5, 0.5};

    InitialLaw law;
    law.kind = InitialLawKind::PoissonHomogeneous;
    law.kappa = 1.0;

    RunOptions opts;
    opts.replicas = 60;
    opts.master_seed = 7;
    opts.horizon = 1.0;
    opts.snapshot_times = {0.5, 1.0};
    opts.record_events = false;

    const SweepTable table = sigma_sweep(spec, law, opts, {0.0, 0.5, 1.0});
    REQUIRE(table.value.size() == 3);

    const RunResult base = run(spec, law, opts);
    for (size_t ti = 0; ti < table.times.size(); ++ti) {
        double mean = 0.0;
        for (int r = 0; r < opts.replicas; ++r)
            mean += base.snapshots.configs[r][ti].size();
        mean /= opts.replicas * spec.box().volume();
        CHECK(table.value[0][ti] == mean);
    }

    CHECK_THROWS_AS(sigma_sweep(spec, law, opts, {0.5, 1.0}), DomainError);
    CHECK_THROWS_AS(sigma_sweep(spec, law, opts, {0.1, 0.5, 1.0}), DomainError);
}

TEST_CASE("sigma sweep: deviation grows with sigma on a wide window") {
    ModelSpec spec;
    spec.dim = 1;
    spec.window = 5.0;
    spec.b = {KernelFamily::Constant, 1.0, 0.0};
    spec.m = {KernelFamily::Constant, 0.0, 0.0};
    spec.a = {KernelFamily::TopHat, 1.0, 0.5};

    InitialLaw law;
    law.kind = InitialLawKind::PoissonHomogeneous;
    law.kappa = 2.0;

    RunOptions opts;
    opts.replicas = 300;
    opts.master_seed = 2468;
    opts.horizon = 1.0;
    opts.snapshot_times = {1.0};
    opts.threads = 4;

    const SweepTable table = sigma_sweep(spec, law, opts, {0.0, 0.5, 1.0});
    // The regularization damps rates over most of the wide window, so the
    // density deviation from the sigma = 0 run increases along the sweep.
    CHECK(table.monotone_in_sigma[0]);
    const double d_half = std::abs(table.value[1][0] - table.value[0][0]);
    const double d_one = std::abs(table.value[2][0] - table.value[0][0]);
    CHECK(d_half < d_one);
    CHECK(d_one > 0.1);  // a real effect, well above ensemble noise
}
