#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lbd/config_calculus.hpp"
#include "lbd/errors.hpp"
#include "lbd/estimator.hpp"
#include "lbd/hierarchy.hpp"
#include "lbd/verifier.hpp"
#include "oracles.hpp"

using namespace lbd;

namespace {

ModelSpec plain_model(double window) {
    ModelSpec spec;
    spec.dim = 1;
    spec.window = window;
    spec.b = {KernelFamily::Constant, 0.0, 0.0};
    spec.m = {KernelFamily::Constant, 0.0, 0.0};
    spec.a = {KernelFamily::Constant, 0.0, 0.0};
    return spec;
}

// Frozen snapshots of a Poisson state at a single time.
SnapshotSeries poisson_snapshots(double kappa, double window, int replicas,
                                 std::uint64_t seed) {
    ModelSpec spec = plain_model(window);
    Simulator sim(spec);
    InitialLaw law;
    law.kind = InitialLawKind::PoissonHomogeneous;
    law.kappa = kappa;
    SnapshotSeries snaps;
    snaps.times = {0.0};
    snaps.dim = 1;
    snaps.configs.resize(replicas);
    for (int r = 0; r < replicas; ++r) {
        RngStream rng(seed, r);
        snaps.configs[r].push_back(sim.sample_initial(law, rng));
    }
    return snaps;
}

}  // namespace

TEST_CASE("factorial moments: empty snapshots") {
    SnapshotSeries snaps;
    snaps.times = {0.0, 1.0};
    snaps.dim = 1;
    snaps.configs.assign(4, std::vector<Configuration>(2, Configuration(1)));
    const Window w{1, 1.0};
    const MomentSeries m = estimate_factorial_moments(snaps, Box::full(w), w, 3);
    for (int n = 1; n <= 3; ++n)
        for (size_t ti = 0; ti < 2; ++ti) {
            CHECK(m.value[n - 1][ti] == 0.0);
            CHECK(m.se[n - 1][ti] == 0.0);
        }
}

TEST_CASE("factorial moments: Poisson phi_2 = (kappa |window|)^2") {
    const SnapshotSeries snaps = poisson_snapshots(5.0, 1.0, 10000, 11);
    const Window w{1, 1.0};
    const MomentSeries m = estimate_factorial_moments(snaps, Box::full(w), w, 3);
    CHECK(std::abs(m.value[1][0] - 100.0) <= 3.0 * m.se[1][0]);
    CHECK(std::abs(m.value[0][0] - 10.0) <= 3.0 * m.se[0][0]);
    CHECK(std::abs(m.value[2][0] - 1000.0) <= 3.0 * m.se[2][0]);
}

TEST_CASE("factorial moments agree with the counting-measure estimator") {
    const SnapshotSeries snaps = poisson_snapshots(3.0, 1.0, 500, 13);
    const Window w{1, 1.0};
    const Box full = Box::full(w);
    const MomentSeries m = estimate_factorial_moments(snaps, full, w, 4);
    for (int n = 1; n <= 4; ++n) {
        double acc = 0.0;
        for (int r = 0; r < snaps.replicas(); ++r)
            acc += static_cast<double>(factorial_count(snaps.configs[r][0], n, full));
        acc /= snaps.replicas();
        CHECK(m.value[n - 1][0] == doctest::Approx(acc).epsilon(1e-12));
    }
}

TEST_CASE("factorial moments: guards") {
    SnapshotSeries snaps;
    snaps.times = {0.0};
    snaps.dim = 1;
    snaps.configs.assign(1, std::vector<Configuration>(1, Configuration(1)));
    const Window w{1, 1.0};
    CHECK_THROWS_AS(estimate_factorial_moments(snaps, Box::full(w), w, 2), DomainError);

    snaps.configs.assign(3, std::vector<Configuration>(1, Configuration(1)));
    Box outside;
    outside.lo = Vec::Constant(1, -2.0);
    outside.hi = Vec::Constant(1, 2.0);
    CHECK_THROWS_AS(estimate_factorial_moments(snaps, outside, w, 2), DomainError);
}

TEST_CASE("correlations: Poisson state has k1 = kappa, k2 = kappa^2") {
    const double kappa = 3.0;
    const SnapshotSeries snaps = poisson_snapshots(kappa, 2.0, 4000, 17);
    const Window w{1, 2.0};
    const BinnedCorrelation c = estimate_correlations(snaps, w, 10);
    CHECK(std::abs(c.k1[0] - kappa) <= 3.0 * c.k1_se[0]);
    int checked = 0;
    for (size_t b = 0; b < c.bin_lo.size(); ++b) {
        if (std::isnan(c.k2[0][b])) continue;
        CHECK(std::abs(c.k2[0][b] - kappa * kappa) <= 3.0 * c.k2_se[0][b]);
        ++checked;
    }
    CHECK(checked >= 8);

    // k1 integrated over the window telescopes to phi_1.
    const MomentSeries m = estimate_factorial_moments(snaps, Box::full(w), w, 1);
    CHECK(c.k1[0] * w.volume() == doctest::Approx(m.value[0][0]).epsilon(1e-12));

    // Homogeneous state: the position profile is flat at kappa, and its
    // cell average telescopes back to the scalar estimate.
    REQUIRE(c.profile_edges.size() == c.bin_lo.size() + 1);
    double cell_sum = 0.0;
    for (size_t b = 0; b < c.k1_profile[0].size(); ++b) {
        CHECK(std::abs(c.k1_profile[0][b] - kappa) <= 3.0 * c.k1_profile_se[0][b]);
        cell_sum += c.k1_profile[0][b];
    }
    CHECK(cell_sum / c.k1_profile[0].size() ==
          doctest::Approx(c.k1[0]).epsilon(1e-12));
}

TEST_CASE("correlations: single replica is an error") {
    SnapshotSeries snaps;
    snaps.times = {0.0};
    snaps.dim = 1;
    snaps.configs.assign(1, std::vector<Configuration>(1, Configuration(1)));
    CHECK_THROWS_AS(estimate_correlations(snaps, Window{1, 1.0}, 4), DomainError);
}

TEST_CASE("correlations: competition digs a hole below the competition radius") {
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
    opts.replicas = 1500;
    opts.master_seed = 99;
    opts.horizon = 2.0;
    opts.snapshot_times = {0.5, 2.0};
    opts.record_events = false;
    opts.threads = 4;
    const RunResult res = run(spec, law, opts);
    const Window w = spec.box();
    const BinnedCorrelation c = estimate_correlations(res.snapshots, w, 20);

    // Short-distance anticorrelation: k2 below k1^2 inside the hat.
    const double k1sq = c.k1[1] * c.k1[1];
    REQUIRE_FALSE(std::isnan(c.k2[1][0]));
    CHECK(c.k2[1][0] < k1sq);

    // Against the hierarchy solver within 3 SE plus the closure band, at a
    // time where the pair-level truncation is still quantitative.
    SnapshotSeries early;
    early.times = {0.5};
    early.dim = 1;
    early.configs.resize(res.snapshots.replicas());
    for (int r = 0; r < res.snapshots.replicas(); ++r)
        early.configs[r].push_back(res.snapshots.configs[r][0]);
    const BinnedCorrelation c_early = estimate_correlations(early, w, 20);

    CorrelationGrid grid = make_grid(w, 25, 2);
    fill_poisson(grid, 2.0);
    SolverConfig zero_cfg;
    zero_cfg.dt = 0.005;
    zero_cfg.closure = Closure::Zero;
    zero_cfg.kappa0 = 2.0;
    SolverConfig cap_cfg = zero_cfg;
    cap_cfg.closure = Closure::RuelleCap;
    HierarchySolver zero_solver(spec, grid, zero_cfg);
    HierarchySolver cap_solver(spec, grid, cap_cfg);
    const auto zero_traj = zero_solver.integrate_rk4(grid.state, 0.0, {0.5});
    const auto cap_traj = cap_solver.integrate_rk4(grid.state, 0.0, {0.5});
    const BoundCheck cv = cross_validate(c_early, grid, zero_traj, cap_traj);
    // Allow a coarse-grid tolerance on top of the policy band.
    int failures = 0;
    for (const BoundRow& r : cv.rows)
        if (r.lhs > r.rhs + 3.0 * r.se + 0.15 * std::abs(r.scale)) ++failures;
    CHECK(failures == 0);
}

TEST_CASE("functionals: constants and Poisson identities") {
    const double kappa = 2.0;
    const double W = 2.0;
    const SnapshotSeries snaps = poisson_snapshots(kappa, W, 8000, 23);

    const ScalarField zero = [](PointRef) { return 0.0; };
    const FunctionalSeries f0 = estimate_functional(snaps, FunctionalKind::FTheta, zero);
    CHECK(f0.value[0] == 1.0);
    CHECK(f0.se[0] == 0.0);

    // mean prod(1 + theta) = exp(kappa <theta>).
    const ScalarField theta = [](PointRef x) { return 0.5 * std::exp(-x[0] * x[0]); };
    const double mean_theta = oracle::integrate(
        [&theta](double x) {
            Vec v(1);
            v << x;
            return theta(v);
        },
        -W, W);
    const FunctionalSeries ft = estimate_functional(snaps, FunctionalKind::FTheta, theta);
    CHECK(std::abs(ft.value[0] - std::exp(kappa * mean_theta)) <= 3.0 * ft.se[0]);

    // mean Phi = kappa <psi>.
    const double mean_psi = oracle::integrate(
        [](double x) { return 1.0 / (1.0 + x * x); }, -W, W);
    const FunctionalSeries fp = estimate_functional(snaps, FunctionalKind::Phi, zero);
    CHECK(std::abs(fp.value[0] - kappa * mean_psi) <= 3.0 * fp.se[0]);

    // F~_v stays in (0, 1].
    const ScalarField v = [](PointRef x) { return 1.0 + 0.5 * std::sin(x[0]); };
    const FunctionalSeries fv = estimate_functional(snaps, FunctionalKind::FTildeV, v);
    CHECK(fv.value[0] > 0.0);
    CHECK(fv.value[0] <= 1.0);
}

TEST_CASE("standard errors shrink like sqrt(replicas)") {
    const SnapshotSeries snaps_small = poisson_snapshots(4.0, 1.0, 2000, 31);
    const SnapshotSeries snaps_large = poisson_snapshots(4.0, 1.0, 8000, 31);
    const Window w{1, 1.0};
    const MomentSeries small = estimate_factorial_moments(snaps_small, Box::full(w), w, 2);
    const MomentSeries large = estimate_factorial_moments(snaps_large, Box::full(w), w, 2);
    const double ratio = small.se[0][0] / large.se[0][0];
    CHECK(ratio > 2.0 * 0.8);   // sqrt(4) = 2 within 20%
    CHECK(ratio < 2.0 * 1.2);
}
