#include "lbd/pipeline.hpp"

#include <iostream>
#include <ostream>

#include "lbd/errors.hpp"

namespace lbd::pipeline {

namespace fs = std::filesystem;

namespace {

using artifacts::Paths;

Paths paths_of(const RunConfig& cfg) { return artifacts::layout(cfg.output_dir); }

RunOptions run_options(const RunConfig& cfg, int threads) {
    RunOptions opts;
    opts.replicas = cfg.replicas;
    opts.master_seed = cfg.master_seed;
    opts.horizon = cfg.horizon;
    opts.snapshot_times = cfg.snapshot_times;
    opts.threads = threads;
    return opts;
}

CorrelationGrid initial_grid(const RunConfig& cfg) {
    CorrelationGrid grid = make_grid(cfg.model.box(), cfg.solver.grid_points,
                                     cfg.solver.n_max);
    switch (cfg.initial.kind) {
        case InitialLawKind::PoissonHomogeneous:
            fill_poisson(grid, cfg.initial.kappa);
            break;
        case InitialLawKind::ThinnedPoisson: {
            const KernelSpec q = cfg.initial.retention;
            const double kappa = cfg.initial.kappa;
            fill_product(grid, [q, kappa](PointRef x) { return kappa * q(x); });
            break;
        }
        case InitialLawKind::PoissonInhomogeneous: {
            const KernelSpec density = cfg.initial.density;
            fill_product(grid, [density](PointRef x) { return density(x); });
            break;
        }
        case InitialLawKind::Fixed:
            throw DomainError("solve: fixed initial configurations have no "
                              "product-form correlation functions");
    }
    return grid;
}

SolverConfig solver_config(const RunConfig& cfg, Closure closure) {
    SolverConfig sc;
    sc.dt = cfg.solver.dt;
    sc.closure = closure;
    sc.kappa0 = cfg.resolved_kappa0();
    sc.series_order = cfg.solver.series_order;
    sc.alpha_track = cfg.solver.alpha_track;
    return sc;
}

}  // namespace

void validate(const RunConfig& cfg, std::ostream& out) {
    const DerivedConstants c = derive_constants(cfg.model, cfg.allow_decoupled);
    out << "model: d = " << cfg.model.dim << ", window half-width = "
        << cfg.model.window << ", sigma = " << cfg.model.sigma << "\n";
    if (cfg.model.a.at_origin() <= 0.0)
        out << "note: a == 0 (decoupled diagnostic limit)\n";
    out << "||b|| = " << c.norm_b << "\n"
        << "||m|| = " << c.norm_m << "\n"
        << "||a|| = " << c.norm_a << "\n"
        << "<a> = " << c.mean_a << "\n"
        << "<psi> = " << c.mean_psi << "\n"
        << "<b_sigma> = " << c.mean_b_sigma << "\n";
}

void simulate(const RunConfig& cfg, int threads) {
    const Paths p = paths_of(cfg);
    const std::string started = artifacts::now_iso8601();
    const RunResult res = run(cfg.model, cfg.initial, run_options(cfg, threads));
    artifacts::write_events_csv(p.events, res.logs, cfg.model.dim);
    artifacts::write_snapshots_csv(p.snapshots, res.snapshots);
    artifacts::update_manifest(p, cfg, "simulate", "ok", started,
                               artifacts::now_iso8601());
}

void solve(const RunConfig& cfg) {
    const Paths p = paths_of(cfg);
    const std::string started = artifacts::now_iso8601();
    const CorrelationGrid grid = initial_grid(cfg);

    for (const Closure closure : {Closure::Zero, Closure::RuelleCap}) {
        HierarchySolver solver(cfg.model, grid, solver_config(cfg, closure));
        const auto traj = solver.integrate_rk4(grid.state, 0.0, cfg.snapshot_times);
        const bool zero = closure == Closure::Zero;
        artifacts::write_solution_json(zero ? p.solution_zero : p.solution_cap, grid,
                                       traj, zero ? "zero" : "ruelle_cap");
    }
    artifacts::update_manifest(p, cfg, "solve", "ok", started,
                               artifacts::now_iso8601());
}

void estimate(const RunConfig& cfg) {
    const Paths p = paths_of(cfg);
    artifacts::require_artifact(p.snapshots, "simulate");
    const std::string started = artifacts::now_iso8601();

    const SnapshotSeries snaps = artifacts::read_snapshots_csv(p.snapshots);
    const Window w = cfg.model.box();

    const MomentSeries moments = estimate_factorial_moments(
        snaps, Box::full(w), w, cfg.estimator.moment_order);
    artifacts::write_moments_csv(p.moments, moments);

    const BinnedCorrelation corr =
        estimate_correlations(snaps, w, cfg.estimator.pair_bins);
    artifacts::write_correlation_csv(p.correlation_k1, p.correlation_k2, corr);

    const KernelSpec theta = cfg.estimator.theta;
    const KernelSpec v = cfg.estimator.v;
    std::vector<FunctionalSeries> fs;
    fs.push_back(estimate_functional(snaps, FunctionalKind::FTheta,
                                     [theta](PointRef x) { return theta(x); }));
    fs.push_back(estimate_functional(snaps, FunctionalKind::FTildeV,
                                     [v](PointRef x) { return v(x); }));
    fs.push_back(estimate_functional(snaps, FunctionalKind::Phi,
                                     [](PointRef) { return 0.0; }));
    artifacts::write_functionals_csv(p.functionals, fs);

    artifacts::update_manifest(p, cfg, "estimate", "ok", started,
                               artifacts::now_iso8601());
}

std::vector<BoundCheck> verify(const RunConfig& cfg) {
    const Paths p = paths_of(cfg);
    const std::string started = artifacts::now_iso8601();
    const DerivedConstants consts = derive_constants(cfg.model, cfg.allow_decoupled);
    const double kappa0 = cfg.resolved_kappa0();

    std::vector<BoundCheck> checks;
    for (const std::string& name : cfg.verifier.checks) {
        if (name == "type_growth") {
            artifacts::require_artifact(p.correlation_k1, "estimate");
            const BinnedCorrelation corr =
                artifacts::read_correlation_csv(p.correlation_k1, p.correlation_k2);
            checks.push_back(check_type_growth(corr, kappa0, consts));
        } else if (name == "convolution_bound") {
            if (cfg.initial.kind != InitialLawKind::PoissonHomogeneous)
                throw DomainError(
                    "convolution_bound: only Poisson initial states have a "
                    "closed-form right-hand side");
            artifacts::require_artifact(p.functionals, "estimate");
            const auto fs = artifacts::read_functionals_csv(p.functionals);
            const FunctionalSeries* ftheta = nullptr;
            for (const auto& s : fs)
                if (s.kind == FunctionalKind::FTheta) ftheta = &s;
            if (!ftheta)
                throw MissingArtifactError("functionals.csv lacks an F_theta series");
            checks.push_back(check_convolution_bound(*ftheta, cfg.model,
                                                     cfg.estimator.theta, kappa0));
        } else if (name == "global_moments") {
            artifacts::require_artifact(p.moments, "estimate");
            const MomentSeries moments = artifacts::read_moments_csv(p.moments);
            checks.push_back(check_global_moments(moments, cfg.model, consts));
        } else if (name == "cross_validate") {
            if (!cfg.model.homogeneous())
                throw DomainError("cross_validate: needs a homogeneous model for "
                                  "distance-binned comparison");
            artifacts::require_artifact(p.correlation_k1, "estimate");
            artifacts::require_artifact(p.solution_zero, "solve");
            artifacts::require_artifact(p.solution_cap, "solve");
            const BinnedCorrelation corr =
                artifacts::read_correlation_csv(p.correlation_k1, p.correlation_k2);
            CorrelationGrid grid;
            const auto zero = artifacts::read_solution_json(p.solution_zero, grid);
            const auto cap = artifacts::read_solution_json(p.solution_cap, grid);
            checks.push_back(cross_validate(corr, grid, zero, cap));
        }
    }
    artifacts::write_verdicts_json(p.verdicts, checks);
    artifacts::update_manifest(p, cfg, "verify", "ok", started,
                               artifacts::now_iso8601());
    return checks;
}

SweepTable sweep(const RunConfig& cfg, int threads) {
    const Paths p = paths_of(cfg);
    const std::string started = artifacts::now_iso8601();
    const SweepTable table =
        sigma_sweep(cfg.model, cfg.initial, run_options(cfg, threads),
                    cfg.sweep.sigmas, cfg.sweep.observable);
    artifacts::write_sweep_csv(p.sweep, table);
    artifacts::update_manifest(p, cfg, "sweep", "ok", started,
                               artifacts::now_iso8601());
    return table;
}

int report(const RunConfig& cfg, std::ostream& out) {
    const Paths p = paths_of(cfg);
    artifacts::require_artifact(p.verdicts, "verify");
    const auto checks = artifacts::read_verdicts_json(p.verdicts);

    bool all_pass = true;
    out << "check                 verdict        rows\n";
    for (const BoundCheck& c : checks) {
        out << c.name;
        for (size_t i = c.name.size(); i < 22; ++i) out << ' ';
        out << to_string(c.verdict);
        for (size_t i = to_string(c.verdict).size(); i < 15; ++i) out << ' ';
        out << c.rows.size() << "\n";
        if (c.verdict != Verdict::Pass) all_pass = false;
    }

    // Plot data: density time series with the type bound alongside.
    if (fs::exists(p.correlation_k1)) {
        const DerivedConstants consts =
            derive_constants(cfg.model, cfg.allow_decoupled);
        const double kappa0 = cfg.resolved_kappa0();
        const BinnedCorrelation corr =
            artifacts::read_correlation_csv(p.correlation_k1, p.correlation_k2);
        std::string csv = "time,k1,k1_se,type_bound\n";
        for (size_t ti = 0; ti < corr.times.size(); ++ti) {
            csv += artifacts::format_double(corr.times[ti]);
            csv += ',';
            csv += artifacts::format_double(corr.k1[ti]);
            csv += ',';
            csv += artifacts::format_double(corr.k1_se[ti]);
            csv += ',';
            csv += artifacts::format_double(kappa0 + consts.norm_b * corr.times[ti]);
            csv += '\n';
        }
        artifacts::atomic_write(p.report, csv);
    }

    out << (all_pass ? "overall: PASS" : "overall: NOT PASSED") << "\n";
    return all_pass ? 0 : 1;
}

}  // namespace lbd::pipeline
