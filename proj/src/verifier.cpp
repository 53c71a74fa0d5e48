#include "lbd/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lbd/errors.hpp"
#include "lbd/quadrature.hpp"

namespace lbd {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "PASS";
        case Verdict::Fail: return "FAIL";
        case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Verdict evaluate(BoundCheck& check) {
    bool inconclusive = false;
    bool fail = false;
    for (const BoundRow& r : check.rows) {
        if (std::isnan(r.lhs) || std::isnan(r.rhs)) continue;  // missing bins
        if (r.se > 0.5 * std::abs(r.scale)) {
            inconclusive = true;
            continue;
        }
        const double band = 3.0 * r.se + check.tolerance;
        if (r.lhs > r.rhs + band) fail = true;
        if (check.equality && r.lhs < r.rhs - band) fail = true;
    }
    check.verdict = fail ? Verdict::Fail
                         : (inconclusive ? Verdict::Inconclusive : Verdict::Pass);
    return check.verdict;
}

BoundCheck check_type_growth(const BinnedCorrelation& corr, double kappa0,
                             const DerivedConstants& consts) {
    BoundCheck c;
    c.name = "type_growth";
    c.policy = "k^(n)_t <= (kappa0 + ||b|| t)^n, 3 SE, per time and bin";
    for (size_t ti = 0; ti < corr.times.size(); ++ti) {
        const double t = corr.times[ti];
        const double bound = kappa0 + consts.norm_b * t;
        c.rows.push_back({"k1 t=" + std::to_string(t), t, corr.k1[ti], bound,
                          corr.k1_se[ti], bound});
        for (size_t b = 0; b < corr.bin_lo.size(); ++b) {
            if (std::isnan(corr.k2[ti][b])) continue;
            c.rows.push_back({"k2 t=" + std::to_string(t) + " bin=" + std::to_string(b),
                              t, corr.k2[ti][b], bound * bound, corr.k2_se[ti][b],
                              bound * bound});
        }
    }
    evaluate(c);
    return c;
}

BoundCheck check_convolution_bound(const FunctionalSeries& ftheta,
                                   const ModelSpec& spec,
                                   const KernelSpec& theta, double kappa0) {
    if (ftheta.kind != FunctionalKind::FTheta)
        throw DomainError("check_convolution_bound: needs an F_theta series");

    BoundCheck c;
    c.name = "convolution_bound";
    c.equality = spec.a.is_zero();
    c.policy = c.equality
                   ? "decoupled: |mu_t(F^theta) - analytic| <= 3 SE (equality)"
                   : "mu_t(F^theta) <= exp(<rho_t theta> + kappa0 <q_t theta>) + 3 SE";

    const Window w = spec.box();
    const int d = spec.dim;
    for (size_t ti = 0; ti < ftheta.times.size(); ++ti) {
        const double t = ftheta.times[ti];
        // exp( int rho_t theta + kappa0 int q_t theta ) over the window.
        const double expo = quad::integrate_box(
            [&](const double* xp) {
                Eigen::Map<const Vec> x(xp, d);
                const QtRho qr = qt_rho(x, t, spec);
                return (qr.rho + kappa0 * qr.q) * theta(x);
            },
            d, -w.half_width, w.half_width, 16, d == 1 ? 8 : 2);
        const double rhs = std::exp(expo);
        c.rows.push_back({"t=" + std::to_string(t), t, ftheta.value[ti], rhs,
                          ftheta.se[ti], rhs});
    }
    evaluate(c);
    return c;
}

BoundCheck check_global_moments(const MomentSeries& moments,
                                const ModelSpec& spec,
                                const DerivedConstants& consts,
                                double saturation_fraction,
                                double mean_field_tolerance) {
    BoundCheck c;
    c.name = "global_moments";
    c.policy = "running max before " + std::to_string(saturation_fraction) +
               " T; long-run density within +-" +
               std::to_string(mean_field_tolerance * 100.0) +
               "% of the mean-field fixed point";

    const double T = moments.times.back();
    const Window w = spec.box();

    // Saturation diagnostic on the first and second factorial moments.
    const int orders = std::min(moments.order, 2);
    for (int n = 1; n <= orders; ++n) {
        const auto& series = moments.value[n - 1];
        size_t argmax = 0;
        for (size_t ti = 0; ti < series.size(); ++ti)
            if (series[ti] > series[argmax]) argmax = ti;
        const double t_at_max = moments.times[argmax];
        // lhs = time of the running maximum, rhs = saturation cutoff.
        c.rows.push_back({"argmax phi_" + std::to_string(n), T, t_at_max,
                          saturation_fraction * T, 0.0, T});
    }

    // Mean-field fixed point rho* = (-m + sqrt(m^2 + 4 <a> b)) / (2 <a>),
    // with spatially averaged b and m; for <a> = 0 this degenerates to b/m.
    const double b_mean = kernel_window_integral(spec.b, w) / w.volume();
    const double m_mean = kernel_window_integral(spec.m, w) / w.volume();
    const double a_tot = consts.mean_a;
    double rho_star;
    if (a_tot > 0.0)
        rho_star = (-m_mean + std::sqrt(m_mean * m_mean + 4.0 * a_tot * b_mean)) /
                   (2.0 * a_tot);
    else if (m_mean > 0.0)
        rho_star = b_mean / m_mean;
    else
        rho_star = std::numeric_limits<double>::infinity();

    if (std::isfinite(rho_star)) {
        const double density = moments.value[0].back() / w.volume();
        const double dens_se = moments.se[0].back() / w.volume();
        // |density - rho*| <= tolerance * rho*; SE folded in by the policy.
        c.rows.push_back({"long-run density vs rho*", T,
                          std::abs(density - rho_star),
                          mean_field_tolerance * rho_star, dens_se, rho_star});
    }
    evaluate(c);
    return c;
}

BoundCheck cross_validate(const BinnedCorrelation& corr,
                          const CorrelationGrid& grid,
                          const HierarchySolver::Trajectory& solved_zero,
                          const HierarchySolver::Trajectory& solved_cap) {
    BoundCheck c;
    c.name = "cross_validate";
    c.policy = "|k_hat - k_solver| <= 3 SE + closure spread";

    if (solved_zero.times != solved_cap.times)
        throw DomainError("cross_validate: closure trajectories disagree on times");

    const int M = grid.site_count();
    const Window& w = grid.window;

    for (size_t ti = 0; ti < corr.times.size(); ++ti) {
        // Align on matching output times.
        size_t si = solved_cap.times.size();
        for (size_t k = 0; k < solved_cap.times.size(); ++k)
            if (std::abs(solved_cap.times[k] - corr.times[ti]) < 1e-9) si = k;
        if (si == solved_cap.times.size())
            throw DomainError("cross_validate: no solver output at t = " +
                              std::to_string(corr.times[ti]));

        const GridState& cap = solved_cap.states[si];
        const GridState& zero = solved_zero.states[si];

        // Density: weighted site average of k1 against the scalar estimate.
        double k1_cap = 0.0, k1_zero = 0.0, wsum = 0.0;
        for (int i = 0; i < M; ++i) {
            k1_cap += grid.site_weights[i] * cap.k1[i];
            k1_zero += grid.site_weights[i] * zero.k1[i];
            wsum += grid.site_weights[i];
        }
        k1_cap /= wsum;
        k1_zero /= wsum;
        c.rows.push_back({"k1 t=" + std::to_string(corr.times[ti]), corr.times[ti],
                          std::abs(corr.k1[ti] - k1_cap),
                          std::abs(k1_cap - k1_zero), corr.k1_se[ti],
                          std::max(std::abs(k1_cap), 1e-12)});

        // Pair function: average solver k2 over node pairs per distance bin.
        if (grid.n_max >= 2 && !corr.bin_lo.empty()) {
            const int bins = static_cast<int>(corr.bin_lo.size());
            std::vector<double> cap_bin(bins, 0.0), zero_bin(bins, 0.0), norm(bins, 0.0);
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j) {
                    if (i == j) continue;
                    const double dist =
                        w.distance(grid.sites.row(i).data(), grid.sites.row(j).data());
                    const int b = static_cast<int>(dist / (corr.bin_hi[0] - corr.bin_lo[0]));
                    if (b < 0 || b >= bins) continue;
                    const double wt = grid.site_weights[i] * grid.site_weights[j];
                    cap_bin[b] += wt * cap.k2(i, j);
                    zero_bin[b] += wt * zero.k2(i, j);
                    norm[b] += wt;
                }
            for (int b = 0; b < bins; ++b) {
                if (norm[b] == 0.0 || std::isnan(corr.k2[ti][b])) continue;
                cap_bin[b] /= norm[b];
                zero_bin[b] /= norm[b];
                c.rows.push_back(
                    {"k2 t=" + std::to_string(corr.times[ti]) + " bin=" + std::to_string(b),
                     corr.times[ti], std::abs(corr.k2[ti][b] - cap_bin[b]),
                     std::abs(cap_bin[b] - zero_bin[b]), corr.k2_se[ti][b],
                     std::max(std::abs(cap_bin[b]), 1e-12)});
            }
        }
    }
    evaluate(c);
    return c;
}

SweepTable sigma_sweep(const ModelSpec& base, const InitialLaw& law,
                       const RunOptions& opts, const std::vector<double>& sigmas,
                       SweepObservable observable) {
    if (sigmas.size() < 3)
        throw DomainError("sigma_sweep: need at least 3 sigma values");
    if (std::find(sigmas.begin(), sigmas.end(), 0.0) == sigmas.end())
        throw DomainError("sigma_sweep: the sweep must include sigma = 0");

    SweepTable table;
    table.observable = observable;
    table.sigmas = sigmas;
    table.times = opts.snapshot_times;
    table.value.resize(sigmas.size());

    RunOptions sweep_opts = opts;
    sweep_opts.record_events = false;
    for (size_t si = 0; si < sigmas.size(); ++si) {
        ModelSpec spec = base;
        spec.sigma = sigmas[si];
        const RunResult res = run(spec, law, sweep_opts);
        const Window w = spec.box();
        table.value[si].resize(table.times.size());
        for (size_t ti = 0; ti < table.times.size(); ++ti) {
            double mean = 0.0;
            for (int r = 0; r < res.snapshots.replicas(); ++r) {
                const Configuration& g = res.snapshots.configs[r][ti];
                if (observable == SweepObservable::Density) {
                    mean += g.size();
                } else {
                    for (int i = 0; i < g.size(); ++i) mean += psi(g.point(i));
                }
            }
            mean /= opts.replicas;
            table.value[si][ti] =
                observable == SweepObservable::Density ? mean / w.volume() : mean;
        }
    }

    // Monotone trend of |obs(sigma) - obs(0)| along increasing sigma.
    size_t zero_idx = 0;
    for (size_t si = 0; si < sigmas.size(); ++si)
        if (sigmas[si] == 0.0) zero_idx = si;
    std::vector<size_t> order(sigmas.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return sigmas[a] < sigmas[b]; });

    table.monotone_in_sigma.resize(table.times.size());
    for (size_t ti = 0; ti < table.times.size(); ++ti) {
        bool mono = true;
        double prev = -1.0;
        for (size_t oi : order) {
            const double dev = std::abs(table.value[oi][ti] - table.value[zero_idx][ti]);
            if (dev + 1e-12 < prev) mono = false;
            prev = dev;
        }
        table.monotone_in_sigma[ti] = mono;
    }
    return table;
}

}  // namespace lbd
