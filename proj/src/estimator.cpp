#include "lbd/estimator.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "lbd/errors.hpp"
#include "lbd/kernels.hpp"

namespace lbd {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v, double mean) {
    const size_t r = v.size();
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / static_cast<double>(r - 1));
    return sd / std::sqrt(static_cast<double>(r));
}

}  // namespace

MomentSeries estimate_factorial_moments(const SnapshotSeries& snaps,
                                        const Box& region, const Window& window,
                                        int n_max) {
    if (snaps.replicas() < 2)
        throw DomainError("estimate_factorial_moments: need at least 2 replicas");
    if (n_max < 1 || n_max > 4)
        throw DomainError("estimate_factorial_moments: n_max must be in [1, 4]");
    if (!region.inside(Box::full(window)))
        throw DomainError("estimate_factorial_moments: region outside the window");

    const int R = snaps.replicas();
    const int T = static_cast<int>(snaps.times.size());
    MomentSeries out;
    out.times = snaps.times;
    out.order = n_max;
    out.replicas = R;
    out.value.assign(n_max, std::vector<double>(T, 0.0));
    out.se.assign(n_max, std::vector<double>(T, 0.0));

    std::vector<double> samples(R);
    for (int ti = 0; ti < T; ++ti) {
        for (int n = 1; n <= n_max; ++n) {
            for (int r = 0; r < R; ++r) {
                const int N = snaps.configs[r][ti].count_in(region);
                double f = 1.0;
                for (int k = 0; k < n; ++k) f *= static_cast<double>(N - k);
                samples[r] = n <= N ? f : 0.0;
            }
            const double m = mean_of(samples);
            out.value[n - 1][ti] = m;
            out.se[n - 1][ti] = se_of(samples, m);
        }
    }
    return out;
}

BinnedCorrelation estimate_correlations(const SnapshotSeries& snaps,
                                        const Window& window, int bins) {
    if (snaps.replicas() < 2)
        throw DomainError("estimate_correlations: need at least 2 replicas");
    if (bins < 1) throw DomainError("estimate_correlations: bins must be >= 1");

    const int R = snaps.replicas();
    const int T = static_cast<int>(snaps.times.size());
    const int d = window.dim;
    const double r_max = window.half_width;  // shells up to half the width
    const double h = r_max / bins;

    BinnedCorrelation out;
    out.times = snaps.times;
    out.replicas = R;
    out.window_volume = window.volume();
    out.k1.resize(T);
    out.k1_se.resize(T);
    out.bin_lo.resize(bins);
    out.bin_hi.resize(bins);
    out.shell_volume.resize(bins);
    for (int b = 0; b < bins; ++b) {
        out.bin_lo[b] = b * h;
        out.bin_hi[b] = (b + 1) * h;
        const double v_hi = std::pow(std::numbers::pi, d / 2.0) *
                            std::pow(out.bin_hi[b], d) / std::tgamma(d / 2.0 + 1.0);
        const double v_lo = std::pow(std::numbers::pi, d / 2.0) *
                            std::pow(out.bin_lo[b], d) / std::tgamma(d / 2.0 + 1.0);
        out.shell_volume[b] = v_hi - v_lo;
    }
    out.k2.assign(T, std::vector<double>(bins, 0.0));
    out.k2_se.assign(T, std::vector<double>(bins, 0.0));
    out.pair_count.assign(T, std::vector<long>(bins, 0));

    if (d == 1) {
        out.profile_edges.resize(bins + 1);
        for (int b = 0; b <= bins; ++b)
            out.profile_edges[b] = -window.half_width + b * window.width() / bins;
        out.k1_profile.assign(T, std::vector<double>(bins, 0.0));
        out.k1_profile_se.assign(T, std::vector<double>(bins, 0.0));
    }

    std::vector<double> density(R);
    std::vector<std::vector<double>> per_bin(bins, std::vector<double>(R, 0.0));
    std::vector<std::vector<double>> per_cell(bins, std::vector<double>(R, 0.0));

    for (int ti = 0; ti < T; ++ti) {
        for (int b = 0; b < bins; ++b) {
            std::fill(per_bin[b].begin(), per_bin[b].end(), 0.0);
            std::fill(per_cell[b].begin(), per_cell[b].end(), 0.0);
        }
        for (int r = 0; r < R; ++r) {
            const Configuration& g = snaps.configs[r][ti];
            const int n = g.size();
            density[r] = n / out.window_volume;
            if (d == 1) {
                const double cell = window.width() / bins;
                for (int i = 0; i < n; ++i) {
                    const int b = static_cast<int>(
                        (g.point(i)[0] + window.half_width) / cell);
                    if (b >= 0 && b < bins) per_cell[b][r] += 1.0;
                }
            }
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double dist = window.distance(g.point_ptr(i), g.point_ptr(j));
                    const int b = static_cast<int>(dist / h);
                    if (b >= 0 && b < bins) {
                        per_bin[b][r] += 1.0;
                        ++out.pair_count[ti][b];
                    }
                }
        }
        const double m1 = mean_of(density);
        out.k1[ti] = m1;
        out.k1_se[ti] = se_of(density, m1);
        if (d == 1) {
            const double cell = window.width() / bins;
            for (int b = 0; b < bins; ++b) {
                for (int r = 0; r < R; ++r) per_cell[b][r] /= cell;
                const double mc = mean_of(per_cell[b]);
                out.k1_profile[ti][b] = mc;
                out.k1_profile_se[ti][b] = se_of(per_cell[b], mc);
            }
        }
        for (int b = 0; b < bins; ++b) {
            if (out.pair_count[ti][b] == 0) {
                out.k2[ti][b] = std::numeric_limits<double>::quiet_NaN();
                out.k2_se[ti][b] = std::numeric_limits<double>::quiet_NaN();
                continue;
            }
            const double norm = out.window_volume * out.shell_volume[b];
            for (int r = 0; r < R; ++r) per_bin[b][r] /= norm;
            const double m2 = mean_of(per_bin[b]);
            out.k2[ti][b] = m2;
            out.k2_se[ti][b] = se_of(per_bin[b], m2);
        }
    }
    return out;
}

FunctionalSeries estimate_functional(const SnapshotSeries& snaps,
                                     FunctionalKind kind,
                                     const ScalarField& field) {
    if (snaps.replicas() < 2)
        throw DomainError("estimate_functional: need at least 2 replicas");

    const int R = snaps.replicas();
    const int T = static_cast<int>(snaps.times.size());
    FunctionalSeries out;
    out.kind = kind;
    out.times = snaps.times;
    out.replicas = R;
    out.value.resize(T);
    out.se.resize(T);

    std::vector<double> samples(R);
    for (int ti = 0; ti < T; ++ti) {
        for (int r = 0; r < R; ++r) {
            const Configuration& g = snaps.configs[r][ti];
            switch (kind) {
                case FunctionalKind::FTheta:
                    samples[r] = f_theta(g, field);
                    break;
                case FunctionalKind::FTildeV:
                    samples[r] = f_tilde_v(g, field);
                    break;
                case FunctionalKind::Phi: {
                    double s = 0.0;
                    for (int i = 0; i < g.size(); ++i) s += psi(g.point(i));
                    samples[r] = s;
                    break;
                }
            }
        }
        const double m = mean_of(samples);
        out.value[ti] = m;
        out.se[ti] = se_of(samples, m);
    }
    return out;
}

std::string to_string(FunctionalKind k) {
    switch (k) {
        case FunctionalKind::FTheta: return "F_theta";
        case FunctionalKind::FTildeV: return "F_tilde_v";
        case FunctionalKind::Phi: return "Phi";
    }
    return "?";
}

}  // namespace lbd
