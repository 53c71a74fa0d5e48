#include "lbd/hierarchy.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <unordered_map>

#include "lbd/errors.hpp"
#include "lbd/quadrature.hpp"

namespace lbd {

CorrelationGrid make_grid(const Window& w, int axis_points, int n_max) {
    if (n_max < 1 || n_max > 3)
        throw DomainError("make_grid: n_max must be 1, 2 or 3");
    if (axis_points < 2) throw DomainError("make_grid: need at least 2 nodes");

    CorrelationGrid g;
    g.n_max = n_max;
    g.window = w;
    g.axis_points = axis_points;
    // Uniform midpoint lattice: on the torus this rule is spectrally accurate
    // for smooth periodic integrands and keeps the coupling weights
    // translation-covariant, so homogeneous models stay homogeneous on the
    // grid.
    const double h = w.width() / axis_points;
    g.axis_nodes.resize(axis_points);
    g.axis_weights.resize(axis_points);
    for (int j = 0; j < axis_points; ++j) {
        g.axis_nodes[j] = -w.half_width + (j + 0.5) * h;
        g.axis_weights[j] = h;
    }

    long m = 1;
    for (int k = 0; k < w.dim; ++k) m *= axis_points;
    if (m > 4096)
        throw SizeError("make_grid: " + std::to_string(m) + " sites (cap 4096)");
    g.sites.resize(m, w.dim);
    g.site_weights.resize(m);
    for (long s = 0; s < m; ++s) {
        long rem = s;
        double wt = 1.0;
        for (int k = 0; k < w.dim; ++k) {
            const int idx = static_cast<int>(rem % axis_points);
            rem /= axis_points;
            g.sites(s, k) = g.axis_nodes[idx];
            wt *= g.axis_weights[idx];
        }
        g.site_weights[s] = wt;
    }

    const long M = m;
    g.state.k0 = 1.0;
    g.state.k1 = Eigen::ArrayXd::Zero(M);
    if (n_max >= 2) g.state.k2 = Eigen::ArrayXXd::Zero(M, M);
    if (n_max >= 3) g.state.k3 = Eigen::ArrayXd::Zero(M * M * M);
    return g;
}

void fill_poisson(CorrelationGrid& g, double kappa) {
    g.state.k0 = 1.0;
    g.state.k1.setConstant(kappa);
    if (g.n_max >= 2) g.state.k2.setConstant(kappa * kappa);
    if (g.n_max >= 3) g.state.k3.setConstant(kappa * kappa * kappa);
}

void fill_product(CorrelationGrid& g, const ScalarField& rho) {
    const int M = g.site_count();
    Eigen::ArrayXd r(M);
    for (int i = 0; i < M; ++i) r[i] = rho(g.sites.row(i).transpose());
    g.state.k0 = 1.0;
    g.state.k1 = r;
    if (g.n_max >= 2)
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j) g.state.k2(i, j) = r[i] * r[j];
    if (g.n_max >= 3)
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int l = 0; l < M; ++l)
                    g.state.k3[g.k3_index(i, j, l)] = r[i] * r[j] * r[l];
}

GridState axpy(const GridState& x, const GridState& y, double c) {
    GridState out;
    out.k0 = x.k0 + c * y.k0;
    out.k1 = x.k1 + c * y.k1;
    if (x.k2.size() > 0) out.k2 = x.k2 + c * y.k2;
    if (x.k3.size() > 0) out.k3 = x.k3 + c * y.k3;
    return out;
}

void scale(GridState& x, double c) {
    x.k0 *= c;
    x.k1 *= c;
    if (x.k2.size() > 0) x.k2 *= c;
    if (x.k3.size() > 0) x.k3 *= c;
}

HierarchySolver::HierarchySolver(const ModelSpec& spec, const CorrelationGrid& grid,
                                 const SolverConfig& config)
    : spec_(spec), grid_(grid), config_(config) {
    consts_ = derive_constants(spec_, /*allow_decoupled=*/true);
    const int M = grid_.site_count();
    const Window w = spec_.box();

    b_sites_.resize(M);
    Eigen::ArrayXd m_sites(M);
    Eigen::ArrayXd psis(M);
    for (int i = 0; i < M; ++i) {
        const Vec x = grid_.sites.row(i).transpose();
        psis[i] = psi_sigma(x, spec_.sigma);
        b_sites_[i] = spec_.b(x) * psis[i];
        m_sites[i] = spec_.m(x) * psis[i];
    }

    a_pairs_.resize(M, M);
    Vec diff(w.dim);
    for (int i = 0; i < M; ++i) {
        for (int j = 0; j < M; ++j) {
            w.min_image(grid_.sites.row(i).data(), grid_.sites.row(j).data(),
                        diff.data());
            a_pairs_(i, j) = spec_.a(diff) * psis[i] * psis[j];
        }
    }
    // Coupling weights use the cell average of a rather than its nodal value,
    // so discontinuous kernels (top hat) contribute their exact mass and
    // sum_s wa_(s, i) reproduces <a> on every column.
    wa_.resize(M, M);
    const double h = w.width() / grid_.axis_points;
    for (int s = 0; s < M; ++s)
        for (int i = 0; i < M; ++i) {
            w.min_image(grid_.sites.row(s).data(), grid_.sites.row(i).data(),
                        diff.data());
            double cell_avg;
            if (w.dim == 1) {
                cell_avg = kernel_cell_average_1d(spec_.a, diff[0], h);
            } else {
                // Micro-midpoint subsample of the cell.
                const int sub = 4;
                double acc = 0.0;
                Vec probe(w.dim);
                std::vector<int> idx(w.dim, 0);
                const long cells = static_cast<long>(std::pow(sub, w.dim));
                for (long c = 0; c < cells; ++c) {
                    long rem = c;
                    for (int k = 0; k < w.dim; ++k) {
                        const int ci = static_cast<int>(rem % sub);
                        rem /= sub;
                        probe[k] = diff[k] + (-0.5 + (ci + 0.5) / sub) * h;
                    }
                    acc += spec_.a(probe);
                }
                cell_avg = acc / static_cast<double>(cells);
            }
            wa_(s, i) = grid_.site_weights[s] * cell_avg * psis[s] * psis[i];
        }
    wa_colsum_ = wa_.colwise().sum();

    energy_.e1 = m_sites;
    energy_.e2.resize(M, M);
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            energy_.e2(i, j) = m_sites[i] + m_sites[j] + a_pairs_(i, j) + a_pairs_(j, i);
    double emax = energy_.e1.maxCoeff();
    if (grid_.n_max >= 2) emax = std::max(emax, energy_.e2.maxCoeff());
    if (grid_.n_max >= 3) {
        energy_.e3.resize(static_cast<long>(M) * M * M);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int l = 0; l < M; ++l) {
                    const double e =
                        m_sites[i] + m_sites[j] + m_sites[l] +
                        a_pairs_(i, j) + a_pairs_(j, i) + a_pairs_(i, l) +
                        a_pairs_(l, i) + a_pairs_(j, l) + a_pairs_(l, j);
                    energy_.e3[grid_.k3_index(i, j, l)] = e;
                }
        emax = std::max(emax, energy_.e3.maxCoeff());
    }
    energy_.max_energy = emax;
}

double HierarchySolver::closure_cap(double t) const {
    return std::pow(config_.kappa0 + consts_.norm_b * t, grid_.n_max + 1);
}

GridState HierarchySolver::apply_Ldelta(const GridState& k, double t) const {
    const int M = grid_.site_count();
    const int n_max = grid_.n_max;
    GridState d;
    d.k0 = 0.0;  // no action on the empty configuration

    const double cap = config_.closure == Closure::RuelleCap ? closure_cap(t) : 0.0;

    // d k1(i) = b_i k0 - m_i k1(i) - sum_s w_s a(s,i) k2(s,i)
    d.k1 = b_sites_ * k.k0 - energy_.e1 * k.k1;
    if (n_max >= 2) {
        d.k1 -= (wa_ * k.k2).colwise().sum().transpose();
    } else {
        d.k1 -= cap * wa_colsum_;
    }

    if (n_max >= 2) {
        // d k2(i,j) = b_i k1(j) + b_j k1(i) - E2 k2 - coupling to k3
        Eigen::ArrayXXd birth =
            (b_sites_.matrix() * k.k1.matrix().transpose()).array();
        d.k2 = birth.transpose() + birth - energy_.e2 * k.k2;
        if (n_max >= 3) {
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j) {
                    double c = 0.0;
                    for (int l = 0; l < M; ++l)
                        c += (wa_(l, i) + wa_(l, j)) * k.k3[grid_.k3_index(i, j, l)];
                    d.k2(i, j) -= c;
                }
        } else {
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    d.k2(i, j) -= cap * (wa_colsum_[i] + wa_colsum_[j]);
        }
    }

    if (n_max >= 3) {
        d.k3.resize(k.k3.size());
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int l = 0; l < M; ++l) {
                    const long idx = grid_.k3_index(i, j, l);
                    double v = b_sites_[i] * k.k2(j, l) + b_sites_[j] * k.k2(i, l) +
                               b_sites_[l] * k.k2(i, j);
                    v -= energy_.e3[idx] * k.k3[idx];
                    // k4 closed by the cap
                    v -= cap * (wa_colsum_[i] + wa_colsum_[j] + wa_colsum_[l]);
                    d.k3[idx] = v;
                }
    }
    return d;
}

GridState HierarchySolver::apply_B(const GridState& k) const {
    // B = L^Delta + E; i.e. the birth and coupling parts only. The closure
    // feed-through is handled separately as a time-dependent source.
    const int M = grid_.site_count();
    const int n_max = grid_.n_max;
    GridState d;
    d.k0 = 0.0;
    d.k1 = b_sites_ * k.k0;
    if (n_max >= 2) {
        d.k1 -= (wa_ * k.k2).colwise().sum().transpose();
        Eigen::ArrayXXd birth =
            (b_sites_.matrix() * k.k1.matrix().transpose()).array();
        d.k2 = birth.transpose() + birth;
        if (n_max >= 3) {
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j) {
                    double c = 0.0;
                    for (int l = 0; l < M; ++l)
                        c += (wa_(l, i) + wa_(l, j)) * k.k3[grid_.k3_index(i, j, l)];
                    d.k2(i, j) -= c;
                }
            d.k3.resize(k.k3.size());
            for (int i = 0; i < M; ++i)
                for (int j = 0; j < M; ++j)
                    for (int l = 0; l < M; ++l) {
                        const long idx = grid_.k3_index(i, j, l);
                        d.k3[idx] = b_sites_[i] * k.k2(j, l) +
                                    b_sites_[j] * k.k2(i, l) +
                                    b_sites_[l] * k.k2(i, j);
                    }
        }
    }
    return d;
}

GridState HierarchySolver::closure_source(double t) const {
    const int M = grid_.site_count();
    const int n_max = grid_.n_max;
    GridState s;
    s.k0 = 0.0;
    s.k1 = Eigen::ArrayXd::Zero(M);
    if (n_max >= 2) s.k2 = Eigen::ArrayXXd::Zero(M, M);
    if (n_max >= 3) s.k3 = Eigen::ArrayXd::Zero(static_cast<long>(M) * M * M);
    if (config_.closure != Closure::RuelleCap) return s;
    const double cap = closure_cap(t);
    if (n_max == 1) {
        s.k1 = -cap * wa_colsum_;
    } else if (n_max == 2) {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                s.k2(i, j) = -cap * (wa_colsum_[i] + wa_colsum_[j]);
    } else {
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < M; ++j)
                for (int l = 0; l < M; ++l)
                    s.k3[grid_.k3_index(i, j, l)] =
                        -cap * (wa_colsum_[i] + wa_colsum_[j] + wa_colsum_[l]);
    }
    return s;
}

GridState HierarchySolver::multiply_semigroup(const GridState& k, double t) const {
    GridState out;
    out.k0 = k.k0;  // E(empty) = 0
    out.k1 = (-t * energy_.e1).exp() * k.k1;
    if (k.k2.size() > 0) out.k2 = (-t * energy_.e2).exp() * k.k2;
    if (k.k3.size() > 0) out.k3 = (-t * energy_.e3).exp() * k.k3;
    return out;
}

HierarchySolver::Trajectory HierarchySolver::integrate_rk4(
    const GridState& k0, double t_begin,
    const std::vector<double>& output_times) const {
    const double dt = config_.dt;
    if (!(dt > 0.0)) throw DomainError("integrate_rk4: dt must be > 0");
    const double stability = dt * energy_.max_energy;
    if (stability > 0.5)
        throw DomainError("integrate_rk4: dt too large for the decay rates; "
                          "dt * max E = " + std::to_string(stability) +
                          " > 0.5, use dt <= " +
                          std::to_string(0.5 / energy_.max_energy));

    Trajectory traj;
    GridState k = k0;
    double t = t_begin;

    auto rk4_step = [&](double h) {
        const GridState f1 = apply_Ldelta(k, t);
        const GridState f2 = apply_Ldelta(axpy(k, f1, 0.5 * h), t + 0.5 * h);
        const GridState f3 = apply_Ldelta(axpy(k, f2, 0.5 * h), t + 0.5 * h);
        const GridState f4 = apply_Ldelta(axpy(k, f3, h), t + h);
        GridState incr = f1;
        incr = axpy(incr, f2, 2.0);
        incr = axpy(incr, f3, 2.0);
        incr = axpy(incr, f4, 1.0);
        k = axpy(k, incr, h / 6.0);
        t += h;
    };

    auto record = [&](double time) {
        traj.times.push_back(time);
        traj.states.push_back(k);
        if (config_.alpha_track)
            traj.norm_track.push_back(norm_alpha(k, grid_.n_max, *config_.alpha_track));
    };

    for (double t_out : output_times) {
        if (t_out < t - 1e-12)
            throw DomainError("integrate_rk4: output times must be ascending");
        while (t + dt <= t_out + 1e-12) rk4_step(std::min(dt, t_out - t));
        if (t_out - t > 1e-12) rk4_step(t_out - t);
        t = t_out;
        record(t_out);
    }
    return traj;
}

GridState HierarchySolver::ovsyannikov_series(const GridState& k0, double t,
                                              double alpha, double alpha_prime,
                                              int l_max) const {
    const double horizon = time_horizon(alpha, alpha_prime, consts_);
    if (!(t < horizon))
        throw DomainError("ovsyannikov_series: t = " + std::to_string(t) +
                          " is not below the horizon T(alpha, alpha') = " +
                          std::to_string(horizon));
    if (l_max < 0) throw DomainError("ovsyannikov_series: l_max must be >= 0");
    if (l_max > 12)
        throw SizeError("ovsyannikov_series: l_max > 12 exceeds the memo key budget");

    const int q = config_.series_order;
    if (q < 1 || q > 15)
        throw DomainError("ovsyannikov_series: series order must be in [1, 15]");
    const quad::Rule1D ref = quad::gauss_legendre(q);
    // Nodes of [0, s] are s * c_i; products of the c's commute, so states are
    // keyed by the multiset of node indices consumed along the path.
    Eigen::ArrayXd c = 0.5 * (ref.nodes + 1.0);
    Eigen::ArrayXd w = 0.5 * ref.weights;

    struct Memo {
        GridState value;
        GridState b_image;
    };
    std::unordered_map<std::uint64_t, Memo> memo;

    auto canonical_time = [&](const std::vector<int>& key) {
        double s = t;
        for (int i : key) s *= c[i];
        return s;
    };
    auto pack = [&](int level, const std::vector<int>& key) {
        std::uint64_t h = static_cast<std::uint64_t>(level);
        for (int i : key) h = (h << 4) | static_cast<std::uint64_t>(i + 1);
        return h;
    };

    std::function<const Memo&(int, std::vector<int>&)> eval =
        [&](int level, std::vector<int>& key) -> const Memo& {
        const std::uint64_t id = pack(level, key);
        auto it = memo.find(id);
        if (it != memo.end()) return it->second;

        const double s = canonical_time(key);
        GridState acc = multiply_semigroup(k0, s);
        if (level > 0) {
            for (int i = 0; i < q; ++i) {
                const double u = s * c[i];
                // Child key: insert index keeping the key sorted.
                std::vector<int> child = key;
                child.insert(std::upper_bound(child.begin(), child.end(), i), i);
                const Memo& ch = eval(level - 1, child);
                GridState integrand = ch.b_image;
                if (config_.closure == Closure::RuelleCap)
                    integrand = axpy(integrand, closure_source(u), 1.0);
                acc = axpy(acc, multiply_semigroup(integrand, s - u), s * w[i]);
            }
        }
        Memo entry{std::move(acc), {}};
        entry.b_image = apply_B(entry.value);
        auto [pos, inserted] = memo.emplace(id, std::move(entry));
        return pos->second;
    };

    std::vector<int> root;
    return eval(l_max, root).value;
}

double norm_alpha(const GridState& s, int n_max, double alpha) {
    double best = std::abs(s.k0);
    best = std::max(best, s.k1.abs().maxCoeff() * std::exp(-alpha));
    if (n_max >= 2 && s.k2.size() > 0)
        best = std::max(best, s.k2.abs().maxCoeff() * std::exp(-2.0 * alpha));
    if (n_max >= 3 && s.k3.size() > 0)
        best = std::max(best, s.k3.abs().maxCoeff() * std::exp(-3.0 * alpha));
    return best;
}

double norm_alpha(const CorrelationGrid& g, double alpha) {
    return norm_alpha(g.state, g.n_max, alpha);
}

double g_norm_alpha(const TabulatedG& g, double alpha, const Window& w,
                    const QuadratureSpec& quad) {
    if (g.n_max() > 4)
        throw SizeError("g_norm_alpha: components beyond n = 4 are not supported");
    double total = std::abs(g.g0);
    double fact = 1.0;
    for (int n = 1; n <= g.n_max(); ++n) {
        fact *= n;
        const int axes = w.dim * n;
        const auto& comp = g.components[n - 1];
        Configuration pts(w.dim);
        pts.coords.resize(static_cast<size_t>(n) * w.dim);
        const double integral = quad::integrate_box(
            [&](const double* x) {
                std::copy(x, x + axes, pts.coords.begin());
                return std::abs(comp(pts));
            },
            axes, -w.half_width, w.half_width, quad.order, quad.panels);
        total += std::exp(n * alpha) * integral / fact;
    }
    return total;
}

}  // namespace lbd
