#include "lbd/config_calculus.hpp"

#include <cmath>
#include <string>

#include "lbd/errors.hpp"
#include "lbd/kernels.hpp"
#include "lbd/quadrature.hpp"

namespace lbd {

double TabulatedG::eval(const Configuration& eta) const {
    const int n = eta.size();
    if (n == 0) return g0;
    if (n > n_max()) return 0.0;
    return components[n - 1](eta);
}

TabulatedG TabulatedG::indicator_empty() {
    TabulatedG g;
    g.g0 = 1.0;
    return g;
}

TabulatedG TabulatedG::product_of(const ScalarField& theta, int order) {
    TabulatedG g;
    g.g0 = 1.0;
    for (int n = 1; n <= order; ++n) {
        g.components.push_back([theta](const Configuration& eta) {
            double p = 1.0;
            for (int i = 0; i < eta.size(); ++i) p *= theta(eta.point(i));
            return p;
        });
    }
    return g;
}

double e_product(const Configuration& eta, const QPotential& q) {
    double p = 1.0;
    for (int i = 0; i < eta.size(); ++i) p *= q(eta.point(i));
    return p;
}

double k_transform(const TabulatedG& g, const Configuration& gamma) {
    const int n = gamma.size();
    if (n > 20)
        throw SizeError("k_transform: |gamma| = " + std::to_string(n) +
                        " exceeds the enumeration guard (20)");
    double s = 0.0;
    Configuration sub(gamma.dim);
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
        sub.clear();
        for (int i = 0; i < n; ++i)
            if (mask & (1u << i)) sub.add(gamma.point_ptr(i));
        s += g.eval(sub);
    }
    return s;
}

double star_product(const TabulatedG& g1, const TabulatedG& g2,
                    const Configuration& eta) {
    const int n = eta.size();
    if (n > 12)
        throw SizeError("star_product: |eta| = " + std::to_string(n) +
                        " exceeds the enumeration guard (12)");
    const unsigned full = (1u << n) - 1u;
    double s = 0.0;
    Configuration u(eta.dim), rest(eta.dim);
    for (unsigned m1 = 0; m1 <= full; ++m1) {
        const unsigned comp = full & ~m1;
        // Iterate sub-masks of the complement of m1.
        unsigned m2 = comp;
        while (true) {
            u.clear();
            rest.clear();
            for (int i = 0; i < n; ++i) {
                const unsigned bit = 1u << i;
                if ((m1 & bit) || (m2 & bit)) u.add(eta.point_ptr(i));
                if (!(m2 & bit)) rest.add(eta.point_ptr(i));
            }
            s += g1.eval(u) * g2.eval(rest);
            if (m2 == 0) break;
            m2 = (m2 - 1) & comp;
        }
    }
    return s;
}

double lp_integral(const TabulatedG& g, int n_max, const Window& w,
                   const QuadratureSpec& quad) {
    if (n_max > 4)
        throw SizeError("lp_integral: n_max = " + std::to_string(n_max) +
                        " exceeds the tensor-quadrature guard (4)");
    double total = g.g0;
    double fact = 1.0;
    for (int n = 1; n <= std::min(n_max, g.n_max()); ++n) {
        fact *= n;
        const int axes = w.dim * n;
        const auto& comp = g.components[n - 1];
        Configuration pts(w.dim);
        pts.coords.resize(static_cast<size_t>(n) * w.dim);
        const double integral = quad::integrate_box(
            [&](const double* x) {
                std::copy(x, x + axes, pts.coords.begin());
                return comp(pts);
            },
            axes, -w.half_width, w.half_width, quad.order, quad.panels);
        total += integral / fact;
    }
    return total;
}

unsigned long long factorial_count(const Configuration& gamma, int n,
                                   const Box& region) {
    if (n < 1) throw DomainError("factorial_count: n must be >= 1");
    const int c = gamma.count_in(region);
    if (n > c) return 0;
    unsigned long long r = 1;
    for (int k = 0; k < n; ++k) r *= static_cast<unsigned long long>(c - k);
    return r;
}

namespace {

// Edges of K_n in a fixed order, n <= 3.
std::vector<std::pair<int, int>> complete_edges(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
    return e;
}

}  // namespace

ExpansionSides subgraph_expansion_check(
    const std::function<double(const Configuration&)>& g,
    const Configuration& gamma, int n) {
    if (n != 2 && n != 3)
        throw DomainError("subgraph_expansion_check: n must be 2 or 3");
    const int sz = gamma.size();
    if (sz > 8)
        throw SizeError("subgraph_expansion_check: |gamma| > 8");

    ExpansionSides out{0.0, 0.0};
    Configuration args(gamma.dim);

    // Distinct-index sum.
    std::vector<int> idx(n, 0);
    std::function<void(int)> rec_lhs = [&](int depth) {
        if (depth == n) {
            args.clear();
            for (int k = 0; k < n; ++k) args.add(gamma.point_ptr(idx[k]));
            out.lhs += g(args);
            return;
        }
        for (int i = 0; i < sz; ++i) {
            bool used = false;
            for (int k = 0; k < depth; ++k)
                if (idx[k] == i) used = true;
            if (used) continue;
            idx[depth] = i;
            rec_lhs(depth + 1);
        }
    };
    rec_lhs(0);

    // Signed sum over spanning subgraphs: identify the arguments inside each
    // connected component, then sum over all (repeating) index tuples.
    const auto edges = complete_edges(n);
    const int ne = static_cast<int>(edges.size());
    for (unsigned mask = 0; mask < (1u << ne); ++mask) {
        // Union-find over n vertices.
        std::vector<int> parent(n);
        for (int i = 0; i < n; ++i) parent[i] = i;
        std::function<int(int)> find = [&](int v) {
            while (parent[v] != v) v = parent[v] = parent[parent[v]];
            return v;
        };
        int l_edges = 0;
        for (int e = 0; e < ne; ++e)
            if (mask & (1u << e)) {
                ++l_edges;
                const int ra = find(edges[e].first), rb = find(edges[e].second);
                if (ra != rb) parent[ra] = rb;
            }
        std::vector<int> comp(n), roots;
        for (int v = 0; v < n; ++v) {
            const int r = find(v);
            int c = -1;
            for (size_t k = 0; k < roots.size(); ++k)
                if (roots[k] == r) c = static_cast<int>(k);
            if (c < 0) {
                c = static_cast<int>(roots.size());
                roots.push_back(r);
            }
            comp[v] = c;
        }
        const int m = static_cast<int>(roots.size());
        const double sign = (l_edges % 2 == 0) ? 1.0 : -1.0;

        std::vector<int> ys(m, 0);
        double term = 0.0;
        std::function<void(int)> rec_rhs = [&](int depth) {
            if (depth == m) {
                args.clear();
                for (int v = 0; v < n; ++v) args.add(gamma.point_ptr(ys[comp[v]]));
                term += g(args);
                return;
            }
            for (int i = 0; i < sz; ++i) {
                ys[depth] = i;
                rec_rhs(depth + 1);
            }
        };
        if (sz > 0) rec_rhs(0);
        out.rhs += sign * term;
    }
    return out;
}

double f_theta(const Configuration& gamma, const ScalarField& theta) {
    double p = 1.0;
    for (int i = 0; i < gamma.size(); ++i) p *= 1.0 + theta(gamma.point(i));
    return p;
}

double psi_tau(const Configuration& gamma, const std::vector<ScalarField>& thetas,
               double tau) {
    if (!(tau > 0.0 && tau <= 0.5))
        throw DomainError("psi_tau: tau must lie in (0, 1/2]");
    double p = 1.0;
    for (const auto& theta : thetas) {
        double phi = 0.0;
        for (int i = 0; i < gamma.size(); ++i) phi += theta(gamma.point(i));
        p *= phi / (1.0 + tau * phi);
    }
    return p;
}

double f_tilde_v(const Configuration& gamma, const ScalarField& v) {
    double s = 0.0;
    for (int i = 0; i < gamma.size(); ++i) {
        const auto x = gamma.point(i);
        s += v(x) * psi(x);
    }
    return std::exp(-s);
}

}  // namespace lbd
