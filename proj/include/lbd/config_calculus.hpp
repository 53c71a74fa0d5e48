#pragma once

#include <functional>
#include <vector>

#include "lbd/geometry.hpp"

namespace lbd {

using ScalarField = std::function<double(PointRef)>;

// Function on finite configurations given by its components G^{(n)}:
// G(empty) = g0, G({x_1..x_n}) = components[n-1] applied to the points, and 0
// for n beyond the tabulated range. Components must be symmetric under
// argument permutation; this is spot-checked by the tests, not enforced here.
struct TabulatedG {
    double g0 = 0.0;
    std::vector<std::function<double(const Configuration&)>> components;

    int n_max() const { return static_cast<int>(components.size()); }
    double eval(const Configuration& eta) const;

    static TabulatedG indicator_empty();
    // G^{(n)}(x_1..x_n) = prod theta(x_i) for n <= order.
    static TabulatedG product_of(const ScalarField& theta, int order);
};

// Measurable q: X -> [0, 1] used for thinning weights.
struct QPotential {
    ScalarField q;
    double operator()(PointRef x) const { return q(x); }
};

// e(eta; q) = prod_{x in eta} q(x); 1 on the empty configuration.
double e_product(const Configuration& eta, const QPotential& q);

// (KG)(gamma) = sum of G over all sub-multisets of gamma (2^|gamma| terms).
// Guarded at |gamma| <= 20.
double k_transform(const TabulatedG& g, const Configuration& gamma);

// (G1 * G2)(eta) = sum_{xi1 subset eta} sum_{xi2 subset eta \ xi1}
//                  G1(xi1 u xi2) G2(eta \ xi2); satisfies
// K(G1 * G2) = KG1 . KG2. Guarded at |eta| <= 12.
double star_product(const TabulatedG& g1, const TabulatedG& g2,
                    const Configuration& eta);

struct QuadratureSpec {
    int order = 32;
    int panels = 1;
};

// Lebesgue-Poisson integral over the window:
// G(empty) + sum_{n=1}^{n_max} (1/n!) int_{W^n} G^{(n)}.
double lp_integral(const TabulatedG& g, int n_max, const Window& w,
                   const QuadratureSpec& quad = {});

// Number of ordered n-tuples of pairwise-distinct indices of gamma whose
// points all lie in `region` (the n-th factorial counting measure of the
// product region).
unsigned long long factorial_count(const Configuration& gamma, int n,
                                   const Box& region);

// Both sides of the spanning-subgraph expansion of the distinct-index sum,
// n = 2 or 3. `g` takes an n-point configuration.
struct ExpansionSides {
    double lhs;  // distinct-index enumeration
    double rhs;  // signed sum over spanning subgraphs of K_n
};
ExpansionSides subgraph_expansion_check(
    const std::function<double(const Configuration&)>& g,
    const Configuration& gamma, int n);

// F^theta(gamma) = prod (1 + theta(x)).
double f_theta(const Configuration& gamma, const ScalarField& theta);

// Psi^vartheta_tau(gamma) = prod_theta Phi/(1 + tau Phi) with
// Phi = sum_x theta(x); tau in (0, 1/2]. Empty vartheta gives 1.
double psi_tau(const Configuration& gamma, const std::vector<ScalarField>& thetas,
               double tau);

// F~_v(gamma) = exp(- sum v(x) psi(x)), values in (0, 1].
double f_tilde_v(const Configuration& gamma, const ScalarField& v);

}  // namespace lbd
