#pragma once

#include <functional>
#include <string>

#include "lbd/geometry.hpp"

namespace lbd {

// ---------------------------------------------------------------------------
// Rate kernels b (birth intensity), m (intrinsic mortality) and a
// (competition). All built-in families are radial, hence even, bounded and
// radially nonincreasing.
// ---------------------------------------------------------------------------

enum class KernelFamily { Constant, GaussianBump, TopHat };

struct KernelSpec {
    KernelFamily family = KernelFamily::Constant;
    double amplitude = 0.0;  // level for Constant
    double scale = 0.0;      // width (GaussianBump) or radius (TopHat)

    // Value at radial distance r >= 0.
    double radial(double r) const;
    double operator()(PointRef x) const { return radial(x.norm()); }
    double at_origin() const { return radial(0.0); }
    bool is_zero() const { return amplitude == 0.0; }
    bool is_constant() const { return family == KernelFamily::Constant; }

    void validate(const std::string& name) const;
};

std::string to_string(KernelFamily f);

struct ModelSpec {
    int dim = 1;
    double window = 1.0;  // half-width W of the periodic box [-W, W)^d
    KernelSpec b;         // birth
    KernelSpec m;         // mortality
    KernelSpec a;         // competition
    double sigma = 0.0;   // tail regularization, in [0, 1]

    Window box() const { return Window{dim, window}; }
    bool homogeneous() const { return b.is_constant() && m.is_constant() && sigma == 0.0; }
    void validate() const;
    // Additionally requires a(0) > 0. The a == 0 model is accepted elsewhere
    // as the decoupled diagnostic limit.
    void validate_strict() const;
};

// psi(x) = 1 / (1 + |x|^{d+1}); takes values in (0, 1].
double psi(PointRef x);
double psi_radial(double r, int dim);

// psi_sigma(x) = 1 / (1 + sigma |x|^{d+1}); identically 1 at sigma = 0.
double psi_sigma(PointRef x, double sigma);
double psi_sigma_radial(double r, int dim, double sigma);

// Suprema and window integrals derived from a model.
struct DerivedConstants {
    double norm_a = 0.0;       // sup over the window of a / psi
    double norm_b = 0.0;       // sup b
    double norm_m = 0.0;       // sup m
    double mean_a = 0.0;       // integral of a over the window
    double mean_psi = 0.0;     // integral of psi over the window
    double mean_b_sigma = 0.0; // integral of b * psi_sigma over the window
};

// Closed forms where the family admits them, otherwise grid search with three
// refinement passes (suprema) or composite Gauss-Legendre panels (integrals).
// With allow_decoupled = false an identically-zero competition kernel is a
// ModelError; the diagnostic a == 0 limit opts in explicitly.
DerivedConstants derive_constants(const ModelSpec& spec, bool allow_decoupled = false);

// Integral of `k` over the window (closed form or quadrature).
double kernel_window_integral(const KernelSpec& k, const Window& w);
// Integral of k(x) * psi_sigma(x) over the window.
double kernel_window_integral_sigma(const KernelSpec& k, const Window& w, double sigma);
// Integral of psi over the window.
double psi_window_integral(const Window& w);

// Survival factor q_t(x) = exp(-m(x) t) and the accumulated-birth density
// rho_t(x) = (1 - q_t(x)) b(x)/m(x), with the m(x) = 0 branch b(x) t.
struct QtRho {
    double q;
    double rho;
};
QtRho qt_rho(PointRef x, double t, const ModelSpec& spec);

// Existence horizon of the hierarchy series between the scales alpha' < alpha:
// (alpha - alpha') / (||b|| e^{-alpha'} + <a> e^{alpha}).
double time_horizon(double alpha, double alpha_prime, const DerivedConstants& c);

// Polynomial envelope l_a(x) = 1 + (1 + |x|)^{d+1} appearing in the domination
// a(x - y) <= ||a|| psi(y) l_a(x).
double ell_a(PointRef x);

// Maximum of a radial profile over [0, r_max]: dense scan plus three
// refinement passes, relative tolerance ~1e-6.
double radial_max(const std::function<double(double)>& f, double r_max);

// Average of k over the interval [center - h/2, center + h/2] (closed forms;
// exact also across the top-hat jump).
double kernel_cell_average_1d(const KernelSpec& k, double center, double h);

}  // namespace lbd
