#pragma once

#include <optional>
#include <vector>

#include "lbd/config_calculus.hpp"
#include "lbd/geometry.hpp"
#include "lbd/kernels.hpp"

namespace lbd {

// ---------------------------------------------------------------------------
// Grid-discretized truncation of the correlation-function hierarchy
//   d/dt k(eta) = sum_x b(x) k(eta\x) - E(eta) k(eta)
//                 - int (sum_y a(x-y)) k(eta u x) dx,
// closed at order n_max by either zero or the type-growth cap. Spatial nodes
// are Gauss-Legendre points so the coupling integral is the grid's own rule.
// ---------------------------------------------------------------------------

enum class Closure { Zero, RuelleCap };

struct SolverConfig {
    double dt = 1e-3;
    Closure closure = Closure::RuelleCap;
    double kappa0 = 0.0;        // initial type, feeds the RuelleCap surrogate
    int series_order = 8;       // Gauss-Legendre order per series level
    std::optional<double> alpha_track;  // record ||k_t||_alpha when set
};

// Values of the truncated family {k^(n)} on the grid sites.
struct GridState {
    double k0 = 1.0;
    Eigen::ArrayXd k1;    // M
    Eigen::ArrayXXd k2;   // M x M, symmetric (empty when n_max < 2)
    Eigen::ArrayXd k3;    // M^3 flat, index (i*M + j)*M + l (empty unless n_max = 3)
};

struct CorrelationGrid {
    int n_max = 2;
    Window window;
    int axis_points = 9;                // G
    Eigen::ArrayXd axis_nodes;          // G ascending nodes per axis
    Eigen::ArrayXd axis_weights;
    Eigen::MatrixXd sites;              // M x dim
    Eigen::ArrayXd site_weights;        // M
    GridState state;

    int site_count() const { return static_cast<int>(sites.rows()); }
    double spacing() const { return window.width() / axis_points; }
    long k3_index(int i, int j, int l) const {
        const long M = site_count();
        return (static_cast<long>(i) * M + j) * M + l;
    }
};

// Grid skeleton with Gauss-Legendre sites over the window.
CorrelationGrid make_grid(const Window& w, int axis_points, int n_max);

// k^(n) = kappa^n on every node (homogeneous Poisson state).
void fill_poisson(CorrelationGrid& g, double kappa);
// Product state k^(n)(x_1..x_n) = prod rho(x_i).
void fill_product(CorrelationGrid& g, const ScalarField& rho);

struct EnergyCache {
    Eigen::ArrayXd e1;    // M
    Eigen::ArrayXXd e2;   // M x M
    Eigen::ArrayXd e3;    // flat, filled when n_max = 3
    double max_energy = 0.0;
};

class HierarchySolver {
  public:
    HierarchySolver(const ModelSpec& spec, const CorrelationGrid& grid,
                    const SolverConfig& config);

    const EnergyCache& energy() const { return energy_; }
    const SolverConfig& config() const { return config_; }
    const DerivedConstants& constants() const { return consts_; }

    // Right-hand side of the truncated hierarchy at time t (the closure cap
    // is time-dependent).
    GridState apply_Ldelta(const GridState& k, double t) const;

    // Classical fourth-order stepping, landing exactly on the output times.
    struct Trajectory {
        std::vector<double> times;
        std::vector<GridState> states;
        std::vector<double> norm_track;  // ||k_t||_alpha when configured
    };
    Trajectory integrate_rk4(const GridState& k0, double t_begin,
                             const std::vector<double>& output_times) const;

    // Truncated interaction-picture series
    //   K_L(t) = S(t) k0 + int_0^t S(t-u) [B K_{L-1}(u) + src(u)] du
    // evaluated with nested Gauss-Legendre rules; requires t below the
    // horizon T(alpha, alpha').
    GridState ovsyannikov_series(const GridState& k0, double t, double alpha,
                                 double alpha_prime, int l_max) const;

    GridState multiply_semigroup(const GridState& k, double t) const;  // e^{-tE} k

  private:
    GridState apply_B(const GridState& k) const;            // L^Delta + E
    GridState closure_source(double t) const;               // RuelleCap feed-through
    double closure_cap(double t) const;

    ModelSpec spec_;
    const CorrelationGrid& grid_;
    SolverConfig config_;
    DerivedConstants consts_;
    EnergyCache energy_;
    Eigen::ArrayXd b_sites_;     // b_sigma at sites
    Eigen::ArrayXXd a_pairs_;    // a_sigma between sites (minimum image)
    Eigen::ArrayXXd wa_;         // site_weights(s) * a_pairs(s, i)
    Eigen::ArrayXd wa_colsum_;   // sum_s wa_(s, i)
};

// sup-type norm: max_n (max node |k^(n)|) e^{-alpha n}, n = 0..n_max.
double norm_alpha(const CorrelationGrid& g, double alpha);
double norm_alpha(const GridState& s, int n_max, double alpha);

// Weighted L1 norm |G|_alpha = |G(empty)| + sum e^{n alpha}/n! int |G^(n)|.
double g_norm_alpha(const TabulatedG& g, double alpha, const Window& w,
                    const QuadratureSpec& quad = {});

// Linear combinations used by the integrators.
GridState axpy(const GridState& x, const GridState& y, double c);  // x + c*y
void scale(GridState& x, double c);

}  // namespace lbd
