#pragma once

#include <string>
#include <vector>

#include "lbd/estimator.hpp"
#include "lbd/hierarchy.hpp"
#include "lbd/kernels.hpp"

namespace lbd {

// ---------------------------------------------------------------------------
// Quantitative checks of the model's provable bounds against simulation and
// solver output. Verdict policy: PASS iff lhs <= rhs + 3 SE + tol at every
// checked row; INCONCLUSIVE when the noise exceeds half the comparison scale
// (by default |rhs|). Equality-mode checks also require
// lhs >= rhs - 3 SE - tol.
// ---------------------------------------------------------------------------

enum class Verdict { Pass, Fail, Inconclusive };

std::string to_string(Verdict v);

struct BoundRow {
    std::string label;
    double time = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double se = 0.0;
    double scale = 0.0;  // reference scale for the INCONCLUSIVE test
};

struct BoundCheck {
    std::string name;
    std::string policy;
    double tolerance = 1e-9;
    bool equality = false;  // two-sided comparison
    std::vector<BoundRow> rows;
    Verdict verdict = Verdict::Inconclusive;

    double slack(const BoundRow& r) const { return r.rhs - r.lhs; }
};

// Applies the 3 SE policy to the collected rows.
Verdict evaluate(BoundCheck& check);

// k^(n)_t <= (kappa0 + ||b|| t)^n on the density and on every pair bin.
BoundCheck check_type_growth(const BinnedCorrelation& corr, double kappa0,
                             const DerivedConstants& consts);

// mu_t(F^theta) <= pi_{rho_t}(F^theta) * pi_{q_t kappa0}(F^theta) for a
// homogeneous Poisson initial state; an equality when a == 0.
BoundCheck check_convolution_bound(const FunctionalSeries& ftheta,
                                   const ModelSpec& spec,
                                   const KernelSpec& theta, double kappa0);

// Moment saturation: the running maximum of mean N (and of the second
// factorial moment) is attained before `saturation_fraction` of the horizon,
// and the long-run density is within +-25% of the mean-field fixed point.
BoundCheck check_global_moments(const MomentSeries& moments,
                                const ModelSpec& spec,
                                const DerivedConstants& consts,
                                double saturation_fraction = 0.9,
                                double mean_field_tolerance = 0.25);

// |k_hat - k_solver| <= 3 SE + |k_zero - k_cap| nodewise (closure spread as
// the truncation uncertainty band).
BoundCheck cross_validate(const BinnedCorrelation& corr,
                          const CorrelationGrid& grid,
                          const HierarchySolver::Trajectory& solved_zero,
                          const HierarchySolver::Trajectory& solved_cap);

// Observable per (sigma, time) plus the monotone-trend summary.
enum class SweepObservable { Density, TemperednessPhi };

struct SweepTable {
    SweepObservable observable = SweepObservable::Density;
    std::vector<double> sigmas;
    std::vector<double> times;
    // value[sigma_index][time_index]
    std::vector<std::vector<double>> value;
    std::vector<bool> monotone_in_sigma;  // per time, of |obs(s) - obs(0)|
};

SweepTable sigma_sweep(const ModelSpec& base, const InitialLaw& law,
                       const RunOptions& opts, const std::vector<double>& sigmas,
                       SweepObservable observable = SweepObservable::Density);

}  // namespace lbd
