#pragma once

#include <string>
#include <vector>

#include "lbd/config_calculus.hpp"
#include "lbd/geometry.hpp"
#include "lbd/simulator.hpp"

namespace lbd {

// ---------------------------------------------------------------------------
// Ensemble estimators: factorial moments, binned correlation functions and
// multiplicative functionals, each with standard errors across replicas.
// ---------------------------------------------------------------------------

struct MomentSeries {
    std::vector<double> times;
    int order = 0;                             // n_max
    int replicas = 0;
    // value[n-1][t_index], se likewise, n = 1..order
    std::vector<std::vector<double>> value;
    std::vector<std::vector<double>> se;
};

// Sample mean and SE of N(N-1)...(N-n+1) with N the count in `region`.
MomentSeries estimate_factorial_moments(const SnapshotSeries& snaps,
                                        const Box& region, const Window& window,
                                        int n_max);

struct BinnedCorrelation {
    std::vector<double> times;
    int replicas = 0;
    double window_volume = 0.0;

    std::vector<double> k1;     // mean count per unit volume, per time
    std::vector<double> k1_se;

    // Position histogram of the density along the axis (filled for d = 1;
    // flat for homogeneous models, a profile otherwise).
    std::vector<double> profile_edges;             // bins + 1 edges
    std::vector<std::vector<double>> k1_profile;   // [time][bin]
    std::vector<std::vector<double>> k1_profile_se;

    std::vector<double> bin_lo;  // pair-distance shells
    std::vector<double> bin_hi;
    std::vector<double> shell_volume;
    // k2[t_index][bin]; NaN marks an empty (missing) bin
    std::vector<std::vector<double>> k2;
    std::vector<std::vector<double>> k2_se;
    std::vector<std::vector<long>> pair_count;
};

// Distance-binned pair correlation on the torus; requires >= 2 replicas.
// Ordered pairs are counted, matching the factorial pair measure.
BinnedCorrelation estimate_correlations(const SnapshotSeries& snaps,
                                        const Window& window, int bins);

enum class FunctionalKind { FTheta, FTildeV, Phi };

struct FunctionalSeries {
    FunctionalKind kind;
    std::vector<double> times;
    int replicas = 0;
    std::vector<double> value;
    std::vector<double> se;
};

// Ensemble mean of prod(1 + theta(x)), exp(-sum v psi) or sum psi.
FunctionalSeries estimate_functional(const SnapshotSeries& snaps,
                                     FunctionalKind kind,
                                     const ScalarField& field);

std::string to_string(FunctionalKind k);

}  // namespace lbd
