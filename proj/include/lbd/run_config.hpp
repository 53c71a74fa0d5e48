#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbd/hierarchy.hpp"
#include "lbd/kernels.hpp"
#include "lbd/simulator.hpp"
#include "lbd/verifier.hpp"

namespace lbd {

struct SolverRunConfig {
    double dt = 1e-3;
    Closure closure = Closure::RuelleCap;
    int grid_points = 17;
    int n_max = 2;
    int series_order = 8;
    int series_terms = 8;
    std::optional<double> alpha_track;
};

struct EstimatorConfig {
    int pair_bins = 40;
    int moment_order = 3;
    KernelSpec theta{KernelFamily::GaussianBump, 0.5, 1.0};
    KernelSpec v{KernelFamily::Constant, 1.0, 0.0};
};

struct VerifierConfig {
    std::vector<std::string> checks = {"type_growth", "convolution_bound",
                                       "global_moments", "cross_validate"};
    std::optional<double> kappa0;  // defaults to the Poisson intensity
};

struct SweepConfig {
    std::vector<double> sigmas = {0.0, 0.5, 1.0};
    SweepObservable observable = SweepObservable::Density;
};

struct RunConfig {
    ModelSpec model;
    bool allow_decoupled = false;  // opt-in for the a == 0 diagnostic limit
    InitialLaw initial;
    double horizon = 1.0;
    std::vector<double> snapshot_times;
    int replicas = 1;
    std::uint64_t master_seed = 0;
    SolverRunConfig solver;
    EstimatorConfig estimator;
    VerifierConfig verifier;
    SweepConfig sweep;
    std::string output_dir = "run_artifacts";

    // kappa0 used by the bound checks; falls back to the initial intensity.
    double resolved_kappa0() const;
    void validate() const;
};

// Strict parse: unknown keys are rejected, violations carry the field path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);

}  // namespace lbd
