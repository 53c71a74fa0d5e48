#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lbd/estimator.hpp"
#include "lbd/hierarchy.hpp"
#include "lbd/run_config.hpp"
#include "lbd/simulator.hpp"
#include "lbd/verifier.hpp"

namespace lbd::artifacts {

namespace fs = std::filesystem;

// Fixed layout of a run directory.
struct Paths {
    fs::path dir;
    fs::path manifest, events, snapshots, moments, correlation_k1, correlation_k2,
        functionals, solution_zero, solution_cap, verdicts, report, sweep;
};
Paths layout(const fs::path& dir);

// Shortest round-trip decimal form; keeps artifacts byte-stable.
std::string format_double(double x);

// Write-to-temp + rename.
void atomic_write(const fs::path& path, const std::string& content);

// FNV-1a 64 over the file bytes, hex encoded.
std::string file_checksum(const fs::path& path);

void require_artifact(const fs::path& path, const std::string& producer);

// --- event logs and snapshots -------------------------------------------

void write_events_csv(const fs::path& path, const std::vector<EventLog>& logs, int dim);
void write_snapshots_csv(const fs::path& path, const SnapshotSeries& snaps);
SnapshotSeries read_snapshots_csv(const fs::path& path);

// --- estimates ------------------------------------------------------------

void write_moments_csv(const fs::path& path, const MomentSeries& m);
MomentSeries read_moments_csv(const fs::path& path);

void write_correlation_csv(const fs::path& k1_path, const fs::path& k2_path,
                           const BinnedCorrelation& c);
BinnedCorrelation read_correlation_csv(const fs::path& k1_path,
                                       const fs::path& k2_path);

void write_functionals_csv(const fs::path& path,
                           const std::vector<FunctionalSeries>& series);
std::vector<FunctionalSeries> read_functionals_csv(const fs::path& path);

// --- solver output ----------------------------------------------------------

// Dense per-time arrays under a JSON header (axes, spacing, n_max, times).
void write_solution_json(const fs::path& path, const CorrelationGrid& grid,
                         const HierarchySolver::Trajectory& traj,
                         const std::string& closure);
HierarchySolver::Trajectory read_solution_json(const fs::path& path,
                                               CorrelationGrid& grid_out);

// --- verdicts and sweep -----------------------------------------------------

void write_verdicts_json(const fs::path& path, const std::vector<BoundCheck>& checks);
std::vector<BoundCheck> read_verdicts_json(const fs::path& path);

void write_sweep_csv(const fs::path& path, const SweepTable& table);

// --- manifest ----------------------------------------------------------------

struct RunManifest {
    nlohmann::json config;
    std::string config_hash;
    std::string version;
    std::map<std::string, nlohmann::json> stages;  // name -> {status, started, finished}
    std::map<std::string, std::string> inventory;  // file -> checksum
};

// Reads the manifest if present, records the stage, refreshes the inventory
// of files under `paths.dir`, and rewrites atomically.
void update_manifest(const Paths& paths, const RunConfig& cfg,
                     const std::string& stage, const std::string& status,
                     const std::string& started, const std::string& finished);

RunManifest read_manifest(const fs::path& path);

std::string now_iso8601();

}  // namespace lbd::artifacts
