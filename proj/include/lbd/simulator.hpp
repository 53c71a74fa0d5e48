#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lbd/geometry.hpp"
#include "lbd/kernels.hpp"
#include "lbd/rng.hpp"

namespace lbd {

// ---------------------------------------------------------------------------
// Exact event-driven (kinetic Monte Carlo) realization of the birth-death
// jump process on the periodic window. Birth proposals are placed by
// rejection against sup b_sigma; deaths pick a particle proportionally to its
// cached rate m_sigma(x) + sum_y a_sigma(x, y).
// ---------------------------------------------------------------------------

enum class InitialLawKind { PoissonHomogeneous, PoissonInhomogeneous, ThinnedPoisson, Fixed };

struct InitialLaw {
    InitialLawKind kind = InitialLawKind::PoissonHomogeneous;
    double kappa = 0.0;             // homogeneous / thinned intensity
    KernelSpec density;             // inhomogeneous intensity
    KernelSpec retention;           // thinning probability q, range within [0, 1]
    Configuration fixed;            // fixed start

    void validate(int dim) const;
};

struct Event {
    double time;
    bool birth;                     // otherwise death
    std::vector<double> point;      // dim coordinates
};

struct EventLog {
    int replica_id = 0;
    std::uint64_t seed = 0;         // (master_seed, replica_id) stream
    std::vector<Event> events;
};

struct SimState {
    double time = 0.0;
    Configuration gamma;
    std::vector<double> death_rates;  // aligned with gamma's points
    double total_death = 0.0;
    double birth_total = 0.0;         // <b_sigma> over the window, fixed per run

    int events_since_resync = 0;
};

class Simulator {
  public:
    Simulator(const ModelSpec& spec, bool allow_decoupled = true);

    const ModelSpec& spec() const { return spec_; }
    double birth_total() const { return birth_total_; }

    Configuration sample_initial(const InitialLaw& law, RngStream& rng) const;

    SimState make_state(Configuration gamma) const;

    // Death rate of the particle at `x` against the rest of `gamma`
    // (the entry for index `skip` is excluded).
    double death_rate_of(const Configuration& gamma, const double* x, int skip) const;

    double total_rate(const SimState& s) const { return s.birth_total + s.total_death; }

    // Advances by one exponential waiting time; returns the realized event.
    // Requires total_rate(s) > 0.
    Event step(SimState& s, RngStream& rng) const;

    // The two halves of step(): the waiting-time draw and the jump itself.
    double draw_waiting(const SimState& s, RngStream& rng) const;
    Event apply_event(SimState& s, RngStream& rng) const;

    // Recompute all cached death rates from scratch.
    void resync(SimState& s) const;

    double m_sigma(PointRef x) const;
    double a_sigma(PointRef x, PointRef y) const;  // minimum-image competition
    double b_sigma(PointRef x) const;

  private:
    ModelSpec spec_;
    Window window_;
    double birth_total_ = 0.0;   // integral of b_sigma over the window
    double birth_sup_ = 0.0;     // rejection envelope
};

struct RunOptions {
    int replicas = 1;
    std::uint64_t master_seed = 0;
    double horizon = 0.0;
    std::vector<double> snapshot_times;  // ascending, within [0, horizon]
    int threads = 1;
    bool record_events = true;
    std::size_t population_cap = 1'000'000;
    int resync_interval = 1 << 14;
};

struct SnapshotSeries {
    std::vector<double> times;
    int dim = 1;
    // configs[replica][time_index]
    std::vector<std::vector<Configuration>> configs;
    int replicas() const { return static_cast<int>(configs.size()); }
};

struct RunResult {
    std::vector<EventLog> logs;  // ordered by replica id
    SnapshotSeries snapshots;
};

// Independent replicas with per-replica streams derived from the master seed;
// results are identical for any thread count.
RunResult run(const ModelSpec& spec, const InitialLaw& law, const RunOptions& opts);

}  // namespace lbd
