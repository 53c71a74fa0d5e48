#include "lbd/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "lbd/errors.hpp"

namespace lbd {

void InitialLaw::validate(int dim) const {
    switch (kind) {
        case InitialLawKind::PoissonHomogeneous:
            if (!(kappa >= 0.0)) throw ModelError("initial: kappa must be >= 0");
            break;
        case InitialLawKind::PoissonInhomogeneous:
            density.validate("initial.density");
            break;
        case InitialLawKind::ThinnedPoisson:
            if (!(kappa >= 0.0)) throw ModelError("initial: kappa must be >= 0");
            retention.validate("initial.q");
            if (retention.at_origin() > 1.0)
                throw ModelError("initial.q: retention probability must be <= 1");
            break;
        case InitialLawKind::Fixed:
            if (fixed.dim != dim)
                throw ModelError("initial.points: dimension mismatch");
            break;
    }
}

Simulator::Simulator(const ModelSpec& spec, bool allow_decoupled)
    : spec_(spec), window_(spec.box()) {
    const DerivedConstants c = derive_constants(spec, allow_decoupled);
    birth_total_ = c.mean_b_sigma;
    // Built-in families are radially nonincreasing, so b_sigma peaks at 0.
    birth_sup_ = spec_.b.at_origin();
}

double Simulator::m_sigma(PointRef x) const {
    return spec_.m(x) * psi_sigma(x, spec_.sigma);
}

double Simulator::b_sigma(PointRef x) const {
    return spec_.b(x) * psi_sigma(x, spec_.sigma);
}

double Simulator::a_sigma(PointRef x, PointRef y) const {
    Vec diff(window_.dim);
    window_.min_image(x.data(), y.data(), diff.data());
    const double base = spec_.a(diff);
    if (base == 0.0) return 0.0;
    if (spec_.sigma == 0.0) return base;
    return base * psi_sigma(x, spec_.sigma) * psi_sigma(y, spec_.sigma);
}

Configuration Simulator::sample_initial(const InitialLaw& law, RngStream& rng) const {
    law.validate(spec_.dim);
    const double W = spec_.window;
    Configuration gamma(spec_.dim);
    Vec x(spec_.dim);

    auto draw_uniform = [&]() {
        for (int k = 0; k < spec_.dim; ++k) x[k] = rng.uniform(-W, W);
    };

    switch (law.kind) {
        case InitialLawKind::PoissonHomogeneous: {
            const int n = rng.poisson(law.kappa * window_.volume());
            for (int i = 0; i < n; ++i) {
                draw_uniform();
                gamma.add(x);
            }
            break;
        }
        case InitialLawKind::PoissonInhomogeneous: {
            const double mass = kernel_window_integral(law.density, window_);
            const double sup = law.density.at_origin();
            if (!(sup > 0.0) || !std::isfinite(sup)) {
                if (mass == 0.0) break;
                throw ModelError("initial.density: unbounded or degenerate envelope");
            }
            const int n = rng.poisson(mass);
            for (int i = 0; i < n; ++i) {
                long tries = 0;
                while (true) {
                    draw_uniform();
                    if (rng.uniform01() * sup <= law.density(x)) break;
                    if (++tries > 1'000'000)
                        throw ModelError("initial.density: rejection sampling stalled");
                }
                gamma.add(x);
            }
            break;
        }
        case InitialLawKind::ThinnedPoisson: {
            const int n = rng.poisson(law.kappa * window_.volume());
            for (int i = 0; i < n; ++i) {
                draw_uniform();
                if (rng.uniform01() < law.retention(x)) gamma.add(x);
            }
            break;
        }
        case InitialLawKind::Fixed: {
            gamma = law.fixed;
            for (int i = 0; i < gamma.size(); ++i)
                window_.wrap(gamma.coords.data() + static_cast<size_t>(i) * gamma.dim);
            break;
        }
    }
    return gamma;
}

double Simulator::death_rate_of(const Configuration& gamma, const double* x, int skip) const {
    Eigen::Map<const Vec> xv(x, spec_.dim);
    double r = m_sigma(xv);
    for (int j = 0; j < gamma.size(); ++j) {
        if (j == skip) continue;
        r += a_sigma(xv, gamma.point(j));
    }
    return r;
}

SimState Simulator::make_state(Configuration gamma) const {
    SimState s;
    s.gamma = std::move(gamma);
    s.birth_total = birth_total_;
    resync(s);
    return s;
}

void Simulator::resync(SimState& s) const {
    const int n = s.gamma.size();
    s.death_rates.resize(n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        s.death_rates[i] = death_rate_of(s.gamma, s.gamma.point_ptr(i), i);
        total += s.death_rates[i];
    }
    s.total_death = total;
    s.events_since_resync = 0;
}

double Simulator::draw_waiting(const SimState& s, RngStream& rng) const {
    const double rate = total_rate(s);
    if (!(rate > 0.0)) throw std::logic_error("draw_waiting: total rate is zero");
    return rng.exponential(rate);
}

Event Simulator::step(SimState& s, RngStream& rng) const {
    s.time += draw_waiting(s, rng);
    return apply_event(s, rng);
}

Event Simulator::apply_event(SimState& s, RngStream& rng) const {
    const double rate = total_rate(s);
    Event ev;
    ev.time = s.time;

    if (rng.uniform01() * rate < s.birth_total) {
        // Birth at a location drawn from b_sigma / <b_sigma>.
        Vec x(spec_.dim);
        long tries = 0;
        while (true) {
            for (int k = 0; k < spec_.dim; ++k) x[k] = rng.uniform(-spec_.window, spec_.window);
            if (rng.uniform01() * birth_sup_ <= b_sigma(x)) break;
            if (++tries > 1'000'000)
                throw ModelError("birth sampling: rejection stalled (kernel shape)");
        }
        // New particle's rate, and increments to everyone else.
        double self_rate = m_sigma(x);
        for (int j = 0; j < s.gamma.size(); ++j) {
            const auto y = s.gamma.point(j);
            s.death_rates[j] += a_sigma(y, x);
            self_rate += a_sigma(x, y);
            s.total_death += a_sigma(y, x);
        }
        s.gamma.add(x);
        s.death_rates.push_back(self_rate);
        s.total_death += self_rate;
        ev.birth = true;
        ev.point.assign(x.data(), x.data() + spec_.dim);
    } else {
        // Death proportional to cached rates.
        const int n = s.gamma.size();
        double u = rng.uniform01() * s.total_death;
        int pick = n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            acc += s.death_rates[i];
            if (u < acc) {
                pick = i;
                break;
            }
        }
        Vec x = s.gamma.point(pick);
        s.total_death -= s.death_rates[pick];
        // Swap-remove keeps rates aligned with coordinates.
        s.death_rates[pick] = s.death_rates[n - 1];
        s.death_rates.pop_back();
        s.gamma.remove(pick);
        for (int j = 0; j < s.gamma.size(); ++j) {
            const double dec = a_sigma(s.gamma.point(j), x);
            s.death_rates[j] -= dec;
            s.total_death -= dec;
        }
        ev.birth = false;
        ev.point.assign(x.data(), x.data() + spec_.dim);
    }
    ++s.events_since_resync;
    return ev;
}

namespace {

void run_replica(const Simulator& sim, const InitialLaw& law, const RunOptions& opts,
                 int replica, EventLog& log, std::vector<Configuration>& snaps) {
    RngStream rng(opts.master_seed, static_cast<std::uint64_t>(replica));
    log.replica_id = replica;
    log.seed = opts.master_seed;

    SimState s = sim.make_state(sim.sample_initial(law, rng));
    std::size_t next_snap = 0;

    while (true) {
        const double rate = sim.total_rate(s);
        double t_event = opts.horizon + 1.0;
        if (rate > 0.0) t_event = s.time + sim.draw_waiting(s, rng);

        // Snapshot times before the next jump see the current state.
        while (next_snap < opts.snapshot_times.size() &&
               opts.snapshot_times[next_snap] < t_event) {
            snaps.push_back(s.gamma);
            ++next_snap;
        }
        if (t_event > opts.horizon) break;

        s.time = t_event;
        Event ev = sim.apply_event(s, rng);
        // A snapshot exactly at the jump time sees the post-jump state.
        while (next_snap < opts.snapshot_times.size() &&
               opts.snapshot_times[next_snap] <= t_event) {
            snaps.push_back(s.gamma);
            ++next_snap;
        }
        if (opts.record_events) log.events.push_back(std::move(ev));
        if (static_cast<std::size_t>(s.gamma.size()) > opts.population_cap)
            throw ModelError("population exceeded the blow-up guard (" +
                             std::to_string(opts.population_cap) + ")");
        if (s.events_since_resync >= opts.resync_interval) sim.resync(s);
    }
    // Remaining snapshot times up to the horizon see the final state.
    while (next_snap < opts.snapshot_times.size() &&
           opts.snapshot_times[next_snap] <= opts.horizon) {
        snaps.push_back(s.gamma);
        ++next_snap;
    }
}

}  // namespace

RunResult run(const ModelSpec& spec, const InitialLaw& law, const RunOptions& opts) {
    if (!(opts.horizon >= 0.0)) throw DomainError("run: horizon must be >= 0");
    if (opts.replicas < 1) throw DomainError("run: replicas must be >= 1");
    for (double t : opts.snapshot_times)
        if (t < 0.0 || t > opts.horizon)
            throw DomainError("run: snapshot times must lie in [0, horizon]");

    Simulator sim(spec);
    RunResult out;
    out.logs.resize(opts.replicas);
    out.snapshots.times = opts.snapshot_times;
    out.snapshots.dim = spec.dim;
    out.snapshots.configs.resize(opts.replicas);

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        while (true) {
            const int r = next.fetch_add(1);
            if (r >= opts.replicas) break;
            try {
                run_replica(sim, law, opts, r, out.logs[r], out.snapshots.configs[r]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };

    const int nthreads = std::max(1, std::min(opts.threads, opts.replicas));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);
    return out;
}

}  // namespace lbd
