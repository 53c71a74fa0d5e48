#include "lbd/artifacts.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <sstream>

#include "lbd/errors.hpp"
#include "lbd/version.hpp"

namespace lbd::artifacts {

using nlohmann::json;

Paths layout(const fs::path& dir) {
    Paths p;
    p.dir = dir;
    p.manifest = dir / "manifest.json";
    p.events = dir / "events.csv";
    p.snapshots = dir / "snapshots.csv";
    p.moments = dir / "moments.csv";
    p.correlation_k1 = dir / "correlation_k1.csv";
    p.correlation_k2 = dir / "correlation_k2.csv";
    p.functionals = dir / "functionals.csv";
    p.solution_zero = dir / "solution_zero.json";
    p.solution_cap = dir / "solution_ruelle_cap.json";
    p.verdicts = dir / "verdicts.json";
    p.report = dir / "report.csv";
    p.sweep = dir / "sweep.csv";
    return p;
}

std::string format_double(double x) {
    char buf[40];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, ptr);
}

void atomic_write(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string file_checksum(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
    return std::string(out);
}

void require_artifact(const fs::path& path, const std::string& producer) {
    if (!fs::exists(path))
        throw MissingArtifactError(path.string() + " is missing; run '" + producer +
                                   "' first");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    // Fields in our artifacts never contain commas or quotes; still accept
    // quoted fields for robustness.
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s) {
    if (s.empty() || s == "nan") return std::numeric_limits<double>::quiet_NaN();
    return std::stod(s);
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

}  // namespace

void write_events_csv(const fs::path& path, const std::vector<EventLog>& logs, int dim) {
    std::ostringstream out;
    out << "replica,event,time,kind";
    for (int k = 0; k < dim; ++k) out << ",x" << k;
    out << "\n";
    for (const EventLog& log : logs) {
        for (size_t e = 0; e < log.events.size(); ++e) {
            const Event& ev = log.events[e];
            out << log.replica_id << ',' << e << ',' << format_double(ev.time) << ','
                << (ev.birth ? 'B' : 'D');
            for (int k = 0; k < dim; ++k) out << ',' << format_double(ev.point[k]);
            out << "\n";
        }
    }
    atomic_write(path, out.str());
}

void write_snapshots_csv(const fs::path& path, const SnapshotSeries& snaps) {
    std::ostringstream out;
    out << "replica,snapshot,time,point";
    for (int k = 0; k < snaps.dim; ++k) out << ",x" << k;
    out << "\n";
    for (int r = 0; r < snaps.replicas(); ++r) {
        for (size_t ti = 0; ti < snaps.times.size(); ++ti) {
            const Configuration& g = snaps.configs[r][ti];
            if (g.size() == 0) {
                // Keep the (replica, snapshot) row present for empty states.
                out << r << ',' << ti << ',' << format_double(snaps.times[ti])
                    << ",-1";
                for (int k = 0; k < snaps.dim; ++k) out << ',';
                out << "\n";
                continue;
            }
            for (int i = 0; i < g.size(); ++i) {
                out << r << ',' << ti << ',' << format_double(snaps.times[ti]) << ','
                    << i;
                for (int k = 0; k < snaps.dim; ++k)
                    out << ',' << format_double(g.point(i)[k]);
                out << "\n";
            }
        }
    }
    atomic_write(path, out.str());
}

SnapshotSeries read_snapshots_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw MissingArtifactError(path.string() + " is empty");
    const int dim = static_cast<int>(rows[0].size()) - 4;
    if (dim < 1)
        throw MissingArtifactError(path.string() + ": malformed header");

    SnapshotSeries snaps;
    snaps.dim = dim;
    // First pass: replica count and time axis.
    int max_replica = -1;
    int max_snap = -1;
    for (size_t i = 1; i < rows.size(); ++i) {
        max_replica = std::max(max_replica, std::stoi(rows[i][0]));
        max_snap = std::max(max_snap, std::stoi(rows[i][1]));
    }
    snaps.times.assign(max_snap + 1, 0.0);
    snaps.configs.assign(max_replica + 1,
                         std::vector<Configuration>(max_snap + 1, Configuration(dim)));
    for (size_t i = 1; i < rows.size(); ++i) {
        const int r = std::stoi(rows[i][0]);
        const int s = std::stoi(rows[i][1]);
        snaps.times[s] = parse_double(rows[i][2]);
        const int pt = std::stoi(rows[i][3]);
        if (pt < 0) continue;  // empty-state marker
        for (int k = 0; k < dim; ++k)
            snaps.configs[r][s].coords.push_back(parse_double(rows[i][4 + k]));
    }
    return snaps;
}

void write_moments_csv(const fs::path& path, const MomentSeries& m) {
    std::ostringstream out;
    out << "time,order,estimate,se,replicas\n";
    for (size_t ti = 0; ti < m.times.size(); ++ti)
        for (int n = 1; n <= m.order; ++n)
            out << format_double(m.times[ti]) << ',' << n << ','
                << format_double(m.value[n - 1][ti]) << ','
                << format_double(m.se[n - 1][ti]) << ',' << m.replicas << "\n";
    atomic_write(path, out.str());
}

MomentSeries read_moments_csv(const fs::path& path) {
    const auto rows = read_csv(path);
    MomentSeries m;
    for (size_t i = 1; i < rows.size(); ++i) {
        const double t = parse_double(rows[i][0]);
        const int n = std::stoi(rows[i][1]);
        if (m.times.empty() || m.times.back() != t) m.times.push_back(t);
        m.order = std::max(m.order, n);
        m.replicas = std::stoi(rows[i][4]);
    }
    const size_t T = m.times.size();
    m.value.assign(m.order, std::vector<double>(T, 0.0));
    m.se.assign(m.order, std::vector<double>(T, 0.0));
    for (size_t i = 1; i < rows.size(); ++i) {
        const double t = parse_double(rows[i][0]);
        size_t ti = T;
        for (size_t k = 0; k < T; ++k)
            if (std::abs(m.times[k] - t) < 1e-12) ti = k;
        if (ti == T)
            throw MissingArtifactError(path.string() + ": inconsistent time axis");
        const int n = std::stoi(rows[i][1]);
        m.value[n - 1][ti] = parse_double(rows[i][2]);
        m.se[n - 1][ti] = parse_double(rows[i][3]);
    }
    return m;
}

void write_correlation_csv(const fs::path& k1_path, const fs::path& k2_path,
                           const BinnedCorrelation& c) {
    {
        std::ostringstream out;
        out << "time,estimate,se,replicas,window_volume\n";
        for (size_t ti = 0; ti < c.times.size(); ++ti)
            out << format_double(c.times[ti]) << ',' << format_double(c.k1[ti]) << ','
                << format_double(c.k1_se[ti]) << ',' << c.replicas << ','
                << format_double(c.window_volume) << "\n";
        atomic_write(k1_path, out.str());
    }
    if (!c.profile_edges.empty()) {
        std::ostringstream out;
        out << "time,bin,x_lo,x_hi,estimate,se\n";
        for (size_t ti = 0; ti < c.times.size(); ++ti)
            for (size_t b = 0; b + 1 < c.profile_edges.size(); ++b)
                out << format_double(c.times[ti]) << ',' << b << ','
                    << format_double(c.profile_edges[b]) << ','
                    << format_double(c.profile_edges[b + 1]) << ','
                    << format_double(c.k1_profile[ti][b]) << ','
                    << format_double(c.k1_profile_se[ti][b]) << "\n";
        fs::path profile = k1_path;
        profile.replace_filename("correlation_k1_profile.csv");
        atomic_write(profile, out.str());
    }
    {
        std::ostringstream out;
        out << "time,bin,r_lo,r_hi,shell_volume,estimate,se,pairs\n";
        for (size_t ti = 0; ti < c.times.size(); ++ti)
            for (size_t b = 0; b < c.bin_lo.size(); ++b) {
                out << format_double(c.times[ti]) << ',' << b << ','
                    << format_double(c.bin_lo[b]) << ',' << format_double(c.bin_hi[b])
                    << ',' << format_double(c.shell_volume[b]) << ',';
                if (std::isnan(c.k2[ti][b]))
                    out << ',';  // missing bin: empty estimate and se
                else
                    out << format_double(c.k2[ti][b]) << ','
                        << format_double(c.k2_se[ti][b]);
                out << ',' << c.pair_count[ti][b] << "\n";
            }
        atomic_write(k2_path, out.str());
    }
}

BinnedCorrelation read_correlation_csv(const fs::path& k1_path,
                                       const fs::path& k2_path) {
    BinnedCorrelation c;
    for (const auto& row : read_csv(k1_path)) {
        if (row[0] == "time") continue;
        c.times.push_back(parse_double(row[0]));
        c.k1.push_back(parse_double(row[1]));
        c.k1_se.push_back(parse_double(row[2]));
        c.replicas = std::stoi(row[3]);
        c.window_volume = parse_double(row[4]);
    }
    const auto rows = read_csv(k2_path);
    size_t bins = 0;
    for (size_t i = 1; i < rows.size(); ++i)
        bins = std::max(bins, static_cast<size_t>(std::stoi(rows[i][1])) + 1);
    c.bin_lo.resize(bins);
    c.bin_hi.resize(bins);
    c.shell_volume.resize(bins);
    c.k2.assign(c.times.size(), std::vector<double>(bins, 0.0));
    c.k2_se.assign(c.times.size(), std::vector<double>(bins, 0.0));
    c.pair_count.assign(c.times.size(), std::vector<long>(bins, 0));
    for (size_t i = 1; i < rows.size(); ++i) {
        const double t = parse_double(rows[i][0]);
        size_t ti = c.times.size();
        for (size_t k = 0; k < c.times.size(); ++k)
            if (std::abs(c.times[k] - t) < 1e-12) ti = k;
        if (ti == c.times.size())
            throw MissingArtifactError(k2_path.string() + ": time not in k1 table");
        const size_t b = static_cast<size_t>(std::stoi(rows[i][1]));
        c.bin_lo[b] = parse_double(rows[i][2]);
        c.bin_hi[b] = parse_double(rows[i][3]);
        c.shell_volume[b] = parse_double(rows[i][4]);
        c.k2[ti][b] = parse_double(rows[i][5]);
        c.k2_se[ti][b] = parse_double(rows[i][6]);
        c.pair_count[ti][b] = std::stol(rows[i][7]);
    }
    return c;
}

void write_functionals_csv(const fs::path& path,
                           const std::vector<FunctionalSeries>& series) {
    std::ostringstream out;
    out << "time,kind,estimate,se,replicas\n";
    for (const auto& s : series)
        for (size_t ti = 0; ti < s.times.size(); ++ti)
            out << format_double(s.times[ti]) << ',' << to_string(s.kind) << ','
                << format_double(s.value[ti]) << ',' << format_double(s.se[ti]) << ','
                << s.replicas << "\n";
    atomic_write(path, out.str());
}

std::vector<FunctionalSeries> read_functionals_csv(const fs::path& path) {
    std::vector<FunctionalSeries> out;
    for (const auto& row : read_csv(path)) {
        if (row[0] == "time") continue;
        const std::string& kind = row[1];
        FunctionalSeries* s = nullptr;
        for (auto& existing : out)
            if (to_string(existing.kind) == kind) s = &existing;
        if (!s) {
            FunctionalSeries fresh;
            fresh.kind = kind == "F_theta"
                             ? FunctionalKind::FTheta
                             : (kind == "F_tilde_v" ? FunctionalKind::FTildeV
                                                    : FunctionalKind::Phi);
            out.push_back(fresh);
            s = &out.back();
        }
        s->times.push_back(parse_double(row[0]));
        s->value.push_back(parse_double(row[2]));
        s->se.push_back(parse_double(row[3]));
        s->replicas = std::stoi(row[4]);
    }
    return out;
}

void write_solution_json(const fs::path& path, const CorrelationGrid& grid,
                         const HierarchySolver::Trajectory& traj,
                         const std::string& closure) {
    json j;
    j["n_max"] = grid.n_max;
    j["dim"] = grid.window.dim;
    j["half_width"] = grid.window.half_width;
    j["grid_points"] = grid.axis_points;
    j["spacing"] = grid.spacing();
    j["closure"] = closure;
    j["axis_nodes"] = std::vector<double>(grid.axis_nodes.data(),
                                          grid.axis_nodes.data() + grid.axis_nodes.size());
    j["axis_weights"] = std::vector<double>(
        grid.axis_weights.data(), grid.axis_weights.data() + grid.axis_weights.size());
    j["times"] = traj.times;
    json k1 = json::array();
    json k2 = json::array();
    json k3 = json::array();
    for (const GridState& s : traj.states) {
        k1.push_back(std::vector<double>(s.k1.data(), s.k1.data() + s.k1.size()));
        if (s.k2.size() > 0)
            k2.push_back(std::vector<double>(s.k2.data(), s.k2.data() + s.k2.size()));
        if (s.k3.size() > 0)
            k3.push_back(std::vector<double>(s.k3.data(), s.k3.data() + s.k3.size()));
    }
    j["k1"] = k1;
    if (!k2.empty()) j["k2"] = k2;
    if (!k3.empty()) j["k3"] = k3;
    if (!traj.norm_track.empty()) j["norm_track"] = traj.norm_track;
    atomic_write(path, j.dump(0));
}

HierarchySolver::Trajectory read_solution_json(const fs::path& path,
                                               CorrelationGrid& grid_out) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    json j;
    in >> j;

    Window w{j.at("dim").get<int>(), j.at("half_width").get<double>()};
    grid_out = make_grid(w, j.at("grid_points").get<int>(), j.at("n_max").get<int>());

    HierarchySolver::Trajectory traj;
    traj.times = j.at("times").get<std::vector<double>>();
    const int M = grid_out.site_count();
    const auto& k1 = j.at("k1");
    const json* k2 = j.contains("k2") ? &j.at("k2") : nullptr;
    const json* k3 = j.contains("k3") ? &j.at("k3") : nullptr;
    for (size_t ti = 0; ti < traj.times.size(); ++ti) {
        GridState s;
        s.k0 = 1.0;
        const auto v1 = k1.at(ti).get<std::vector<double>>();
        s.k1 = Eigen::Map<const Eigen::ArrayXd>(v1.data(), M);
        if (k2) {
            const auto v2 = k2->at(ti).get<std::vector<double>>();
            s.k2 = Eigen::Map<const Eigen::ArrayXXd>(v2.data(), M, M);
        }
        if (k3) {
            const auto v3 = k3->at(ti).get<std::vector<double>>();
            s.k3 = Eigen::Map<const Eigen::ArrayXd>(v3.data(),
                                                    static_cast<long>(M) * M * M);
        }
        traj.states.push_back(std::move(s));
    }
    if (j.contains("norm_track"))
        traj.norm_track = j.at("norm_track").get<std::vector<double>>();
    return traj;
}

void write_verdicts_json(const fs::path& path, const std::vector<BoundCheck>& checks) {
    json j;
    j["checks"] = json::array();
    bool all_pass = true;
    for (const BoundCheck& c : checks) {
        json cj;
        cj["name"] = c.name;
        cj["policy"] = c.policy;
        cj["tolerance"] = c.tolerance;
        cj["equality"] = c.equality;
        cj["verdict"] = to_string(c.verdict);
        json rows = json::array();
        for (const BoundRow& r : c.rows) {
            json rj;
            rj["label"] = r.label;
            rj["time"] = r.time;
            rj["lhs"] = r.lhs;
            rj["rhs"] = r.rhs;
            rj["slack"] = r.rhs - r.lhs;
            rj["se"] = r.se;
            rj["scale"] = r.scale;
            rows.push_back(rj);
        }
        cj["rows"] = rows;
        j["checks"].push_back(cj);
        if (c.verdict != Verdict::Pass) all_pass = false;
    }
    j["all_pass"] = all_pass;
    atomic_write(path, j.dump(0));
}

std::vector<BoundCheck> read_verdicts_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    json j;
    in >> j;
    std::vector<BoundCheck> out;
    for (const auto& cj : j.at("checks")) {
        BoundCheck c;
        c.name = cj.at("name").get<std::string>();
        c.policy = cj.at("policy").get<std::string>();
        c.tolerance = cj.at("tolerance").get<double>();
        c.equality = cj.at("equality").get<bool>();
        const std::string v = cj.at("verdict").get<std::string>();
        c.verdict = v == "PASS" ? Verdict::Pass
                                : (v == "FAIL" ? Verdict::Fail : Verdict::Inconclusive);
        for (const auto& rj : cj.at("rows")) {
            BoundRow r;
            r.label = rj.at("label").get<std::string>();
            r.time = rj.at("time").get<double>();
            r.lhs = rj.at("lhs").get<double>();
            r.rhs = rj.at("rhs").get<double>();
            r.se = rj.at("se").get<double>();
            r.scale = rj.at("scale").get<double>();
            c.rows.push_back(r);
        }
        out.push_back(c);
    }
    return out;
}

void write_sweep_csv(const fs::path& path, const SweepTable& table) {
    std::ostringstream out;
    const char* column =
        table.observable == SweepObservable::Density ? "density" : "phi";
    out << "sigma,time," << column << ",deviation_from_sigma0,monotone\n";
    size_t zero_idx = 0;
    for (size_t si = 0; si < table.sigmas.size(); ++si)
        if (table.sigmas[si] == 0.0) zero_idx = si;
    for (size_t si = 0; si < table.sigmas.size(); ++si)
        for (size_t ti = 0; ti < table.times.size(); ++ti)
            out << format_double(table.sigmas[si]) << ','
                << format_double(table.times[ti]) << ','
                << format_double(table.value[si][ti]) << ','
                << format_double(std::abs(table.value[si][ti] -
                                          table.value[zero_idx][ti]))
                << ',' << (table.monotone_in_sigma[ti] ? 1 : 0) << "\n";
    atomic_write(path, out.str());
}

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm_utc;
    gmtime_r(&t, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return std::string(buf);
}

RunManifest read_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot read " + path.string());
    json j;
    in >> j;
    RunManifest m;
    m.config = j.at("config");
    m.config_hash = j.at("config_hash").get<std::string>();
    m.version = j.at("version").get<std::string>();
    if (j.contains("stages"))
        for (auto it = j.at("stages").begin(); it != j.at("stages").end(); ++it)
            m.stages[it.key()] = it.value();
    if (j.contains("inventory"))
        for (auto it = j.at("inventory").begin(); it != j.at("inventory").end(); ++it)
            m.inventory[it.key()] = it.value().get<std::string>();
    return m;
}

void update_manifest(const Paths& paths, const RunConfig& cfg,
                     const std::string& stage, const std::string& status,
                     const std::string& started, const std::string& finished) {
    json j;
    if (fs::exists(paths.manifest)) {
        std::ifstream in(paths.manifest);
        in >> j;
    }
    const json config_json = to_json(cfg);
    j["config"] = config_json;
    {
        // FNV-1a over the canonical dump.
        const std::string dump = config_json.dump();
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : dump) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
        j["config_hash"] = std::string(buf);
    }
    j["version"] = kVersion;
    j["stages"][stage] = {{"status", status}, {"started", started}, {"finished", finished}};

    json inv = json::object();
    for (const auto& entry : fs::directory_iterator(paths.dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "manifest.json" || name.ends_with(".tmp")) continue;
        inv[name] = file_checksum(entry.path());
    }
    j["inventory"] = inv;
    atomic_write(paths.manifest, j.dump(2));
}

}  // namespace lbd::artifacts
