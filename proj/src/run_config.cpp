#include "lbd/run_config.hpp"

#include <fstream>
#include <set>

#include "lbd/errors.hpp"

namespace lbd {

using nlohmann::json;

namespace {

// Walks a JSON object tracking the field path; unknown keys are an error.
class Checker {
  public:
    Checker(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_, "expected an object");
    }
    ~Checker() = default;

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + "." + it.key(), "unknown key");
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key) {
        if (!has(key)) throw ConfigError(path_ + "." + key, "missing required key");
        return j_.at(key);
    }

    const json* get(const std::string& key) {
        return has(key) ? &j_.at(key) : nullptr;
    }

    double number(const std::string& key) { return as_number(at(key), key); }

    double number_or(const std::string& key, double fallback) {
        const json* v = get(key);
        return v ? as_number(*v, key) : fallback;
    }

    int integer(const std::string& key) { return as_integer(at(key), key); }

    int integer_or(const std::string& key, int fallback) {
        const json* v = get(key);
        return v ? as_integer(*v, key) : fallback;
    }

    std::uint64_t uinteger_or(const std::string& key, std::uint64_t fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_number_unsigned() && !v->is_number_integer())
            throw ConfigError(path_ + "." + key, "expected an unsigned integer");
        if (v->is_number_integer() && v->get<long long>() < 0)
            throw ConfigError(path_ + "." + key, "expected an unsigned integer");
        return v->get<std::uint64_t>();
    }

    std::string text(const std::string& key) {
        const json& v = at(key);
        if (!v.is_string()) throw ConfigError(path_ + "." + key, "expected a string");
        return v.get<std::string>();
    }

    std::string text_or(const std::string& key, const std::string& fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_string()) throw ConfigError(path_ + "." + key, "expected a string");
        return v->get<std::string>();
    }

    bool boolean_or(const std::string& key, bool fallback) {
        const json* v = get(key);
        if (!v) return fallback;
        if (!v->is_boolean()) throw ConfigError(path_ + "." + key, "expected a boolean");
        return v->get<bool>();
    }

    std::vector<double> numbers(const std::string& key) {
        const json& v = at(key);
        return as_numbers(v, key);
    }

    std::vector<double> numbers_or(const std::string& key,
                                   std::vector<double> fallback) {
        const json* v = get(key);
        return v ? as_numbers(*v, key) : std::move(fallback);
    }

    const std::string& path() const { return path_; }

  private:
    double as_number(const json& v, const std::string& key) const {
        if (!v.is_number()) throw ConfigError(path_ + "." + key, "expected a number");
        return v.get<double>();
    }
    int as_integer(const json& v, const std::string& key) const {
        if (!v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(path_ + "." + key, "expected an integer");
        return v.get<int>();
    }
    std::vector<double> as_numbers(const json& v, const std::string& key) const {
        if (!v.is_array()) throw ConfigError(path_ + "." + key, "expected an array");
        std::vector<double> out;
        for (const auto& e : v) {
            if (!e.is_number())
                throw ConfigError(path_ + "." + key, "expected an array of numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

KernelSpec parse_kernel(const json& j, const std::string& path) {
    Checker c(j, path);
    const std::string family = c.text("family");
    KernelSpec k;
    if (family == "constant") {
        k.family = KernelFamily::Constant;
        k.amplitude = c.number("level");
    } else if (family == "gaussian_bump") {
        k.family = KernelFamily::GaussianBump;
        k.amplitude = c.number("amplitude");
        k.scale = c.number("width");
    } else if (family == "tophat") {
        k.family = KernelFamily::TopHat;
        k.amplitude = c.number("amplitude");
        k.scale = c.number("radius");
    } else {
        throw ConfigError(path + ".family",
                          "unknown family '" + family +
                              "' (constant | gaussian_bump | tophat)");
    }
    c.finish();
    return k;
}

json kernel_to_json(const KernelSpec& k) {
    json j;
    switch (k.family) {
        case KernelFamily::Constant:
            j["family"] = "constant";
            j["level"] = k.amplitude;
            break;
        case KernelFamily::GaussianBump:
            j["family"] = "gaussian_bump";
            j["amplitude"] = k.amplitude;
            j["width"] = k.scale;
            break;
        case KernelFamily::TopHat:
            j["family"] = "tophat";
            j["amplitude"] = k.amplitude;
            j["radius"] = k.scale;
            break;
    }
    return j;
}

InitialLaw parse_initial(const json& j, const std::string& path, int dim) {
    Checker c(j, path);
    const std::string law = c.text("law");
    InitialLaw out;
    if (law == "poisson") {
        out.kind = InitialLawKind::PoissonHomogeneous;
        out.kappa = c.number("kappa");
    } else if (law == "poisson_inhomogeneous") {
        out.kind = InitialLawKind::PoissonInhomogeneous;
        out.density = parse_kernel(c.at("density"), path + ".density");
    } else if (law == "thinned_poisson") {
        out.kind = InitialLawKind::ThinnedPoisson;
        out.kappa = c.number("kappa");
        out.retention = parse_kernel(c.at("q"), path + ".q");
    } else if (law == "fixed") {
        out.kind = InitialLawKind::Fixed;
        const json& pts = c.at("points");
        if (!pts.is_array()) throw ConfigError(path + ".points", "expected an array");
        out.fixed = Configuration(dim);
        for (const auto& p : pts) {
            if (!p.is_array() || static_cast<int>(p.size()) != dim)
                throw ConfigError(path + ".points",
                                  "each point needs " + std::to_string(dim) +
                                      " coordinates");
            for (const auto& x : p) out.fixed.coords.push_back(x.get<double>());
        }
    } else {
        throw ConfigError(path + ".law", "unknown law '" + law + "'");
    }
    c.finish();
    return out;
}

json initial_to_json(const InitialLaw& law, int dim) {
    json j;
    switch (law.kind) {
        case InitialLawKind::PoissonHomogeneous:
            j["law"] = "poisson";
            j["kappa"] = law.kappa;
            break;
        case InitialLawKind::PoissonInhomogeneous:
            j["law"] = "poisson_inhomogeneous";
            j["density"] = kernel_to_json(law.density);
            break;
        case InitialLawKind::ThinnedPoisson:
            j["law"] = "thinned_poisson";
            j["kappa"] = law.kappa;
            j["q"] = kernel_to_json(law.retention);
            break;
        case InitialLawKind::Fixed: {
            j["law"] = "fixed";
            json pts = json::array();
            for (int i = 0; i < law.fixed.size(); ++i) {
                json p = json::array();
                for (int k = 0; k < dim; ++k) p.push_back(law.fixed.point(i)[k]);
                pts.push_back(p);
            }
            j["points"] = pts;
            break;
        }
    }
    return j;
}

}  // namespace

double RunConfig::resolved_kappa0() const {
    if (verifier.kappa0) return *verifier.kappa0;
    switch (initial.kind) {
        case InitialLawKind::PoissonHomogeneous:
        case InitialLawKind::ThinnedPoisson:
            return initial.kappa;
        case InitialLawKind::PoissonInhomogeneous:
            return initial.density.at_origin();
        case InitialLawKind::Fixed:
            return initial.fixed.size() / model.box().volume();
    }
    return 0.0;
}

void RunConfig::validate() const {
    model.validate();
    if (!allow_decoupled && model.a.at_origin() <= 0.0)
        throw ConfigError("model.a",
                          "competition kernel must satisfy a(0)>0 "
                          "(set allow_decoupled for the diagnostic limit)");
    initial.validate(model.dim);
    if (!(horizon >= 0.0)) throw ConfigError("horizon", "must be >= 0");
    if (replicas < 1) throw ConfigError("replicas", "must be >= 1");
    double prev = -1.0;
    for (double t : snapshot_times) {
        if (t < 0.0 || t > horizon)
            throw ConfigError("snapshot_times", "must lie in [0, horizon]");
        if (t <= prev) throw ConfigError("snapshot_times", "must be strictly increasing");
        prev = t;
    }
    if (snapshot_times.empty()) throw ConfigError("snapshot_times", "must be non-empty");
    if (!(solver.dt > 0.0)) throw ConfigError("solver.dt", "must be > 0");
    if (solver.n_max < 1 || solver.n_max > 3)
        throw ConfigError("solver.n_max", "must be 1, 2 or 3");
    if (solver.grid_points < 2) throw ConfigError("solver.grid_points", "must be >= 2");
    if (solver.series_terms < 0 || solver.series_terms > 12)
        throw ConfigError("solver.series_terms", "must be in [0, 12]");
    if (solver.series_order < 1 || solver.series_order > 15)
        throw ConfigError("solver.series_order", "must be in [1, 15]");
    if (estimator.pair_bins < 1) throw ConfigError("estimator.pair_bins", "must be >= 1");
    if (estimator.moment_order < 1 || estimator.moment_order > 4)
        throw ConfigError("estimator.moment_order", "must be in [1, 4]");
    const std::set<std::string> known = {"type_growth", "convolution_bound",
                                         "global_moments", "cross_validate"};
    for (const auto& name : verifier.checks)
        if (!known.count(name))
            throw ConfigError("verifier.checks", "unknown check '" + name + "'");
    if (output_dir.empty()) throw ConfigError("output_dir", "must be non-empty");
}

RunConfig parse_run_config(const json& j) {
    Checker c(j, "config");
    RunConfig cfg;

    {
        Checker m(c.at("model"), "model");
        cfg.model.dim = m.integer("dimension");
        cfg.model.window = m.number("window");
        cfg.model.sigma = m.number_or("sigma", 0.0);
        cfg.model.b = parse_kernel(m.at("b"), "model.b");
        cfg.model.m = parse_kernel(m.at("m"), "model.m");
        cfg.model.a = parse_kernel(m.at("a"), "model.a");
        cfg.allow_decoupled = m.boolean_or("allow_decoupled", false);
        m.finish();
    }

    cfg.initial = parse_initial(c.at("initial"), "initial", cfg.model.dim);
    cfg.horizon = c.number("horizon");
    cfg.snapshot_times = c.numbers("snapshot_times");
    cfg.replicas = c.integer("replicas");
    cfg.master_seed = c.uinteger_or("master_seed", 0);

    if (const json* s = c.get("solver")) {
        Checker sc(*s, "solver");
        cfg.solver.dt = sc.number_or("dt", cfg.solver.dt);
        const std::string cl = sc.text_or("closure", "ruelle_cap");
        if (cl == "zero")
            cfg.solver.closure = Closure::Zero;
        else if (cl == "ruelle_cap")
            cfg.solver.closure = Closure::RuelleCap;
        else
            throw ConfigError("solver.closure", "expected 'zero' or 'ruelle_cap'");
        cfg.solver.grid_points = sc.integer_or("grid_points", cfg.solver.grid_points);
        cfg.solver.n_max = sc.integer_or("n_max", cfg.solver.n_max);
        cfg.solver.series_order = sc.integer_or("series_order", cfg.solver.series_order);
        cfg.solver.series_terms = sc.integer_or("series_terms", cfg.solver.series_terms);
        if (sc.has("alpha_track") && !s->at("alpha_track").is_null())
            cfg.solver.alpha_track = s->at("alpha_track").get<double>();
        sc.finish();
    }

    if (const json* e = c.get("estimator")) {
        Checker ec(*e, "estimator");
        cfg.estimator.pair_bins = ec.integer_or("pair_bins", cfg.estimator.pair_bins);
        cfg.estimator.moment_order =
            ec.integer_or("moment_order", cfg.estimator.moment_order);
        if (ec.has("theta")) cfg.estimator.theta = parse_kernel(e->at("theta"), "estimator.theta");
        if (ec.has("v")) cfg.estimator.v = parse_kernel(e->at("v"), "estimator.v");
        ec.finish();
    }

    if (const json* v = c.get("verifier")) {
        Checker vc(*v, "verifier");
        if (vc.has("checks")) {
            const json& arr = v->at("checks");
            if (!arr.is_array()) throw ConfigError("verifier.checks", "expected an array");
            cfg.verifier.checks.clear();
            for (const auto& e : arr) cfg.verifier.checks.push_back(e.get<std::string>());
        }
        if (vc.has("kappa0") && !v->at("kappa0").is_null())
            cfg.verifier.kappa0 = v->at("kappa0").get<double>();
        vc.finish();
    }

    if (const json* s = c.get("sweep")) {
        Checker sc(*s, "sweep");
        cfg.sweep.sigmas = sc.numbers_or("sigmas", cfg.sweep.sigmas);
        const std::string obs = sc.text_or("observable", "density");
        if (obs == "density")
            cfg.sweep.observable = SweepObservable::Density;
        else if (obs == "phi")
            cfg.sweep.observable = SweepObservable::TemperednessPhi;
        else
            throw ConfigError("sweep.observable", "expected 'density' or 'phi'");
        sc.finish();
    }

    cfg.output_dir = c.text_or("output_dir", cfg.output_dir);
    c.finish();

    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("config file not found: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("JSON parse error: ") + e.what());
    }
    return parse_run_config(j);
}

json to_json(const RunConfig& c) {
    json j;
    j["model"]["dimension"] = c.model.dim;
    j["model"]["window"] = c.model.window;
    j["model"]["sigma"] = c.model.sigma;
    j["model"]["b"] = kernel_to_json(c.model.b);
    j["model"]["m"] = kernel_to_json(c.model.m);
    j["model"]["a"] = kernel_to_json(c.model.a);
    if (c.allow_decoupled) j["model"]["allow_decoupled"] = true;
    j["initial"] = initial_to_json(c.initial, c.model.dim);
    j["horizon"] = c.horizon;
    j["snapshot_times"] = c.snapshot_times;
    j["replicas"] = c.replicas;
    j["master_seed"] = c.master_seed;
    j["solver"]["dt"] = c.solver.dt;
    j["solver"]["closure"] = c.solver.closure == Closure::Zero ? "zero" : "ruelle_cap";
    j["solver"]["grid_points"] = c.solver.grid_points;
    j["solver"]["n_max"] = c.solver.n_max;
    j["solver"]["series_order"] = c.solver.series_order;
    j["solver"]["series_terms"] = c.solver.series_terms;
    if (c.solver.alpha_track) j["solver"]["alpha_track"] = *c.solver.alpha_track;
    j["estimator"]["pair_bins"] = c.estimator.pair_bins;
    j["estimator"]["moment_order"] = c.estimator.moment_order;
    j["estimator"]["theta"] = kernel_to_json(c.estimator.theta);
    j["estimator"]["v"] = kernel_to_json(c.estimator.v);
    j["verifier"]["checks"] = c.verifier.checks;
    if (c.verifier.kappa0) j["verifier"]["kappa0"] = *c.verifier.kappa0;
    j["sweep"]["sigmas"] = c.sweep.sigmas;
    j["sweep"]["observable"] =
        c.sweep.observable == SweepObservable::Density ? "density" : "phi";
    j["output_dir"] = c.output_dir;
    return j;
}

}  // namespace lbd
