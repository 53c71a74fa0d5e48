#include "lbd/kernels.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "lbd/errors.hpp"
#include "lbd/quadrature.hpp"

namespace lbd {

double KernelSpec::radial(double r) const {
    switch (family) {
        case KernelFamily::Constant:
            return amplitude;
        case KernelFamily::GaussianBump: {
            const double u = r / scale;
            return amplitude * std::exp(-u * u);
        }
        case KernelFamily::TopHat:
            return r <= scale ? amplitude : 0.0;
    }
    return 0.0;
}

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::Constant: return "constant";
        case KernelFamily::GaussianBump: return "gaussian_bump";
        case KernelFamily::TopHat: return "tophat";
    }
    return "?";
}

void KernelSpec::validate(const std::string& name) const {
    if (!(amplitude >= 0.0) || !std::isfinite(amplitude))
        throw ModelError(name + ": amplitude must be finite and >= 0");
    if (family != KernelFamily::Constant) {
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw ModelError(name + ": scale must be finite and > 0");
    }
}

void ModelSpec::validate() const {
    if (dim < 1) throw ModelError("dimension must be >= 1");
    if (!(window > 0.0)) throw ModelError("window half-width must be > 0");
    if (!(sigma >= 0.0 && sigma <= 1.0))
        throw DomainError("sigma must lie in [0, 1]");
    b.validate("b");
    m.validate("m");
    a.validate("a");
}

void ModelSpec::validate_strict() const {
    validate();
    if (a.at_origin() <= 0.0)
        throw ModelError("competition kernel must satisfy a(0)>0");
}

double psi_radial(double r, int dim) {
    return 1.0 / (1.0 + std::pow(r, dim + 1));
}

double psi(PointRef x) { return psi_radial(x.norm(), static_cast<int>(x.size())); }

double psi_sigma_radial(double r, int dim, double sigma) {
    if (!(sigma >= 0.0 && sigma <= 1.0))
        throw DomainError("psi_sigma: sigma must lie in [0, 1]");
    if (sigma == 0.0) return 1.0;
    return 1.0 / (1.0 + sigma * std::pow(r, dim + 1));
}

double psi_sigma(PointRef x, double sigma) {
    return psi_sigma_radial(x.norm(), static_cast<int>(x.size()), sigma);
}

double ell_a(PointRef x) {
    const double r = x.norm();
    const int d = static_cast<int>(x.size());
    return 1.0 + std::pow(1.0 + r, d + 1);
}

double radial_max(const std::function<double(double)>& f, double r_max) {
    double lo = 0.0, hi = r_max;
    double best_x = 0.0, best = f(0.0);
    for (int pass = 0; pass < 4; ++pass) {
        const int n = pass == 0 ? 1024 : 256;
        for (int i = 0; i <= n; ++i) {
            const double x = lo + (hi - lo) * i / n;
            const double v = f(x);
            if (v > best) {
                best = v;
                best_x = x;
            }
        }
        // Shrink to the bracket around the best sample.
        const double h = (hi - lo) / n;
        lo = std::max(0.0, best_x - h);
        hi = std::min(r_max, best_x + h);
        if (hi - lo < 1e-12 * std::max(1.0, r_max)) break;
    }
    return best;
}

namespace {

double ball_volume(int d, double r) {
    return std::pow(std::numbers::pi, d / 2.0) * std::pow(r, d) /
           std::tgamma(d / 2.0 + 1.0);
}

int panels_for(const Window& w) {
    // Enough panels that composite GL resolves psi's scale on wide windows.
    return std::max(8, static_cast<int>(std::ceil(w.half_width)));
}

}  // namespace

double kernel_window_integral(const KernelSpec& k, const Window& w) {
    const double W = w.half_width;
    switch (k.family) {
        case KernelFamily::Constant:
            return k.amplitude * w.volume();
        case KernelFamily::GaussianBump: {
            // Separable over axes: (amplitude^{1/d} per axis) handled as one
            // amplitude factor times the product of 1-d integrals.
            const double axis =
                k.scale * std::sqrt(std::numbers::pi) * std::erf(W / k.scale);
            return k.amplitude * std::pow(axis, w.dim);
        }
        case KernelFamily::TopHat: {
            if (k.scale <= W) return k.amplitude * ball_volume(w.dim, k.scale);
            if (k.scale >= w.max_radius()) return k.amplitude * w.volume();
            if (w.dim == 1) return k.amplitude * 2.0 * std::min(k.scale, W);
            // Ball sticking out of the box: fall back to quadrature on the
            // indicator (accuracy limited by the jump).
            const KernelSpec kk = k;
            const int d = w.dim;
            return quad::integrate_box(
                [&](const double* x) {
                    return kk.radial(Eigen::Map<const Vec>(x, d).norm());
                },
                d, -W, W, 16, 8);
        }
    }
    return 0.0;
}

double kernel_window_integral_sigma(const KernelSpec& k, const Window& w, double sigma) {
    if (sigma == 0.0) return kernel_window_integral(k, w);
    const double W = w.half_width;
    const int d = w.dim;
    if (d == 1) {
        // Exact subinterval for the top-hat jump.
        double lo = -W, hi = W;
        if (k.family == KernelFamily::TopHat) {
            hi = std::min(W, k.scale);
            lo = -hi;
            if (hi <= 0.0) return 0.0;
        }
        return quad::integrate(
            [&](double x) {
                return k.radial(std::abs(x)) * psi_sigma_radial(std::abs(x), d, sigma);
            },
            lo, hi, 16, panels_for(w));
    }
    return quad::integrate_box(
        [&](const double* x) {
            Eigen::Map<const Vec> p(x, d);
            const double r = p.norm();
            return k.radial(r) * psi_sigma_radial(r, d, sigma);
        },
        d, -W, W, 16, 4);
}

double psi_window_integral(const Window& w) {
    const int d = w.dim;
    if (d == 1)
        return quad::integrate([&](double x) { return psi_radial(std::abs(x), 1); },
                               -w.half_width, w.half_width, 16, panels_for(w));
    return quad::integrate_box(
        [&](const double* x) { return psi(Eigen::Map<const Vec>(x, d)); }, d,
        -w.half_width, w.half_width, 16, 4);
}

DerivedConstants derive_constants(const ModelSpec& spec, bool allow_decoupled) {
    spec.validate();
    if (spec.a.at_origin() <= 0.0 && !allow_decoupled)
        throw ModelError("competition kernel must satisfy a(0)>0");

    const Window w = spec.box();
    const double rmax = w.max_radius();
    const int d = spec.dim;

    DerivedConstants c;
    // All built-in families attain their supremum at the origin.
    c.norm_b = spec.b.at_origin();
    c.norm_m = spec.m.at_origin();

    // sup over the window of a(x)/psi(x) = max over r of a(r) (1 + r^{d+1}).
    switch (spec.a.family) {
        case KernelFamily::Constant:
            c.norm_a = spec.a.amplitude * (1.0 + std::pow(rmax, d + 1));
            break;
        case KernelFamily::TopHat: {
            const double r = std::min(spec.a.scale, rmax);
            c.norm_a = spec.a.amplitude * (1.0 + std::pow(r, d + 1));
            break;
        }
        case KernelFamily::GaussianBump:
            c.norm_a = radial_max(
                [&](double r) {
                    return spec.a.radial(r) / psi_radial(r, d);
                },
                rmax);
            break;
    }

    c.mean_a = kernel_window_integral(spec.a, w);
    c.mean_psi = psi_window_integral(w);
    c.mean_b_sigma = kernel_window_integral_sigma(spec.b, w, spec.sigma);

    return c;
}

double kernel_cell_average_1d(const KernelSpec& k, double center, double h) {
    const double lo = center - 0.5 * h;
    const double hi = center + 0.5 * h;
    switch (k.family) {
        case KernelFamily::Constant:
            return k.amplitude;
        case KernelFamily::TopHat: {
            const double overlap =
                std::max(0.0, std::min(hi, k.scale) - std::max(lo, -k.scale));
            return k.amplitude * overlap / h;
        }
        case KernelFamily::GaussianBump: {
            const double s = k.scale;
            return k.amplitude * 0.5 * s * std::sqrt(std::numbers::pi) *
                   (std::erf(hi / s) - std::erf(lo / s)) / h;
        }
    }
    return 0.0;
}

QtRho qt_rho(PointRef x, double t, const ModelSpec& spec) {
    if (t < 0.0) throw DomainError("qt_rho: t must be >= 0");
    const double mx = spec.m(x);
    const double bx = spec.b(x);
    QtRho out;
    out.q = std::exp(-mx * t);
    out.rho = mx > 0.0 ? (1.0 - out.q) * bx / mx : bx * t;
    return out;
}

double time_horizon(double alpha, double alpha_prime, const DerivedConstants& c) {
    if (!(alpha > alpha_prime))
        throw DomainError("time_horizon: requires alpha > alpha'");
    const double denom =
        c.norm_b * std::exp(-alpha_prime) + c.mean_a * std::exp(alpha);
    if (denom == 0.0) return std::numeric_limits<double>::infinity();
    return (alpha - alpha_prime) / denom;
}

}  // namespace lbd
