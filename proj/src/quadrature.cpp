#include "lbd/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "lbd/errors.hpp"

namespace lbd::quad {

Rule1D gauss_legendre(int order) {
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    Rule1D r;
    r.nodes.resize(order);
    r.weights.resize(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        // Tricomi initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[order - 1 - i] = x;
        r.weights[i] = w;
        r.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) r.nodes[order / 2] = 0.0;
    return r;
}

Rule1D on_interval(const Rule1D& ref, double a, double b) {
    Rule1D r;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    r.nodes = mid + half * ref.nodes;
    r.weights = half * ref.weights;
    return r;
}

Rule1D composite(int order, double a, double b, int panels) {
    if (panels < 1) throw DomainError("composite: panels must be >= 1");
    const Rule1D ref = gauss_legendre(order);
    Rule1D out;
    out.nodes.resize(order * panels);
    out.weights.resize(order * panels);
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        Rule1D local = on_interval(ref, a + p * h, a + (p + 1) * h);
        out.nodes.segment(p * order, order) = local.nodes;
        out.weights.segment(p * order, order) = local.weights;
    }
    return out;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int order, int panels) {
    const Rule1D r = composite(order, a, b, panels);
    double s = 0.0;
    for (int i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

double integrate_box(const std::function<double(const double*)>& f, int dim,
                     double lo, double hi, int order, int panels,
                     long max_evals) {
    const Rule1D axis = composite(order, lo, hi, panels);
    const long n = axis.nodes.size();
    double cost = 1.0;
    for (int k = 0; k < dim; ++k) cost *= static_cast<double>(n);
    if (cost > static_cast<double>(max_evals))
        throw SizeError("integrate_box: tensor grid needs " +
                        std::to_string(cost) + " evaluations (cap " +
                        std::to_string(max_evals) + ")");

    std::vector<double> x(dim, 0.0);
    std::function<double(int)> rec = [&](int axis_idx) -> double {
        double s = 0.0;
        for (long i = 0; i < n; ++i) {
            x[axis_idx] = axis.nodes[i];
            const double inner =
                (axis_idx + 1 == dim) ? f(x.data()) : rec(axis_idx + 1);
            s += axis.weights[i] * inner;
        }
        return s;
    };
    return dim == 0 ? f(nullptr) : rec(0);
}

}  // namespace lbd::quad
