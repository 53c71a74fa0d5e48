#pragma once

#include <Eigen/Dense>
#include <functional>

namespace lbd::quad {

// Gauss-Legendre rule; nodes ascending.
struct Rule1D {
    Eigen::ArrayXd nodes;
    Eigen::ArrayXd weights;
};

// Rule on the reference interval [-1, 1].
Rule1D gauss_legendre(int order);

// Rule mapped to [a, b].
Rule1D on_interval(const Rule1D& ref, double a, double b);

// Composite rule: `panels` equal subintervals of [a, b], `order` points each.
Rule1D composite(int order, double a, double b, int panels);

double integrate(const std::function<double(double)>& f, double a, double b,
                 int order = 16, int panels = 8);

// Tensor-product integration over the box [lo, hi]^dim. The integrand
// receives a pointer to `dim` coordinates. Throws SizeError when the node
// count exceeds `max_evals`.
double integrate_box(const std::function<double(const double*)>& f, int dim,
                     double lo, double hi, int order = 16, int panels = 1,
                     long max_evals = 40'000'000);

}  // namespace lbd::quad
