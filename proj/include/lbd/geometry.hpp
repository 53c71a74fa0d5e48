#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace lbd {

using Vec = Eigen::VectorXd;
using PointRef = Eigen::Ref<const Eigen::VectorXd>;

// Periodic box [-W, W)^d with minimum-image metric.
struct Window {
    int dim = 1;
    double half_width = 1.0;

    double width() const { return 2.0 * half_width; }
    double volume() const { return std::pow(width(), dim); }
    // Largest attainable minimum-image norm (box corner).
    double max_radius() const { return half_width * std::sqrt(static_cast<double>(dim)); }

    double wrap_coord(double x) const {
        const double w = width();
        double y = std::fmod(x + half_width, w);
        if (y < 0) y += w;
        return y - half_width;
    }

    void wrap(double* x) const {
        for (int k = 0; k < dim; ++k) x[k] = wrap_coord(x[k]);
    }

    double min_image_coord(double dx) const {
        const double w = width();
        dx -= w * std::round(dx / w);
        if (dx < -half_width) dx += w;
        if (dx >= half_width) dx -= w;
        return dx;
    }

    // Minimum-image displacement x - y, written to out[0..dim).
    void min_image(const double* x, const double* y, double* out) const {
        for (int k = 0; k < dim; ++k) min_image_coord_to(x[k] - y[k], out[k]);
    }

    double distance(const double* x, const double* y) const {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) {
            const double d = min_image_coord(x[k] - y[k]);
            s += d * d;
        }
        return std::sqrt(s);
    }

  private:
    void min_image_coord_to(double dx, double& out) const { out = min_image_coord(dx); }
};

// Axis-aligned box, used for counting regions.
struct Box {
    Vec lo;
    Vec hi;

    static Box full(const Window& w) {
        Box b;
        b.lo = Vec::Constant(w.dim, -w.half_width);
        b.hi = Vec::Constant(w.dim, w.half_width);
        return b;
    }

    bool contains(const double* x) const {
        for (int k = 0; k < lo.size(); ++k)
            if (x[k] < lo[k] || x[k] >= hi[k]) return false;
        return true;
    }

    bool inside(const Box& outer) const {
        for (int k = 0; k < lo.size(); ++k)
            if (lo[k] < outer.lo[k] || hi[k] > outer.hi[k]) return false;
        return true;
    }
};

// Finite multiset of points; duplicates are kept as distinct entries.
struct Configuration {
    int dim = 1;
    std::vector<double> coords;  // flat, size = dim * size()

    Configuration() = default;
    explicit Configuration(int d) : dim(d) {}

    int size() const { return dim > 0 ? static_cast<int>(coords.size()) / dim : 0; }
    bool empty() const { return coords.empty(); }

    const double* point_ptr(int i) const { return coords.data() + static_cast<size_t>(i) * dim; }

    Eigen::Map<const Vec> point(int i) const {
        return Eigen::Map<const Vec>(point_ptr(i), dim);
    }

    void add(const double* x) { coords.insert(coords.end(), x, x + dim); }
    void add(PointRef x) { coords.insert(coords.end(), x.data(), x.data() + dim); }

    // Swap-remove; operations on configurations are order-insensitive.
    void remove(int i) {
        const int n = size();
        for (int k = 0; k < dim; ++k)
            coords[static_cast<size_t>(i) * dim + k] = coords[static_cast<size_t>(n - 1) * dim + k];
        coords.resize(coords.size() - dim);
    }

    void clear() { coords.clear(); }

    // Sub-configuration picked out by a bit mask over point indices.
    Configuration subset(unsigned mask) const {
        Configuration sub(dim);
        for (int i = 0; i < size(); ++i)
            if (mask & (1u << i)) sub.add(point_ptr(i));
        return sub;
    }

    int count_in(const Box& region) const {
        int c = 0;
        for (int i = 0; i < size(); ++i)
            if (region.contains(point_ptr(i))) ++c;
        return c;
    }
};

}  // namespace lbd
