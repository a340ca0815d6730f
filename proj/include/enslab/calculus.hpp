#pragma once
// Discrete calculus on uniform grids: second-order central differences in the
// interior, second-order one-sided stencils at clamped edges, trapezoid
// (clamped) / rectangle (periodic) quadrature.  All stencils are exact on the
// polynomials their order implies: first derivatives on quadratics, the
// one-sided second-derivative edge stencil on cubics.

#include <stdexcept>

#include "enslab/grid.hpp"

namespace enslab {

namespace detail {

// Apply a 1-D pointwise operation along `axis` of a (possibly) multi-d field.
// op(line, n, h, out_line) sees a strided view; we gather/scatter through
// index arithmetic to keep the stencil code one-dimensional.
template <class Op>
ScalarField apply_along_axis(const ScalarField& f, int axis, Op&& op) {
    const Grid& g = f.grid();
    if (axis < 0 || axis >= g.dim())
        throw std::invalid_argument("calculus: axis out of range");
    const std::size_t n = g.extent(axis);
    if (n < 4) throw std::invalid_argument("calculus: grid too small for stencil");
    const std::size_t stride = g.stride(axis);
    const std::size_t total = g.size();
    const std::size_t nlines = total / n;

    ScalarField out(g);
    std::vector<double> line(n), dline(n);
    for (std::size_t l = 0; l < nlines; ++l) {
        // Base flat index of this line: distribute l over the other axes.
        std::size_t rem = l, base = 0;
        for (int a = 0; a < g.dim(); ++a) {
            if (a == axis) continue;
            const std::size_t ext = g.extent(a);
            const std::size_t ia = rem % ext;
            rem /= ext;
            base += ia * g.stride(a);
        }
        for (std::size_t i = 0; i < n; ++i) line[i] = f[base + i * stride];
        op(line, dline);
        for (std::size_t i = 0; i < n; ++i) out[base + i * stride] = dline[i];
    }
    return out;
}

}  // namespace detail

// d/dx_axis, second order.
inline ScalarField derivative(const ScalarField& f, int axis) {
    const Grid& g = f.grid();
    const double h = g.spacing(axis);
    const bool periodic = (g.boundary() == Boundary::periodic);
    return detail::apply_along_axis(f, axis, [h, periodic](const std::vector<double>& u,
                                                           std::vector<double>& d) {
        const std::size_t n = u.size();
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
        if (periodic) {
            d[0] = (u[1] - u[n - 1]) / (2.0 * h);
            d[n - 1] = (u[0] - u[n - 2]) / (2.0 * h);
        } else {
            d[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
            d[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        }
    });
}

inline VectorField gradient(const ScalarField& f) {
    VectorField out(f.grid());
    for (int a = 0; a < f.grid().dim(); ++a) out.comp[static_cast<std::size_t>(a)] = derivative(f, a);
    return out;
}

// d2/dx_axis^2, second order (edge stencil 2,-5,4,-1 is exact through cubics).
inline ScalarField second_derivative(const ScalarField& f, int axis) {
    const Grid& g = f.grid();
    const double h = g.spacing(axis);
    const double h2 = h * h;
    const bool periodic = (g.boundary() == Boundary::periodic);
    return detail::apply_along_axis(f, axis, [h2, periodic](const std::vector<double>& u,
                                                            std::vector<double>& d) {
        const std::size_t n = u.size();
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
        if (periodic) {
            d[0] = (u[1] - 2.0 * u[0] + u[n - 1]) / h2;
            d[n - 1] = (u[0] - 2.0 * u[n - 1] + u[n - 2]) / h2;
        } else {
            d[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
            d[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
        }
    });
}

inline ScalarField laplacian(const ScalarField& f) {
    ScalarField out = second_derivative(f, 0);
    for (int a = 1; a < f.grid().dim(); ++a) {
        ScalarField d2 = second_derivative(f, a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d2[i];
    }
    return out;
}

inline ScalarField divergence(const VectorField& v) {
    ScalarField out = derivative(v.comp.at(0), 0);
    for (int a = 1; a < v.dim(); ++a) {
        ScalarField d = derivative(v.comp[static_cast<std::size_t>(a)], a);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    return out;
}

// Quadrature weight of node `flat` (tensor product of per-axis weights).
inline double quad_weight(const Grid& g, std::size_t flat) {
    double w = 1.0;
    const auto idx = g.unravel(flat);
    for (int a = 0; a < g.dim(); ++a) {
        double wa = g.spacing(a);
        if (g.boundary() == Boundary::clamped) {
            const std::size_t i = idx[static_cast<std::size_t>(a)];
            if (i == 0 || i == g.extent(a) - 1) wa *= 0.5;
        }
        w *= wa;
    }
    return w;
}

inline double integrate(const ScalarField& f) {
    const Grid& g = f.grid();
    double s = 0.0;
    if (g.boundary() == Boundary::periodic) {
        // Rectangle rule; uniform weight, exact for trig polynomials below Nyquist.
        double w = 1.0;
        for (int a = 0; a < g.dim(); ++a) w *= g.spacing(a);
        for (std::size_t i = 0; i < f.size(); ++i) s += f[i];
        return s * w;
    }
    for (std::size_t i = 0; i < f.size(); ++i) s += quad_weight(g, i) * f[i];
    return s;
}

}  // namespace enslab
