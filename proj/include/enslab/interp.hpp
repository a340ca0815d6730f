#pragma once
// Multilinear interpolation of grid fields at off-node points (used for
// tabulated label functions and for sampling solver fields along
// trajectories).  Clamped grids clamp the query into the domain; periodic
// grids wrap it.

#include <cmath>

#include "enslab/grid.hpp"
#include "enslab/hamiltonian.hpp"

namespace enslab {

inline double interpolate(const ScalarField& f, const VecD& x) {
    const Grid& g = f.grid();
    const int dim = g.dim();
    std::array<std::size_t, 3> i0{0, 0, 0};
    std::array<double, 3> w{0.0, 0.0, 0.0};  // weight of the upper corner
    for (int a = 0; a < dim; ++a) {
        const Axis& ax = g.axis(a);
        const double h = g.spacing(a);
        double s = (x[a] - ax.lo) / h;
        if (g.boundary() == Boundary::periodic) {
            const double n = static_cast<double>(ax.n);
            s -= std::floor(s / n) * n;  // into [0, n)
            if (s >= n) s = 0.0;
        } else {
            const double smax = static_cast<double>(ax.n - 1);
            if (s < 0.0) s = 0.0;
            if (s > smax) s = smax;
        }
        double cell = std::floor(s);
        if (g.boundary() == Boundary::clamped && cell > static_cast<double>(ax.n - 2))
            cell = static_cast<double>(ax.n - 2);
        i0[static_cast<std::size_t>(a)] = static_cast<std::size_t>(cell);
        w[static_cast<std::size_t>(a)] = s - cell;
    }
    double acc = 0.0;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        std::array<std::size_t, 3> idx = i0;
        for (int a = 0; a < dim; ++a) {
            const bool hi = (c >> a) & 1;
            const double wa = w[static_cast<std::size_t>(a)];
            weight *= hi ? wa : (1.0 - wa);
            if (hi) {
                std::size_t& ia = idx[static_cast<std::size_t>(a)];
                ia += 1;
                if (ia >= g.extent(a)) ia = 0;  // periodic wrap of the upper corner
            }
        }
        if (weight != 0.0) acc += weight * f[g.ravel(idx)];
    }
    return acc;
}

}  // namespace enslab
