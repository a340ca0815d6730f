#pragma once
// Trajectory-ensemble (sample) representation of the pure statistical state
// F(t,x,p) = rho(t,x) delta(p - P(t,x)): N weighted-1/N samples carrying
// position, momentum and an immutable Lagrangian label assigned at init
// (standard labeling xi = x(0)).  Evolution moves every sample along the
// characteristics dx/dt = dH/dp, dp/dt = -dH/dx; the labels never change —
// that is the sample-level form of the Lin constraints.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "enslab/calculus.hpp"
#include "enslab/grid.hpp"
#include "enslab/hamiltonian.hpp"
#include "enslab/interp.hpp"
#include "enslab/rng.hpp"

namespace enslab {

struct ParticleEnsemble {
    int dim = 1;
    std::vector<VecD> x, p, xi;  // parallel arrays; xi immutable after init
    std::uint64_t seed = 0;      // recorded for reproducibility

    std::size_t size() const { return x.size(); }
};

// Draw positions from rho0 by inverse CDF of the trapezoid-consistent
// piecewise-linear density (deterministic for a fixed seed), set momenta
// exactly to P0 interpolated at the drawn position, label with xi = x.
// One-dimensional: every PDE-facing scenario runs in dim 1.
inline ParticleEnsemble init_pure(const ScalarField& rho0, const VectorField& P0, std::size_t N,
                                  RngStream rng) {
    const Grid& g = rho0.grid();
    if (g.dim() != 1)
        throw std::invalid_argument("init_pure: sampling implemented for 1-d grids");
    require_same_grid(P0.grid(), g, "init_pure");
    if (N < 1) throw std::invalid_argument("init_pure: need at least one sample");

    const std::size_t n = g.extent(0);
    const double h = g.spacing(0);
    const bool periodic = (g.boundary() == Boundary::periodic);
    const std::size_t ncell = periodic ? n : n - 1;

    // Cell masses of the piecewise-linear density (trapezoid measure).
    std::vector<double> cmass(ncell), cdf(ncell + 1, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < ncell; ++i) {
        const double a = rho0[i];
        const double b = rho0[(i + 1) % n];
        if (a < 0.0 || b < 0.0) throw std::invalid_argument("init_pure: rho0 must be nonnegative");
        cmass[i] = 0.5 * (a + b) * h;
        total += cmass[i];
        cdf[i + 1] = total;
    }
    if (!(total > 0.0)) throw std::invalid_argument("init_pure: rho0 vanishes identically");

    ParticleEnsemble e;
    e.dim = 1;
    e.seed = rng.seed();
    e.x.reserve(N);
    e.p.reserve(N);
    e.xi.reserve(N);
    for (std::size_t s = 0; s < N; ++s) {
        const double u = rng.uniform() * total;
        // Binary search for the containing cell.
        std::size_t lo = 0, hi = ncell;
        while (lo + 1 < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (cdf[mid] <= u)
                lo = mid;
            else
                hi = mid;
        }
        const double a = rho0[lo];
        const double b = rho0[(lo + 1) % n];
        const double um = (cmass[lo] > 0.0) ? (u - cdf[lo]) / cmass[lo] : 0.5;  // in [0,1)
        // Invert the in-cell linear CDF: rho(s) ~ a + (b-a) s on s in [0,1].
        double sfrac;
        const double d = b - a;
        if (std::abs(d) < 1e-14 * (a + b + 1e-300)) {
            sfrac = um;
        } else {
            const double mean2 = a + 0.5 * d;  // cell mass / h
            sfrac = (-a + std::sqrt(a * a + 2.0 * d * um * mean2)) / d;
            if (sfrac < 0.0) sfrac = 0.0;
            if (sfrac > 1.0) sfrac = 1.0;
        }
        const double xs = g.coord(0, lo) + sfrac * h;
        VecD pos(xs);
        e.x.push_back(pos);
        e.p.push_back(VecD(interpolate(P0.comp[0], pos)));
        e.xi.push_back(pos);
    }
    return e;
}

namespace detail {

inline void step_leapfrog(ParticleEnsemble& e, const Classical& cl, double dt) {
    const HamiltonianModel model = cl;
    for (std::size_t s = 0; s < e.size(); ++s) {
        VecD x = e.x[s], p = e.p[s];
        VecD f = dHdx(model, 0.0, x, p);
        for (int a = 0; a < x.n; ++a) p[a] -= 0.5 * dt * f[a];
        for (int a = 0; a < x.n; ++a) x[a] += dt * p[a] / cl.m;
        f = dHdx(model, 0.0, x, p);
        for (int a = 0; a < x.n; ++a) p[a] -= 0.5 * dt * f[a];
        e.x[s] = x;
        e.p[s] = p;
    }
}

inline void step_midpoint(ParticleEnsemble& e, const HamiltonianModel& model, double dt) {
    for (std::size_t s = 0; s < e.size(); ++s) {
        const VecD x0 = e.x[s], p0 = e.p[s];
        VecD x1 = x0, p1 = p0;
        for (int it = 0; it < 50; ++it) {
            VecD xm = x0, pm = p0;
            for (int a = 0; a < x0.n; ++a) {
                xm[a] = 0.5 * (x0[a] + x1[a]);
                pm[a] = 0.5 * (p0[a] + p1[a]);
            }
            const VecD v = velocity_from_momentum(model, 0.0, xm, pm);
            const VecD f = dHdx(model, 0.0, xm, pm);
            double delta = 0.0;
            for (int a = 0; a < x0.n; ++a) {
                const double xn = x0[a] + dt * v[a];
                const double pn = p0[a] - dt * f[a];
                delta = std::max(delta, std::abs(xn - x1[a]) + std::abs(pn - p1[a]));
                x1[a] = xn;
                p1[a] = pn;
            }
            if (delta < 1e-14 * (1.0 + std::abs(x1[0]) + std::abs(p1[0]))) break;
        }
        e.x[s] = x1;
        e.p[s] = p1;
    }
}

}  // namespace detail

// One step along the characteristics; labels are untouched.
inline ParticleEnsemble step(const ParticleEnsemble& in, const HamiltonianModel& model, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("ensemble step: dt must be positive");
    ParticleEnsemble e = in;
    if (auto* cl = std::get_if<Classical>(&model)) {
        detail::step_leapfrog(e, *cl, dt);
    } else if (std::get_if<Relativistic>(&model)) {
        detail::step_midpoint(e, model, dt);
    } else {
        throw std::invalid_argument(
            "ensemble step: variant error - stochastic effective H has no point characteristics");
    }
    return e;
}

// Gaussian-kernel density estimate on a grid, normalized to unit mass.
inline ScalarField density_estimate(const ParticleEnsemble& e, const Grid& grid, double bandwidth) {
    if (e.size() == 0) throw std::invalid_argument("density_estimate: empty ensemble");
    if (!(bandwidth > 0.0)) throw std::invalid_argument("density_estimate: bandwidth must be positive");
    if (grid.dim() != 1)
        throw std::invalid_argument("density_estimate: implemented for 1-d grids");

    const std::size_t n = grid.extent(0);
    const double h = grid.spacing(0);
    const bool periodic = (grid.boundary() == Boundary::periodic);
    const double L = grid.axis(0).hi - grid.axis(0).lo;
    ScalarField out(grid, 0.0);
    const double cut = 8.0 * bandwidth;
    const long reach = static_cast<long>(std::ceil(cut / h));
    const double kn = 1.0 / (bandwidth * std::sqrt(2.0 * M_PI));
    for (std::size_t s = 0; s < e.size(); ++s) {
        const double xs = e.x[s][0];
        const long jc = static_cast<long>(std::floor((xs - grid.axis(0).lo) / h));
        for (long j = jc - reach; j <= jc + reach + 1; ++j) {
            long jj = j;
            if (periodic) {
                jj = ((j % static_cast<long>(n)) + static_cast<long>(n)) % static_cast<long>(n);
            } else if (j < 0 || j >= static_cast<long>(n)) {
                continue;
            }
            double dx = grid.coord(0, static_cast<std::size_t>(jj)) - xs;
            if (periodic) dx -= L * std::round(dx / L);
            out[static_cast<std::size_t>(jj)] += kn * std::exp(-0.5 * dx * dx / (bandwidth * bandwidth));
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= static_cast<double>(e.size());
    const double mass = integrate(out);
    if (!(mass > 0.0)) throw std::invalid_argument("density_estimate: zero mass on grid");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= mass;
    return out;
}

}  // namespace enslab
