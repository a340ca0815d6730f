// Sample-ensemble representation: inverse-CDF init (delta-in-momentum pure
// state), symplectic/midpoint characteristics, kernel density recovery.
// Statistical oracles run on fixed seeds so every run sees the same draw.

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "enslab/ensemble.hpp"

using namespace enslab;

TEST_CASE("init_pure: momenta exactly match P0 at the drawn positions") {
    Grid g = Grid::line(-3.0, 3.0, 128, Boundary::clamped);
    ScalarField rho0 = ScalarField::sample(g, [](double x) { return std::exp(-0.5 * x * x); });
    VectorField P0(g);
    P0.comp[0] = ScalarField::sample(g, [](double x) { return std::sin(1.3 * x); });
    ParticleEnsemble e = init_pure(rho0, P0, 2000, RngStream(11));
    for (std::size_t s = 0; s < e.size(); ++s) {
        CHECK(e.p[s][0] == interpolate(P0.comp[0], e.x[s]));  // exact by construction
        CHECK(e.xi[s][0] == e.x[s][0]);                        // standard labeling
    }
}

TEST_CASE("init_pure: uniform density passes a KS test (N = 1e4, fixed seed)") {
    Grid g = Grid::line(0.0, 1.0, 64, Boundary::clamped);
    ScalarField rho0(g, 1.0);
    VectorField P0(g);
    ParticleEnsemble e = init_pure(rho0, P0, 10000, RngStream(20260817));
    std::vector<double> xs(e.size());
    for (std::size_t s = 0; s < e.size(); ++s) xs[s] = e.x[s][0];
    std::sort(xs.begin(), xs.end());
    double ks = 0.0;
    const double N = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = xs[i];  // uniform CDF on [0,1]
        ks = std::max(ks, std::abs(F - static_cast<double>(i) / N));
        ks = std::max(ks, std::abs(static_cast<double>(i + 1) / N - F));
    }
    CHECK(ks < 0.02);
}

TEST_CASE("init_pure: support confinement") {
    Grid g = Grid::line(0.0, 1.0, 501, Boundary::clamped);
    ScalarField rho0 = ScalarField::sample(g, [](double x) {
        if (x <= 0.4 || x >= 0.6) return 0.0;
        const double s = std::sin(M_PI * (x - 0.4) / 0.2);
        return s * s;
    });
    VectorField P0(g);
    ParticleEnsemble e = init_pure(rho0, P0, 5000, RngStream(3));
    for (std::size_t s = 0; s < e.size(); ++s) {
        CHECK(e.x[s][0] >= 0.4);
        CHECK(e.x[s][0] <= 0.6);
    }

    ScalarField zero(g, 0.0);
    CHECK_THROWS(init_pure(zero, P0, 10, RngStream(1)));
}

TEST_CASE("step: free classical drift is exact") {
    ParticleEnsemble e;
    e.dim = 1;
    e.x = {VecD(0.0)};
    e.p = {VecD(1.0)};
    e.xi = {VecD(0.0)};
    HamiltonianModel m = Classical{1.0, Potential::zero()};
    ParticleEnsemble e1 = step(e, m, 0.1);
    CHECK(e1.x[0][0] == 0.1);
    CHECK(e1.p[0][0] == 1.0);
    CHECK_THROWS(step(e, HamiltonianModel(EffectiveStochastic{}), 0.1));
    CHECK_THROWS(step(e, m, 0.0));
}

TEST_CASE("step: harmonic energy drift < 1e-6 relative over 1e4 leapfrog steps") {
    ParticleEnsemble e;
    e.dim = 1;
    e.x = {VecD(1.0)};
    e.p = {VecD(0.0)};
    e.xi = {VecD(1.0)};
    HamiltonianModel m = Classical{1.0, Potential::harmonic(1.0)};
    const double E0 = eval_H(m, 0.0, e.x[0], e.p[0]);
    double worst = 0.0;
    const double dt = 1e-3;
    for (int k = 0; k < 10000; ++k) {
        e = step(e, m, dt);
        const double E = eval_H(m, 0.0, e.x[0], e.p[0]);
        worst = std::max(worst, std::abs(E - E0) / E0);
    }
    CHECK(worst < 1e-6);
    CHECK(e.xi[0][0] == 1.0);  // labels never move
}

TEST_CASE("step: free relativistic sample moves on the straight line x = 0.6 t") {
    // p = 3/4 with m = c = 1 gives v = p/sqrt(1+p^2) = 0.75/1.25 = 0.6.
    ParticleEnsemble e;
    e.dim = 1;
    e.x = {VecD(0.0)};
    e.p = {VecD(0.75)};
    e.xi = {VecD(0.0)};
    HamiltonianModel m = Relativistic{1.0, 1.0};
    const double dt = 0.01;
    for (int k = 1; k <= 100; ++k) {
        e = step(e, m, dt);
        const double t = dt * static_cast<double>(k);
        CHECK(std::abs(e.x[0][0] - 0.6 * t) < 1e-12);
        CHECK(e.p[0][0] == 0.75);
    }
}

TEST_CASE("phase-space area of a sample parallelogram is conserved (harmonic)") {
    const double d = 1e-3;
    ParticleEnsemble e;
    e.dim = 1;
    e.x = {VecD(1.0), VecD(1.0 + d), VecD(1.0)};
    e.p = {VecD(0.2), VecD(0.2), VecD(0.2 + d)};
    e.xi = e.x;
    HamiltonianModel m = Classical{1.0, Potential::harmonic(1.0)};
    auto area = [](const ParticleEnsemble& s) {
        const double ax = s.x[1][0] - s.x[0][0], ap = s.p[1][0] - s.p[0][0];
        const double bx = s.x[2][0] - s.x[0][0], bp = s.p[2][0] - s.p[0][0];
        return ax * bp - ap * bx;
    };
    const double A0 = area(e);
    const int steps = 6283;
    const double dt = 2.0 * M_PI / static_cast<double>(steps);  // one period
    for (int k = 0; k < steps; ++k) e = step(e, m, dt);
    CHECK(std::abs(area(e) - A0) / std::abs(A0) < 1e-6);
    CHECK(e.size() == 3);
}

TEST_CASE("density_estimate: point mass, flat profile, Gaussian L1") {
    Grid g = Grid::line(0.0, 1.0, 64, Boundary::clamped);

    ParticleEnsemble pt;
    pt.dim = 1;
    for (int i = 0; i < 50; ++i) {
        pt.x.push_back(VecD(0.5));
        pt.p.push_back(VecD(0.0));
        pt.xi.push_back(VecD(0.5));
    }
    ScalarField peak = density_estimate(pt, g, 0.03);
    CHECK(std::abs(integrate(peak) - 1.0) < 1e-6);
    std::size_t argmax = 0;
    for (std::size_t i = 0; i < peak.size(); ++i)
        if (peak[i] > peak[argmax]) argmax = i;
    CHECK(std::abs(g.coord(0, argmax) - 0.5) <= g.spacing(0));

    // Uniform: flat within 5% away from the kernel's edge shadow.
    ScalarField rho0(g, 1.0);
    VectorField P0(g);
    ParticleEnsemble eu = init_pure(rho0, P0, 100000, RngStream(77));
    const double bw = 2.0 * g.spacing(0);
    ScalarField flat = density_estimate(eu, g, bw);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double x = g.coord(0, i);
        if (x < 5.0 * bw || x > 1.0 - 5.0 * bw) continue;
        CHECK(std::abs(flat[i] - 1.0) < 0.05);
    }

    // Gaussian target, N = 1e5: L1 distance < 0.05.
    Grid gg = Grid::line(-8.0, 8.0, 256, Boundary::clamped);
    const double nrm = 1.0 / std::sqrt(2.0 * M_PI);
    ScalarField rg = ScalarField::sample(gg, [&](double x) { return nrm * std::exp(-0.5 * x * x); });
    VectorField Pg(gg);
    ParticleEnsemble eg = init_pure(rg, Pg, 100000, RngStream(424242));
    ScalarField est = density_estimate(eg, gg, 2.0 * gg.spacing(0));
    ScalarField diff = est;
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(est[i] - rg[i]);
    CHECK(integrate(diff) < 0.05);

    ParticleEnsemble empty;
    CHECK_THROWS(density_estimate(empty, g, 0.1));
}

TEST_CASE("labels are bitwise constant along trajectories") {
    Grid g = Grid::line(-2.0, 2.0, 64, Boundary::clamped);
    ScalarField rho0 = ScalarField::sample(g, [](double x) { return std::exp(-x * x); });
    VectorField P0(g);
    P0.comp[0] = ScalarField::sample(g, [](double x) { return 0.3 * x; });
    ParticleEnsemble e = init_pure(rho0, P0, 500, RngStream(5));
    const std::vector<VecD> xi0 = e.xi;
    HamiltonianModel m = Classical{1.0, Potential::harmonic(0.7)};
    for (int k = 0; k < 100; ++k) e = step(e, m, 1e-2);
    for (std::size_t s = 0; s < e.size(); ++s) CHECK(e.xi[s][0] == xi0[s][0]);
}
