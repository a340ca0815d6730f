#pragma once

// Wave-equation steppers for the single-component field psi(t, x).
//
// step_linear advances i hbar d0 psi = -(hbar^2/2m) lap psi [+ m c^2 psi] with
// the Cayley (Crank-Nicolson) scheme: each axis contributes a unitary factor
// (I + i dt H_a / 2 hbar)^{-1} (I - i dt H_a / 2 hbar), so the discrete norm is
// conserved to rounding and the scheme is unconditionally stable.  The free
// axis operators commute, so the per-axis factorization loses no order.
//
// step_nonlinear advances the b0-wave equation
//     i b0 d0 psi = -(b0^2/2m) lap psi [+ m c^2 psi] + W[rho] psi,
//     W[rho] = (b0^2 - hbar^2)/(2m) * lap(sqrt rho)/sqrt(rho),
// by Strang splitting: a half-step unitary phase rotation exp(-i dt W / 2 b0)
// with W evaluated from the current (lagged) density, the Cayley linear step
// with coefficient b0, and a second half rotation from the updated density.
// Rotations leave |psi|^2 untouched, so total mass is conserved exactly as in
// the linear scheme.  At b0 = hbar the coupling W vanishes identically and the
// stepper degenerates to step_linear bit for bit.
//
// Clamped grids impose psi = 0 at the wall nodes (hard box); size the box so
// the boundary mass is negligible.  Periodic grids wrap via a cyclic solve.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "fluid.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "psi.hpp"

namespace enslab {

enum class WaveScheme { cayley };

struct WaveSolverConfig {
    double m = 1.0;
    double hbar = 1.0;
    double c = 1.0;
    double b0 = 1.0;
    bool include_rest_mass = false;
    double dt = 1e-3;
    WaveScheme scheme = WaveScheme::cayley;

    void validate() const {
        if (!(m > 0.0)) throw std::invalid_argument("wave config error - mass must be positive");
        if (!(hbar > 0.0)) throw std::invalid_argument("wave config error - hbar must be positive");
        if (!(c > 0.0)) throw std::invalid_argument("wave config error - c must be positive");
        if (b0 == 0.0) throw std::invalid_argument("wave config error - b0 must be nonzero");
        if (!(dt > 0.0)) throw std::invalid_argument("wave config error - dt must be positive");
    }

    // hbar dt / (2 m h^2) on the finest axis; recorded alongside runs.  The
    // Cayley scheme is stable for any value, this is an accuracy indicator.
    double stability_ratio(const Grid& g) const {
        double hmin = g.spacing(0);
        for (int a = 1; a < g.dim(); ++a) hmin = std::min(hmin, g.spacing(a));
        return hbar * dt / (2.0 * m * hmin * hmin);
    }
};

namespace detail {

// In-place Thomas solve of a tridiagonal system with constant off-diagonal e
// and constant diagonal d except for overridable first/last entries.
inline void wave_thomas(std::vector<Complex>& v, Complex d_first, Complex d_mid, Complex d_last,
                        Complex e) {
    const std::size_t n = v.size();
    if (n == 0) return;
    std::vector<Complex> cp(n);
    Complex denom = d_first;
    cp[0] = e / denom;
    v[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        const Complex di = (i == n - 1) ? d_last : d_mid;
        denom = di - e * cp[i - 1];
        cp[i] = e / denom;
        v[i] = (v[i] - e * v[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) v[i] -= cp[i] * v[i + 1];
}

// In-place solve of the cyclic tridiagonal system (uniform diagonal d, uniform
// off-diagonal and corner entries e) by the Sherman-Morrison rank-one update.
inline void wave_cyclic(std::vector<Complex>& v, Complex d, Complex e) {
    const std::size_t n = v.size();
    const Complex gamma = -d;
    const Complex d_first = d - gamma;
    const Complex d_last = d - e * e / gamma;
    wave_thomas(v, d_first, d, d_last, e);
    std::vector<Complex> q(n, Complex(0.0, 0.0));
    q[0] = gamma;
    q[n - 1] = e;
    wave_thomas(q, d_first, d, d_last, e);
    const Complex fact =
        (v[0] + e * v[n - 1] / gamma) / (1.0 + q[0] + e * q[n - 1] / gamma);
    for (std::size_t i = 0; i < n; ++i) v[i] -= fact * q[i];
}

// One Cayley factor along `axis` for every line of the field, with kinetic
// coefficient kappa (hbar for the linear equation, b0 for the nonlinear one)
// and a uniform diagonal shift `rest` (the rest-mass term, folded into a
// single axis so it enters the product exactly once).
inline void cayley_axis(std::vector<Complex>& comp, const Grid& g, int axis, double kappa,
                        double m, double rest, double dt) {
    const std::size_t n = g.extent(axis);
    const std::size_t stride = g.stride(axis);
    const double h = g.spacing(axis);
    const double w = kappa * kappa / (2.0 * m * h * h);
    const Complex z(0.0, dt / (2.0 * kappa));
    const Complex dl = 1.0 + z * (2.0 * w + rest);
    const Complex el = -z * w;
    const Complex dr = 1.0 - z * (2.0 * w + rest);
    const Complex er = z * w;
    const bool periodic = g.boundary() == Boundary::periodic;

    std::vector<Complex> line(n), rhs(n);
    for (std::size_t base = 0; base < g.size(); ++base) {
        if (g.unravel(base)[static_cast<std::size_t>(axis)] != 0) continue;
        for (std::size_t j = 0; j < n; ++j) line[j] = comp[base + j * stride];
        if (periodic) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
                rhs[j] = dr * line[j] + er * (line[jp] + line[jm]);
            }
            wave_cyclic(rhs, dl, el);
            for (std::size_t j = 0; j < n; ++j) comp[base + j * stride] = rhs[j];
        } else {
            // Hard box: the wall nodes are held at zero, interior solved.
            line[0] = Complex(0.0, 0.0);
            line[n - 1] = Complex(0.0, 0.0);
            rhs.assign(n - 2, Complex(0.0, 0.0));
            for (std::size_t j = 1; j + 1 < n; ++j)
                rhs[j - 1] = dr * line[j] + er * (line[j + 1] + line[j - 1]);
            wave_thomas(rhs, dl, dl, dl, el);
            comp[base] = Complex(0.0, 0.0);
            comp[base + (n - 1) * stride] = Complex(0.0, 0.0);
            for (std::size_t j = 1; j + 1 < n; ++j) comp[base + j * stride] = rhs[j - 1];
            rhs.resize(n);
        }
    }
}

inline void wave_precheck(const WaveField& w, const WaveSolverConfig& cfg, const char* who) {
    cfg.validate();
    if (w.k() != 1)
        throw std::invalid_argument(std::string(who) + ": single-component fields only");
}

}  // namespace detail

// Density self-coupling W[rho] of the nonlinear wave equation, evaluated in
// quotient-log form lap(sqrt rho)/sqrt(rho) = lap(L)/2 + |grad L|^2/4 with
// L = ln rho and an additive floor of 1e-12 of the peak, so vacuum tails stay
// finite.  Identically zero when b0 = hbar.
inline ScalarField nonlinear_potential(const ScalarField& rho, const WaveSolverConfig& cfg) {
    cfg.validate();
    ScalarField out(rho.grid(), 0.0);
    const double coef = (cfg.b0 * cfg.b0 - cfg.hbar * cfg.hbar) / (2.0 * cfg.m);
    if (coef == 0.0) return out;
    const double mx = rho.max();
    if (!(mx > 0.0))
        throw std::runtime_error("schrodinger error - density floor breach, no positive mass");
    ScalarField r = rho;
    const double eps = 1e-12 * mx;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::max(r[i], 0.0) + eps;
    for (int a = 0; a < rho.grid().dim(); ++a) {
        ScalarField d1 = detail::grad_log_quotient(r, a);
        ScalarField d2 = detail::second_log_quotient(r, a);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += coef * (0.5 * d2[i] + 0.25 * d1[i] * d1[i]);
    }
    return out;
}

// One Cayley step of the linear equation i hbar d0 psi = H psi with
// H = -(hbar^2/2m) lap + m c^2 (rest term only if configured).
inline WaveField step_linear(const WaveField& w, const WaveSolverConfig& cfg) {
    detail::wave_precheck(w, cfg, "step_linear");
    WaveField out = w;
    const Grid& g = w.grid();
    const double rest0 = cfg.include_rest_mass ? cfg.m * cfg.c * cfg.c : 0.0;
    for (int a = 0; a < g.dim(); ++a)
        detail::cayley_axis(out.comp[0], g, a, cfg.hbar, cfg.m, a == 0 ? rest0 : 0.0, cfg.dt);
    return out;
}

// One Strang step of the nonlinear equation: half phase rotation by the lagged
// W[rho], Cayley step with coefficient b0, half rotation by the updated W.
inline WaveField step_nonlinear(const WaveField& w, const WaveSolverConfig& cfg) {
    detail::wave_precheck(w, cfg, "step_nonlinear");
    WaveField out = w;
    const Grid& g = w.grid();
    const bool coupled = cfg.b0 * cfg.b0 != cfg.hbar * cfg.hbar;

    auto half_rotate = [&]() {
        ScalarField wpot = nonlinear_potential(psi_density(out), cfg);
        for (std::size_t i = 0; i < out.size(); ++i)
            out.comp[0][i] *= std::exp(Complex(0.0, -0.5 * cfg.dt * wpot[i] / cfg.b0));
    };

    if (coupled) half_rotate();
    const double rest0 = cfg.include_rest_mass ? cfg.m * cfg.c * cfg.c : 0.0;
    for (int a = 0; a < g.dim(); ++a)
        detail::cayley_axis(out.comp[0], g, a, cfg.b0, cfg.m, a == 0 ? rest0 : 0.0, cfg.dt);
    if (coupled) half_rotate();
    return out;
}

struct UncertaintyReport {
    double p_predicted = 0.0;
    double p_measured = 0.0;
    double ratio = 0.0;
    double width_initial = 0.0;
    double width_final = 0.0;
};

namespace detail {

// rms spatial width of a density about its own centroid.
inline double rms_width(const ScalarField& rho) {
    const Grid& g = rho.grid();
    const double mass = integrate(rho);
    if (!(mass > 0.0))
        throw std::runtime_error("uncertainty error - density has no positive mass");
    double wsq = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        ScalarField xr(g, 0.0);
        for (std::size_t i = 0; i < xr.size(); ++i)
            xr[i] = g.point(i)[static_cast<std::size_t>(a)] * rho[i];
        const double mean = integrate(xr) / mass;
        ScalarField vr(g, 0.0);
        for (std::size_t i = 0; i < vr.size(); ++i) {
            const double dx = g.point(i)[static_cast<std::size_t>(a)] - mean;
            vr[i] = dx * dx * rho[i];
        }
        wsq += integrate(vr) / mass;
    }
    return std::sqrt(wsq);
}

// A usable initial packet falls away monotonically from its densest node
// along every axis line through it (up to a small tolerance).
inline void require_single_peak(const ScalarField& rho) {
    const double mx = rho.max();
    if (!(mx > 0.0))
        throw std::runtime_error("uncertainty error - density has no positive mass");
    const double tol = 1e-9 * mx;
    const Grid& g = rho.grid();
    std::size_t ref = 0;
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] > rho[ref]) ref = i;
    const auto ridx = g.unravel(ref);
    for (int a = 0; a < g.dim(); ++a) {
        const std::size_t stride = g.stride(a);
        const std::size_t n = g.extent(a);
        const std::size_t base = ref - ridx[static_cast<std::size_t>(a)] * stride;
        const std::size_t peak = ridx[static_cast<std::size_t>(a)];
        for (std::size_t j = peak + 1; j < n; ++j)
            if (rho[base + j * stride] > rho[base + (j - 1) * stride] + tol)
                throw std::runtime_error(
                    "uncertainty error - initial density is not single-peaked");
        for (std::size_t j = peak; j-- > 0;)
            if (rho[base + j * stride] > rho[base + (j + 1) * stride] + tol)
                throw std::runtime_error(
                    "uncertainty error - initial density is not single-peaked");
    }
}

}  // namespace detail

// Momentum-width check on a free expansion: predicted from the initial rms
// width as hbar/(2 dx), measured from the late-time field as the mass-weighted
// rms of the convective momentum (phase gradient) plus the lambda = 1/2
// stochastic component.  The run must have spread the packet to at least three
// times its initial width so the asymptotic momentum is actually expressed.
inline UncertaintyReport uncertainty_estimate(const ScalarField& rho0, const WaveField& late,
                                              double hbar) {
    if (!(hbar > 0.0))
        throw std::invalid_argument("uncertainty error - hbar must be positive");
    if (late.k() != 1)
        throw std::invalid_argument("uncertainty error - single-component fields only");
    require_same_grid(rho0.grid(), late.grid(), "uncertainty_estimate");
    detail::require_single_peak(rho0);

    UncertaintyReport rep;
    rep.width_initial = detail::rms_width(rho0);
    rep.p_predicted = hbar / (2.0 * rep.width_initial);

    auto [rho_f, p] = reconstruct_rho_p(late, hbar);
    rep.width_final = detail::rms_width(rho_f);
    if (rep.width_final < 3.0 * rep.width_initial)
        throw std::runtime_error(
            "uncertainty error - run too short, the packet has not spread to three times "
            "its initial width");

    // Hard-wall nodes hold exact zeros; floor the density additively before
    // taking the stochastic gradient (those nodes carry no weight anyway).
    ScalarField rf = rho_f;
    const double eps = 1e-12 * rf.max();
    for (std::size_t i = 0; i < rf.size(); ++i) rf[i] = std::max(rf[i], 0.0) + eps;
    VectorField pst = stochastic_momentum(rf, 0.5, hbar);
    const Grid& g = rho_f.grid();
    ScalarField wgt(g, 0.0);
    for (int a = 0; a < g.dim(); ++a) {
        const auto& pa = p.comp[static_cast<std::size_t>(a)];
        const auto& sa = pst.comp[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < wgt.size(); ++i)
            wgt[i] += rho_f[i] * (pa[i] * pa[i] + sa[i] * sa[i]);
    }
    rep.p_measured = std::sqrt(integrate(wgt) / integrate(rho_f));
    rep.ratio = rep.p_measured / rep.p_predicted;
    return rep;
}

}  // namespace enslab
