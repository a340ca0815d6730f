#pragma once

// Grid solvers for the pure-ensemble hydrodynamic system in Clebsch form.
//
// Potentials-first formulation: the evolved unknowns are (rho, phi, xi) and
// the momentum field P = b0(grad phi + g^a(xi) grad xi_a) is derived, never
// stepped directly.  This enforces the Clebsch representation exactly; the
// Bernoulli, continuity and Lin-constraint equations are the natural update
// rules and the pressureless Euler momentum balance becomes a *verified*
// identity (see residual_report), not an imposed one.
//
// The optional quantum term adds the Bohm potential
//     U_q = -(4 lambda^2) hbar^2/(2m) * lap(sqrt rho)/sqrt rho,
// obtained by varying the stochastic-energy density (lambda hbar grad ln rho)^2
// contribution with respect to rho; lambda = 1/2 reproduces the standard
// -hbar^2/(2m) lap(sqrt rho)/sqrt rho.  It is evaluated in logarithmic form,
//     lap(sqrt rho)/sqrt rho = 1/2 lap L + 1/4 |grad L|^2,   L = ln rho,
// with quotient-form log differences so that scaling rho by a power of two
// leaves the force field bit-for-bit unchanged (homogeneity in rho holds at
// the dynamics level, not just up to rounding).

#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "enslab/calculus.hpp"
#include "enslab/clebsch.hpp"
#include "enslab/grid.hpp"
#include "enslab/hamiltonian.hpp"

namespace enslab {

struct QuantumTerm {
    double hbar = 1.0;
    double lambda = 0.5;
};

namespace detail {

// rho with a strictly positive additive floor, for logarithmic source terms.
// A hard clamp would put an O(1/h^2) kink into lap(ln rho) exactly where the
// density bottoms out; the additive form stays smooth there.  The floor is
// relative to max(rho) so the result scales exactly with rho.
inline ScalarField positive_floor(const ScalarField& rho) {
    const double mx = rho.max();
    if (!(mx > 0.0)) throw std::runtime_error("fluid error - density has no positive part");
    const double eps = 1e-12 * mx;
    ScalarField out = rho;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], 0.0) + eps;
    return out;
}

// Second derivative of ln r along one axis, written entirely in terms of
// logarithms of ratios of neighboring values (bitwise invariant under
// r -> 2^k r).  Interior: [ln(r+/r0) - ln(r0/r-)]/h^2.  Clamped edges use the
// one-sided (2,-5,4,-1)/h^2 stencil decomposed as 2(L0-L1)-3(L1-L2)+(L2-L3).
inline ScalarField second_log_quotient(const ScalarField& r, int axis) {
    const double h = r.grid().spacing(axis);
    const double h2 = h * h;
    const bool periodic = r.grid().boundary() == Boundary::periodic;
    return apply_along_axis(r, axis, [h2, periodic](const std::vector<double>& u,
                                                    std::vector<double>& du) {
        const std::size_t n = u.size();
        auto ratio = [&](std::size_t a, std::size_t b) { return std::log(u[a] / u[b]); };
        for (std::size_t i = 0; i < n; ++i) {
            if (periodic) {
                const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
                du[i] = (ratio(ip, i) - ratio(i, im)) / h2;
            } else if (i == 0) {
                du[i] = (2.0 * ratio(0, 1) - 3.0 * ratio(1, 2) + ratio(2, 3)) / h2;
            } else if (i == n - 1) {
                du[i] = (2.0 * ratio(n - 1, n - 2) - 3.0 * ratio(n - 2, n - 3) + ratio(n - 3, n - 4)) / h2;
            } else {
                du[i] = (ratio(i + 1, i) - ratio(i, i - 1)) / h2;
            }
        }
    });
}

}  // namespace detail

// Bohm potential U_q(rho) in logarithmic form; see the header comment.
inline ScalarField bohm_potential(const ScalarField& rho, double mass, const QuantumTerm& q) {
    if (!(mass > 0.0)) throw std::runtime_error("fluid error - mass must be positive");
    ScalarField r = detail::positive_floor(rho);
    const Grid& g = r.grid();
    ScalarField amp(g, 0.0);  // lap(sqrt rho)/sqrt rho
    for (int a = 0; a < g.dim(); ++a) {
        ScalarField d1 = detail::grad_log_quotient(r, a);
        ScalarField d2 = detail::second_log_quotient(r, a);
        for (std::size_t i = 0; i < amp.size(); ++i)
            amp[i] += 0.5 * d2[i] + 0.25 * d1[i] * d1[i];
    }
    const double coef = -(4.0 * q.lambda * q.lambda) * q.hbar * q.hbar / (2.0 * mass);
    ScalarField out(g, 0.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = coef * amp[i];
    return out;
}

// State of the generalized fluid {rho, P} carried by the Clebsch potentials.
// P is cached and kept consistent with (phi, xi, clebsch) after every step.
struct FluidState {
    double t = 0.0;
    ScalarField rho;
    ScalarField phi;
    LabelMap xi;
    ClebschData clebsch;
    VectorField P;

    FluidState(double t0, ScalarField rho0, ScalarField phi0, LabelMap labels, ClebschData data)
        : t(t0),
          rho(std::move(rho0)),
          phi(std::move(phi0)),
          xi(std::move(labels)),
          clebsch(std::move(data)),
          P(rho.grid()) {
        require_same_grid(rho.grid(), phi.grid(), "fluid state");
        for (const ScalarField& f : xi.xi) require_same_grid(rho.grid(), f.grid(), "fluid state labels");
        if (clebsch.b0 == 0.0) throw std::runtime_error("fluid error - b0 must be nonzero");
        if (clebsch.g.size() != xi.xi.size())
            throw std::runtime_error("fluid error - one integration function per label required");
        double lo = 0.0;
        for (std::size_t i = 0; i < rho.size(); ++i) lo = std::min(lo, rho[i]);
        if (lo < -1e-12 * std::max(1.0, rho.max_abs()))
            throw std::runtime_error("fluid error - negative density in initial state");
        refresh_momentum();
    }

    void refresh_momentum() { P = clebsch_momentum(phi, xi, clebsch); }
};

namespace detail {

struct FluidRhs {
    ScalarField drho;
    ScalarField dphi;
    std::vector<ScalarField> dxi;
};

// One evaluation of the semi-discrete right-hand side at fixed fields:
//   d xi_a / dt = -v . grad xi_a                        (Lin constraints)
//   d phi / dt  = -H(x, P)/b0 - g^a(xi) d xi_a / dt     (Bernoulli update)
//   d rho / dt  = -div(rho v),  v = P/m                 (continuity)
// P is recomputed from (phi, xi) on entry, which is what keeps the momentum
// field exactly in Clebsch form along the whole Runge-Kutta stage cascade.
inline FluidRhs fluid_rhs(const ScalarField& rho, const ScalarField& phi,
                          const std::vector<ScalarField>& xi, const ClebschData& cd,
                          const Classical& model, const std::optional<QuantumTerm>& quantum) {
    const Grid& g = rho.grid();
    LabelMap lm;
    lm.xi = xi;
    VectorField P = clebsch_momentum(phi, lm, cd);

    VectorField v(g);
    for (int a = 0; a < g.dim(); ++a)
        for (std::size_t i = 0; i < rho.size(); ++i) v.comp[static_cast<std::size_t>(a)][i] =
            P.comp[static_cast<std::size_t>(a)][i] / model.m;

    FluidRhs out{ScalarField(g, 0.0), ScalarField(g, 0.0), {}};

    // Lin constraints: advect each label by the velocity field.
    std::vector<VectorField> grad_xi;
    grad_xi.reserve(xi.size());
    for (const ScalarField& f : xi) grad_xi.push_back(gradient(f));
    for (std::size_t al = 0; al < xi.size(); ++al) {
        ScalarField d(g, 0.0);
        for (int a = 0; a < g.dim(); ++a)
            for (std::size_t i = 0; i < d.size(); ++i)
                d[i] -= v.comp[static_cast<std::size_t>(a)][i] * grad_xi[al].comp[static_cast<std::size_t>(a)][i];
        out.dxi.push_back(std::move(d));
    }

    // Local Hamiltonian density H(x, P) (+ Bohm potential when enabled).
    ScalarField Hloc(g, 0.0);
    for (std::size_t i = 0; i < Hloc.size(); ++i) {
        double kin = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double pa = P.comp[static_cast<std::size_t>(a)][i];
            kin += pa * pa;
        }
        const std::array<double, 3> xp = g.point(i);
        VecD x(0.0);
        x.n = g.dim();
        for (int a = 0; a < g.dim(); ++a) x[a] = xp[static_cast<std::size_t>(a)];
        Hloc[i] = 0.5 * kin / model.m + model.V.eval(x);
    }
    if (quantum) {
        ScalarField Uq = bohm_potential(rho, model.m, *quantum);
        for (std::size_t i = 0; i < Hloc.size(); ++i) Hloc[i] += Uq[i];
    }

    // Bernoulli update for phi, with the g-terms carried by the labels.
    for (std::size_t i = 0; i < rho.size(); ++i) {
        double gdot = 0.0;
        if (!cd.g.empty()) {
            const VecD lab = labels_at(lm, i);
            for (std::size_t al = 0; al < cd.g.size(); ++al) gdot += cd.g[al](lab) * out.dxi[al][i];
        }
        out.dphi[i] = -Hloc[i] / cd.b0 - gdot;
    }

    // Conservative continuity: -sum_a d_a(rho v_a).
    for (int a = 0; a < g.dim(); ++a) {
        ScalarField flux(g, 0.0);
        for (std::size_t i = 0; i < flux.size(); ++i)
            flux[i] = rho[i] * v.comp[static_cast<std::size_t>(a)][i];
        ScalarField dflux = derivative(flux, a);
        for (std::size_t i = 0; i < flux.size(); ++i) out.drho[i] -= dflux[i];
    }
    return out;
}

struct FluidStage {
    ScalarField rho, phi;
    std::vector<ScalarField> xi;
};

inline FluidStage stage_axpy(const FluidStage& base, const FluidRhs& k, double c) {
    FluidStage out = base;
    for (std::size_t i = 0; i < out.rho.size(); ++i) {
        out.rho[i] += c * k.drho[i];
        out.phi[i] += c * k.dphi[i];
    }
    for (std::size_t al = 0; al < out.xi.size(); ++al)
        for (std::size_t i = 0; i < out.rho.size(); ++i) out.xi[al][i] += c * k.dxi[al][i];
    return out;
}

}  // namespace detail

// Advance the fluid state by one classical RK4 step of size dt.
// Preconditions: classical model; advective CFL dt max|v|/h < 0.5; momentum
// field pre-caustic (|grad P| below 1/(10h), keeping P single-valued).
inline FluidState step_fluid(const FluidState& state, const HamiltonianModel& model, double dt,
                             const std::optional<QuantumTerm>& quantum = std::nullopt) {
    const Classical* cl = std::get_if<Classical>(&model);
    if (cl == nullptr)
        throw std::runtime_error("fluid error - step_fluid requires a classical model");
    check_positive_params(model);
    if (!(dt > 0.0)) throw std::runtime_error("fluid error - dt must be positive");

    const Grid& g = state.rho.grid();
    double hmin = g.spacing(0);
    for (int a = 1; a < g.dim(); ++a) hmin = std::min(hmin, g.spacing(a));

    double vmax = 0.0, dpmax = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        vmax = std::max(vmax, state.P.comp[static_cast<std::size_t>(a)].max_abs() / cl->m);
        for (int b = 0; b < g.dim(); ++b)
            dpmax = std::max(dpmax, derivative(state.P.comp[static_cast<std::size_t>(b)], a).max_abs());
    }
    if (dt * vmax / hmin >= 0.5) {
        std::ostringstream os;
        os << "fluid error - CFL violation: dt*max|v|/h = " << dt * vmax / hmin << " at t = " << state.t;
        throw std::runtime_error(os.str());
    }
    if (dpmax > 1.0 / (10.0 * hmin)) {
        std::ostringstream os;
        os << "fluid error - pre-caustic limit exceeded: max|grad P| = " << dpmax << " at t = " << state.t;
        throw std::runtime_error(os.str());
    }

    detail::FluidStage y{state.rho, state.phi, state.xi.xi};
    detail::FluidRhs k1 = detail::fluid_rhs(y.rho, y.phi, y.xi, state.clebsch, *cl, quantum);
    detail::FluidStage y2 = detail::stage_axpy(y, k1, 0.5 * dt);
    detail::FluidRhs k2 = detail::fluid_rhs(y2.rho, y2.phi, y2.xi, state.clebsch, *cl, quantum);
    detail::FluidStage y3 = detail::stage_axpy(y, k2, 0.5 * dt);
    detail::FluidRhs k3 = detail::fluid_rhs(y3.rho, y3.phi, y3.xi, state.clebsch, *cl, quantum);
    detail::FluidStage y4 = detail::stage_axpy(y, k3, dt);
    detail::FluidRhs k4 = detail::fluid_rhs(y4.rho, y4.phi, y4.xi, state.clebsch, *cl, quantum);

    const double c = dt / 6.0;
    detail::FluidStage out = y;
    for (std::size_t i = 0; i < out.rho.size(); ++i) {
        out.rho[i] += c * (k1.drho[i] + 2.0 * k2.drho[i] + 2.0 * k3.drho[i] + k4.drho[i]);
        out.phi[i] += c * (k1.dphi[i] + 2.0 * k2.dphi[i] + 2.0 * k3.dphi[i] + k4.dphi[i]);
    }
    for (std::size_t al = 0; al < out.xi.size(); ++al)
        for (std::size_t i = 0; i < out.rho.size(); ++i)
            out.xi[al][i] += c * (k1.dxi[al][i] + 2.0 * k2.dxi[al][i] + 2.0 * k3.dxi[al][i] + k4.dxi[al][i]);

    double lo = 0.0;
    for (std::size_t i = 0; i < out.rho.size(); ++i) lo = std::min(lo, out.rho[i]);
    if (lo < -1e-12 * std::max(1.0, out.rho.max_abs())) {
        std::ostringstream os;
        os << "fluid error - negative density after step: min rho = " << lo << ", t = " << state.t
           << ", dt = " << dt;
        throw std::runtime_error(os.str());
    }

    LabelMap lm;
    lm.xi = std::move(out.xi);
    return FluidState(state.t + dt, std::move(out.rho), std::move(out.phi), std::move(lm),
                      state.clebsch);
}

// ---------------------------------------------------------------------------
// Hamilton-Jacobi solver for the irrotational reduction d0 Phi + H(x, grad Phi) = 0.

struct HJState {
    double t = 0.0;
    ScalarField Phi;
    HJState(double t0, ScalarField f) : t(t0), Phi(std::move(f)) {}
};

namespace detail {

// One-sided second-order derivative along an axis (backward or forward bias).
// Clamped boundaries use quadratic ghost extrapolation, which keeps both
// biased stencils exact on quadratic data all the way to the wall; periodic
// grids wrap.  Exactness on linear and quadratic profiles makes the scheme's
// numerical dissipation vanish identically on plane-wave and focusing/
// defocusing parabolic solutions.
inline ScalarField one_sided_derivative(const ScalarField& f, int axis, bool backward) {
    const double h = f.grid().spacing(axis);
    const bool periodic = f.grid().boundary() == Boundary::periodic;
    return apply_along_axis(f, axis, [h, periodic, backward](const std::vector<double>& u,
                                                             std::vector<double>& du) {
        const long n = static_cast<long>(u.size());
        auto at = [&](long i) -> double {
            if (periodic) return u[static_cast<std::size_t>(((i % n) + n) % n)];
            if (i == -1) return 3.0 * u[0] - 3.0 * u[1] + u[2];
            if (i == -2) return 6.0 * u[0] - 8.0 * u[1] + 3.0 * u[2];
            if (i == n) return 3.0 * u[static_cast<std::size_t>(n - 1)] - 3.0 * u[static_cast<std::size_t>(n - 2)] + u[static_cast<std::size_t>(n - 3)];
            if (i == n + 1) return 6.0 * u[static_cast<std::size_t>(n - 1)] - 8.0 * u[static_cast<std::size_t>(n - 2)] + 3.0 * u[static_cast<std::size_t>(n - 3)];
            return u[static_cast<std::size_t>(i)];
        };
        for (long i = 0; i < n; ++i)
            du[static_cast<std::size_t>(i)] =
                backward ? (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h)
                         : (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h);
    });
}

// Local Lax-Friedrichs Hamiltonian with per-node dissipation speeds; returns
// the semi-discrete right-hand side d Phi/dt = -H_hat(x, D-Phi, D+Phi) and
// the largest dissipation speed for CFL accounting.
inline std::pair<ScalarField, double> hj_rhs(const ScalarField& Phi, const HamiltonianModel& model,
                                             double t) {
    const Grid& g = Phi.grid();
    const int dim = g.dim();
    std::vector<ScalarField> Dm, Dp;
    for (int a = 0; a < dim; ++a) {
        Dm.push_back(one_sided_derivative(Phi, a, true));
        Dp.push_back(one_sided_derivative(Phi, a, false));
    }
    ScalarField rhs(g, 0.0);
    double alpha_max = 0.0;
    for (std::size_t i = 0; i < Phi.size(); ++i) {
        const std::array<double, 3> xp = g.point(i);
        VecD x(0.0), pm(0.0), pl(0.0), pr(0.0);
        x.n = pm.n = pl.n = pr.n = dim;
        for (int a = 0; a < dim; ++a) {
            x[a] = xp[static_cast<std::size_t>(a)];
            pl[a] = Dm[static_cast<std::size_t>(a)][i];
            pr[a] = Dp[static_cast<std::size_t>(a)][i];
            pm[a] = 0.5 * (pl[a] + pr[a]);
        }
        const VecD vl = velocity_from_momentum(model, t, x, pl);
        const VecD vr = velocity_from_momentum(model, t, x, pr);
        const VecD vm = velocity_from_momentum(model, t, x, pm);
        double val = eval_H(model, t, x, pm);
        for (int a = 0; a < dim; ++a) {
            const double alpha = std::max({std::abs(vl[a]), std::abs(vr[a]), std::abs(vm[a])});
            alpha_max = std::max(alpha_max, alpha);
            val -= 0.5 * alpha * (pr[a] - pl[a]);
        }
        rhs[i] = -val;
    }
    return {std::move(rhs), alpha_max};
}

}  // namespace detail

// Advance d0 Phi = -H(x, grad Phi) by one TVD-RK2 step with a local
// Lax-Friedrichs numerical Hamiltonian (monotone pre-caustic; the one-sided
// gradients are second order, so smooth viscosity solutions keep second-order
// accuracy).  Works for classical and relativistic models.
inline HJState step_hj(const HJState& state, const HamiltonianModel& model, double dt) {
    if (std::holds_alternative<EffectiveStochastic>(model))
        throw std::runtime_error("hj error - effective model needs a density field, not an HJ state");
    check_positive_params(model);
    if (!(dt > 0.0)) throw std::runtime_error("hj error - dt must be positive");
    const Grid& g = state.Phi.grid();
    double hmin = g.spacing(0);
    for (int a = 1; a < g.dim(); ++a) hmin = std::min(hmin, g.spacing(a));

    auto [k1, alpha] = detail::hj_rhs(state.Phi, model, state.t);
    if (dt * alpha / hmin > 0.5) {
        std::ostringstream os;
        os << "hj error - CFL violation: dt*max|dH/dp|/h = " << dt * alpha / hmin;
        throw std::runtime_error(os.str());
    }
    ScalarField mid = state.Phi;
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] += dt * k1[i];
    auto [k2, alpha2] = detail::hj_rhs(mid, model, state.t + dt);
    (void)alpha2;
    ScalarField out = state.Phi;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = 0.5 * (state.Phi[i] + mid[i] + dt * k2[i]);
    return HJState(state.t + dt, std::move(out));
}

// ---------------------------------------------------------------------------
// Residual evaluation of the full reduced system on a stored time slab.

struct ResidualEntry {
    double max_abs = 0.0;
    double l2 = 0.0;  // discrete RMS over the evaluated slab
};

struct ResidualReport {
    ResidualEntry bernoulli;   // H + b0[d0 phi + g^a d0 xi_a] = 0
    ResidualEntry continuity;  // d0 rho + div(rho v) = 0
    ResidualEntry lin;         // d0 xi_b + v . grad xi_b = 0
    ResidualEntry vorticity;   // Omega^{b,a} rho (d0 xi_b + v . grad xi_b) = 0
    ResidualEntry euler;       // d0(rho P_b) + div(rho P_b v) + rho dH/dx_b = 0
    double dt = 0.0;
    int levels = 0;

    double max_abs() const {
        return std::max({bernoulli.max_abs, continuity.max_abs, lin.max_abs, vorticity.max_abs,
                         euler.max_abs});
    }
};

namespace detail {

struct NormAccum {
    double mx = 0.0, ss = 0.0;
    std::size_t n = 0;
    void add(double r) {
        mx = std::max(mx, std::abs(r));
        ss += r * r;
        ++n;
    }
    ResidualEntry entry() const {
        ResidualEntry e;
        e.max_abs = mx;
        e.l2 = (n != 0u) ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
        return e;
    }
};

}  // namespace detail

// Evaluate all five residual families on the interior time levels of a stored
// run (centered time differences, the solver's own spatial operators).  The
// Euler momentum balance is not one of the update rules, so its residual
// carries an O(h^2) spatial-consistency floor on top of the O(dt^2) sampling
// error that bounds the four imposed families.
inline ResidualReport residual_report(const std::vector<FluidState>& history,
                                      const HamiltonianModel& model,
                                      const std::optional<QuantumTerm>& quantum = std::nullopt) {
    if (history.size() < 3)
        throw std::runtime_error("fluid error - residual_report needs at least 3 time levels");
    const Classical* cl = std::get_if<Classical>(&model);
    if (cl == nullptr)
        throw std::runtime_error("fluid error - residual_report requires a classical model");
    const Grid& g = history.front().rho.grid();
    const double dt = history[1].t - history[0].t;
    if (!(dt > 0.0)) throw std::runtime_error("fluid error - history must advance in time");
    for (std::size_t k = 0; k + 1 < history.size(); ++k) {
        if (!history[k].rho.grid().same_layout(g))
            throw std::runtime_error("fluid error - history levels on different grids");
        if (std::abs(history[k + 1].t - history[k].t - dt) > 1e-9 * std::max(1.0, dt))
            throw std::runtime_error("fluid error - history levels not uniformly spaced");
    }

    const std::size_t nlab = history.front().xi.xi.size();
    detail::NormAccum bern, cont, lin, vort, euler;

    for (std::size_t k = 1; k + 1 < history.size(); ++k) {
        const FluidState& s = history[k];
        const FluidState& sm = history[k - 1];
        const FluidState& sp = history[k + 1];
        const double b0 = s.clebsch.b0;

        // Spatial pieces at the central level, discretized exactly as in the
        // solver right-hand side.
        detail::FluidRhs rhs = detail::fluid_rhs(s.rho, s.phi, s.xi.xi, s.clebsch, *cl, quantum);

        VectorField v(g);
        for (int a = 0; a < g.dim(); ++a)
            for (std::size_t i = 0; i < s.rho.size(); ++i)
                v.comp[static_cast<std::size_t>(a)][i] = s.P.comp[static_cast<std::size_t>(a)][i] / cl->m;

        std::optional<ScalarField> Uq;
        if (quantum) Uq = bohm_potential(s.rho, cl->m, *quantum);

        // Lin-constraint residuals per label, reused by the vorticity family.
        std::vector<ScalarField> lin_res;
        for (std::size_t al = 0; al < nlab; ++al) {
            ScalarField r(g, 0.0);
            for (std::size_t i = 0; i < r.size(); ++i) {
                const double d0xi = (sp.xi.xi[al][i] - sm.xi.xi[al][i]) / (2.0 * dt);
                r[i] = d0xi - rhs.dxi[al][i];
                lin.add(r[i]);
            }
            lin_res.push_back(std::move(r));
        }

        for (std::size_t i = 0; i < s.rho.size(); ++i) {
            const double d0phi = (sp.phi[i] - sm.phi[i]) / (2.0 * dt);
            const double d0rho = (sp.rho[i] - sm.rho[i]) / (2.0 * dt);

            double gdot = 0.0;
            if (nlab != 0u) {
                const VecD lab = labels_at(s.xi, i);
                for (std::size_t al = 0; al < nlab; ++al) {
                    const double d0xi = (sp.xi.xi[al][i] - sm.xi.xi[al][i]) / (2.0 * dt);
                    gdot += s.clebsch.g[al](lab) * d0xi;
                }
            }
            // H + b0[...] with H reconstructed from the solver's own dphi:
            // rhs.dphi = -H/b0 - g . dxi  =>  H = -b0(rhs.dphi + g . dxi).
            double gdot_solver = 0.0;
            if (nlab != 0u) {
                const VecD lab = labels_at(s.xi, i);
                for (std::size_t al = 0; al < nlab; ++al)
                    gdot_solver += s.clebsch.g[al](lab) * rhs.dxi[al][i];
            }
            const double Hloc = -b0 * (rhs.dphi[i] + gdot_solver);
            bern.add(b0 * (d0phi + gdot) + Hloc);
            cont.add(d0rho - rhs.drho[i]);

            if (nlab != 0u) {
                const VecD lab = labels_at(s.xi, i);
                const Vorticity om = vorticity(s.clebsch, lab);
                for (std::size_t al = 0; al < nlab; ++al) {
                    double sum = 0.0;
                    for (std::size_t be = 0; be < nlab; ++be)
                        sum += om.omega[be][al] * s.rho[i] * lin_res[be][i];
                    vort.add(sum);
                }
            }
        }

        // Euler momentum balance (verified, not imposed).
        for (int b = 0; b < g.dim(); ++b) {
            ScalarField flux_div(g, 0.0);
            for (int a = 0; a < g.dim(); ++a) {
                ScalarField f(g, 0.0);
                for (std::size_t i = 0; i < f.size(); ++i)
                    f[i] = s.rho[i] * s.P.comp[static_cast<std::size_t>(b)][i] * v.comp[static_cast<std::size_t>(a)][i];
                ScalarField df = derivative(f, a);
                for (std::size_t i = 0; i < f.size(); ++i) flux_div[i] += df[i];
            }
            std::optional<ScalarField> dUq;
            if (Uq) dUq = derivative(*Uq, b);
            for (std::size_t i = 0; i < s.rho.size(); ++i) {
                const double mom_p = sp.rho[i] * sp.P.comp[static_cast<std::size_t>(b)][i];
                const double mom_m = sm.rho[i] * sm.P.comp[static_cast<std::size_t>(b)][i];
                const std::array<double, 3> xp = g.point(i);
                VecD x(0.0);
                x.n = g.dim();
                for (int a = 0; a < g.dim(); ++a) x[a] = xp[static_cast<std::size_t>(a)];
                double force = s.rho[i] * cl->V.deriv(x, b);
                if (dUq) force += s.rho[i] * (*dUq)[i];
                euler.add((mom_p - mom_m) / (2.0 * dt) + flux_div[i] + force);
            }
        }
    }

    ResidualReport rep;
    rep.bernoulli = bern.entry();
    rep.continuity = cont.entry();
    rep.lin = lin.entry();
    rep.vorticity = vort.entry();
    rep.euler = euler.entry();
    rep.dt = dt;
    rep.levels = static_cast<int>(history.size());
    return rep;
}

}  // namespace enslab
