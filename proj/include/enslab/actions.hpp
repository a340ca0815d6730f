#pragma once

// The action functionals of the ensemble in its three guises: hydrodynamic
// variables (rho, phi, xi), effective-Hamiltonian stochastic flows, and the
// wave-function forms down to the linear Schrodinger action.  All of them are
// evaluated on uniformly spaced snapshot stacks with centered time derivatives,
// trapezoidal quadrature over the interior time levels, and the same spatial
// stencils and quadrature the solvers use, so a solver-converged state is a
// stationary point of the matching discrete functional up to its own
// truncation order.
//
// Conventions: the stochastic momentum is p_st = 2 lambda (hbar/2) grad(ln rho),
// entering the energy density as |p_st|^2/2m = 4 lambda^2 hbar^2 (grad rho)^2 /
// (8 m rho^2) * rho; lambda = 1/2 gives the standard quantum potential and makes
// the nonlinear wave action carry the coefficient (b0^2 - hbar^2)/(8 rho m) on
// (grad rho)^2, which vanishes at b0 = hbar where the functional turns into the
// linear Schrodinger action.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "clebsch.hpp"
#include "fluid.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"
#include "psi.hpp"

namespace enslab {

enum class ActionVariant {
    EnsembleHamilton,   // rho (-H(t,x,P) - b0 [d0 phi + g^a(xi) d0 xi_a])
    PsiGeneric,         // (i b0/2)(psi* d0 psi - cc) - H(x, p[psi]) psi* psi
    RelStochastic,      // rho (-sqrt(m^2 c^4 + P^2 c^2 + c^2 p_st^2) - b0 [...])
    NonRelStochastic,   // rho (-m c^2 - P^2/2m - p_st^2/2m - b0 [...])
    PsiPolar,           // wave form of NonRelStochastic, term by term in (rho, S)
    PsiNonlinear,       // -(b0^2/2m)|grad psi|^2 with the (b0^2-hbar^2) density term
    PsiLinear           // the linear Schrodinger action, hbar throughout
};

struct ActionParams {
    double b0 = 1.0;
    double m = 1.0;
    double c = 1.0;
    double hbar = 1.0;
    double lambda = 0.5;
};

namespace detail {

// Trapezoidal weights over the interior levels 1..M-2 of an M-level stack;
// a single interior level degenerates to one panel of width dt.
inline std::vector<double> interior_weights(std::size_t levels, double dt) {
    const std::size_t m = levels - 2;
    std::vector<double> w(m, dt);
    if (m > 1) {
        w.front() = 0.5 * dt;
        w.back() = 0.5 * dt;
    }
    return w;
}

inline VecD point_vec(const Grid& g, std::size_t node) {
    const auto pt = g.point(node);
    VecD x;
    x.n = g.dim();
    for (int a = 0; a < x.n; ++a) x[a] = pt[static_cast<std::size_t>(a)];
    return x;
}

}  // namespace detail

// Hydrodynamic-variable actions on a stack of fluid snapshots.  The Clebsch
// constant b0 and the integration functions are taken from the states
// themselves (they define the cached momentum); m, c, hbar, lambda from prm.
inline double action_eval(ActionVariant variant, const std::vector<FluidState>& history,
                          const ActionParams& prm, const HamiltonianModel* model = nullptr) {
    if (history.size() < 3)
        throw std::invalid_argument("action error - need at least three time levels");
    const Grid& g = history.front().rho.grid();
    const double dt = history[1].t - history[0].t;
    if (!(dt > 0.0)) throw std::invalid_argument("action error - time levels must advance");
    for (std::size_t k = 0; k + 1 < history.size(); ++k) {
        if (std::abs(history[k + 1].t - history[k].t - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("action error - time levels must be uniformly spaced");
        require_same_grid(g, history[k + 1].rho.grid(), "action_eval");
    }
    const bool fluid_variant = (variant == ActionVariant::EnsembleHamilton ||
                                variant == ActionVariant::RelStochastic ||
                                variant == ActionVariant::NonRelStochastic);
    if (!fluid_variant)
        throw std::invalid_argument("action error - this variant evaluates wave-field stacks");
    if (variant == ActionVariant::EnsembleHamilton && model == nullptr)
        throw std::invalid_argument("action error - EnsembleHamilton needs a Hamiltonian model");

    const std::vector<double> w = detail::interior_weights(history.size(), dt);
    double total = 0.0;
    for (std::size_t lev = 1; lev + 1 < history.size(); ++lev) {
        const FluidState& s = history[lev];
        const FluidState& sm = history[lev - 1];
        const FluidState& sp = history[lev + 1];
        const std::size_t nlab = s.xi.xi.size();

        // -H part of the integrand, per node, depending on the variant.
        ScalarField energy(g, 0.0);
        if (variant == ActionVariant::EnsembleHamilton) {
            for (std::size_t i = 0; i < energy.size(); ++i) {
                VecD p;
                p.n = g.dim();
                for (int a = 0; a < p.n; ++a) p[a] = s.P.comp[static_cast<std::size_t>(a)][i];
                energy[i] = eval_H(*model, s.t, detail::point_vec(g, i), p);
            }
        } else if (variant == ActionVariant::RelStochastic) {
            energy = eval_effective(EffectiveStochastic{prm.m, prm.c, prm.hbar, prm.lambda}, s.P,
                                    s.rho);
        } else {
            ScalarField rc = detail::clamp_floor(s.rho, "action");
            ScalarField st(g, 0.0);
            for (int a = 0; a < g.dim(); ++a) {
                ScalarField d = detail::grad_log_quotient(rc, a);
                for (std::size_t i = 0; i < st.size(); ++i) st[i] += d[i] * d[i];
            }
            const double mc2 = prm.m * prm.c * prm.c;
            const double lh = prm.lambda * prm.hbar;
            for (std::size_t i = 0; i < energy.size(); ++i) {
                double p2 = 0.0;
                for (int a = 0; a < g.dim(); ++a) {
                    const double pa = s.P.comp[static_cast<std::size_t>(a)][i];
                    p2 += pa * pa;
                }
                energy[i] = mc2 + p2 / (2.0 * prm.m) + lh * lh * st[i] / (2.0 * prm.m);
            }
        }

        ScalarField integrand(g, 0.0);
        for (std::size_t i = 0; i < integrand.size(); ++i) {
            const double d0phi = (sp.phi[i] - sm.phi[i]) / (2.0 * dt);
            double bterm = d0phi;
            if (nlab > 0) {
                const VecD lab = labels_at(s.xi, i);
                for (std::size_t a = 0; a < nlab; ++a) {
                    const double d0xi = (sp.xi.xi[a][i] - sm.xi.xi[a][i]) / (2.0 * dt);
                    bterm += s.clebsch.g[a](lab) * d0xi;
                }
            }
            integrand[i] = s.rho[i] * (-energy[i] - s.clebsch.b0 * bterm);
        }
        total += w[lev - 1] * integrate(integrand);
    }
    return total;
}

// Wave-function actions on a stack of psi snapshots.
inline double action_eval(ActionVariant variant, const PsiHistory& hist, const ActionParams& prm,
                          const HamiltonianModel* model = nullptr) {
    if (hist.levels.size() < 3)
        throw std::invalid_argument("action error - need at least three time levels");
    if (!(hist.dt > 0.0)) throw std::invalid_argument("action error - dt must be positive");
    const Grid& g = hist.levels.front().grid();
    const int kc = hist.levels.front().k();
    for (const WaveField& wf : hist.levels) {
        require_same_grid(g, wf.grid(), "action_eval");
        if (wf.k() != kc) throw std::invalid_argument("action error - component count changed");
    }
    const bool psi_variant = (variant == ActionVariant::PsiGeneric ||
                              variant == ActionVariant::PsiPolar ||
                              variant == ActionVariant::PsiNonlinear ||
                              variant == ActionVariant::PsiLinear);
    if (!psi_variant)
        throw std::invalid_argument("action error - this variant evaluates fluid stacks");
    if (variant == ActionVariant::PsiGeneric && model == nullptr)
        throw std::invalid_argument("action error - PsiGeneric needs a Hamiltonian model");
    if (variant == ActionVariant::PsiNonlinear && kc != 1)
        throw std::invalid_argument(
            "action error - the nonlinear wave action is a single-component functional");

    const std::vector<double> w = detail::interior_weights(hist.levels.size(), hist.dt);
    // PsiLinear is the b0 = hbar endpoint: the time term and gradient term both
    // carry hbar and no density term remains.
    const double b0 = (variant == ActionVariant::PsiLinear) ? prm.hbar : prm.b0;
    const double mc2 = prm.m * prm.c * prm.c;

    double total = 0.0;
    for (std::size_t lev = 1; lev + 1 < hist.levels.size(); ++lev) {
        const WaveField& wf = hist.levels[lev];
        const WaveField& wm = hist.levels[lev - 1];
        const WaveField& wp = hist.levels[lev + 1];
        ScalarField rho = psi_density(wf);

        // (i b0/2)(psi* d0 psi - d0 psi* psi) = -b0 Im sum_a psi*_a d0 psi_a.
        ScalarField integrand(g, 0.0);
        for (int a = 0; a < kc; ++a) {
            const std::size_t s = static_cast<std::size_t>(a);
            for (std::size_t i = 0; i < integrand.size(); ++i) {
                const Complex d0 = (wp.comp[s][i] - wm.comp[s][i]) / (2.0 * hist.dt);
                integrand[i] -= b0 * std::imag(std::conj(wf.comp[s][i]) * d0);
            }
        }

        if (variant == ActionVariant::PsiGeneric) {
            const double t = hist.t0 + static_cast<double>(lev) * hist.dt;
            auto [r, p] = reconstruct_rho_p(wf, prm.b0);
            for (std::size_t i = 0; i < integrand.size(); ++i) {
                VecD pv;
                pv.n = g.dim();
                for (int a = 0; a < pv.n; ++a) pv[a] = p.comp[static_cast<std::size_t>(a)][i];
                integrand[i] -= eval_H(*model, t, detail::point_vec(g, i), pv) * r[i];
            }
        } else if (variant == ActionVariant::PsiPolar) {
            ScalarField rc = detail::clamp_floor(rho, "action");
            const double lh2 = prm.lambda * prm.hbar * prm.lambda * prm.hbar;
            for (int ax = 0; ax < g.dim(); ++ax) {
                ScalarField dr = derivative(rho, ax);
                std::vector<std::vector<Complex>> d;
                d.reserve(static_cast<std::size_t>(kc));
                for (int a = 0; a < kc; ++a) d.push_back(detail::complex_derivative(wf, a, ax));
                for (std::size_t i = 0; i < integrand.size(); ++i) {
                    // 4 lambda^2 * hbar^2 (d rho)^2 / (8 m rho) per axis
                    integrand[i] -= 4.0 * lh2 * dr[i] * dr[i] / (8.0 * prm.m * rc[i]);
                    double im = 0.0;
                    for (int a = 0; a < kc; ++a)
                        im += std::imag(std::conj(wf.comp[static_cast<std::size_t>(a)][i]) *
                                        d[static_cast<std::size_t>(a)][i]);
                    // (b0^2/8 rho m)(psi* d psi - d psi* psi)^2 = -(b0^2/2 rho m) Im^2
                    integrand[i] -= b0 * b0 * im * im / (2.0 * prm.m * rc[i]);
                }
            }
            for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] -= mc2 * rho[i];
        } else {
            // PsiNonlinear and PsiLinear share the gradient and rest terms.
            for (int ax = 0; ax < g.dim(); ++ax) {
                std::vector<std::vector<Complex>> d;
                d.reserve(static_cast<std::size_t>(kc));
                for (int a = 0; a < kc; ++a) d.push_back(detail::complex_derivative(wf, a, ax));
                for (std::size_t i = 0; i < integrand.size(); ++i) {
                    double g2 = 0.0;
                    for (int a = 0; a < kc; ++a) g2 += std::norm(d[static_cast<std::size_t>(a)][i]);
                    integrand[i] -= b0 * b0 * g2 / (2.0 * prm.m);
                }
            }
            for (std::size_t i = 0; i < integrand.size(); ++i) integrand[i] -= mc2 * rho[i];
            if (variant == ActionVariant::PsiNonlinear) {
                ScalarField rc = detail::clamp_floor(rho, "action");
                const double lh = 2.0 * prm.lambda * prm.hbar;  // hbar at lambda = 1/2
                const double coef = (prm.b0 * prm.b0 - lh * lh) / (8.0 * prm.m);
                for (int ax = 0; ax < g.dim(); ++ax) {
                    ScalarField dr = derivative(rho, ax);
                    for (std::size_t i = 0; i < integrand.size(); ++i)
                        integrand[i] += coef * dr[i] * dr[i] / rc[i];
                }
            }
        }
        total += w[lev - 1] * integrate(integrand);
    }
    return total;
}

}  // namespace enslab
