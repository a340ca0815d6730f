#pragma once

// Wave-function representation of the fluid state.  A k-component complex
// field psi_alpha = sqrt(rho) e^{i phi} u_alpha(xi) carries the density, the
// scalar Clebsch potential, and the label content of the flow in one object;
// the spinor factor u encodes the integration functions g^beta through
//   g^beta(xi) = Im sum_alpha u*_alpha du_alpha/dxi_beta,   sum |u_alpha|^2 = 1.
// Momentum comes back out of psi as p = b0 Im(psi* grad psi)/(psi* psi), and
// the per-pair antisymmetric tensor Q_{ab,c} = (psi_a d_c psi_b -
// psi_b d_c psi_a)/(psi* psi) measures the non-scalar (rotational) content.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "calculus.hpp"
#include "clebsch.hpp"
#include "grid.hpp"
#include "hamiltonian.hpp"

namespace enslab {

using Complex = std::complex<double>;

struct WaveField {
    WaveField(const Grid& g, int k) : g_(g) {
        if (k < 1) throw std::invalid_argument("wave field needs at least one component");
        comp.assign(static_cast<std::size_t>(k), std::vector<Complex>(g.size(), Complex(0.0, 0.0)));
    }

    const Grid& grid() const { return g_; }
    int k() const { return static_cast<int>(comp.size()); }
    std::size_t size() const { return g_.size(); }

    std::vector<std::vector<Complex>> comp;  // comp[alpha][node]

private:
    Grid g_;
};

inline ScalarField psi_density(const WaveField& w) {
    ScalarField rho(w.grid(), 0.0);
    for (int a = 0; a < w.k(); ++a)
        for (std::size_t i = 0; i < w.size(); ++i)
            rho[i] += std::norm(w.comp[static_cast<std::size_t>(a)][i]);
    return rho;
}

namespace detail {

// Central / one-sided derivative of one complex component along an axis,
// computed on the real and imaginary parts separately.
inline std::vector<Complex> complex_derivative(const WaveField& w, int alpha, int axis) {
    const std::size_t a = static_cast<std::size_t>(alpha);
    ScalarField re(w.grid(), 0.0), im(w.grid(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        re[i] = w.comp[a][i].real();
        im[i] = w.comp[a][i].imag();
    }
    ScalarField dre = derivative(re, axis);
    ScalarField dim = derivative(im, axis);
    std::vector<Complex> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = Complex(dre[i], dim[i]);
    return out;
}

inline std::vector<Complex> complex_laplacian(const WaveField& w, int alpha) {
    const std::size_t a = static_cast<std::size_t>(alpha);
    ScalarField re(w.grid(), 0.0), im(w.grid(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        re[i] = w.comp[a][i].real();
        im[i] = w.comp[a][i].imag();
    }
    ScalarField lre = laplacian(re);
    ScalarField lim = laplacian(im);
    std::vector<Complex> out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = Complex(lre[i], lim[i]);
    return out;
}

}  // namespace detail

// The unit spinor u_alpha(xi): k callables on label space with
// sum_alpha |u_alpha|^2 = 1.
struct UnitSpinorMap {
    std::vector<std::function<Complex(const VecD&)>> u;

    int k() const { return static_cast<int>(u.size()); }

    // k = 1, u identically 1: a scalar (irrotational) flow.
    static UnitSpinorMap scalar() {
        UnitSpinorMap m;
        m.u.push_back([](const VecD&) { return Complex(1.0, 0.0); });
        return m;
    }

    // k = 1, u = e^{i f(xi)}: pure label-dependent phase, g^beta = df/dxi_beta.
    static UnitSpinorMap phase(std::function<double(const VecD&)> f) {
        UnitSpinorMap m;
        m.u.push_back([fn = std::move(f)](const VecD& xi) { return std::exp(Complex(0.0, fn(xi))); });
        return m;
    }

    // k = 2 rotational pair u = (cos xi_2 e^{i xi_1}, sin xi_2 e^{-i xi_1}),
    // which realizes g^1 = cos 2 xi_2, g^2 = 0.
    static UnitSpinorMap rotational() {
        UnitSpinorMap m;
        m.u.push_back(
            [](const VecD& xi) { return std::cos(xi[1]) * std::exp(Complex(0.0, xi[0])); });
        m.u.push_back(
            [](const VecD& xi) { return std::sin(xi[1]) * std::exp(Complex(0.0, -xi[0])); });
        return m;
    }
};

// psi_alpha = sqrt(rho) e^{i phi} u_alpha(xi).  The spinor must be unit
// normalized at every label the grid visits.
inline WaveField build_psi(const ScalarField& rho, const ScalarField& phi, const LabelMap& labels,
                           const UnitSpinorMap& u) {
    require_same_grid(rho.grid(), phi.grid(), "build_psi");
    for (const ScalarField& f : labels.xi) require_same_grid(rho.grid(), f.grid(), "build_psi labels");
    if (u.k() < 1) throw std::invalid_argument("build_psi: spinor map needs at least one component");
    const double mx = rho.max_abs();
    for (std::size_t i = 0; i < rho.size(); ++i)
        if (rho[i] < -1e-12 * std::max(1.0, mx))
            throw std::runtime_error("build_psi: density error - negative density");

    WaveField w(rho.grid(), u.k());
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const VecD xi = labels_at(labels, i);
        double nrm = 0.0;
        for (int a = 0; a < u.k(); ++a) nrm += std::norm(u.u[static_cast<std::size_t>(a)](xi));
        if (std::abs(nrm - 1.0) > 1e-8)
            throw std::runtime_error("build_psi: spinor error - u is not unit normalized");
        const double amp = std::sqrt(std::max(rho[i], 0.0));
        const Complex ph = std::exp(Complex(0.0, phi[i]));
        for (int a = 0; a < u.k(); ++a)
            w.comp[static_cast<std::size_t>(a)][i] = amp * ph * u.u[static_cast<std::size_t>(a)](xi);
    }
    return w;
}

// rho = psi* psi and p = b0 Im(sum_alpha psi*_alpha grad psi_alpha) / rho.
// Vacuum nodes (rho below 1e-12 of the peak) get p = 0: the phase carries no
// information where the density vanishes.
inline std::pair<ScalarField, VectorField> reconstruct_rho_p(const WaveField& w, double b0) {
    if (b0 == 0.0) throw std::invalid_argument("reconstruct_rho_p: b0 must be nonzero");
    ScalarField rho = psi_density(w);
    const double floor = 1e-12 * rho.max();
    VectorField p(w.grid());
    for (int ax = 0; ax < w.grid().dim(); ++ax) {
        std::vector<std::vector<Complex>> d;
        d.reserve(static_cast<std::size_t>(w.k()));
        for (int a = 0; a < w.k(); ++a) d.push_back(detail::complex_derivative(w, a, ax));
        ScalarField& pa = p.comp[static_cast<std::size_t>(ax)];
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (rho[i] <= floor) {
                pa[i] = 0.0;
                continue;
            }
            double s = 0.0;
            for (int a = 0; a < w.k(); ++a)
                s += std::imag(std::conj(w.comp[static_cast<std::size_t>(a)][i]) *
                               d[static_cast<std::size_t>(a)][i]);
            pa[i] = b0 * s / rho[i];
        }
    }
    return {std::move(rho), std::move(p)};
}

// How well a spinor map realizes a set of integration functions:
// max |Im sum u* du/dxi_beta - g^beta| and max |sum |u|^2 - 1| over probes.
struct UGReport {
    double max_g = 0.0;
    double max_norm = 0.0;
};

inline UGReport verify_u_g(const UnitSpinorMap& u, const ClebschData& data,
                           const std::vector<VecD>& probes, double fd_step = 1e-5) {
    if (u.k() < 1) throw std::invalid_argument("verify_u_g: empty spinor map");
    if (probes.empty()) throw std::invalid_argument("verify_u_g: no probe points");
    UGReport rep;
    const int n = static_cast<int>(data.g.size());
    for (const VecD& xi : probes) {
        if (xi.n < n) throw std::invalid_argument("verify_u_g: probe has fewer labels than g");
        double nrm = 0.0;
        for (int a = 0; a < u.k(); ++a) nrm += std::norm(u.u[static_cast<std::size_t>(a)](xi));
        rep.max_norm = std::max(rep.max_norm, std::abs(nrm - 1.0));
        for (int b = 0; b < n; ++b) {
            VecD hi = xi, lo = xi;
            hi[b] += fd_step;
            lo[b] -= fd_step;
            double g_num = 0.0;
            for (int a = 0; a < u.k(); ++a) {
                const std::size_t s = static_cast<std::size_t>(a);
                const Complex du = (u.u[s](hi) - u.u[s](lo)) / (2.0 * fd_step);
                g_num += std::imag(std::conj(u.u[s](xi)) * du);
            }
            rep.max_g = std::max(rep.max_g, std::abs(g_num - data.g[static_cast<std::size_t>(b)](xi)));
        }
    }
    return rep;
}

// Pairwise tensor Q_{ab,c} = (psi_a d_c psi_b - psi_b d_c psi_a) / (psi* psi):
// zero iff the components are everywhere proportional, i.e. the flow is
// reducible to a single scalar wave function.
struct QTensor {
    int k = 0;
    int dim = 0;
    std::size_t nodes = 0;
    std::vector<Complex> v;  // index ((a*k + b)*dim + c)*nodes + node

    Complex at(int a, int b, int c, std::size_t node) const {
        const std::size_t idx =
            ((static_cast<std::size_t>(a) * static_cast<std::size_t>(k) + static_cast<std::size_t>(b)) *
                 static_cast<std::size_t>(dim) +
             static_cast<std::size_t>(c)) *
                nodes +
            node;
        return v.at(idx);
    }

    double max_abs() const {
        double m = 0.0;
        for (const Complex& z : v) m = std::max(m, std::abs(z));
        return m;
    }
};

inline QTensor q_tensor(const WaveField& w) {
    ScalarField rho = psi_density(w);
    const double floor = 1e-12 * rho.max();
    QTensor q;
    q.k = w.k();
    q.dim = w.grid().dim();
    q.nodes = w.size();
    q.v.assign(static_cast<std::size_t>(q.k) * static_cast<std::size_t>(q.k) *
                   static_cast<std::size_t>(q.dim) * q.nodes,
               Complex(0.0, 0.0));
    std::vector<std::vector<std::vector<Complex>>> d(static_cast<std::size_t>(q.dim));
    for (int c = 0; c < q.dim; ++c)
        for (int a = 0; a < q.k; ++a)
            d[static_cast<std::size_t>(c)].push_back(detail::complex_derivative(w, a, c));
    for (int a = 0; a < q.k; ++a)
        for (int b = 0; b < q.k; ++b)
            for (int c = 0; c < q.dim; ++c) {
                const std::size_t base =
                    ((static_cast<std::size_t>(a) * static_cast<std::size_t>(q.k) +
                      static_cast<std::size_t>(b)) *
                         static_cast<std::size_t>(q.dim) +
                     static_cast<std::size_t>(c)) *
                    q.nodes;
                const auto& pa = w.comp[static_cast<std::size_t>(a)];
                const auto& pb = w.comp[static_cast<std::size_t>(b)];
                const auto& da = d[static_cast<std::size_t>(c)][static_cast<std::size_t>(a)];
                const auto& db = d[static_cast<std::size_t>(c)][static_cast<std::size_t>(b)];
                for (std::size_t i = 0; i < q.nodes; ++i) {
                    if (rho[i] <= floor) continue;  // vacuum: masked to zero
                    q.v[base + i] = (pa[i] * db[i] - pb[i] * da[i]) / rho[i];
                }
            }
    return q;
}

// Rescale the phase of a single-component field: psi -> |psi| e^{i (b0/hbar) theta}
// with theta the continuously unwrapped argument of psi.  This is the change of
// variables that carries the nonlinear b0-wave equation into the linear hbar one.
// The phase is unwrapped along grid lines outward from the densest node, so the
// physically meaningful region is anchored cleanly even when low-density tails
// carry junk phase.  Where the density is resolved (above 1e-6 of the peak),
// steps within 5% of the +-pi branch cut mean the phase is not resolved on this
// grid and are rejected; below that the phase carries no weight and is unwrapped
// permissively.  Vacuum nodes (density below 1e-12 of the peak) map to zero.
inline WaveField gauge_map(const WaveField& w, double b0, double hbar) {
    if (w.k() != 1)
        throw std::invalid_argument("gauge error - phase rescaling needs a single-component field");
    if (b0 == 0.0 || !(hbar > 0.0))
        throw std::invalid_argument("gauge error - b0 must be nonzero and hbar positive");
    const Grid& g = w.grid();
    const std::vector<Complex>& psi = w.comp[0];
    std::vector<double> rho(w.size());
    double mx = 0.0;
    std::size_t ref = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        rho[i] = std::norm(psi[i]);
        if (rho[i] > mx) {
            mx = rho[i];
            ref = i;
        }
    }
    const double floor = 1e-12 * mx;
    const double resolved = 1e-6 * mx;
    std::vector<double> raw(w.size()), theta(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) raw[i] = std::arg(psi[i]);

    const double two_pi = 2.0 * std::acos(-1.0);
    const double jump_limit = 0.95 * std::acos(-1.0);
    auto chain = [&](std::size_t node, std::size_t prev) {
        const double step = std::remainder(raw[node] - raw[prev], two_pi);
        if (rho[node] > resolved && rho[prev] > resolved && std::abs(step) >= jump_limit)
            throw std::runtime_error(
                "gauge error - phase jump of nearly pi per cell, field is not resolved");
        theta[node] = theta[prev] + step;
    };

    // Unwrap cascade from the reference node: its axis-0 line first, then
    // axis-1 lines anchored on that line, then axis-2 lines on the plane.
    const auto shape = [&](int a) {
        return (a < g.dim()) ? g.extent(a) : static_cast<std::size_t>(1);
    };
    const auto ridx = g.unravel(ref);
    const std::size_t r0 = ridx[0], r1 = ridx[1], r2 = ridx[2];
    theta[ref] = raw[ref];
    for (std::size_t i = r0 + 1; i < shape(0); ++i)
        chain(g.ravel({i, r1, r2}), g.ravel({i - 1, r1, r2}));
    for (std::size_t i = r0; i-- > 0;)
        chain(g.ravel({i, r1, r2}), g.ravel({i + 1, r1, r2}));
    for (std::size_t i = 0; i < shape(0); ++i) {
        for (std::size_t j = r1 + 1; j < shape(1); ++j)
            chain(g.ravel({i, j, r2}), g.ravel({i, j - 1, r2}));
        for (std::size_t j = r1; j-- > 0;)
            chain(g.ravel({i, j, r2}), g.ravel({i, j + 1, r2}));
    }
    for (std::size_t i = 0; i < shape(0); ++i)
        for (std::size_t j = 0; j < shape(1); ++j) {
            for (std::size_t l = r2 + 1; l < shape(2); ++l)
                chain(g.ravel({i, j, l}), g.ravel({i, j, l - 1}));
            for (std::size_t l = r2; l-- > 0;)
                chain(g.ravel({i, j, l}), g.ravel({i, j, l + 1}));
        }

    WaveField out(g, 1);
    const double scale = b0 / hbar;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (rho[i] <= floor) continue;  // vacuum maps to zero
        out.comp[0][i] = std::abs(psi[i]) * std::exp(Complex(0.0, scale * theta[i]));
    }
    return out;
}

// Mean stochastic momentum p_st = 2 lambda (hbar/2) grad(ln rho).
inline VectorField stochastic_momentum(const ScalarField& rho, double lambda, double hbar) {
    return stochastic_momentum_field(lambda, hbar, rho);
}

// A k_m-component wave field carries spin s = 2 k_m + 1 in the enumeration of
// independent pair tensors; the scalar case k_m = 1 is spinless (s counts the
// Q-pair multiplicity, not physical angular momentum).
inline int k_spin(int k_m) {
    if (k_m < 1) throw std::invalid_argument("k_spin: component count must be at least 1");
    return 2 * k_m + 1;
}

// A uniformly spaced stack of wave-field snapshots.
struct PsiHistory {
    std::vector<WaveField> levels;
    double t0 = 0.0;
    double dt = 0.0;
};

// Max pointwise residual of i hbar d0 psi + (hbar^2/2m) lap psi - m c^2 psi
// - V psi over the interior time levels, vacuum nodes masked.  Both time and
// space derivatives are the second-order stencils used everywhere else.
inline double linear_residual(const PsiHistory& h, double hbar, double mass, double c,
                              const Potential* V = nullptr) {
    if (h.levels.size() < 3)
        throw std::invalid_argument("linear_residual: need at least three time levels");
    if (!(h.dt > 0.0)) throw std::invalid_argument("linear_residual: dt must be positive");
    const Grid& g = h.levels.front().grid();
    const int k = h.levels.front().k();
    for (const WaveField& w : h.levels) {
        require_same_grid(g, w.grid(), "linear_residual");
        if (w.k() != k) throw std::invalid_argument("linear_residual: component count changed");
    }
    const double mc2 = mass * c * c;
    double worst = 0.0;
    for (std::size_t lev = 1; lev + 1 < h.levels.size(); ++lev) {
        const WaveField& w = h.levels[lev];
        ScalarField rho = psi_density(w);
        const double floor = 1e-12 * rho.max();
        for (int a = 0; a < k; ++a) {
            const std::size_t s = static_cast<std::size_t>(a);
            std::vector<Complex> lap = detail::complex_laplacian(w, a);
            for (std::size_t i = 0; i < w.size(); ++i) {
                if (rho[i] <= floor) continue;
                const Complex d0 =
                    (h.levels[lev + 1].comp[s][i] - h.levels[lev - 1].comp[s][i]) / (2.0 * h.dt);
                Complex r = Complex(0.0, hbar) * d0 + (hbar * hbar / (2.0 * mass)) * lap[i] -
                            mc2 * w.comp[s][i];
                if (V) {
                    const auto pt = g.point(i);
                    VecD x;
                    x.n = g.dim();
                    for (int ax = 0; ax < x.n; ++ax) x[ax] = pt[static_cast<std::size_t>(ax)];
                    r -= V->eval(x) * w.comp[s][i];
                }
                worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

}  // namespace enslab
