#pragma once
// Hamiltonian models H(t, x, p) with analytic momentum derivatives.
// Three variants:
//   Classical            H = p^2/2m + V(x)
//   Relativistic         H = sqrt(m^2 c^4 + p^2 c^2)
//   EffectiveStochastic  H = sqrt(m^2 c^4 + p^2 c^2 + c^2 |p_st|^2),
// where p_st = lambda * hbar * grad(ln rho) is the mean momentum of the
// stochastic component of the motion; the effective variant therefore needs
// an ambient density field and is evaluated through eval_effective.
//
// All ln(rho) derivatives are taken in quotient form, ln(rho_j / rho_i), so
// the result is invariant under rho -> a*rho whenever the scaling itself is
// exact in floating point (the homogeneity the effective Hamiltonian must
// respect: only the *shape* of rho can carry momentum).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "enslab/calculus.hpp"
#include "enslab/grid.hpp"

namespace enslab {

// Small point/momentum value; n = active components (1..3).
struct VecD {
    std::array<double, 3> c{0.0, 0.0, 0.0};
    int n = 1;
    VecD() = default;
    VecD(double x) : c{x, 0.0, 0.0}, n(1) {}
    VecD(double x, double y) : c{x, y, 0.0}, n(2) {}
    VecD(double x, double y, double z) : c{x, y, z}, n(3) {}
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double norm2() const {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += c[static_cast<std::size_t>(i)] * c[static_cast<std::size_t>(i)];
        return s;
    }
};

// Closed-form potential expression set: zero, harmonic well, polynomial.
// Serializable (see config.hpp) and cheap to evaluate; multi-d points are
// handled isotropically (harmonic: k/2 |x-x0|^2) or per-axis (polynomial).
struct Potential {
    enum class Kind { zero, harmonic, polynomial };
    Kind kind = Kind::zero;
    double k = 0.0;   // harmonic stiffness
    double x0 = 0.0;  // harmonic center
    std::vector<double> coeffs;  // polynomial c0 + c1 x + c2 x^2 + ...

    static Potential zero() { return Potential{}; }
    static Potential harmonic(double stiffness, double center = 0.0) {
        Potential p;
        p.kind = Kind::harmonic;
        p.k = stiffness;
        p.x0 = center;
        return p;
    }
    static Potential polynomial(std::vector<double> c) {
        Potential p;
        p.kind = Kind::polynomial;
        p.coeffs = std::move(c);
        return p;
    }

    double eval1(double x) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::harmonic: return 0.5 * k * (x - x0) * (x - x0);
            case Kind::polynomial: {
                double s = 0.0;
                for (std::size_t i = coeffs.size(); i-- > 0;) s = s * x + coeffs[i];
                return s;
            }
        }
        return 0.0;
    }
    double deriv1(double x) const {
        switch (kind) {
            case Kind::zero: return 0.0;
            case Kind::harmonic: return k * (x - x0);
            case Kind::polynomial: {
                double s = 0.0;
                for (std::size_t i = coeffs.size(); i-- > 1;)
                    s = s * x + static_cast<double>(i) * coeffs[i];
                return s;
            }
        }
        return 0.0;
    }
    double eval(const VecD& x) const {
        if (kind == Kind::harmonic) {
            double s = 0.0;
            for (int i = 0; i < x.n; ++i) s += (x[i] - x0) * (x[i] - x0);
            return 0.5 * k * s;
        }
        double s = 0.0;
        for (int i = 0; i < x.n; ++i) s += eval1(x[i]);
        return s;
    }
    double deriv(const VecD& x, int axis) const {
        if (kind == Kind::harmonic) return k * (x[axis] - x0);
        return deriv1(x[axis]);
    }
};

struct Classical {
    double m = 1.0;
    Potential V;
};
struct Relativistic {
    double m = 1.0;
    double c = 1.0;
};
struct EffectiveStochastic {
    double m = 1.0;
    double c = 1.0;
    double hbar = 1.0;
    double lambda = 0.5;  // p_st = lambda * hbar * grad(ln rho)
};

using HamiltonianModel = std::variant<Classical, Relativistic, EffectiveStochastic>;

inline void check_positive_params(const HamiltonianModel& model) {
    auto bad = [](double v) { return !(v > 0.0); };
    if (auto* cl = std::get_if<Classical>(&model)) {
        if (bad(cl->m)) throw std::invalid_argument("hamiltonian: mass must be positive");
    } else if (auto* re = std::get_if<Relativistic>(&model)) {
        if (bad(re->m) || bad(re->c))
            throw std::invalid_argument("hamiltonian: m, c must be positive");
    } else if (auto* ef = std::get_if<EffectiveStochastic>(&model)) {
        if (bad(ef->m) || bad(ef->c) || bad(ef->hbar) || ef->lambda < 0.0)
            throw std::invalid_argument("hamiltonian: m, c, hbar positive; lambda >= 0");
    }
}

inline double eval_H(const HamiltonianModel& model, double /*t*/, const VecD& x, const VecD& p) {
    if (auto* cl = std::get_if<Classical>(&model)) return p.norm2() / (2.0 * cl->m) + cl->V.eval(x);
    if (auto* re = std::get_if<Relativistic>(&model)) {
        const double mc2 = re->m * re->c * re->c;
        return std::sqrt(mc2 * mc2 + p.norm2() * re->c * re->c);
    }
    throw std::invalid_argument(
        "hamiltonian: variant error - effective stochastic H needs a density field, use eval_effective");
}

inline VecD velocity_from_momentum(const HamiltonianModel& model, double /*t*/, const VecD& x,
                                   const VecD& p) {
    (void)x;
    VecD v;
    v.n = p.n;
    if (auto* cl = std::get_if<Classical>(&model)) {
        for (int i = 0; i < p.n; ++i) v[i] = p[i] / cl->m;
        return v;
    }
    if (auto* re = std::get_if<Relativistic>(&model)) {
        const double mc2 = re->m * re->c * re->c;
        const double E = std::sqrt(mc2 * mc2 + p.norm2() * re->c * re->c);
        for (int i = 0; i < p.n; ++i) v[i] = p[i] * re->c * re->c / E;
        return v;
    }
    throw std::invalid_argument(
        "hamiltonian: variant error - effective stochastic velocity needs a density field");
}

// dH/dx (force is its negative); used by the trajectory integrators.
inline VecD dHdx(const HamiltonianModel& model, double /*t*/, const VecD& x, const VecD& p) {
    (void)p;
    VecD f;
    f.n = x.n;
    if (auto* cl = std::get_if<Classical>(&model)) {
        for (int i = 0; i < x.n; ++i) f[i] = cl->V.deriv(x, i);
        return f;
    }
    if (std::get_if<Relativistic>(&model)) return f;  // free: no x dependence
    throw std::invalid_argument("hamiltonian: variant error - use eval_effective for stochastic H");
}

namespace detail {

// grad(ln rho) along one axis in quotient form.  Interior: central,
// ln(r_{i+1}/r_{i-1})/2h.  Clamped edges, second order, decomposed into
// neighbor quotients: -3L0+4L1-L2 = 3 ln(r1/r0) + ln(r1/r2).
inline ScalarField grad_log_quotient(const ScalarField& rho_clamped, int axis) {
    const Grid& g = rho_clamped.grid();
    const double h = g.spacing(axis);
    const bool periodic = (g.boundary() == Boundary::periodic);
    return detail::apply_along_axis(
        rho_clamped, axis, [h, periodic](const std::vector<double>& r, std::vector<double>& d) {
            const std::size_t n = r.size();
            for (std::size_t i = 1; i + 1 < n; ++i) d[i] = std::log(r[i + 1] / r[i - 1]) / (2.0 * h);
            if (periodic) {
                d[0] = std::log(r[1] / r[n - 1]) / (2.0 * h);
                d[n - 1] = std::log(r[0] / r[n - 2]) / (2.0 * h);
            } else {
                d[0] = (3.0 * std::log(r[1] / r[0]) + std::log(r[1] / r[2])) / (2.0 * h);
                d[n - 1] =
                    (3.0 * std::log(r[n - 1] / r[n - 2]) + std::log(r[n - 3] / r[n - 2])) / (2.0 * h);
            }
        });
}

inline ScalarField clamp_floor(const ScalarField& rho, const char* who) {
    double mx = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (rho[i] <= 0.0)
            throw std::invalid_argument(std::string(who) + ": density error - non-positive density");
        mx = std::max(mx, rho[i]);
    }
    const double floor = 1e-12 * mx;
    ScalarField out = rho;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(out[i], floor);
    return out;
}

}  // namespace detail

// The mean stochastic momentum field p_st = lambda * hbar * grad(ln rho).
inline VectorField stochastic_momentum_field(double lambda, double hbar, const ScalarField& rho) {
    ScalarField rc = detail::clamp_floor(rho, "stochastic momentum");
    VectorField out(rho.grid());
    for (int a = 0; a < rho.grid().dim(); ++a) {
        ScalarField d = detail::grad_log_quotient(rc, a);
        for (std::size_t i = 0; i < d.size(); ++i) d[i] *= lambda * hbar;
        out.comp[static_cast<std::size_t>(a)] = d;
    }
    return out;
}

// H_eff = sqrt(m^2 c^4 + p^2 c^2 + c^2 |p_st|^2) on the grid of rho.
inline ScalarField eval_effective(const EffectiveStochastic& model, const VectorField& p,
                                  const ScalarField& rho) {
    require_same_grid(p.grid(), rho.grid(), "eval_effective");
    VectorField pst = stochastic_momentum_field(model.lambda, model.hbar, rho);
    const double c2 = model.c * model.c;
    const double mc2 = model.m * c2;
    ScalarField out(rho.grid());
    for (std::size_t i = 0; i < out.size(); ++i) {
        double p2 = 0.0, pst2 = 0.0;
        for (int a = 0; a < rho.grid().dim(); ++a) {
            const double pa = p.comp[static_cast<std::size_t>(a)][i];
            const double sa = pst.comp[static_cast<std::size_t>(a)][i];
            p2 += pa * pa;
            pst2 += sa * sa;
        }
        out[i] = std::sqrt(mc2 * mc2 + p2 * c2 + pst2 * c2);
    }
    return out;
}

}  // namespace enslab
