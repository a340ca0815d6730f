#pragma once
// Clebsch-potential representation of the momentum field,
//
//   P_beta = b0 * (d_beta phi + sum_alpha g^alpha(xi(x)) d_beta xi_alpha),
//
// with b0 an arbitrary nonzero constant, phi the velocity potential, xi the
// Lagrangian labels and g^alpha arbitrary integration functions over label
// space.  Potential-form g (a gradient in label space) gives irrotational
// momentum; nonzero label vorticity Omega^{ab} = dg^a/dxi_b - dg^b/dxi_a is
// what a gradient ansatz for P cannot represent.
//
// verify_integration substitutes this momentum into the Lagrangian-variation
// divergence expression -d_l(p_i * D2[(0,i),(k,l)]) whose identical vanishing
// is exactly what makes the Clebsch form a legitimate first integral; the
// cancellation rests on the cofactor identities checked in jacobi.hpp.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "enslab/calculus.hpp"
#include "enslab/grid.hpp"
#include "enslab/hamiltonian.hpp"
#include "enslab/interp.hpp"
#include "enslab/jacobi.hpp"

namespace enslab {

using LabelFunc = std::function<double(const VecD&)>;

struct ClebschData {
    double b0 = 1.0;
    std::vector<LabelFunc> g;  // g^alpha(xi), alpha = 1..n (vector index 0..n-1)
};

// Lagrangian label fields xi_alpha(t, x) over the spatial grid.
struct LabelMap {
    std::vector<ScalarField> xi;

    static LabelMap identity(const Grid& g) {
        LabelMap m;
        for (int a = 0; a < g.dim(); ++a) {
            const int axis = a;
            m.xi.push_back(ScalarField::sample(
                g, [axis](const std::array<double, 3>& x) { return x[static_cast<std::size_t>(axis)]; }));
        }
        return m;
    }
};

inline VecD labels_at(const LabelMap& m, std::size_t node) {
    VecD xi;
    xi.n = static_cast<int>(m.xi.size());
    for (int a = 0; a < xi.n; ++a) xi[a] = m.xi[static_cast<std::size_t>(a)][node];
    return xi;
}

inline VectorField clebsch_momentum(const ScalarField& phi, const LabelMap& labels,
                                    const ClebschData& data) {
    const Grid& g = phi.grid();
    if (labels.xi.size() != data.g.size() || labels.xi.size() > 3)
        throw std::invalid_argument("clebsch_momentum: dimension mismatch between labels and g");
    for (const auto& xi : labels.xi) require_same_grid(xi.grid(), g, "clebsch_momentum");

    VectorField P = gradient(phi);
    std::vector<VectorField> dxi;
    dxi.reserve(labels.xi.size());
    for (const auto& xi : labels.xi) dxi.push_back(gradient(xi));

    for (std::size_t node = 0; node < g.size(); ++node) {
        const VecD xi = labels_at(labels, node);
        for (std::size_t alpha = 0; alpha < data.g.size(); ++alpha) {
            const double ga = data.g[alpha](xi);
            for (int b = 0; b < g.dim(); ++b)
                P.comp[static_cast<std::size_t>(b)][node] += ga * dxi[alpha].comp[static_cast<std::size_t>(b)][node];
        }
    }
    for (int b = 0; b < g.dim(); ++b)
        for (std::size_t node = 0; node < g.size(); ++node)
            P.comp[static_cast<std::size_t>(b)][node] *= data.b0;
    return P;
}

// Label vorticity Omega^{ab} at one label point (central differences in
// label space; exact for affine g).
struct Vorticity {
    int n = 0;
    std::array<std::array<double, 3>, 3> omega{};
    double max_abs = 0.0;
    bool irrotational(double tol = 1e-8) const { return max_abs < tol; }
};

inline Vorticity vorticity(const ClebschData& data, const VecD& at, double fd_step = 1e-5) {
    Vorticity out;
    out.n = static_cast<int>(data.g.size());
    for (int a = 0; a < out.n; ++a)
        for (int b = 0; b < out.n; ++b) {
            if (a == b) continue;
            VecD p1 = at, m1 = at;
            p1[b] += fd_step;
            m1[b] -= fd_step;
            const double dga_db =
                (data.g[static_cast<std::size_t>(a)](p1) - data.g[static_cast<std::size_t>(a)](m1)) /
                (2.0 * fd_step);
            out.omega[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] += dga_db;
            out.omega[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] -= dga_db;
        }
    for (int a = 0; a < out.n; ++a)
        for (int b = 0; b < out.n; ++b)
            out.max_abs = std::max(out.max_abs, std::abs(out.omega[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]));
    return out;
}

// Fit the integration functions from initial momentum data under the
// standard labeling xi(0, x) = x, phi(0, x) = 0: g^alpha(xi) = p0_alpha(xi)/b0,
// tabulated on the grid with multilinear interpolation between samples.
inline ClebschData fit_g_from_initial(const VectorField& p0, double b0) {
    if (b0 == 0.0) throw std::invalid_argument("fit_g_from_initial: b0 must be nonzero");
    ClebschData data;
    data.b0 = b0;
    for (int a = 0; a < p0.dim(); ++a) {
        ScalarField table = p0.comp[static_cast<std::size_t>(a)];
        for (std::size_t i = 0; i < table.size(); ++i) table[i] /= b0;
        data.g.push_back([table](const VecD& xi) { return interpolate(table, xi); });
    }
    return data;
}

// ---------------------------------------------------------------------------
// Integration-identity probe on closed-form spacetime data.

// Closed-form scalar over spacetime with analytic gradient (for phi).
struct SmoothScalar {
    std::function<double(const std::array<double, 4>&)> value;
    std::function<void(const std::array<double, 4>&, std::array<double, 4>&)> grad;

    static SmoothScalar constant(double c) {
        SmoothScalar s;
        s.value = [c](const std::array<double, 4>&) { return c; };
        s.grad = [](const std::array<double, 4>&, std::array<double, 4>& g) { g = {0, 0, 0, 0}; };
        return s;
    }
};

struct IntegrationReport {
    std::array<double, 4> residual{0, 0, 0, 0};  // R_k, k = 0..n
    double scale = 0.0;                          // sum |FD terms| (context)
    int n = 0;
    double max_abs() const {
        double m = 0.0;
        for (int k = 0; k <= n; ++k) m = std::max(m, std::abs(residual[static_cast<std::size_t>(k)]));
        return m;
    }
};

namespace detail {

// Spacetime Clebsch momentum p_i(y), i = 0..n, from closed-form data.
inline std::array<double, 4> clebsch_momentum_closed(const SmoothMap& map, const SmoothScalar& phi,
                                                     const ClebschData& data,
                                                     const std::array<double, 4>& y) {
    const int m = map.n + 1;
    std::array<double, 4> xi{};
    map.value(y, xi);
    VecD lab;
    lab.n = map.n;
    for (int a = 0; a < map.n; ++a) lab[a] = xi[static_cast<std::size_t>(a + 1)];
    jac::Mat4 dxi{};
    map.jacobian(y, dxi);
    std::array<double, 4> dphi{};
    phi.grad(y, dphi);
    std::array<double, 4> p{};
    for (int i = 0; i < m; ++i) {
        double s = dphi[static_cast<std::size_t>(i)];
        for (int alpha = 1; alpha <= map.n; ++alpha)
            s += data.g[static_cast<std::size_t>(alpha - 1)](lab) *
                 dxi[static_cast<std::size_t>(alpha)][static_cast<std::size_t>(i)];
        p[static_cast<std::size_t>(i)] = data.b0 * s;
    }
    return p;
}

}  // namespace detail

// Residual of the variation equations under the Clebsch substitution:
//   R_k = -sum_{i,l} d_l ( p_i * D2[(0,i),(k,l)] ),  k = 0..n,
// outer derivative by central differences with step h.  Identically zero in
// the continuum for arbitrary smooth (phi, g, xi); numerically O(h^2).
inline IntegrationReport verify_integration(const SmoothMap& map, const SmoothScalar& phi,
                                            const ClebschData& data,
                                            const std::array<double, 4>& x, double h) {
    const int m = map.n + 1;
    if (static_cast<int>(data.g.size()) != map.n)
        throw std::invalid_argument("verify_integration: g component count must equal spatial dim");
    {
        jac::Mat4 a{};
        map.jacobian(x, a);
        if (std::abs(jac::det(a, m)) < 1e-14)
            throw std::invalid_argument("verify_integration: singular Jacobian at probe point");
    }
    IntegrationReport rep;
    rep.n = map.n;
    for (int k = 0; k < m; ++k) {
        double sum = 0.0;
        for (int l = 0; l < m; ++l) {
            std::array<double, 4> xp = x, xm = x;
            xp[static_cast<std::size_t>(l)] += h;
            xm[static_cast<std::size_t>(l)] -= h;
            jac::Mat4 jp{}, jm{};
            map.jacobian(xp, jp);
            map.jacobian(xm, jm);
            const auto pp = detail::clebsch_momentum_closed(map, phi, data, xp);
            const auto pm = detail::clebsch_momentum_closed(map, phi, data, xm);
            for (int i = 0; i < m; ++i) {
                const double tp = pp[static_cast<std::size_t>(i)] * jac::second_cofactor(jp, m, 0, i, k, l);
                const double tm = pm[static_cast<std::size_t>(i)] * jac::second_cofactor(jm, m, 0, i, k, l);
                const double t = (tp - tm) / (2.0 * h);
                sum += t;
                rep.scale += std::abs(t);
            }
        }
        rep.residual[static_cast<std::size_t>(k)] = -sum;
    }
    return rep;
}

}  // namespace enslab
