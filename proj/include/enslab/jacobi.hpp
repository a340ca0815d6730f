#pragma once
// Jacobian ("hydrodynamic potential") machinery for the label maps
// xi_i(x^0..x^n), i = 0..n: determinants, first and second cofactors, and the
// numerical verification of the cofactor identities the Clebsch integration
// rests on:
//
//   divergence of second cofactors:  d/dx^k [d2J/dxi_{i,k} dxi_{s,l}] = 0
//   product formula:                 d2J/dxi_{i,k} dxi_{s,l}
//                                      = (C_ik C_sl - C_il C_sk)/J
//   duality (rows and columns):      xi_{l,k} C_sk = delta_l^s J,
//                                    xi_{k,l} C_ks = delta_l^s J
//   cofactor divergence:             d/dx^k C_ik = 0
//                                      (equivalently D2 contracted with the
//                                       symmetric Hessian of the map)
//
// where C_ik = dJ/dxi_{i,k} and xi_{i,k} = dxi_i/dx^k.  First and second
// cofactors are computed exactly (sub-determinant expansion, no numerical
// differentiation of determinants); only the outer d/dx^k uses central
// differences, so truncation error lives in exactly one layer and halving h
// divides residuals by ~4.

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "enslab/grid.hpp"

namespace enslab {

// Closed-form spacetime label map with analytic Jacobian, used by the
// identity probes.  n = spatial dimension; the matrix is (n+1) x (n+1) with
// index 0 the time row/column.
struct SmoothMap {
    int n = 2;
    // xi_i(x), i = 0..n
    std::function<void(const std::array<double, 4>&, std::array<double, 4>&)> value;
    // jac[i][k] = dxi_i/dx^k
    std::function<void(const std::array<double, 4>&, std::array<std::array<double, 4>, 4>&)> jacobian;
};

namespace jac {

using Mat4 = std::array<std::array<double, 4>, 4>;

inline double det(const Mat4& a, int m) {
    if (m == 1) return a[0][0];
    if (m == 2) return a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if (m == 3)
        return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
               a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
               a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // m == 4: expand along the first row.
    double s = 0.0;
    for (int c = 0, sign = 1; c < 4; ++c, sign = -sign) {
        Mat4 sub{};
        for (int r = 1; r < 4; ++r) {
            int cc = 0;
            for (int k = 0; k < 4; ++k) {
                if (k == c) continue;
                sub[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(cc++)] =
                    a[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
            }
        }
        s += sign * a[0][static_cast<std::size_t>(c)] * det(sub, 3);
    }
    return s;
}

// Minor with one row/column deleted.
inline double minor1(const Mat4& a, int m, int row, int col) {
    Mat4 sub{};
    int rr = 0;
    for (int r = 0; r < m; ++r) {
        if (r == row) continue;
        int cc = 0;
        for (int c = 0; c < m; ++c) {
            if (c == col) continue;
            sub[static_cast<std::size_t>(rr)][static_cast<std::size_t>(cc++)] =
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
        ++rr;
    }
    return det(sub, m - 1);
}

// Minor with two rows/columns deleted (m >= 2; result is det of (m-2)x(m-2)).
inline double minor2(const Mat4& a, int m, int r1, int r2, int c1, int c2) {
    if (m == 2) return 1.0;  // empty determinant
    Mat4 sub{};
    int rr = 0;
    for (int r = 0; r < m; ++r) {
        if (r == r1 || r == r2) continue;
        int cc = 0;
        for (int c = 0; c < m; ++c) {
            if (c == c1 || c == c2) continue;
            sub[static_cast<std::size_t>(rr)][static_cast<std::size_t>(cc++)] =
                a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
        ++rr;
    }
    return det(sub, m - 2);
}

// First cofactor C_ik = dJ/dA_ik.
inline double cofactor(const Mat4& a, int m, int i, int k) {
    const double sgn = (((i + k) % 2) == 0) ? 1.0 : -1.0;
    return sgn * minor1(a, m, i, k);
}

// Second cofactor D2 = d2J/(dA_ik dA_sl): zero when rows or columns collide,
// otherwise a signed two-row/two-column minor.  The sign is
// (-1)^(i+s+k+l) * eps with eps = +1 when (i-s)(k-l) > 0.
inline double second_cofactor(const Mat4& a, int m, int i, int k, int s, int l) {
    if (i == s || k == l) return 0.0;
    const double base = (((i + s + k + l) % 2) == 0) ? 1.0 : -1.0;
    const double eps = ((i - s) * (k - l) > 0) ? 1.0 : -1.0;
    return base * eps * minor2(a, m, i, s, k, l);
}

}  // namespace jac

struct IdentityReport {
    double div_second_cofactor = 0.0;  // divergence of D2 over the first coordinate index
    double product_formula = 0.0;      // D2 vs (C C - C C)/J
    double duality_rows = 0.0;         // xi_{l,k} C_sk = delta J
    double duality_cols = 0.0;         // xi_{k,l} C_ks = delta J
    double cofactor_divergence = 0.0;  // d_k C_ik = 0 (outer FD)
    double cofactor_contraction = 0.0; // D2 contracted with the map Hessian
    double jacobian = 0.0;             // det at the probe point (context)

    double max_residual() const {
        double m = div_second_cofactor;
        m = std::max(m, product_formula);
        m = std::max(m, duality_rows);
        m = std::max(m, duality_cols);
        m = std::max(m, cofactor_divergence);
        return std::max(m, cofactor_contraction);
    }
};

namespace jac {

inline Mat4 jacobian_at(const SmoothMap& map, const std::array<double, 4>& x) {
    Mat4 a{};
    map.jacobian(x, a);
    return a;
}

}  // namespace jac

// Evaluate all cofactor identities at one probe point with FD step h for the
// outer x-derivatives.  Residuals are reported relative to
// max(1, sum of |terms|), so constant-Jacobian maps land at machine zero and
// smooth maps show pure O(h^2) truncation.
inline IdentityReport verify_jacobian_identities(const SmoothMap& map,
                                                 const std::array<double, 4>& x, double h) {
    const int m = map.n + 1;
    IdentityReport rep;
    jac::Mat4 a = jac::jacobian_at(map, x);
    const double J = jac::det(a, m);
    rep.jacobian = J;
    if (std::abs(J) < 1e-14)
        throw std::invalid_argument("jacobi: singular Jacobian at probe point");

    // Displaced Jacobians for the outer central differences.
    std::array<jac::Mat4, 4> ap, am;
    for (int k = 0; k < m; ++k) {
        std::array<double, 4> xp = x, xm = x;
        xp[static_cast<std::size_t>(k)] += h;
        xm[static_cast<std::size_t>(k)] -= h;
        ap[static_cast<std::size_t>(k)] = jac::jacobian_at(map, xp);
        am[static_cast<std::size_t>(k)] = jac::jacobian_at(map, xm);
    }

    // Divergence of second cofactors over the first coordinate index.
    for (int i = 0; i < m; ++i)
        for (int s = 0; s < m; ++s)
            for (int l = 0; l < m; ++l) {
                double sum = 0.0, scale = 0.0;
                for (int k = 0; k < m; ++k) {
                    const double t = (jac::second_cofactor(ap[static_cast<std::size_t>(k)], m, i, k, s, l) -
                                      jac::second_cofactor(am[static_cast<std::size_t>(k)], m, i, k, s, l)) /
                                     (2.0 * h);
                    sum += t;
                    scale += std::abs(t);
                }
                rep.div_second_cofactor =
                    std::max(rep.div_second_cofactor, std::abs(sum) / std::max(1.0, scale));
            }

    // Product formula (pointwise algebra; machine precision always).
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < m; ++k)
            for (int s = 0; s < m; ++s)
                for (int l = 0; l < m; ++l) {
                    const double d2 = jac::second_cofactor(a, m, i, k, s, l);
                    const double rhs = (jac::cofactor(a, m, i, k) * jac::cofactor(a, m, s, l) -
                                        jac::cofactor(a, m, i, l) * jac::cofactor(a, m, s, k)) /
                                       J;
                    rep.product_formula =
                        std::max(rep.product_formula, std::abs(d2 - rhs) / std::max(1.0, std::abs(d2)));
                }

    // Duality in both index positions.
    for (int l = 0; l < m; ++l)
        for (int s = 0; s < m; ++s) {
            double rows = 0.0, cols = 0.0;
            for (int k = 0; k < m; ++k) {
                rows += a[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] *
                        jac::cofactor(a, m, s, k);
                cols += a[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] *
                        jac::cofactor(a, m, k, s);
            }
            const double want = (l == s) ? J : 0.0;
            const double den = std::max(1.0, std::abs(J));
            rep.duality_rows = std::max(rep.duality_rows, std::abs(rows - want) / den);
            rep.duality_cols = std::max(rep.duality_cols, std::abs(cols - want) / den);
        }

    // Cofactor divergence, outer FD form.
    for (int i = 0; i < m; ++i) {
        double sum = 0.0, scale = 0.0;
        for (int k = 0; k < m; ++k) {
            const double t = (jac::cofactor(ap[static_cast<std::size_t>(k)], m, i, k) -
                              jac::cofactor(am[static_cast<std::size_t>(k)], m, i, k)) /
                             (2.0 * h);
            sum += t;
            scale += std::abs(t);
        }
        rep.cofactor_divergence =
            std::max(rep.cofactor_divergence, std::abs(sum) / std::max(1.0, scale));
    }

    // Contraction form: D2[(i,k),(s,l)] * d_k d_l xi_s.  The FD Hessian is
    // symmetrized in (k,l), so the antisymmetry of D2 cancels it pairwise.
    std::array<jac::Mat4, 4> hess{};  // hess[s][k][l] = d_k d_l xi_s
    for (int k = 0; k < m; ++k)
        for (int l = k; l < m; ++l) {
            for (int s = 0; s < m; ++s) {
                const double hkl =
                    (ap[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(l)] -
                     am[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)][static_cast<std::size_t>(l)]) /
                    (2.0 * h);
                const double hlk =
                    (ap[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] -
                     am[static_cast<std::size_t>(l)][static_cast<std::size_t>(s)][static_cast<std::size_t>(k)]) /
                    (2.0 * h);
                const double sym = 0.5 * (hkl + hlk);
                hess[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = sym;
                hess[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] = sym;
            }
        }
    for (int i = 0; i < m; ++i) {
        double sum = 0.0, scale = 0.0;
        for (int k = 0; k < m; ++k)
            for (int s = 0; s < m; ++s)
                for (int l = 0; l < m; ++l) {
                    const double t =
                        jac::second_cofactor(a, m, i, k, s, l) *
                        hess[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
                    sum += t;
                    scale += std::abs(t);
                }
        rep.cofactor_contraction =
            std::max(rep.cofactor_contraction, std::abs(sum) / std::max(1.0, scale));
    }
    return rep;
}

}  // namespace enslab
