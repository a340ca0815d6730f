#pragma once

// Cross-representation density comparison.  Each input is a time series of
// rho(x) snapshots (long-format CSV: t, x, rho).  Series are matched on
// common snapshot times; series with different spatial grids are resampled
// by linear interpolation onto the first series' nodes inside the overlap of
// their x-ranges.  Metrics per pair and time: L1 and L2 (trapezoid-weighted
// integrals of |drho| and drho^2) and the pointwise max.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "csv.hpp"

namespace enslab {

struct DensitySeries {
    std::string name;
    std::vector<double> times;              // sorted
    std::vector<double> x;                  // shared by all snapshots, ascending
    std::vector<std::vector<double>> rho;   // [time index][node]
};

inline DensitySeries load_density_csv(const std::string& path, const std::string& name) {
    const CsvTable t = read_csv(path);
    if (t.header.size() < 3 || t.header[0] != "t" || t.header[1] != "x" || t.header[2] != "rho")
        throw std::runtime_error("compare error - '" + path + "' is not a t,x,rho density table");
    std::map<double, std::vector<std::pair<double, double>>> blocks;
    for (const auto& row : t.rows) blocks[row[0]].push_back({row[1], row[2]});
    if (blocks.empty()) throw std::runtime_error("compare error - '" + path + "' has no rows");

    DensitySeries s;
    s.name = name;
    bool first = true;
    for (auto& [tv, pts] : blocks) {
        std::sort(pts.begin(), pts.end());
        std::vector<double> xs, rs;
        xs.reserve(pts.size());
        rs.reserve(pts.size());
        for (const auto& [xv, rv] : pts) {
            xs.push_back(xv);
            rs.push_back(rv);
        }
        if (first) {
            s.x = xs;
            first = false;
        } else if (xs != s.x) {
            throw std::runtime_error("compare error - '" + path +
                                     "' changes its spatial grid between snapshot times");
        }
        s.times.push_back(tv);
        s.rho.push_back(std::move(rs));
    }
    if (s.x.size() < 2)
        throw std::runtime_error("compare error - '" + path + "' has fewer than two nodes");
    return s;
}

struct PairMetrics {
    std::size_t a = 0, b = 0;  // series indices
    double t = 0.0;
    double l1 = 0.0, l2 = 0.0, linf = 0.0;
};

namespace detail {

inline double interp_linear(const std::vector<double>& xs, const std::vector<double>& ys,
                            double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    if (it == xs.begin()) return ys.front();
    if (it == xs.end()) return ys.back();
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1.0 - w) * ys[j - 1] + w * ys[j];
}

}  // namespace detail

inline std::vector<PairMetrics> compare_series(const std::vector<DensitySeries>& in,
                                               double time_tol = 1e-9) {
    if (in.size() < 2)
        throw std::invalid_argument("compare error - need at least two density series");
    std::vector<PairMetrics> out;
    for (std::size_t a = 0; a < in.size(); ++a) {
        for (std::size_t b = a + 1; b < in.size(); ++b) {
            const DensitySeries& sa = in[a];
            const DensitySeries& sb = in[b];
            const double lo = std::max(sa.x.front(), sb.x.front());
            const double hi = std::min(sa.x.back(), sb.x.back());
            if (!(hi > lo))
                throw std::runtime_error("compare error - series '" + sa.name + "' and '" +
                                         sb.name + "' cover disjoint x-ranges");
            bool any_time = false;
            for (std::size_t ia = 0; ia < sa.times.size(); ++ia) {
                std::size_t ib = sb.times.size();
                for (std::size_t j = 0; j < sb.times.size(); ++j)
                    if (std::abs(sb.times[j] - sa.times[ia]) <= time_tol) {
                        ib = j;
                        break;
                    }
                if (ib == sb.times.size()) continue;
                any_time = true;

                PairMetrics m;
                m.a = a;
                m.b = b;
                m.t = sa.times[ia];
                double prev_x = 0.0, prev_d = 0.0;
                bool have_prev = false;
                for (std::size_t i = 0; i < sa.x.size(); ++i) {
                    const double x = sa.x[i];
                    if (x < lo || x > hi) continue;
                    const double d =
                        std::abs(sa.rho[ia][i] - detail::interp_linear(sb.x, sb.rho[ib], x));
                    m.linf = std::max(m.linf, d);
                    if (have_prev) {
                        const double w = 0.5 * (x - prev_x);
                        m.l1 += w * (d + prev_d);
                        m.l2 += w * (d * d + prev_d * prev_d);
                    }
                    prev_x = x;
                    prev_d = d;
                    have_prev = true;
                }
                m.l2 = std::sqrt(m.l2);
                out.push_back(m);
            }
            if (!any_time)
                throw std::runtime_error("compare error - series '" + sa.name + "' and '" +
                                         sb.name + "' have disjoint time ranges");
        }
    }
    return out;
}

}  // namespace enslab
