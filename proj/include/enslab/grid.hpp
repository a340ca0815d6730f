#pragma once
// Uniform tensor-product grids (1-3 axes) and the scalar/vector fields that
// live on them.  Everything here is a plain value type; the discrete calculus
// in calculus.hpp treats fields as immutable inputs and returns new fields,
// so shared inputs can be evaluated concurrently without locks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace enslab {

enum class Boundary { periodic, clamped };

// One grid axis: nodes x_i = lo + i*h.  Periodic axes exclude the duplicate
// endpoint (h = (hi-lo)/n, i = 0..n-1 with x_n identified with x_0); clamped
// axes include both endpoints (h = (hi-lo)/(n-1)).
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n = 0;
};

class Grid {
  public:
    Grid() = default;

    Grid(std::initializer_list<Axis> axes, Boundary bc) : bc_(bc) {
        if (axes.size() < 1 || axes.size() > 3)
            throw std::invalid_argument("grid: dim must be 1, 2 or 3");
        dim_ = static_cast<int>(axes.size());
        int a = 0;
        for (const Axis& ax : axes) ax_[a++] = ax;
        for (int i = 0; i < dim_; ++i) {
            if (ax_[i].n < 8)
                throw std::invalid_argument("grid: need at least 8 nodes per axis");
            if (!(ax_[i].hi > ax_[i].lo))
                throw std::invalid_argument("grid: x_max must exceed x_min");
        }
    }

    static Grid line(double lo, double hi, std::size_t n, Boundary bc) {
        return Grid({Axis{lo, hi, n}}, bc);
    }

    int dim() const { return dim_; }
    Boundary boundary() const { return bc_; }
    const Axis& axis(int a) const { return ax_[static_cast<std::size_t>(a)]; }

    double spacing(int a) const {
        const Axis& ax = axis(a);
        const double denom =
            (bc_ == Boundary::periodic) ? static_cast<double>(ax.n)
                                        : static_cast<double>(ax.n - 1);
        return (ax.hi - ax.lo) / denom;
    }

    std::size_t extent(int a) const { return axis(a).n; }

    std::size_t size() const {
        std::size_t s = 1;
        for (int a = 0; a < dim_; ++a) s *= ax_[a].n;
        return s;
    }

    // Flat layout: axis 0 fastest.  flat = i0 + n0*(i1 + n1*i2).
    std::size_t stride(int a) const {
        std::size_t s = 1;
        for (int b = 0; b < a; ++b) s *= ax_[b].n;
        return s;
    }

    std::size_t ravel(const std::array<std::size_t, 3>& idx) const {
        std::size_t flat = 0, mul = 1;
        for (int a = 0; a < dim_; ++a) {
            flat += idx[static_cast<std::size_t>(a)] * mul;
            mul *= ax_[a].n;
        }
        return flat;
    }

    std::array<std::size_t, 3> unravel(std::size_t flat) const {
        std::array<std::size_t, 3> idx{0, 0, 0};
        for (int a = 0; a < dim_; ++a) {
            idx[static_cast<std::size_t>(a)] = flat % ax_[a].n;
            flat /= ax_[a].n;
        }
        return idx;
    }

    double coord(int a, std::size_t i) const {
        return axis(a).lo + static_cast<double>(i) * spacing(a);
    }

    // Node position (first dim() entries meaningful).
    std::array<double, 3> point(std::size_t flat) const {
        auto idx = unravel(flat);
        std::array<double, 3> x{0.0, 0.0, 0.0};
        for (int a = 0; a < dim_; ++a)
            x[static_cast<std::size_t>(a)] = coord(a, idx[static_cast<std::size_t>(a)]);
        return x;
    }

    bool same_layout(const Grid& o) const {
        if (dim_ != o.dim_ || bc_ != o.bc_) return false;
        for (int a = 0; a < dim_; ++a)
            if (ax_[a].lo != o.ax_[a].lo || ax_[a].hi != o.ax_[a].hi ||
                ax_[a].n != o.ax_[a].n)
                return false;
        return true;
    }

  private:
    int dim_ = 1;
    std::array<Axis, 3> ax_{};
    Boundary bc_ = Boundary::clamped;
};

class ScalarField {
  public:
    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0)
        : grid_(g), v_(g.size(), fill) {}

    template <class F>
    static ScalarField sample(const Grid& g, F&& f) {
        ScalarField out(g);
        for (std::size_t i = 0; i < g.size(); ++i) {
            auto x = g.point(i);
            if constexpr (std::is_invocable_v<F&, double>)
                out.v_[i] = f(x[0]);
            else
                out.v_[i] = f(x);
        }
        return out;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    double& operator[](std::size_t i) { return v_[i]; }
    const std::vector<double>& values() const { return v_; }
    std::vector<double>& values() { return v_; }

    bool finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : v_) m = std::max(m, std::abs(x));
        return m;
    }

    double max() const {
        double m = -std::numeric_limits<double>::infinity();
        for (double x : v_) m = std::max(m, x);
        return m;
    }

  private:
    Grid grid_;
    std::vector<double> v_;
};

struct VectorField {
    std::vector<ScalarField> comp;  // one ScalarField per grid axis

    VectorField() = default;
    explicit VectorField(const Grid& g) : comp(static_cast<std::size_t>(g.dim()), ScalarField(g)) {}

    const Grid& grid() const { return comp.at(0).grid(); }
    int dim() const { return static_cast<int>(comp.size()); }
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* where) {
    if (!a.same_layout(b))
        throw std::invalid_argument(std::string(where) + ": grid layout mismatch");
}

}  // namespace enslab
