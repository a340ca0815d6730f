#pragma once

// Scenario runner: each named experiment builds its state from an
// ExperimentConfig (canonical units hbar = m = c = 1 unless overridden;
// worldfunc defaults to CGS), executes, writes CSV tables plus a plotting
// script into the run directory, and records pass/fail checks in the
// manifest.  All randomness flows from the config seed through RngStream,
// so a config runs byte-identically every time.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "actions.hpp"
#include "compare.hpp"
#include "config.hpp"
#include "csv.hpp"
#include "ensemble.hpp"
#include "fluid.hpp"
#include "jacobi.hpp"
#include "manifest.hpp"
#include "psi.hpp"
#include "rng.hpp"
#include "schrodinger.hpp"
#include "worldfunc.hpp"

namespace enslab {

namespace detail {

inline Grid grid_from(const ExperimentConfig& cfg, double lo, double hi, long n,
                      Boundary bc) {
    lo = cfg.get_num("grid", "lo", lo);
    hi = cfg.get_num("grid", "hi", hi);
    n = cfg.get_int("grid", "n", n);
    const std::string b = cfg.get("grid", "boundary", bc == Boundary::periodic ? "periodic"
                                                                               : "clamped");
    if (b == "periodic")
        bc = Boundary::periodic;
    else if (b == "clamped")
        bc = Boundary::clamped;
    else
        throw ConfigError("config error - grid.boundary: unknown boundary '" + b + "'");
    if (n < 8) throw ConfigError("config error - grid.n: need at least 8 nodes");
    if (!(hi > lo)) throw ConfigError("config error - grid: hi must exceed lo");
    return Grid::line(lo, hi, static_cast<std::size_t>(n), bc);
}

inline WaveSolverConfig wave_config_from(const ExperimentConfig& cfg) {
    WaveSolverConfig wc;
    wc.m = cfg.get_num("model", "m", 1.0);
    wc.hbar = cfg.get_num("model", "hbar", 1.0);
    wc.c = cfg.get_num("model", "c", 1.0);
    wc.b0 = cfg.get_num("model", "b0", 1.0);
    wc.include_rest_mass = cfg.get_int("solver", "rest_mass", 0) != 0;
    wc.dt = cfg.get_num("solver", "dt", 1e-3);
    try {
        wc.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config error - ") + e.what());
    }
    return wc;
}

inline WaveField gaussian_wave(const Grid& g, double sigma, double x0, double p0, double hbar) {
    if (!(sigma > 0.0)) throw ConfigError("config error - initial-data.sigma must be positive");
    WaveField w(g, 1);
    const double norm = std::pow(2.0 * std::acos(-1.0) * sigma * sigma, -0.25);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coord(0, i);
        const double amp = norm * std::exp(-(x - x0) * (x - x0) / (4.0 * sigma * sigma));
        w.comp[0][i] = amp * std::exp(Complex(0.0, p0 * x / hbar));
    }
    return w;
}

inline ScalarField gaussian_density(const Grid& g, double sigma, double x0) {
    if (!(sigma > 0.0)) throw ConfigError("config error - initial-data.sigma must be positive");
    const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
    return ScalarField::sample(g, [=](double x) {
        return norm * std::exp(-(x - x0) * (x - x0) / (2.0 * sigma * sigma));
    });
}

// Snapshot step indices: 0, stride, 2 stride, ..., and always the final step.
inline std::set<long> snapshot_steps(long steps, long snaps) {
    if (steps < 0) throw ConfigError("config error - solver.steps must be nonnegative");
    if (snaps < 1) snaps = 1;
    std::set<long> out{0, steps};
    const long stride = std::max<long>(1, steps / snaps);
    for (long s = stride; s < steps; s += stride) out.insert(s);
    return out;
}

inline Potential potential_from(const ExperimentConfig& cfg) {
    const std::string kind = cfg.get("model", "potential", "zero");
    if (kind == "zero") return Potential::zero();
    if (kind == "harmonic")
        return Potential::harmonic(cfg.get_num("model", "stiffness", 1.0),
                                   cfg.get_num("model", "center", 0.0));
    throw ConfigError("config error - model.potential: unknown potential '" + kind + "'");
}

// Closed-form random trig label maps for the identity sweeps: identity plus
// a few gentle sine modes with integer wave vectors and analytic Jacobian.
inline SmoothMap random_label_map(int n, RngStream& rng) {
    struct Term {
        int row;
        double amp, ph;
        std::array<double, 4> k;
    };
    auto terms = std::make_shared<std::vector<Term>>();
    for (int i = 0; i <= n; ++i) {
        for (int t = 0; t < 2; ++t) {
            Term tm;
            tm.row = i;
            tm.amp = rng.uniform(0.005, 0.02);
            tm.ph = rng.uniform(0.0, 6.28);
            bool nonzero = false;
            for (int a = 0; a <= n; ++a) {
                const int kk = static_cast<int>(rng.next_u64() % 5) - 2;
                tm.k[static_cast<std::size_t>(a)] = kk;
                nonzero = nonzero || (kk != 0);
            }
            if (!nonzero) tm.k[0] = 1.0;
            for (int a = n + 1; a < 4; ++a) tm.k[static_cast<std::size_t>(a)] = 0.0;
            terms->push_back(tm);
        }
    }
    SmoothMap m;
    m.n = n;
    m.value = [n, terms](const std::array<double, 4>& x, std::array<double, 4>& xi) {
        xi = {0.0, 0.0, 0.0, 0.0};
        for (int i = 0; i <= n; ++i)
            xi[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        for (const auto& tm : *terms) {
            double arg = tm.ph;
            for (int a = 0; a <= n; ++a)
                arg += tm.k[static_cast<std::size_t>(a)] * x[static_cast<std::size_t>(a)];
            xi[static_cast<std::size_t>(tm.row)] += tm.amp * std::sin(arg);
        }
    };
    m.jacobian = [n, terms](const std::array<double, 4>& x, jac::Mat4& a) {
        a = jac::Mat4{};
        for (int i = 0; i <= n; ++i)
            a[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
        for (const auto& tm : *terms) {
            double arg = tm.ph;
            for (int c = 0; c <= n; ++c)
                arg += tm.k[static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
            const double d = tm.amp * std::cos(arg);
            for (int c = 0; c <= n; ++c)
                a[static_cast<std::size_t>(tm.row)][static_cast<std::size_t>(c)] +=
                    d * tm.k[static_cast<std::size_t>(c)];
        }
    };
    return m;
}

inline const char* kPlotScript = R"PY(#!/usr/bin/env python3
"""Plot the CSV tables of this enslab run directory (needs matplotlib)."""
import collections
import csv
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def plot_by_time(path, xcol, ycol, out):
    head, data = load(path)
    ix, iy, it = head.index(xcol), head.index(ycol), head.index("t")
    series = collections.defaultdict(list)
    for r in data:
        series[r[it]].append((r[ix], r[iy]))
    for t, pts in sorted(series.items()):
        pts.sort()
        plt.plot([p[0] for p in pts], [p[1] for p in pts], label="t=%g" % t)
    plt.xlabel(xcol)
    plt.ylabel(ycol)
    plt.legend(fontsize="small")
    plt.tight_layout()
    plt.savefig(out, dpi=150)
    plt.close()
    return out


def main(d):
    made = []
    if os.path.exists(os.path.join(d, "density.csv")):
        made.append(plot_by_time(os.path.join(d, "density.csv"), "x", "rho",
                                 os.path.join(d, "density.png")))
    if os.path.exists(os.path.join(d, "hj.csv")):
        made.append(plot_by_time(os.path.join(d, "hj.csv"), "x", "phi",
                                 os.path.join(d, "hj.png")))
    wf = os.path.join(d, "worldfunc.csv")
    if os.path.exists(wf):
        head, data = load(wf)
        sm = [r[head.index("sigma_m")] for r in data]
        sg = [r[head.index("sigma")] for r in data]
        plt.plot(sm, sg, marker=".")
        plt.xlabel("sigma_m")
        plt.ylabel("sigma")
        plt.tight_layout()
        out = os.path.join(d, "worldfunc.png")
        plt.savefig(out, dpi=150)
        plt.close()
        made.append(out)
    print("wrote:", " ".join(made) if made else "(nothing to plot)")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else
         os.path.dirname(os.path.abspath(__file__)) or ".")
)PY";

}  // namespace detail

namespace scenario {

inline void schrodinger_free(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                             RunManifest& man) {
    Grid g = detail::grid_from(cfg, -10.0, 10.0, 512, Boundary::clamped);
    WaveSolverConfig wc = detail::wave_config_from(cfg);
    const long steps = cfg.get_int("solver", "steps", 1000);
    const long snaps = cfg.get_int("output", "snapshots", 5);
    const double sigma = cfg.get_num("initial-data", "sigma", 1.0);
    const double x0 = cfg.get_num("initial-data", "x0", 0.0);
    const double p0 = cfg.get_num("initial-data", "p0", 0.0);

    WaveField w = detail::gaussian_wave(g, sigma, x0, p0, wc.hbar);
    const double mass0 = integrate(psi_density(w));
    const std::set<long> snap = detail::snapshot_steps(steps, snaps);

    CsvTable psi{{"t", "x", "re", "im", "rho"}, {}};
    CsvTable den{{"t", "x", "rho"}, {}};
    auto record = [&](long s) {
        const double t = s * wc.dt;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Complex v = w.comp[0][i];
            psi.rows.push_back({t, g.coord(0, i), v.real(), v.imag(), std::norm(v)});
            den.rows.push_back({t, g.coord(0, i), std::norm(v)});
        }
    };
    record(0);
    for (long s = 1; s <= steps; ++s) {
        w = step_linear(w, wc);
        if (snap.count(s)) record(s);
    }

    const double massT = integrate(psi_density(w));
    const double drift = std::abs(massT / mass0 - 1.0);
    man.check("norm_drift", drift, cfg.get_num("output", "tol_norm", 1e-8));
    if (p0 == 0.0 && steps > 0) {
        const double T = steps * wc.dt;
        const double spread = wc.hbar * T / (2.0 * wc.m * sigma);
        const double predicted = sigma * sigma + spread * spread;
        const double measured = detail::rms_width(psi_density(w));
        man.check("width_law", std::abs(measured * measured / predicted - 1.0),
                  cfg.get_num("output", "tol_width", 1e-3));
    }
    man.notes["scheme"] = "cayley";
    man.notes["dt"] = format_sig17(wc.dt);
    man.notes["stability_ratio"] = format_sig17(wc.stability_ratio(g));
    man.notes["norm_drift"] = format_sig17(drift);

    write_csv((dir / "psi.csv").string(), psi);
    write_csv((dir / "density.csv").string(), den);
    man.outputs.push_back("psi.csv");
    man.outputs.push_back("density.csv");
}

inline void fluid_quantum(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                          RunManifest& man) {
    // Domain sizing: the walls must stay far enough out that the physical
    // outflow flux (rho v at the edge) sits below the mass-drift tolerance,
    // and a converging initial flow (pslope < 0) against clamped walls
    // steepens grad P at the vacuum junction until the pre-caustic guard
    // trips, so the quantum default is the freely spreading packet.
    Grid g = detail::grid_from(cfg, -6.0, 6.0, 512, Boundary::clamped);
    const double m = cfg.get_num("model", "m", 1.0);
    const double hbar = cfg.get_num("model", "hbar", 1.0);
    const double lambda = cfg.get_num("model", "lambda", 0.5);
    const double b0 = cfg.get_num("clebsch", "b0", 1.0);
    const double dt = cfg.get_num("solver", "dt", 1e-4);
    const long steps = cfg.get_int("solver", "steps", 5000);
    const long snaps = cfg.get_int("output", "snapshots", 5);
    const bool quantum = cfg.get_int("solver", "quantum", 1) != 0;
    const double sigma = cfg.get_num("initial-data", "sigma", 1.0);
    const double pslope = cfg.get_num("initial-data", "pslope", 0.0);
    if (b0 == 0.0) throw ConfigError("config error - clebsch.b0 must be nonzero");

    ScalarField rho0 = detail::gaussian_density(g, sigma, 0.0);
    ScalarField phi0 = ScalarField::sample(g, [=](double x) { return pslope * x * x / (2.0 * b0); });
    ClebschData cd;
    cd.b0 = b0;
    FluidState st(0.0, rho0, phi0, LabelMap{}, cd);
    const HamiltonianModel model = Classical{m, detail::potential_from(cfg)};
    const std::optional<QuantumTerm> q =
        quantum ? std::optional<QuantumTerm>(QuantumTerm{hbar, lambda}) : std::nullopt;

    const double mass0 = integrate(st.rho);
    const std::set<long> snap = detail::snapshot_steps(steps, snaps);
    CsvTable den{{"t", "x", "rho"}, {}};
    CsvTable fields{{"t", "x", "rho", "phi", "p"}, {}};
    auto record = [&]() {
        for (std::size_t i = 0; i < g.size(); ++i) {
            den.rows.push_back({st.t, g.coord(0, i), st.rho[i]});
            fields.rows.push_back({st.t, g.coord(0, i), st.rho[i], st.phi[i], st.P.comp[0][i]});
        }
    };
    record();
    for (long s = 1; s <= steps; ++s) {
        st = step_fluid(st, model, dt, q);
        if (snap.count(s)) record();
    }

    const double T = std::max(steps * dt, dt);
    man.check("mass_drift_per_time", std::abs(integrate(st.rho) - mass0) / T,
              cfg.get_num("output", "tol_mass", 1e-6));
    double neg = 0.0;
    for (std::size_t i = 0; i < st.rho.size(); ++i) neg = std::max(neg, -st.rho[i]);
    man.check("density_nonnegative", neg, cfg.get_num("output", "tol_neg", 1e-9));
    man.notes["quantum"] = quantum ? "1" : "0";
    man.notes["dt"] = format_sig17(dt);

    write_csv((dir / "density.csv").string(), den);
    write_csv((dir / "fields.csv").string(), fields);
    man.outputs.push_back("density.csv");
    man.outputs.push_back("fields.csv");
}

inline void ensemble_classical(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                               RunManifest& man) {
    Grid g = detail::grid_from(cfg, -5.0, 5.0, 512, Boundary::clamped);
    const double m = cfg.get_num("model", "m", 1.0);
    const double dt = cfg.get_num("solver", "dt", 1e-3);
    const long steps = cfg.get_int("solver", "steps", 500);
    const long snaps = cfg.get_int("output", "snapshots", 5);
    const long N = cfg.get_int("solver", "samples", 100000);
    const long cap = cfg.get_int("output", "particles", 1000);
    const double sigma = cfg.get_num("initial-data", "sigma", 1.0);
    const double pslope = cfg.get_num("initial-data", "pslope", -0.5);
    if (N < 2) throw ConfigError("config error - solver.samples: need at least two samples");

    ScalarField rho0 = detail::gaussian_density(g, sigma, 0.0);
    VectorField P0(g);
    for (std::size_t i = 0; i < g.size(); ++i) P0.comp[0][i] = pslope * g.coord(0, i);
    ParticleEnsemble e = init_pure(rho0, P0, static_cast<std::size_t>(N), RngStream(cfg.seed));
    const HamiltonianModel model = Classical{m, detail::potential_from(cfg)};

    // Sample-moment sanity against the analytic initial law (Monte Carlo bounds).
    double mx = 0.0, mxx = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        mx += e.x[i][0];
        mxx += e.x[i][0] * e.x[i][0];
    }
    mx /= static_cast<double>(e.size());
    mxx /= static_cast<double>(e.size());
    const double sd = std::sqrt(std::max(mxx - mx * mx, 0.0));
    const double root_n = std::sqrt(static_cast<double>(e.size()));
    man.check("sample_mean", std::abs(mx), 6.0 * sigma / root_n);
    man.check("sample_width", std::abs(sd / sigma - 1.0), 6.0 / std::sqrt(2.0 * root_n * root_n));

    const double bw_cfg = cfg.get_num("output", "bandwidth", 0.0);
    const std::set<long> snap = detail::snapshot_steps(steps, snaps);
    CsvTable den{{"t", "x", "rho"}, {}};
    CsvTable parts{{"t", "id", "x", "p", "xi"}, {}};
    auto record = [&](double t) {
        const double bw =
            bw_cfg > 0.0 ? bw_cfg
                         : 1.06 * sd * std::pow(static_cast<double>(e.size()), -0.2);
        ScalarField kde = density_estimate(e, g, bw);
        for (std::size_t i = 0; i < g.size(); ++i)
            den.rows.push_back({t, g.coord(0, i), kde[i]});
        const std::size_t lim = std::min<std::size_t>(e.size(), static_cast<std::size_t>(cap));
        for (std::size_t i = 0; i < lim; ++i)
            parts.rows.push_back(
                {t, static_cast<double>(i), e.x[i][0], e.p[i][0], e.xi[i][0]});
    };
    record(0.0);
    for (long s = 1; s <= steps; ++s) {
        e = step(e, model, dt);
        if (snap.count(s)) record(s * dt);
    }

    man.notes["samples"] = std::to_string(N);
    man.notes["seed"] = std::to_string(cfg.seed);
    write_csv((dir / "density.csv").string(), den);
    write_csv((dir / "particles.csv").string(), parts);
    man.outputs.push_back("density.csv");
    man.outputs.push_back("particles.csv");
}

inline void hamilton_jacobi(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                            RunManifest& man) {
    Grid g = detail::grid_from(cfg, -5.0, 5.0, 256, Boundary::clamped);
    const double m = cfg.get_num("model", "m", 1.0);
    const double dt = cfg.get_num("solver", "dt", 1e-3);
    const long steps = cfg.get_int("solver", "steps", 500);
    const long snaps = cfg.get_int("output", "snapshots", 5);
    const double alpha = cfg.get_num("initial-data", "alpha", 0.5);

    HJState st(0.0, ScalarField::sample(g, [=](double x) { return 0.5 * alpha * x * x; }));
    const HamiltonianModel model = Classical{m, Potential::zero()};
    const std::set<long> snap = detail::snapshot_steps(steps, snaps);
    CsvTable tab{{"t", "x", "phi"}, {}};
    auto record = [&]() {
        for (std::size_t i = 0; i < g.size(); ++i)
            tab.rows.push_back({st.t, g.coord(0, i), st.Phi[i]});
    };
    record();
    for (long s = 1; s <= steps; ++s) {
        st = step_hj(st, model, dt);
        if (snap.count(s)) record();
    }

    // Free quadratic data has the closed form alpha x^2 / 2(1 + alpha t / m).
    const double T = steps * dt;
    const double aT = alpha / (1.0 + alpha * T / m);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.coord(0, i);
        worst = std::max(worst, std::abs(st.Phi[i] - 0.5 * aT * x * x));
    }
    man.check("quadratic_closed_form", worst, cfg.get_num("output", "tol_hj", 1e-3));
    man.notes["dt"] = format_sig17(dt);

    write_csv((dir / "hj.csv").string(), tab);
    man.outputs.push_back("hj.csv");
}

inline void gauge_check(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                        RunManifest& man) {
    Grid g = detail::grid_from(cfg, -10.0, 10.0, 2048, Boundary::clamped);
    WaveSolverConfig nl = detail::wave_config_from(cfg);
    if (!cfg.has("model", "b0")) nl.b0 = 2.0;
    if (!cfg.has("solver", "dt")) nl.dt = 2e-4;
    WaveSolverConfig lin = nl;
    lin.b0 = lin.hbar;
    const long steps = cfg.get_int("solver", "steps", 2500);
    const double sigma = cfg.get_num("initial-data", "sigma", 1.0);

    WaveField wn = detail::gaussian_wave(g, sigma, 0.0, 0.0, nl.hbar);
    WaveField wl = gauge_map(wn, nl.b0, nl.hbar);
    const double mass0 = integrate(psi_density(wn));
    const std::set<long> snap = detail::snapshot_steps(steps, 5);
    CsvTable den{{"t", "x", "rho"}, {}};
    auto record = [&](long s) {
        for (std::size_t i = 0; i < g.size(); ++i)
            den.rows.push_back({s * nl.dt, g.coord(0, i), std::norm(wn.comp[0][i])});
    };
    record(0);
    for (long s = 1; s <= steps; ++s) {
        wn = step_nonlinear(wn, nl);
        wl = step_linear(wl, lin);
        if (snap.count(s)) record(s);
    }

    WaveField mapped = gauge_map(wn, nl.b0, nl.hbar);
    double l2 = 0.0;
    CsvTable gcsv{{"x", "re_mapped", "im_mapped", "re_linear", "im_linear"}, {}};
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Complex a = mapped.comp[0][i], b = wl.comp[0][i];
        l2 += std::norm(a - b);
        gcsv.rows.push_back({g.coord(0, i), a.real(), a.imag(), b.real(), b.imag()});
    }
    l2 = std::sqrt(g.spacing(0) * l2);

    const double T = std::max(steps * nl.dt, nl.dt);
    man.check("gauge_l2", l2, cfg.get_num("output", "tol_l2", 1e-4));
    man.check("mass_drift_per_time", std::abs(integrate(psi_density(wn)) - mass0) / T,
              cfg.get_num("output", "tol_mass", 1e-6));
    man.notes["scheme"] = "cayley";
    man.notes["dt"] = format_sig17(nl.dt);
    man.notes["stability_ratio"] = format_sig17(nl.stability_ratio(g));
    man.notes["b0"] = format_sig17(nl.b0);

    write_csv((dir / "gauge.csv").string(), gcsv);
    write_csv((dir / "density.csv").string(), den);
    man.outputs.push_back("gauge.csv");
    man.outputs.push_back("density.csv");
}

inline void action_check(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                         RunManifest& man) {
    const double b0 = cfg.get_num("clebsch", "b0", 1.3);
    ActionParams prm;
    prm.b0 = b0;
    prm.m = cfg.get_num("model", "m", 1.1);
    prm.c = cfg.get_num("model", "c", 0.8);
    prm.hbar = cfg.get_num("model", "hbar", 0.9);
    prm.lambda = cfg.get_num("model", "lambda", 0.5);

    // A smooth five-level slab of polar data, shared by both representations.
    Grid g = detail::grid_from(cfg, 0.0, 1.0, 512, Boundary::clamped);
    const double dt = cfg.get_num("solver", "dt", 1e-3);
    const double pi = std::acos(-1.0);
    const long levels = 5;
    std::vector<FluidState> fl;
    PsiHistory ph;
    ph.t0 = 0.0;
    ph.dt = dt;
    for (long lev = 0; lev < levels; ++lev) {
        const double t = lev * dt;
        ScalarField rho = ScalarField::sample(
            g, [=](double x) { return 1.0 + 0.05 * std::cos(pi * x + 0.3 * t); });
        ScalarField phi = ScalarField::sample(
            g, [=](double x) { return 0.1 * std::sin(pi * x) - 0.2 * t; });
        ClebschData cd;
        cd.b0 = b0;
        FluidState st(t, rho, phi, LabelMap{}, cd);
        fl.push_back(st);
        ph.levels.push_back(build_psi(rho, phi, LabelMap{}, UnitSpinorMap::scalar()));
    }

    const double a_polar = action_eval(ActionVariant::PsiPolar, ph, prm);
    const double a_stoch = action_eval(ActionVariant::NonRelStochastic, fl, prm);
    const double rel_ps = std::abs(a_polar - a_stoch) / std::max(1.0, std::abs(a_stoch));
    man.check("polar_equals_stochastic", rel_ps, cfg.get_num("output", "tol_polar", 1e-5));

    ActionParams same = prm;
    same.b0 = same.hbar;
    const double a_nl = action_eval(ActionVariant::PsiNonlinear, ph, same);
    const double a_lin = action_eval(ActionVariant::PsiLinear, ph, same);
    const double rel_nl = std::abs(a_nl - a_lin) / std::max(1.0, std::abs(a_lin));
    man.check("nonlinear_equals_linear_at_hbar", rel_nl,
              cfg.get_num("output", "tol_linear", 1e-12));

    // Homogeneity of the ensemble action: A[3 rho] = 3 A[rho].
    const HamiltonianModel model =
        Classical{prm.m, Potential::harmonic(cfg.get_num("model", "stiffness", 0.8))};
    const double a1 = action_eval(ActionVariant::EnsembleHamilton, fl, prm, &model);
    std::vector<FluidState> fl3 = fl;
    for (auto& st : fl3)
        for (std::size_t i = 0; i < st.rho.size(); ++i) st.rho[i] *= 3.0;
    const double a3 = action_eval(ActionVariant::EnsembleHamilton, fl3, prm, &model);
    const double rel_h = std::abs(a3 - 3.0 * a1) / std::max(1.0, std::abs(3.0 * a1));
    man.check("ensemble_homogeneity", rel_h, cfg.get_num("output", "tol_homog", 1e-12));

    CsvTable tab{{"variant", "value"}, {}};
    tab.rows.push_back({0.0, a_polar});
    tab.rows.push_back({1.0, a_stoch});
    tab.rows.push_back({2.0, a_nl});
    tab.rows.push_back({3.0, a_lin});
    tab.rows.push_back({4.0, a1});
    man.notes["variant.0"] = "psi_polar";
    man.notes["variant.1"] = "nonrel_stochastic";
    man.notes["variant.2"] = "psi_nonlinear_at_hbar";
    man.notes["variant.3"] = "psi_linear";
    man.notes["variant.4"] = "ensemble_hamilton";
    write_csv((dir / "actions.csv").string(), tab);
    man.outputs.push_back("actions.csv");
}

inline void verify_identities(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                              RunManifest& man) {
    const long n = cfg.get_int("solver", "n", 2);
    const long trials = cfg.get_int("solver", "trials", 25);
    const double h = cfg.get_num("solver", "h", 1e-4);
    if (n != 2 && n != 3)
        throw ConfigError("config error - solver.n: spatial dimension must be 2 or 3");
    if (trials < 1) throw ConfigError("config error - solver.trials must be positive");
    if (!(h > 0.0)) throw ConfigError("config error - solver.h must be positive");

    RngStream rng(cfg.seed == 0 ? 1234567 : cfg.seed);
    CsvTable tab{{"trial", "jacobian", "max_residual"}, {}};
    double worst = 0.0;
    for (long trial = 0; trial < trials; ++trial) {
        RngStream sub = rng.split(static_cast<std::uint64_t>(trial));
        SmoothMap map = detail::random_label_map(static_cast<int>(n), sub);
        std::array<double, 4> x{0.0, 0.0, 0.0, 0.0};
        for (long a = 0; a <= n; ++a)
            x[static_cast<std::size_t>(a)] = sub.uniform(0.0, 2.0 * std::acos(-1.0));
        IdentityReport rep = verify_jacobian_identities(map, x, h);
        worst = std::max(worst, rep.max_residual());
        tab.rows.push_back({static_cast<double>(trial), rep.jacobian, rep.max_residual()});
    }
    man.check("cofactor_identities", worst, cfg.get_num("output", "tol", 1e-6));
    man.notes["trials"] = std::to_string(trials);
    man.notes["dimension"] = std::to_string(n);
    man.notes["fd_step"] = format_sig17(h);
    write_csv((dir / "identities.csv").string(), tab);
    man.outputs.push_back("identities.csv");
}

inline void worldfunc_scan(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                           RunManifest& man) {
    DistortionParams p;  // CGS defaults
    const bool custom = cfg.has("model", "hbar") || cfg.has("model", "b") ||
                        cfg.has("model", "c") || cfg.has("model", "sigma0");
    p.hbar = cfg.get_num("model", "hbar", p.hbar);
    p.b = cfg.get_num("model", "b", p.b);
    p.c = cfg.get_num("model", "c", p.c);
    p.sigma0 = cfg.get_num("model", "sigma0", p.sigma0);
    const std::string band = cfg.get("model", "band", "ramp");
    if (band == "step")
        p.band = DistortionBand::step;
    else if (band != "ramp")
        throw ConfigError("config error - model.band: unknown band '" + band + "'");
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config error - ") + e.what());
    }
    const double d = p.d();

    std::vector<std::pair<SpacetimePoint, SpacetimePoint>> pairs;
    const std::string points = cfg.get("initial-data", "points", "");
    if (!points.empty()) {
        std::ifstream in(points);
        if (!in) throw ConfigError("config error - initial-data.points: cannot open '" + points + "'");
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream row(line);
            std::vector<double> v;
            double u;
            while (row >> u) v.push_back(u);
            if (v.empty()) continue;
            if (v.size() != 8)
                throw ConfigError("config error - " + points + ":" + std::to_string(lineno) +
                                  ": expected 8 numbers (t x y z t' x' y' z')");
            pairs.push_back({SpacetimePoint{v[0], {v[1], v[2], v[3]}},
                             SpacetimePoint{v[4], {v[5], v[6], v[7]}}});
        }
        if (pairs.empty())
            throw ConfigError("config error - initial-data.points: '" + points + "' has no pairs");
    } else {
        // Built-in sweep across the light cone: sigma_m from -5 sigma0 to
        // +5 sigma0 plus one deep timelike pair.
        for (int k = 0; k <= 40; ++k) {
            const double target = p.sigma0 * (-5.0 + 0.25 * k);
            SpacetimePoint a;
            if (target >= 0.0)
                a.t = std::sqrt(2.0 * target) / p.c;
            else
                a.x[0] = std::sqrt(-2.0 * target);
            pairs.push_back({a, SpacetimePoint{}});
        }
        SpacetimePoint deep;
        deep.t = std::sqrt(200.0 * p.sigma0) / p.c;
        pairs.push_back({deep, SpacetimePoint{}});
    }

    CsvTable tab{{"sigma_m", "distortion", "sigma"}, {}};
    double violation = 0.0;
    for (const auto& [a, b] : pairs) {
        const double sm = sigma_minkowski(a, b, p.c);
        const double D = distortion(sm, p);
        tab.rows.push_back({sm, D, sm + D});
        violation = std::max({violation, -D, D - d});
    }
    man.check("distortion_bounds", violation, 0.0);
    if (!custom)
        man.check("cgs_distortion_constant", std::abs(d / 1.7577e-21 - 1.0),
                  cfg.get_num("output", "tol_d", 1e-4));
    man.notes["d"] = format_sig17(d);
    man.notes["band"] = band;
    write_csv((dir / "worldfunc.csv").string(), tab);
    man.outputs.push_back("worldfunc.csv");
}

inline void compare_runs(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                         RunManifest& man) {
    auto runs = cfg.sections.find("runs");
    if (runs == cfg.sections.end() || runs->second.size() < 2)
        throw ConfigError("config error - scenario compare needs a [runs] section with at "
                          "least two entries");
    std::vector<DensitySeries> series;
    std::size_t idx = 0;
    for (const auto& [name, rundir] : runs->second) {
        const std::filesystem::path mpath = std::filesystem::path(rundir) / "run_manifest.json";
        RunManifest sub = read_manifest(mpath.string());
        bool found = false;
        for (const auto& out : sub.outputs) found = found || out == "density.csv";
        if (!found)
            throw ConfigError("config error - run '" + name + "' (" + rundir +
                              ") lists no density.csv output");
        series.push_back(load_density_csv(
            (std::filesystem::path(rundir) / "density.csv").string(), name));
        man.notes["series." + std::to_string(idx)] = name + " = " + rundir;
        ++idx;
    }

    const std::vector<PairMetrics> rows = compare_series(series);
    CsvTable tab{{"a", "b", "t", "l1", "l2", "linf"}, {}};
    double worst_l1 = 0.0, worst_l2 = 0.0;
    for (const auto& r : rows) {
        tab.rows.push_back(
            {static_cast<double>(r.a), static_cast<double>(r.b), r.t, r.l1, r.l2, r.linf});
        worst_l1 = std::max(worst_l1, r.l1);
        worst_l2 = std::max(worst_l2, r.l2);
    }
    if (cfg.has("output", "max_l1")) man.check("max_l1", worst_l1, cfg.get_num("output", "max_l1", 0.0));
    if (cfg.has("output", "max_l2")) man.check("max_l2", worst_l2, cfg.get_num("output", "max_l2", 0.0));
    write_csv((dir / "compare.csv").string(), tab);
    man.outputs.push_back("compare.csv");
}

}  // namespace scenario

struct RunResult {
    RunManifest manifest;
    std::string dir;
};

inline RunResult run_experiment(const ExperimentConfig& cfg, const std::string& out_root) {
    const auto t_start = std::chrono::steady_clock::now();
    RunManifest man;
    man.config = cfg;

    const std::string sub = cfg.get("output", "dir", cfg.scenario);
    const std::filesystem::path dir = std::filesystem::path(out_root) / sub;
    std::filesystem::create_directories(dir);

    if (cfg.scenario == "schrodinger-free")
        scenario::schrodinger_free(cfg, dir, man);
    else if (cfg.scenario == "fluid-quantum")
        scenario::fluid_quantum(cfg, dir, man);
    else if (cfg.scenario == "ensemble-classical")
        scenario::ensemble_classical(cfg, dir, man);
    else if (cfg.scenario == "hj")
        scenario::hamilton_jacobi(cfg, dir, man);
    else if (cfg.scenario == "gauge-check")
        scenario::gauge_check(cfg, dir, man);
    else if (cfg.scenario == "action-check")
        scenario::action_check(cfg, dir, man);
    else if (cfg.scenario == "verify-identities")
        scenario::verify_identities(cfg, dir, man);
    else if (cfg.scenario == "worldfunc")
        scenario::worldfunc_scan(cfg, dir, man);
    else if (cfg.scenario == "compare")
        scenario::compare_runs(cfg, dir, man);
    else
        throw ConfigError("config error - unknown scenario '" + cfg.scenario + "'");

    write_text_atomic((dir / "plot.py").string(), detail::kPlotScript);
    man.outputs.push_back("plot.py");

    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    write_manifest((dir / "run_manifest.json").string(), man);
    return {man, dir.string()};
}

}  // namespace enslab
