#pragma once

// Minkowski world function of a point pair and its distorted modification
//     sigma(a, b) = sigma_M + D(sigma_M),
// where sigma_M = (c^2 dt^2 - |dx|^2)/2 and the distortion D is the universal
// constant d = hbar/(2 b c) deep inside the light cone, zero outside it, and
// interpolated across the thin band (0, sigma0] where the defining relation is
// silent: by default a continuous linear ramp, optionally a hard step at
// sigma0.  Both band variants agree outside the band and keep the distortion
// within [0, d].

#include <array>
#include <cmath>
#include <stdexcept>

namespace enslab {

struct SpacetimePoint {
    double t = 0.0;
    std::array<double, 3> x{0.0, 0.0, 0.0};
};

enum class DistortionBand { ramp, step };

struct DistortionParams {
    double hbar = 1.0546e-27;  // CGS defaults
    double b = 1e-17;
    double c = 3e10;
    double sigma0 = 1e-21;
    DistortionBand band = DistortionBand::ramp;

    void validate() const {
        if (!(hbar > 0.0) || !(b > 0.0) || !(c > 0.0) || !(sigma0 > 0.0))
            throw std::invalid_argument(
                "worldfunc error - hbar, b, c and sigma0 must be positive");
    }

    // The universal distortion constant, an area.
    double d() const {
        validate();
        return hbar / (2.0 * b * c);
    }
};

inline double sigma_minkowski(const SpacetimePoint& a, const SpacetimePoint& b, double c_light) {
    if (!(c_light > 0.0))
        throw std::invalid_argument("worldfunc error - c must be positive");
    const double dt = a.t - b.t;
    double dx2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = a.x[i] - b.x[i];
        dx2 += d * d;
    }
    const double sm = 0.5 * (c_light * c_light * dt * dt - dx2);
    if (!std::isfinite(sm))
        throw std::invalid_argument("worldfunc error - coordinates must be finite");
    return sm;
}

// Distortion D(sigma_M): 0 outside the light cone, d deep inside, banded in
// between per the configured variant.
inline double distortion(double sigma_m, const DistortionParams& p) {
    p.validate();
    if (!(sigma_m > 0.0)) return 0.0;
    if (sigma_m > p.sigma0) return p.d();
    return p.band == DistortionBand::step ? 0.0 : p.d() * sigma_m / p.sigma0;
}

inline double sigma_distorted(const SpacetimePoint& a, const SpacetimePoint& b,
                              const DistortionParams& p) {
    const double sm = sigma_minkowski(a, b, p.c);
    return sm + distortion(sm, p);
}

}  // namespace enslab
