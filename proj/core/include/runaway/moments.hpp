#pragma once

#include "runaway/grid.hpp"
#include "runaway/vec3.hpp"

namespace runaway {

struct MomentSet {
    double mass = 0.0;
    Vec3 momentum{};
    double energy = 0.0;  // integral of |v|^2 F
    Vec3 bulk{};
    double temperature = 0.0;
};

/// Normalized unit Maxwellian e^{-|v|^2/2} / (2 pi)^{3/2}.
double unit_maxwellian(const Vec3& v);

/// M_{V,T}(v) = (2 pi T)^{-3/2} exp(-|v - V|^2 / (2T)).
double maxwellian_value(const Vec3& v, const Vec3& V, double T);

/// Exact mass of M_{V,T} lying outside the grid box (product of erf factors).
double maxwellian_tail_mass(const VelocityGrid& grid, const Vec3& V, double T);

/// Samples M_{V,T} at the nodes. Logs a truncation warning when the tail mass
/// outside the box exceeds tail_threshold. Throws ConfigError for T <= 0.
Distribution maxwellian(const VelocityGrid& grid, const Vec3& V, double T, int spatial_cells = 1,
                        double tail_threshold = 1e-8);

/// Spatially averaged quadrature of (1, v, |v|^2) F. Throws
/// DegenerateStateError when the mass is not positive.
MomentSet moments(const Distribution& F);

/// Raw spatially averaged (mass, momentum, energy) without the degeneracy check.
MomentSet raw_moments(const Distribution& F);

}  // namespace runaway
