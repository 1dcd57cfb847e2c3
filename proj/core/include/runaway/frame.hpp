#pragma once

#include <cmath>
#include <span>

#include "runaway/friction.hpp"
#include "runaway/grid.hpp"
#include "runaway/vec3.hpp"

namespace runaway {

struct MacroState {
    double t = 0.0;
    Vec3 V{};
    double T = 1.0;
    Vec3 R{};  // last computed friction
    Vec3 H{};  // integral of V over [0, t]
};

struct MacroRates {
    Vec3 dV{};
    double dT = 0.0;
    Vec3 dH{};
};

/// (E - 2R, (4/3) V.R, V).
MacroRates macro_rhs(const MacroState& state, const Vec3& R, const Vec3& E);

/// out(v) = src(shift + scale * v) on the nodes of dst by tensor-product cubic
/// Lagrange interpolation; src is taken as zero outside its box.
void resample_affine(const VelocityGrid& src, std::span<const double> src_values, const VelocityGrid& dst,
                     std::span<double> out, const Vec3& shift, double scale);

/// G(x, v) = T^{3/2} F(x + H, V + sqrt(T) v) on `frame` (defaults to F's grid
/// recentred at the origin). The spatial shift rotates cells periodically by
/// round(H_x / dx); dx is only used when there is more than one cell. Mass
/// falling outside the source box is reported through a warning.
Distribution to_frame(const Distribution& F, const MacroState& state, const VelocityGrid& frame, double dx = 0.0,
                      double* lost_mass = nullptr);
Distribution to_frame(const Distribution& F, const MacroState& state);

/// Inverse map F(x, w) = T^{-3/2} G(x - H, (w - V) / sqrt(T)) onto `lab`.
Distribution from_frame(const Distribution& G, const MacroState& state, const VelocityGrid& lab, double dx = 0.0,
                        double* lost_mass = nullptr);

/// Velocity map of the frame, w = V + sqrt(T) v.
inline VelocityMap frame_map(const MacroState& s) { return {s.V, std::sqrt(s.T)}; }

/// Frame right-hand side without spatial transport:
///   T^{-3/2} Q(G,G) + T^{-1} div(Pi(w)/<w> grad G) - div(c G),
///   c = -(1/2) T'/T v + 2 R / sqrt(T),
/// where -div(c G) collects the drift and the (3/2) T'/T G growth term.
Distribution transformed_rhs(const Distribution& G, const MacroState& state, const Vec3& R, double Tprime);

/// Frame drift alone, out += scale * (-div(c G)).
void add_frame_drift(const VelocityGrid& grid, std::span<const double> G, std::span<double> out, double T,
                     const Vec3& R, double Tprime, double scale = 1.0);

}  // namespace runaway
