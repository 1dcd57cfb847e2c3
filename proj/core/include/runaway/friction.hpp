#pragma once

#include <array>
#include <functional>
#include <span>

#include "runaway/grid.hpp"
#include "runaway/vec3.hpp"

namespace runaway {

/// External field. With LhsPlus the kinetic equation reads dF/dt + E.grad F = ...,
/// so the bulk is accelerated along +E; LhsMinus flips the sign.
struct FieldSpec {
    enum class Sign { LhsMinus, LhsPlus };
    Vec3 E{};
    Sign sign = Sign::LhsPlus;

    /// Velocity-space drift a in dF/dt + a.grad F = ...
    Vec3 acceleration() const { return sign == Sign::LhsPlus ? E : -1.0 * E; }

    bool operator==(const FieldSpec&) const = default;
};

/// Affine map from grid nodes to physical velocities, w = shift + scale * v.
/// The identity map is the lab frame; the moving frame uses (V, sqrt(T)).
struct VelocityMap {
    Vec3 shift{};
    double scale = 1.0;

    Vec3 operator()(const Vec3& v) const { return shift + scale * v; }
};

/// Pi(w) / <w>; at w = 0 the cell average (2/3) I is used.
std::array<double, 6> spherical_tensor(const Vec3& w);

/// div(Pi(w(v)) / <w(v)> grad F) in grid coordinates, per spatial cell.
/// Node fluxes use sixth-order centered gradients corrected by the grid's own
/// discrete defect for the unit Maxwellian, so S(mu) vanishes to roundoff;
/// mass and energy (in w) are conserved exactly by the centered flux
/// differencing. Fluxes vanish within three layers of the box faces.
Distribution spherical_diffusion(const Distribution& F, const VelocityMap& map = {});
void add_spherical_diffusion(const VelocityGrid& grid, std::span<const double> F, std::span<double> out,
                             const VelocityMap& map = {}, double scale = 1.0);

/// Largest eigenvalue of Pi(w)/<w> over the grid nodes.
double spherical_diffusivity_max(const VelocityGrid& grid, const VelocityMap& map = {});

/// Flux-form transport out += scale * (-div(c F)) with c_d depending only on
/// the coordinate along axis d. Faces use third-order upwind-biased
/// reconstruction; values outside the box are zero (no inflow).
using AxisVelocity = std::function<double(int axis, double face_coordinate)>;
void add_upwind3_transport(const VelocityGrid& grid, std::span<const double> F, std::span<double> out,
                           const AxisVelocity& c, double scale = 1.0);

/// -a.grad F with a = spec.acceleration(), in conservative upwind3 form.
Distribution field_advection(const Distribution& F, const FieldSpec& spec);

/// Kernel w / (<w> |w|^2) of the friction functional.
Vec3 friction_kernel(const Vec3& w);

/// R = int w/(<w>|w|^2) F dw, averaged over spatial cells, evaluated in the
/// integrated-by-parts form (1/2) int Pi/<w> grad F so that the singular
/// kernel is never sampled.
Vec3 friction_R(const Distribution& F, const VelocityMap& map = {});

}  // namespace runaway
