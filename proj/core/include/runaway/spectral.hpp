#pragma once

#include <array>
#include <span>
#include <vector>

#include "runaway/grid.hpp"

namespace runaway {

/// Fourier (periodic-box) gradient of a single-cell velocity field; accurate
/// to roundoff for profiles that are negligible at the box faces.
std::array<std::vector<double>, 3> spectral_gradient(const VelocityGrid& grid, std::span<const double> f);

/// Explicit centered first differences of even order 2, 4 or 6 with zero
/// values outside the box.
std::array<std::vector<double>, 3> centered_gradient(const VelocityGrid& grid, std::span<const double> f,
                                                     int order);

/// out += scale * div_h(flux) with centered differences of the given order.
/// Flux values within order/2 nodes of a box face are treated as zero, which
/// makes the discrete sum of the output vanish identically and keeps the
/// differences exact on quadratics everywhere the flux is nonzero.
void add_centered_divergence(const VelocityGrid& grid, const std::array<std::vector<double>, 3>& flux,
                             std::span<double> out, double scale = 1.0, int order = 2);

/// True for nodes within `layers` nodes of a face of the box (zero-flux nodes).
inline bool is_boundary_node(const VelocityGrid& g, int i, int j, int k, int layers = 1) {
    const int hi = g.N - layers;
    return i < layers || j < layers || k < layers || i >= hi || j >= hi || k >= hi;
}

}  // namespace runaway
