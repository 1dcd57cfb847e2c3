#pragma once

#include <vector>

#include "runaway/grid.hpp"

namespace runaway {

/// Coordinates of f on span{mu^{1/2}, v mu^{1/2}, (|v|^2 - 3) mu^{1/2}}.
struct MacroCoefficients {
    double a = 0.0;
    Vec3 b{};
    double c = 0.0;
};

struct Projection {
    std::vector<MacroCoefficients> coefficients;  // one per spatial cell
    Distribution pf;
};

/// Micro-macro projection P f = [a + b.v + c(|v|^2 - 3)] mu^{1/2}, applied per
/// spatial cell with coefficients from discrete quadrature.
Projection project_P(const Distribution& f);

MacroCoefficients macro_coefficients(const Distribution& f, int cell = 0);

/// Discrete L^2 inner product (spatially averaged).
double inner(const Distribution& f, const Distribution& g);

enum class NormKind { L2, H1, D1, D2 };

/// Discrete <v>-weighted norms. Gradients use centered second-order
/// differences with zero ghost values outside the box; the spherical
/// seminorm of D1 is realized as ||v x grad f|| with weight k - 3/2.
///   L2: ||f||_{L^2_k}
///   H1: (||f||^2_{L^2_k} + ||grad f||^2_{L^2_k})^{1/2}
///   D1: (||f||^2_{H^1_{k-3/2}} + ||v x grad f||^2_{L^2_{k-3/2}})^{1/2}
///   D2: (||f||^2_{D1(k)} + ||f||^2_{L^2_{k-1/2}})^{1/2}
double weighted_norm(const Distribution& f, double k, NormKind kind);

/// The spherical term alone: ||v x grad f||_{L^2_{k-3/2}}.
double spherical_seminorm(const Distribution& f, double k);

}  // namespace runaway
