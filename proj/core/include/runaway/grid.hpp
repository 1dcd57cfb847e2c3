#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "runaway/vec3.hpp"

namespace runaway {

/// Truncated cell-centered velocity lattice covering center + [-L, L)^3.
///
/// N is even so that, as long as the center sits on a multiple of the
/// spacing, no node coincides with v = 0. Nodes are ordered row-major with
/// the z index fastest.
struct VelocityGrid {
    double L = 0.0;
    int N = 0;
    Vec3 center{0.0, 0.0, 0.0};

    double dv() const { return 2.0 * L / N; }
    double weight() const {
        const double h = dv();
        return h * h * h;
    }
    std::size_t size() const { return static_cast<std::size_t>(N) * N * N; }

    double coord(int axis, int i) const { return center[axis] - L + (i + 0.5) * dv(); }
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * N + j) * N + k;
    }
    Vec3 node(int i, int j, int k) const { return {coord(0, i), coord(1, j), coord(2, k)}; }
    Vec3 node(std::size_t idx) const {
        const int k = static_cast<int>(idx % N);
        const int j = static_cast<int>((idx / N) % N);
        const int i = static_cast<int>(idx / (static_cast<std::size_t>(N) * N));
        return node(i, j, k);
    }

    Vec3 lower() const { return center - Vec3{L, L, L}; }
    Vec3 upper() const { return center + Vec3{L, L, L}; }

    bool operator==(const VelocityGrid&) const = default;
};

/// Validated grid construction; throws ConfigError for odd N, N < 8 or L <= 0.
VelocityGrid build_grid(double L, int N, Vec3 center = {0.0, 0.0, 0.0});

/// Scalar field over (spatial cell x velocity node). With spatial_cells == 1
/// the field is spatially homogeneous.
class Distribution {
public:
    Distribution() = default;
    explicit Distribution(const VelocityGrid& grid, int spatial_cells = 1, double fill = 0.0);

    const VelocityGrid& grid() const { return grid_; }
    int spatial_cells() const { return nx_; }
    std::size_t nodes() const { return grid_.size(); }

    std::span<double> cell(int c) { return {values_.data() + c * nodes(), nodes()}; }
    std::span<const double> cell(int c) const { return {values_.data() + c * nodes(), nodes()}; }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Moves the box without touching the node values, i.e. translates the
    /// represented function exactly.
    void set_center(const Vec3& center) { grid_.center = center; }

    bool same_layout(const Distribution& other) const {
        return grid_ == other.grid_ && nx_ == other.nx_;
    }

    Distribution& operator+=(const Distribution& other);
    Distribution& operator-=(const Distribution& other);
    Distribution& operator*=(double s);
    /// this += s * other
    Distribution& axpy(double s, const Distribution& other);

    double max_abs() const;
    double min_value() const;
    double max_value() const;
    bool all_finite() const;

private:
    VelocityGrid grid_{};
    int nx_ = 1;
    std::vector<double> values_;
};

Distribution operator+(Distribution a, const Distribution& b);
Distribution operator-(Distribution a, const Distribution& b);
Distribution operator*(double s, Distribution a);

/// Throws GridMismatchError unless both operands share grid and spatial layout.
void require_same_layout(const Distribution& a, const Distribution& b, const char* what);

/// Builds a distribution by evaluating fn(v) at every velocity node of every cell.
template <class Fn>
Distribution sample(const VelocityGrid& grid, Fn&& fn, int spatial_cells = 1) {
    Distribution out(grid, spatial_cells);
    const std::size_t n = grid.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        const double value = fn(grid.node(idx));
        for (int c = 0; c < spatial_cells; ++c) out[c * n + idx] = value;
    }
    return out;
}

}  // namespace runaway
