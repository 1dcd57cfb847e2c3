#include "runaway/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "runaway/errors.hpp"

namespace runaway {

VelocityGrid build_grid(double L, int N, Vec3 center) {
    if (!(L > 0.0) || !std::isfinite(L)) {
        throw ConfigError("velocity extent L must be positive, got " + std::to_string(L));
    }
    if (N % 2 != 0) throw ConfigError("points per axis N must be even, got " + std::to_string(N));
    if (N < 8) throw ConfigError("points per axis N must be at least 8, got " + std::to_string(N));
    return VelocityGrid{L, N, center};
}

Distribution::Distribution(const VelocityGrid& grid, int spatial_cells, double fill)
    : grid_(grid), nx_(spatial_cells), values_(grid.size() * spatial_cells, fill) {
    if (spatial_cells < 1) throw ConfigError("spatial cell count must be >= 1");
}

Distribution& Distribution::operator+=(const Distribution& other) {
    require_same_layout(*this, other, "operator+=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

Distribution& Distribution::operator-=(const Distribution& other) {
    require_same_layout(*this, other, "operator-=");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
    return *this;
}

Distribution& Distribution::operator*=(double s) {
    for (double& x : values_) x *= s;
    return *this;
}

Distribution& Distribution::axpy(double s, const Distribution& other) {
    require_same_layout(*this, other, "axpy");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
    return *this;
}

double Distribution::max_abs() const {
    double m = 0.0;
    for (double x : values_) m = std::max(m, std::abs(x));
    return m;
}

double Distribution::min_value() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
}

double Distribution::max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
}

bool Distribution::all_finite() const {
    return std::all_of(values_.begin(), values_.end(), [](double x) { return std::isfinite(x); });
}

Distribution operator+(Distribution a, const Distribution& b) { return a += b; }
Distribution operator-(Distribution a, const Distribution& b) { return a -= b; }
Distribution operator*(double s, Distribution a) { return a *= s; }

void require_same_layout(const Distribution& a, const Distribution& b, const char* what) {
    if (!a.same_layout(b)) {
        throw GridMismatchError(std::string(what) + ": operands live on different grids");
    }
}

}  // namespace runaway
