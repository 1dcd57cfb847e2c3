#include "runaway/moments.hpp"

#include <cmath>
#include <numbers>

#include <spdlog/spdlog.h>

#include "runaway/errors.hpp"

namespace runaway {

double unit_maxwellian(const Vec3& v) {
    static const double norm = std::pow(2.0 * std::numbers::pi, -1.5);
    return norm * std::exp(-0.5 * norm2(v));
}

double maxwellian_value(const Vec3& v, const Vec3& V, double T) {
    return std::pow(2.0 * std::numbers::pi * T, -1.5) * std::exp(-norm2(v - V) / (2.0 * T));
}

double maxwellian_tail_mass(const VelocityGrid& grid, const Vec3& V, double T) {
    const double s = std::sqrt(2.0 * T);
    double inside = 1.0;
    for (int a = 0; a < 3; ++a) {
        const double lo = (grid.lower()[a] - V[a]) / s;
        const double hi = (grid.upper()[a] - V[a]) / s;
        inside *= 0.5 * (std::erf(hi) - std::erf(lo));
    }
    return 1.0 - inside;
}

Distribution maxwellian(const VelocityGrid& grid, const Vec3& V, double T, int spatial_cells,
                        double tail_threshold) {
    if (!(T > 0.0)) throw ConfigError("Maxwellian temperature must be positive");
    const double tail = maxwellian_tail_mass(grid, V, T);
    if (tail > tail_threshold) {
        spdlog::warn("maxwellian: tail mass {:.3e} outside velocity box exceeds {:.1e}", tail,
                     tail_threshold);
    }
    return sample(grid, [&](const Vec3& v) { return maxwellian_value(v, V, T); }, spatial_cells);
}

MomentSet raw_moments(const Distribution& F) {
    const VelocityGrid& g = F.grid();
    const std::size_t n = g.size();
    MomentSet m;
    for (int c = 0; c < F.spatial_cells(); ++c) {
        auto values = F.cell(c);
        for (std::size_t idx = 0; idx < n; ++idx) {
            const Vec3 v = g.node(idx);
            const double f = values[idx];
            m.mass += f;
            m.momentum += f * v;
            m.energy += f * norm2(v);
        }
    }
    const double scale = g.weight() / F.spatial_cells();
    m.mass *= scale;
    m.momentum = scale * m.momentum;
    m.energy *= scale;
    return m;
}

MomentSet moments(const Distribution& F) {
    MomentSet m = raw_moments(F);
    if (!(m.mass > 0.0)) {
        throw DegenerateStateError("moments: nonpositive mass, bulk velocity and temperature undefined");
    }
    m.bulk = (1.0 / m.mass) * m.momentum;
    m.temperature = (m.energy - m.mass * norm2(m.bulk)) / (3.0 * m.mass);
    return m;
}

}  // namespace runaway
