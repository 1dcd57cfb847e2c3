#include "runaway/projection.hpp"

#include <cmath>

#include "runaway/moments.hpp"

namespace runaway {

namespace {

double sqrt_mu(const Vec3& v) { return std::sqrt(unit_maxwellian(v)); }

// Squared weighted pieces of the norms for one spatial cell.
struct NormPieces {
    double l2 = 0.0;         // sum f^2 <v>^{2k}
    double l2_shift = 0.0;   // sum f^2 <v>^{2k-3}
    double l2_half = 0.0;    // sum f^2 <v>^{2k-1}
    double grad = 0.0;       // sum |grad f|^2 <v>^{2k}
    double grad_shift = 0.0; // sum |grad f|^2 <v>^{2k-3}
    double sphere = 0.0;     // sum |v x grad f|^2 <v>^{2k-3}
};

NormPieces pieces(const VelocityGrid& g, std::span<const double> f, double k) {
    const int N = g.N;
    const double inv2h = 1.0 / (2.0 * g.dv());
    auto at = [&](int i, int j, int l) -> double {
        if (i < 0 || j < 0 || l < 0 || i >= N || j >= N || l >= N) return 0.0;
        return f[g.index(i, j, l)];
    };
    NormPieces p;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int l = 0; l < N; ++l) {
                const Vec3 v = g.node(i, j, l);
                const double value = f[g.index(i, j, l)];
                const Vec3 grad{(at(i + 1, j, l) - at(i - 1, j, l)) * inv2h,
                                (at(i, j + 1, l) - at(i, j - 1, l)) * inv2h,
                                (at(i, j, l + 1) - at(i, j, l - 1)) * inv2h};
                const Vec3 cross{v[1] * grad[2] - v[2] * grad[1], v[2] * grad[0] - v[0] * grad[2],
                                 v[0] * grad[1] - v[1] * grad[0]};
                const double b2 = 1.0 + norm2(v);
                const double w = std::pow(b2, k);
                const double w_shift = std::pow(b2, k - 1.5);
                p.l2 += value * value * w;
                p.l2_shift += value * value * w_shift;
                p.l2_half += value * value * std::pow(b2, k - 0.5);
                p.grad += norm2(grad) * w;
                p.grad_shift += norm2(grad) * w_shift;
                p.sphere += norm2(cross) * w_shift;
            }
    return p;
}

}  // namespace

MacroCoefficients macro_coefficients(const Distribution& f, int cell) {
    const VelocityGrid& g = f.grid();
    auto values = f.cell(cell);
    MacroCoefficients m;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const Vec3 v = g.node(idx);
        const double fw = values[idx] * sqrt_mu(v);
        m.a += fw;
        m.b += fw * v;
        m.c += fw * (norm2(v) - 3.0);
    }
    const double w = g.weight();
    m.a *= w;
    m.b = w * m.b;
    m.c *= w / 6.0;
    return m;
}

Projection project_P(const Distribution& f) {
    const VelocityGrid& g = f.grid();
    Projection out{{}, Distribution(g, f.spatial_cells())};
    for (int c = 0; c < f.spatial_cells(); ++c) {
        const MacroCoefficients m = macro_coefficients(f, c);
        out.coefficients.push_back(m);
        auto pf = out.pf.cell(c);
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            const Vec3 v = g.node(idx);
            pf[idx] = (m.a + dot(m.b, v) + m.c * (norm2(v) - 3.0)) * sqrt_mu(v);
        }
    }
    return out;
}

double inner(const Distribution& f, const Distribution& g) {
    require_same_layout(f, g, "inner");
    double s = 0.0;
    for (std::size_t i = 0; i < f.values().size(); ++i) s += f[i] * g[i];
    return s * f.grid().weight() / f.spatial_cells();
}

double weighted_norm(const Distribution& f, double k, NormKind kind) {
    const VelocityGrid& g = f.grid();
    double total = 0.0;
    for (int c = 0; c < f.spatial_cells(); ++c) {
        const NormPieces p = pieces(g, f.cell(c), k);
        switch (kind) {
            case NormKind::L2: total += p.l2; break;
            case NormKind::H1: total += p.l2 + p.grad; break;
            case NormKind::D1: total += p.l2_shift + p.grad_shift + p.sphere; break;
            case NormKind::D2: total += p.l2_shift + p.grad_shift + p.sphere + p.l2_half; break;
        }
    }
    return std::sqrt(total * g.weight() / f.spatial_cells());
}

double spherical_seminorm(const Distribution& f, double k) {
    const VelocityGrid& g = f.grid();
    double total = 0.0;
    for (int c = 0; c < f.spatial_cells(); ++c) total += pieces(g, f.cell(c), k).sphere;
    return std::sqrt(total * g.weight() / f.spatial_cells());
}

}  // namespace runaway
