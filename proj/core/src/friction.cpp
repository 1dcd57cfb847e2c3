#include "runaway/friction.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "runaway/moments.hpp"
#include "runaway/spectral.hpp"

namespace runaway {

namespace {

constexpr int kOrder = 6;
constexpr int kLayers = kOrder / 2;

// Discrete gradient defect of the unit Maxwellian, e = grad_h mu + v mu, and
// <mu, mu> on a grid.
struct MaxwellianDefect {
    std::vector<double> mu;
    std::array<std::vector<double>, 3> e;
    double norm2 = 0.0;
};

std::shared_ptr<const MaxwellianDefect> maxwellian_defect(const VelocityGrid& grid) {
    static std::mutex m;
    static std::map<std::tuple<int, double, double, double, double>, std::shared_ptr<const MaxwellianDefect>> cache;
    const auto key = std::make_tuple(grid.N, grid.L, grid.center[0], grid.center[1], grid.center[2]);
    {
        std::lock_guard lock(m);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto d = std::make_shared<MaxwellianDefect>();
    const Distribution mu = sample(grid, unit_maxwellian);
    d->mu = mu.values();
    const auto grad = centered_gradient(grid, mu.cell(0), kOrder);
    for (int a = 0; a < 3; ++a) {
        d->e[a].resize(grid.size());
        for (std::size_t p = 0; p < grid.size(); ++p) d->e[a][p] = grad[a][p] + grid.node(p)[a] * mu[p];
    }
    for (double v : d->mu) d->norm2 += v * v;
    std::lock_guard lock(m);
    if (cache.size() > 256) cache.clear();
    cache.emplace(key, d);
    return d;
}

}  // namespace

std::array<double, 6> spherical_tensor(const Vec3& w) {
    const double r2 = norm2(w);
    if (r2 == 0.0) return {2.0 / 3.0, 0.0, 0.0, 2.0 / 3.0, 0.0, 2.0 / 3.0};
    const double s = 1.0 / std::sqrt(1.0 + r2);
    return {s * (1.0 - w[0] * w[0] / r2), -s * w[0] * w[1] / r2, -s * w[0] * w[2] / r2,
            s * (1.0 - w[1] * w[1] / r2), -s * w[1] * w[2] / r2, s * (1.0 - w[2] * w[2] / r2)};
}

namespace {

// Node fluxes Pi(w)/<w> grad F, zero within kLayers of the faces.
std::array<std::vector<double>, 3> spherical_flux(const VelocityGrid& grid, std::span<const double> F,
                                                  const VelocityMap& map) {
    auto grad = centered_gradient(grid, F, kOrder);
    // Remove the component of the gradient error carried by the local
    // Maxwellian content of F; this makes S(mu) vanish to roundoff.
    const auto defect = maxwellian_defect(grid);
    double overlap = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) overlap += F[p] * defect->mu[p];
    if (overlap != 0.0 && defect->norm2 > 0.0) {
        const double c = overlap / defect->norm2;
        for (int a = 0; a < 3; ++a)
            for (std::size_t p = 0; p < grid.size(); ++p) grad[a][p] -= c * defect->e[a][p];
    }
    static constexpr int idx[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    std::array<std::vector<double>, 3> flux;
    for (auto& f : flux) f.assign(grid.size(), 0.0);
    const int N = grid.N;
    for (int i = kLayers; i < N - kLayers; ++i)
        for (int j = kLayers; j < N - kLayers; ++j)
            for (int k = kLayers; k < N - kLayers; ++k) {
                const std::size_t p = grid.index(i, j, k);
                const auto D = spherical_tensor(map(grid.node(i, j, k)));
                for (int d = 0; d < 3; ++d)
                    flux[d][p] = D[idx[d][0]] * grad[0][p] + D[idx[d][1]] * grad[1][p] + D[idx[d][2]] * grad[2][p];
            }
    return flux;
}

}  // namespace

void add_spherical_diffusion(const VelocityGrid& grid, std::span<const double> F, std::span<double> out,
                             const VelocityMap& map, double scale) {
    add_centered_divergence(grid, spherical_flux(grid, F, map), out, scale, kOrder);
}

Distribution spherical_diffusion(const Distribution& F, const VelocityMap& map) {
    Distribution out(F.grid(), F.spatial_cells());
    for (int c = 0; c < F.spatial_cells(); ++c) add_spherical_diffusion(F.grid(), F.cell(c), out.cell(c), map);
    return out;
}

double spherical_diffusivity_max(const VelocityGrid& grid, const VelocityMap& map) {
    // 1/<w> is largest at the node closest to the origin.
    double best = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p) best = std::max(best, 1.0 / bracket(map(grid.node(p))));
    return best;
}

void add_upwind3_transport(const VelocityGrid& grid, std::span<const double> F, std::span<double> out,
                           const AxisVelocity& c, double scale) {
    const int N = grid.N;
    const double h = grid.dv();
    const double s = scale / h;
    std::vector<double> line(N + 4), flux(N + 1);
    for (int d = 0; d < 3; ++d) {
        std::vector<double> speed(N + 1);
        for (int f = 0; f <= N; ++f) speed[f] = c(d, grid.coord(d, 0) + (f - 0.5) * h);
        for (int a = 0; a < N; ++a)
            for (int b = 0; b < N; ++b) {
                auto node = [&](int i) {
                    return d == 0 ? grid.index(i, a, b) : (d == 1 ? grid.index(a, i, b) : grid.index(a, b, i));
                };
                // line[i + 2] holds F_i with two zero ghosts on each side
                for (int i = 0; i < N; ++i) line[i + 2] = F[node(i)];
                line[0] = line[1] = line[N + 2] = line[N + 3] = 0.0;
                for (int f = 0; f <= N; ++f) {
                    // face f sits between nodes f-1 and f
                    const double v = speed[f];
                    const bool inflow = (f == 0 && v > 0.0) || (f == N && v < 0.0);
                    if (inflow || v == 0.0) {
                        flux[f] = 0.0;
                        continue;
                    }
                    const int i = f - 1 + 2;
                    const double value = v > 0.0 ? (-line[i - 1] + 5.0 * line[i] + 2.0 * line[i + 1]) / 6.0
                                                 : (2.0 * line[i] + 5.0 * line[i + 1] - line[i + 2]) / 6.0;
                    flux[f] = v * value;
                }
                for (int i = 0; i < N; ++i) out[node(i)] -= s * (flux[i + 1] - flux[i]);
            }
    }
}

Distribution field_advection(const Distribution& F, const FieldSpec& spec) {
    const Vec3 a = spec.acceleration();
    Distribution out(F.grid(), F.spatial_cells());
    const AxisVelocity c = [&](int axis, double) { return a[axis]; };
    for (int cell = 0; cell < F.spatial_cells(); ++cell) add_upwind3_transport(F.grid(), F.cell(cell), out.cell(cell), c);
    return out;
}

Vec3 friction_kernel(const Vec3& w) {
    const double r2 = norm2(w);
    if (r2 == 0.0) return {};
    return (1.0 / (std::sqrt(1.0 + r2) * r2)) * w;
}

Vec3 friction_R(const Distribution& F, const VelocityMap& map) {
    // div_w(Pi/<w>) = -2 w/(<w>|w|^2), so after integrating by parts
    // R = (1/2) int Pi/<w> grad_w F; this is exactly the momentum that the
    // discrete spherical diffusion removes.
    const VelocityGrid& g = F.grid();
    Vec3 total{};
    for (int c = 0; c < F.spatial_cells(); ++c) {
        const auto flux = spherical_flux(g, F.cell(c), map);
        for (int d = 0; d < 3; ++d)
            for (double f : flux[d]) total[d] += f;
    }
    return (0.5 * g.weight() / (map.scale * F.spatial_cells())) * total;
}

}  // namespace runaway
