#include "runaway/frame.hpp"

#include <algorithm>
#include <cmath>

#include <spdlog/spdlog.h>

#include "runaway/errors.hpp"
#include "runaway/landau.hpp"

namespace runaway {

MacroRates macro_rhs(const MacroState& state, const Vec3& R, const Vec3& E) {
    return {E - 2.0 * R, (4.0 / 3.0) * dot(state.V, R), state.V};
}

namespace {

struct Stencil {
    int first = 0;  // index of the first of four source nodes
    double w[4] = {0, 0, 0, 0};
};

// Cubic Lagrange weights for sampling a line of n nodes at x0 + (s) h.
Stencil cubic_stencil(double s) {
    Stencil st;
    const double fl = std::floor(s);
    const double t = s - fl;
    st.first = static_cast<int>(fl) - 1;
    st.w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
    st.w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    st.w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
    st.w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
    return st;
}

}  // namespace

void resample_affine(const VelocityGrid& src, std::span<const double> in, const VelocityGrid& dst,
                     std::span<double> out, const Vec3& shift, double scale) {
    const int ns = src.N, nd = dst.N;
    std::array<std::vector<Stencil>, 3> stencils;
    for (int a = 0; a < 3; ++a) {
        stencils[a].resize(nd);
        for (int i = 0; i < nd; ++i) {
            const double x = shift[a] + scale * dst.coord(a, i);
            stencils[a][i] = cubic_stencil((x - src.coord(a, 0)) / src.dv());
        }
    }
    auto apply = [ns](const Stencil& st, auto&& value) {
        double acc = 0.0;
        for (int m = 0; m < 4; ++m) {
            const int i = st.first + m;
            if (i >= 0 && i < ns) acc += st.w[m] * value(i);
        }
        return acc;
    };
    // x, then y, then z
    std::vector<double> t1(static_cast<std::size_t>(nd) * ns * ns), t2(static_cast<std::size_t>(nd) * nd * ns);
    for (int i = 0; i < nd; ++i)
        for (int j = 0; j < ns; ++j)
            for (int k = 0; k < ns; ++k)
                t1[(static_cast<std::size_t>(i) * ns + j) * ns + k] =
                    apply(stencils[0][i], [&](int s) { return in[src.index(s, j, k)]; });
    for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j)
            for (int k = 0; k < ns; ++k)
                t2[(static_cast<std::size_t>(i) * nd + j) * ns + k] =
                    apply(stencils[1][j], [&](int s) { return t1[(static_cast<std::size_t>(i) * ns + s) * ns + k]; });
    for (int i = 0; i < nd; ++i)
        for (int j = 0; j < nd; ++j)
            for (int k = 0; k < nd; ++k)
                out[dst.index(i, j, k)] =
                    apply(stencils[2][k], [&](int s) { return t2[(static_cast<std::size_t>(i) * nd + j) * ns + s]; });
}

namespace {

int cell_shift(double H, double dx, int nx) {
    if (nx <= 1) return 0;
    if (!(dx > 0.0)) throw ConfigError("frame transform: spatial cell size must be positive when Nx > 1");
    const long m = std::lround(H / dx);
    return static_cast<int>(((m % nx) + nx) % nx);
}

double total_mass(const Distribution& F) {
    double m = 0.0;
    for (double v : F.values()) m += v;
    return m * F.grid().weight() / F.spatial_cells();
}

void report_loss(const char* what, double before, double after, double* lost) {
    const double loss = before - after;
    if (lost) *lost = loss;
    if (std::abs(before) > 0.0 && loss / std::abs(before) > 1e-8) {
        spdlog::warn("{}: resampling dropped mass {:.3e} outside the source box", what, loss);
    }
}

}  // namespace

Distribution to_frame(const Distribution& F, const MacroState& s, const VelocityGrid& frame, double dx,
                      double* lost_mass) {
    if (!(s.T > 0.0)) throw DegenerateStateError("to_frame: temperature must be positive");
    const int nx = F.spatial_cells();
    const int shift = cell_shift(s.H[0], dx, nx);
    const double root = std::sqrt(s.T);
    const double jac = s.T * root;
    Distribution G(frame, nx);
    for (int c = 0; c < nx; ++c) {
        // G(x_c) = F(x_c + H)
        const int src = (c + shift) % nx;
        auto out = G.cell(c);
        resample_affine(F.grid(), F.cell(src), frame, out, s.V, root);
        for (double& v : out) v *= jac;
    }
    report_loss("to_frame", total_mass(F), total_mass(G), lost_mass);
    return G;
}

Distribution to_frame(const Distribution& F, const MacroState& s) {
    VelocityGrid frame = F.grid();
    frame.center = {};
    return to_frame(F, s, frame);
}

Distribution from_frame(const Distribution& G, const MacroState& s, const VelocityGrid& lab, double dx,
                        double* lost_mass) {
    if (!(s.T > 0.0)) throw DegenerateStateError("from_frame: temperature must be positive");
    const int nx = G.spatial_cells();
    const int shift = cell_shift(s.H[0], dx, nx);
    const double root = std::sqrt(s.T);
    Distribution F(lab, nx);
    for (int c = 0; c < nx; ++c) {
        // F(x_c) = G(x_c - H)
        const int src = ((c - shift) % nx + nx) % nx;
        auto out = F.cell(c);
        resample_affine(G.grid(), G.cell(src), lab, out, (-1.0 / root) * s.V, 1.0 / root);
        for (double& v : out) v /= s.T * root;
    }
    report_loss("from_frame", total_mass(G), total_mass(F), lost_mass);
    return F;
}

void add_frame_drift(const VelocityGrid& grid, std::span<const double> G, std::span<double> out, double T,
                     const Vec3& R, double Tprime, double scale) {
    const double a = -0.5 * Tprime / T;
    const Vec3 b = (2.0 / std::sqrt(T)) * R;
    add_upwind3_transport(grid, G, out, [&](int axis, double x) { return a * x + b[axis]; }, scale);
}

Distribution transformed_rhs(const Distribution& G, const MacroState& s, const Vec3& R, double Tprime) {
    if (!(s.T > 0.0)) throw DegenerateStateError("transformed_rhs: temperature must be positive");
    const VelocityGrid& grid = G.grid();
    const auto op = landau_for(grid);
    const VelocityMap map = frame_map(s);
    const double qscale = 1.0 / (s.T * std::sqrt(s.T));
    Distribution out(grid, G.spatial_cells());
    for (int c = 0; c < G.spatial_cells(); ++c) {
        auto o = out.cell(c);
        op->apply(op->convolve_fast(G.cell(c)), G.cell(c), o, qscale);
        add_spherical_diffusion(grid, G.cell(c), o, map, 1.0 / s.T);
        add_frame_drift(grid, G.cell(c), o, s.T, R, Tprime);
    }
    return out;
}

}  // namespace runaway
