#include "runaway/spectral.hpp"

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <fftw3.h>

#include "runaway/fftw_util.hpp"

namespace runaway {

std::mutex& detail::fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

namespace {

struct GradientPlan {
    int N = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;

    explicit GradientPlan(int n) : N(n) {
        real_size = static_cast<std::size_t>(n) * n * n;
        complex_size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
        detail::FftwBuffer<double> real(real_size);
        detail::FftwBuffer<fftw_complex> spec(complex_size);
        std::lock_guard lock(detail::fftw_planner_mutex());
        forward = fftw_plan_dft_r2c_3d(n, n, n, real.data, spec.data, FFTW_ESTIMATE);
        inverse = fftw_plan_dft_c2r_3d(n, n, n, spec.data, real.data, FFTW_ESTIMATE);
    }
    ~GradientPlan() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(inverse);
    }
};

const GradientPlan& plan_for(int N) {
    static std::mutex m;
    static std::map<int, std::unique_ptr<GradientPlan>> cache;
    std::lock_guard lock(m);
    auto& slot = cache[N];
    if (!slot) slot = std::make_unique<GradientPlan>(N);
    return *slot;
}

}  // namespace

std::array<std::vector<double>, 3> spectral_gradient(const VelocityGrid& grid, std::span<const double> f) {
    const int N = grid.N;
    const GradientPlan& plan = plan_for(N);
    detail::FftwBuffer<double> real(plan.real_size);
    detail::FftwBuffer<fftw_complex> spec(plan.complex_size);
    detail::FftwBuffer<fftw_complex> work(plan.complex_size);
    for (std::size_t i = 0; i < plan.real_size; ++i) real.data[i] = f[i];
    fftw_execute_dft_r2c(plan.forward, real.data, spec.data);

    const double k0 = 2.0 * std::numbers::pi / (2.0 * grid.L);
    const double norm = 1.0 / static_cast<double>(plan.real_size);
    const int half = N / 2;
    auto wavenumber = [&](int m) { return (m == half) ? 0.0 : k0 * (m < half ? m : m - N); };

    std::array<std::vector<double>, 3> grad;
    for (int axis = 0; axis < 3; ++axis) {
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k <= half; ++k) {
                    const std::size_t idx = (static_cast<std::size_t>(i) * N + j) * (half + 1) + k;
                    const int m = axis == 0 ? i : (axis == 1 ? j : k);
                    const double kk = wavenumber(m) * norm;
                    // multiply by i k
                    work.data[idx][0] = -kk * spec.data[idx][1];
                    work.data[idx][1] = kk * spec.data[idx][0];
                }
        fftw_execute_dft_c2r(plan.inverse, work.data, real.data);
        grad[axis].assign(real.data, real.data + plan.real_size);
    }
    return grad;
}

namespace {

std::vector<double> stencil(int order) {
    switch (order) {
        case 2: return {0.5};
        case 4: return {2.0 / 3.0, -1.0 / 12.0};
        case 6: return {0.75, -0.15, 1.0 / 60.0};
        default: throw std::invalid_argument("centered differences: order must be 2, 4 or 6");
    }
}

}  // namespace

std::array<std::vector<double>, 3> centered_gradient(const VelocityGrid& g, std::span<const double> f, int order) {
    const auto c = stencil(order);
    const int N = g.N;
    const double inv_h = 1.0 / g.dv();
    const std::size_t stride[3] = {static_cast<std::size_t>(N) * N, static_cast<std::size_t>(N), 1};
    std::array<std::vector<double>, 3> grad;
    for (auto& a : grad) a.assign(g.size(), 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                const std::size_t p = g.index(i, j, k);
                const int idx[3] = {i, j, k};
                for (int d = 0; d < 3; ++d) {
                    double acc = 0.0;
                    for (std::size_t m = 1; m <= c.size(); ++m) {
                        const int im = static_cast<int>(m);
                        const double up = idx[d] + im < N ? f[p + m * stride[d]] : 0.0;
                        const double dn = idx[d] - im >= 0 ? f[p - m * stride[d]] : 0.0;
                        acc += c[m - 1] * (up - dn);
                    }
                    grad[d][p] = acc * inv_h;
                }
            }
    return grad;
}

void add_centered_divergence(const VelocityGrid& g, const std::array<std::vector<double>, 3>& flux,
                             std::span<double> out, double scale, int order) {
    const auto c = stencil(order);
    const int layers = static_cast<int>(c.size());
    const int N = g.N;
    const double s = scale / g.dv();
    const std::size_t stride[3] = {static_cast<std::size_t>(N) * N, static_cast<std::size_t>(N), 1};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                const std::size_t p = g.index(i, j, k);
                double div = 0.0;
                for (int d = 0; d < 3; ++d)
                    for (int m = 1; m <= layers; ++m) {
                        int up[3] = {i, j, k}, dn[3] = {i, j, k};
                        up[d] += m;
                        dn[d] -= m;
                        double acc = 0.0;
                        if (up[d] < N && !is_boundary_node(g, up[0], up[1], up[2], layers))
                            acc += flux[d][p + m * stride[d]];
                        if (dn[d] >= 0 && !is_boundary_node(g, dn[0], dn[1], dn[2], layers))
                            acc -= flux[d][p - m * stride[d]];
                        div += c[m - 1] * acc;
                    }
                out[p] += s * div;
            }
}

}  // namespace runaway
