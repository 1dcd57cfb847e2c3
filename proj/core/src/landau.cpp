#include "runaway/landau.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>
#include <tuple>
#include <utility>

#include <fftw3.h>

#include "runaway/errors.hpp"
#include "runaway/fftw_util.hpp"
#include "runaway/moments.hpp"
#include "runaway/quadrature.hpp"
#include "runaway/spectral.hpp"

namespace runaway {

namespace {

using detail::FftwBuffer;
using detail::fftw_planner_mutex;

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

SymTensor a_kernel(const Vec3& z) {
    const double r2 = norm2(z);
    const double r = std::sqrt(r2);
    const double inv_r = 1.0 / r;
    const double inv_r3 = inv_r / r2;
    return {inv_r - z[0] * z[0] * inv_r3, -z[0] * z[1] * inv_r3, -z[0] * z[2] * inv_r3,
            inv_r - z[1] * z[1] * inv_r3, -z[1] * z[2] * inv_r3, inv_r - z[2] * z[2] * inv_r3};
}

}  // namespace

double unit_cube_inverse_distance_integral() {
    // Pyramid over the face x = 1/2: z = x (1, s, t), Jacobian x^2, so the
    // radial integral gives 1/8 and the remaining (s, t) integrand is smooth.
    static const double value = [] {
        const QuadratureRule q = gauss_legendre(48);
        double sum = 0.0;
        for (std::size_t i = 0; i < q.nodes.size(); ++i)
            for (std::size_t j = 0; j < q.nodes.size(); ++j) {
                const double s = q.nodes[i], t = q.nodes[j];
                sum += q.weights[i] * q.weights[j] / std::sqrt(1.0 + s * s + t * t);
            }
        return 6.0 * sum / 8.0;
    }();
    return value;
}

KernelTable build_kernel_table(int N, double dv, double radius) {
    KernelTable table;
    table.N = N;
    table.dv = dv;
    table.radius = radius;
    const int M = 2 * N - 1;
    const std::size_t total = static_cast<std::size_t>(M) * M * M;
    table.a.assign(total, SymTensor{});
    const double r2max = radius * radius;
    for (int di = -(N - 1); di <= N - 1; ++di)
        for (int dj = -(N - 1); dj <= N - 1; ++dj)
            for (int dk = -(N - 1); dk <= N - 1; ++dk) {
                const std::size_t idx = table.index(di, dj, dk);
                if (di == 0 && dj == 0 && dk == 0) {
                    // cell average of |z|^{-1} Pi(z): by cubic symmetry (2/3) I times the
                    // mean of 1/|z|.
                    const double diag = (2.0 / 3.0) * unit_cube_inverse_distance_integral() / dv;
                    table.a[idx] = {diag, 0.0, 0.0, diag, 0.0, diag};
                    continue;
                }
                const Vec3 z{di * dv, dj * dv, dk * dv};
                if (norm2(z) > r2max) continue;
                // point values elsewhere: a(z) z = 0 holds exactly on the lattice
                table.a[idx] = a_kernel(z);
            }
    return table;
}

struct LandauOperator::FftState {
    std::size_t P = 0;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;
    fftw_plan forward = nullptr;
    fftw_plan inverse = nullptr;
    std::array<std::vector<std::complex<double>>, 6> spectra;

    ~FftState() {
        std::lock_guard lock(fftw_planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (inverse) fftw_destroy_plan(inverse);
    }
};

LandauOperator::LandauOperator(const VelocityGrid& grid, double truncation_radius)
    : grid_(grid), fft_(std::make_unique<FftState>()) {
    const double radius = truncation_radius > 0.0 ? truncation_radius : 2.0 * std::sqrt(3.0) * grid.L;
    table_ = build_kernel_table(grid.N, grid.dv(), radius);

    const int N = grid.N;
    P_ = next_pow2(static_cast<std::size_t>(2 * N - 1));
    FftState& st = *fft_;
    st.P = P_;
    st.real_size = P_ * P_ * P_;
    st.complex_size = P_ * P_ * (P_ / 2 + 1);
    const int n = static_cast<int>(P_);

    FftwBuffer<double> real(st.real_size);
    FftwBuffer<fftw_complex> spec(st.complex_size);
    {
        std::lock_guard lock(fftw_planner_mutex());
        st.forward = fftw_plan_dft_r2c_3d(n, n, n, real.data, spec.data, FFTW_ESTIMATE);
        st.inverse = fftw_plan_dft_c2r_3d(n, n, n, spec.data, real.data, FFTW_ESTIMATE);
    }

    auto wrap = [this](int m) { return static_cast<std::size_t>((m + static_cast<int>(P_)) % static_cast<int>(P_)); };
    for (int c = 0; c < 6; ++c) {
        std::memset(real.data, 0, sizeof(double) * st.real_size);
        for (int di = -(N - 1); di <= N - 1; ++di)
            for (int dj = -(N - 1); dj <= N - 1; ++dj)
                for (int dk = -(N - 1); dk <= N - 1; ++dk) {
                    const std::size_t idx = table_.index(di, dj, dk);
                    real.data[(wrap(di) * P_ + wrap(dj)) * P_ + wrap(dk)] = table_.a[idx][c];
                }
        fftw_execute_dft_r2c(st.forward, real.data, spec.data);
        st.spectra[c].resize(st.complex_size);
        for (std::size_t m = 0; m < st.complex_size; ++m) st.spectra[c][m] = {spec.data[m][0], spec.data[m][1]};
    }
}

LandauOperator::~LandauOperator() = default;

KernelFields LandauOperator::convolve_direct(std::span<const double> F) const {
    const int N = grid_.N;
    const std::size_t n = grid_.size();
    const double w = grid_.weight();
    const auto grad = spectral_gradient(grid_, F);
    KernelFields out{std::vector<SymTensor>(n, SymTensor{}), std::vector<Vec3>(n, Vec3{})};
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                SymTensor acc_a{};
                Vec3 acc_b{};
                for (int qi = 0; qi < N; ++qi)
                    for (int qj = 0; qj < N; ++qj)
                        for (int qk = 0; qk < N; ++qk) {
                            const std::size_t q = grid_.index(qi, qj, qk);
                            const SymTensor& a = table_.a[table_.index(i - qi, j - qj, k - qk)];
                            for (int c = 0; c < 6; ++c) acc_a[c] += a[c] * F[q];
                            for (int d = 0; d < 3; ++d)
                                for (int e = 0; e < 3; ++e) acc_b[d] += sym_at(a, d, e) * grad[e][q];
                        }
                const std::size_t p = grid_.index(i, j, k);
                for (int c = 0; c < 6; ++c) out.a[p][c] = w * acc_a[c];
                for (int c = 0; c < 3; ++c) out.b[p][c] = w * acc_b[c];
            }
    return out;
}

KernelFields LandauOperator::convolve_fast(std::span<const double> F) const {
    const FftState& st = *fft_;
    const int N = grid_.N;
    const std::size_t n = grid_.size();
    const auto grad = spectral_gradient(grid_, F);

    FftwBuffer<double> real(st.real_size);
    FftwBuffer<fftw_complex> prod(st.complex_size);
    std::array<std::unique_ptr<FftwBuffer<fftw_complex>>, 4> hats;  // F, dF/dx, dF/dy, dF/dz
    for (int s = 0; s < 4; ++s) {
        std::span<const double> src = s == 0 ? F : std::span<const double>(grad[s - 1]);
        std::memset(real.data, 0, sizeof(double) * st.real_size);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) real.data[(i * P_ + j) * P_ + k] = src[grid_.index(i, j, k)];
        hats[s] = std::make_unique<FftwBuffer<fftw_complex>>(st.complex_size);
        fftw_execute_dft_r2c(st.forward, real.data, hats[s]->data);
    }

    const double scale = grid_.weight() / static_cast<double>(st.real_size);
    KernelFields out{std::vector<SymTensor>(n, SymTensor{}), std::vector<Vec3>(n, Vec3{})};
    auto gather = [&](auto&& store) {
        fftw_execute_dft_c2r(st.inverse, prod.data, real.data);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) store(grid_.index(i, j, k), scale * real.data[(i * P_ + j) * P_ + k]);
    };
    static constexpr int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    for (int c = 0; c < 6; ++c) {
        const auto& kh = st.spectra[c];
        const fftw_complex* fh = hats[0]->data;
        for (std::size_t m = 0; m < st.complex_size; ++m) {
            const std::complex<double> v = kh[m] * std::complex<double>(fh[m][0], fh[m][1]);
            prod.data[m][0] = v.real();
            prod.data[m][1] = v.imag();
        }
        gather([&](std::size_t p, double x) { out.a[p][c] = x; });
    }
    for (int d = 0; d < 3; ++d) {
        for (std::size_t m = 0; m < st.complex_size; ++m) {
            std::complex<double> v{};
            for (int e = 0; e < 3; ++e) {
                const fftw_complex* gh = hats[e + 1]->data;
                v += st.spectra[map[d][e]][m] * std::complex<double>(gh[m][0], gh[m][1]);
            }
            prod.data[m][0] = v.real();
            prod.data[m][1] = v.imag();
        }
        gather([&](std::size_t p, double x) { out.b[p][d] = x; });
    }
    return out;
}

void LandauOperator::apply(const KernelFields& fields, std::span<const double> G, std::span<double> out,
                           double scale) const {
    const int N = grid_.N;
    const auto grad = spectral_gradient(grid_, G);
    std::array<std::vector<double>, 3> flux;
    for (auto& f : flux) f.assign(grid_.size(), 0.0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (int k = 0; k < N; ++k) {
                if (is_boundary_node(grid_, i, j, k)) continue;
                const std::size_t p = grid_.index(i, j, k);
                const SymTensor& A = fields.a[p];
                for (int d = 0; d < 3; ++d) {
                    double f = -fields.b[p][d] * G[p];
                    for (int e = 0; e < 3; ++e) f += sym_at(A, d, e) * grad[e][p];
                    flux[d][p] = f;
                }
            }
    add_centered_divergence(grid_, flux, out, scale);
}

Distribution LandauOperator::collision_Q(const Distribution& F, const Distribution& G) const {
    require_same_layout(F, G, "collision_Q");
    if (F.grid().N != grid_.N || F.grid().dv() != grid_.dv()) {
        throw GridMismatchError("collision_Q: operator built for a different grid shape");
    }
    Distribution out(F.grid(), F.spatial_cells());
    for (int c = 0; c < F.spatial_cells(); ++c) {
        const KernelFields fields = convolve_fast(F.cell(c));
        apply(fields, G.cell(c), out.cell(c));
    }
    return out;
}

KernelFields LandauOperator::mu_fields(const VelocityGrid& grid) const {
    std::lock_guard lock(mu_mutex_);
    if (!mu_ready_ || mu_center_ != grid.center) {
        const Distribution mu = sample(grid, unit_maxwellian);
        mu_fields_ = convolve_fast(mu.cell(0));
        mu_center_ = grid.center;
        mu_ready_ = true;
    }
    return mu_fields_;
}

Distribution LandauOperator::linear_L(const Distribution& g) const {
    const VelocityGrid& grid = g.grid();
    const KernelFields mf = mu_fields(grid);
    const Distribution mu = sample(grid, unit_maxwellian);
    Distribution out(grid, g.spatial_cells());
    for (int c = 0; c < g.spatial_cells(); ++c) {
        apply(mf, g.cell(c), out.cell(c));
        apply(convolve_fast(g.cell(c)), mu.cell(0), out.cell(c));
    }
    return out;
}

namespace {

Distribution times_sqrt_mu(const Distribution& f) {
    Distribution out = f;
    const VelocityGrid& g = f.grid();
    for (int c = 0; c < f.spatial_cells(); ++c) {
        auto cell = out.cell(c);
        for (std::size_t idx = 0; idx < g.size(); ++idx) cell[idx] *= std::sqrt(unit_maxwellian(g.node(idx)));
    }
    return out;
}

void divide_sqrt_mu(Distribution& f, double cutoff, std::size_t* zeroed) {
    const VelocityGrid& g = f.grid();
    std::size_t count = 0;
    for (int c = 0; c < f.spatial_cells(); ++c) {
        auto cell = f.cell(c);
        for (std::size_t idx = 0; idx < g.size(); ++idx) {
            const Vec3 v = g.node(idx);
            if (norm(v) > cutoff) {
                cell[idx] = 0.0;
                ++count;
            } else {
                cell[idx] /= std::sqrt(unit_maxwellian(v));
            }
        }
    }
    if (zeroed) *zeroed = count;
}

}  // namespace

Distribution LandauOperator::bilinear_Gamma(const Distribution& g, const Distribution& h, double cutoff,
                                            std::size_t* zeroed) const {
    Distribution out = collision_Q(times_sqrt_mu(g), times_sqrt_mu(h));
    divide_sqrt_mu(out, cutoff, zeroed);
    return out;
}

Distribution LandauOperator::linearized_cL(const Distribution& f, double cutoff, std::size_t* zeroed) const {
    Distribution out = linear_L(times_sqrt_mu(f));
    divide_sqrt_mu(out, cutoff, zeroed);
    return out;
}

std::shared_ptr<const LandauOperator> landau_for(const VelocityGrid& grid) {
    static std::mutex m;
    static std::map<std::tuple<int, double>, std::shared_ptr<const LandauOperator>> cache;
    std::lock_guard lock(m);
    auto key = std::make_tuple(grid.N, grid.dv());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto op = std::make_shared<const LandauOperator>(grid);
    cache.emplace(key, op);
    return op;
}

KernelFields convolve_kernels(const Distribution& F, ConvolutionPath path, int cell) {
    return landau_for(F.grid())->convolve(F.cell(cell), path);
}

Distribution collision_Q(const Distribution& F, const Distribution& G) {
    return landau_for(F.grid())->collision_Q(F, G);
}

Distribution linear_L(const Distribution& g) { return landau_for(g.grid())->linear_L(g); }

Distribution collision_Q_expanded(const Distribution& F, const Distribution& G) {
    require_same_layout(F, G, "collision_Q_expanded");
    const VelocityGrid& grid = F.grid();
    const auto op = landau_for(grid);
    const int N = grid.N;
    const double h = grid.dv();
    Distribution out(grid, F.spatial_cells());
    for (int c = 0; c < F.spatial_cells(); ++c) {
        const KernelFields fields = op->convolve_fast(F.cell(c));
        auto g = G.cell(c);
        auto f = F.cell(c);
        auto o = out.cell(c);
        auto at = [&](int i, int j, int k) -> double {
            if (i < 0 || j < 0 || k < 0 || i >= N || j >= N || k >= N) return 0.0;
            return g[grid.index(i, j, k)];
        };
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                for (int k = 0; k < N; ++k) {
                    const std::size_t p = grid.index(i, j, k);
                    const int id[3] = {i, j, k};
                    double hess[3][3];
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) {
                            auto shifted = [&](int sa, int sb) {
                                int s[3] = {id[0], id[1], id[2]};
                                s[a] += sa;
                                s[b] += sb;
                                return at(s[0], s[1], s[2]);
                            };
                            if (a == b) {
                                hess[a][b] = (shifted(1, 0) - 2.0 * g[p] + shifted(-1, 0)) / (h * h);
                            } else {
                                hess[a][b] = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) /
                                             (4.0 * h * h);
                            }
                        }
                    double value = 8.0 * std::numbers::pi * f[p] * g[p];
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b) value += sym_at(fields.a[p], a, b) * hess[a][b];
                    o[p] = value;
                }
    }
    return out;
}

}  // namespace runaway
