#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "runaway/grid.hpp"

namespace runaway {

/// Symmetric 3x3 tensor stored as (xx, xy, xz, yy, yz, zz).
using SymTensor = std::array<double, 6>;

inline double sym_at(const SymTensor& t, int i, int j) {
    static constexpr int map[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return t[map[i][j]];
}

/// (a * F)(v) and (b * F)(v) at every velocity node of one spatial cell, with
/// a(z) = |z|^{-1} (I - z z^T / |z|^2) and b_i(z) = sum_j d_j a_ij(z) = -2 z_i / |z|^3.
/// The b field is evaluated as a * grad F, which equals b * F after integrating
/// by parts and avoids the stronger |z|^{-2} singularity on the lattice.
struct KernelFields {
    std::vector<SymTensor> a;
    std::vector<Vec3> b;
};

enum class ConvolutionPath { Direct, Fast };

/// Kernel values on the lattice of node offsets m * dv, m in [-(N-1), N-1]^3.
/// The zero offset holds the exact cell average.
struct KernelTable {
    int N = 0;
    double dv = 0.0;
    double radius = 0.0;  // offsets beyond this are truncated to zero
    std::vector<SymTensor> a;

    std::size_t index(int di, int dj, int dk) const {
        const int M = 2 * N - 1;
        return (static_cast<std::size_t>(di + N - 1) * M + (dj + N - 1)) * M + (dk + N - 1);
    }
};

/// Integral of 1/|z| over the unit cube centered at the origin, by Gauss-Legendre
/// quadrature over the six face pyramids.
double unit_cube_inverse_distance_integral();

KernelTable build_kernel_table(int N, double dv, double radius);

/// Evaluates the Landau-Coulomb operator and its linearizations on one grid
/// shape (N, dv). Instances are immutable after construction apart from
/// internal caches, which are synchronized; sharing across threads is safe.
class LandauOperator {
public:
    explicit LandauOperator(const VelocityGrid& grid, double truncation_radius = -1.0);
    ~LandauOperator();
    LandauOperator(const LandauOperator&) = delete;
    LandauOperator& operator=(const LandauOperator&) = delete;

    const VelocityGrid& grid() const { return grid_; }
    const KernelTable& kernels() const { return table_; }
    std::size_t padded_size() const { return P_; }

    /// Reference O(n^2) summation.
    KernelFields convolve_direct(std::span<const double> F) const;
    /// Zero-padded circular convolution through FFTW; no wrap-around.
    KernelFields convolve_fast(std::span<const double> F) const;
    KernelFields convolve(std::span<const double> F, ConvolutionPath path = ConvolutionPath::Fast) const {
        return path == ConvolutionPath::Fast ? convolve_fast(F) : convolve_direct(F);
    }

    /// out += scale * div[(a*F) grad G - (b*F) G]. The flux is formed at the
    /// nodes with spectral gradients and differenced with centered differences
    /// (zero on face nodes). For G = F it is sum_q a(v_p - v_q)(F_q grad F_p -
    /// F_p grad F_q), so mass, momentum and energy are conserved exactly and any
    /// resolved Maxwellian is an equilibrium up to the gradient error.
    void apply(const KernelFields& fields, std::span<const double> G, std::span<double> out,
               double scale = 1.0) const;

    /// Q(F, G) cell by cell. Throws GridMismatchError on layout mismatch.
    Distribution collision_Q(const Distribution& F, const Distribution& G) const;

    /// L(g) = Q(mu, g) + Q(g, mu), reusing the cached fields of mu.
    Distribution linear_L(const Distribution& g) const;

    /// Gamma(g, h) = mu^{-1/2} Q(mu^{1/2} g, mu^{1/2} h). Nodes with
    /// |v| > cutoff are zeroed and counted in *zeroed when provided.
    Distribution bilinear_Gamma(const Distribution& g, const Distribution& h, double cutoff = 6.0,
                                std::size_t* zeroed = nullptr) const;

    /// cL(f) = mu^{-1/2} (Q(mu, mu^{1/2} f) + Q(mu^{1/2} f, mu)), same cutoff policy.
    Distribution linearized_cL(const Distribution& f, double cutoff = 6.0,
                               std::size_t* zeroed = nullptr) const;

    /// Fields of mu on the given grid (cached for the most recent center).
    KernelFields mu_fields(const VelocityGrid& grid) const;

private:
    struct FftState;

    VelocityGrid grid_;
    KernelTable table_;
    std::size_t P_ = 0;
    std::unique_ptr<FftState> fft_;
    mutable std::mutex mu_mutex_;
    mutable bool mu_ready_ = false;
    mutable Vec3 mu_center_{};
    mutable KernelFields mu_fields_;
};

/// Shared operator for a grid shape; grids differing only in center share one
/// instance since the kernels are translation invariant.
std::shared_ptr<const LandauOperator> landau_for(const VelocityGrid& grid);

/// Free-function forms.
KernelFields convolve_kernels(const Distribution& F, ConvolutionPath path = ConvolutionPath::Fast,
                              int cell = 0);
Distribution collision_Q(const Distribution& F, const Distribution& G);
Distribution linear_L(const Distribution& g);

/// Expanded (non-conservative) evaluation (a*F):grad^2 G + 8 pi F G with
/// centered differences, used as a cross-check of the flux form.
Distribution collision_Q_expanded(const Distribution& F, const Distribution& G);

}  // namespace runaway
