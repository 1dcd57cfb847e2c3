#include "runaway/integrator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <spdlog/spdlog.h>

#include "runaway/diagnostics.hpp"
#include "runaway/errors.hpp"
#include "runaway/io.hpp"
#include "runaway/landau.hpp"
#include "runaway/moments.hpp"

namespace runaway {

double SimConfig::burn_in() const {
    if (t_burn >= 0.0) return t_burn;
    const double e = norm(field.E);
    return e > 0.0 ? std::max(1.0, 5.0 / e) : 1.0;
}

void SimConfig::validate() const {
    if (!(L > 0.0)) throw ConfigError("grid.L must be positive");
    if (N < 8 || N % 2 != 0) throw ConfigError("grid.N must be an even integer >= 8");
    if (Nx < 1) throw ConfigError("grid.Nx must be >= 1");
    if (!(period > 0.0)) throw ConfigError("grid.period must be positive");
    if (!(T0 > 0.0)) throw ConfigError("init.T must be positive");
    if (!(t_end > 0.0)) throw ConfigError("time.t_end must be positive");
    if (!(cadence > 0.0)) throw ConfigError("output.cadence must be positive");
    if (!(safety > 0.0)) throw ConfigError("time.safety must be positive");
    if (!dt_auto && !(dt > 0.0)) throw ConfigError("time.dt must be positive or auto");
    if (perturbation.enabled && Nx < 2) throw ConfigError("init.perturbation needs grid.Nx > 1");
    for (double s : snapshot_times)
        if (s < 0.0 || s > t_end) throw ConfigError("output.snapshots must lie in [0, t_end]");
}

double max_eigenvalue(const std::array<double, 6>& t) {
    // Trigonometric solution for symmetric 3x3 matrices.
    const double a = t[0], b = t[3], c = t[5], d = t[1], e = t[4], f = t[2];
    const double p1 = d * d + e * e + f * f;
    if (p1 == 0.0) return std::max({a, b, c});
    const double q = (a + b + c) / 3.0;
    const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const double b11 = (a - q) / p, b22 = (b - q) / p, b33 = (c - q) / p;
    const double b12 = d / p, b23 = e / p, b13 = f / p;
    const double det = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) + b13 * (b12 * b23 - b22 * b13);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    return q + 2.0 * p * std::cos(std::acos(r) / 3.0);
}

namespace {

bool is_frame(const SimConfig& c) { return c.mode == SimMode::Frame; }

VelocityMap velocity_map(const SimState& s, const SimConfig& c) {
    return is_frame(c) ? frame_map(s.macro) : VelocityMap{};
}

double distribution_mass(const Distribution& F) {
    double m = 0.0;
    for (double v : F.values()) m += v;
    return m * F.grid().weight() / F.spatial_cells();
}

// Phase of the initial perturbation: 53 random bits from the portable engine.
double perturbation_phase(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
}

void check_finite(const SimState& s, const char* where) {
    if (!s.F.all_finite()) {
        throw RuntimeAbort(std::string(where) + ": non-finite distribution at t=" + std::to_string(s.macro.t) +
                           " step " + std::to_string(s.step));
    }
    if (!(s.macro.T > 0.0) || !std::isfinite(s.macro.T)) {
        throw RuntimeAbort(std::string(where) + ": temperature " + std::to_string(s.macro.T) +
                           " is not positive at t=" + std::to_string(s.macro.t));
    }
}

// Collision block Q(F,F) + S(F) in the lab, or the full frame right-hand side.
void collision_rhs(const Distribution& F, const VelocityMap& map, double qscale, double sscale, Distribution& out) {
    const VelocityGrid& g = F.grid();
    const auto op = landau_for(g);
    out = Distribution(g, F.spatial_cells());
    for (int c = 0; c < F.spatial_cells(); ++c) {
        auto o = out.cell(c);
        op->apply(op->convolve_fast(F.cell(c)), F.cell(c), o, qscale);
        add_spherical_diffusion(g, F.cell(c), o, map, sscale);
    }
}

// Periodic upwind3 transport along x with one speed per velocity node.
void transport_rhs(const Distribution& F, const std::vector<double>& speed, double dx, Distribution& out) {
    const int nx = F.spatial_cells();
    const std::size_t n = F.nodes();
    out = Distribution(F.grid(), nx);
    auto at = [&](int c, std::size_t p) { return F.cell(((c % nx) + nx) % nx)[p]; };
    for (std::size_t p = 0; p < n; ++p) {
        const double s = speed[p];
        if (s == 0.0) continue;
        for (int c = 0; c < nx; ++c) {
            // faces c - 1/2 and c + 1/2
            auto face = [&](int f) {
                // face between cells f-1 and f
                const double value = s > 0.0 ? (-at(f - 2, p) + 5.0 * at(f - 1, p) + 2.0 * at(f, p)) / 6.0
                                             : (2.0 * at(f - 1, p) + 5.0 * at(f, p) - at(f + 1, p)) / 6.0;
                return s * value;
            };
            out.cell(c)[p] = -(face(c + 1) - face(c)) / dx;
        }
    }
}

void transport(SimState& s, const SimConfig& cfg, double tau) {
    if (cfg.Nx <= 1 || tau == 0.0) return;
    const VelocityGrid& g = s.F.grid();
    std::vector<double> speed(g.size());
    const double root = std::sqrt(s.macro.T);
    double vmax = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
        speed[p] = is_frame(cfg) ? root * g.node(p)[0] : g.node(p)[0];
        vmax = std::max(vmax, std::abs(speed[p]));
    }
    const double bound = vmax > 0.0 ? 0.8 * cfg.dx() / vmax : tau;
    const int sub = std::max(1, static_cast<int>(std::ceil(tau / bound)));
    const double h = tau / sub;
    Distribution k;
    for (int i = 0; i < sub; ++i) {
        // SSP-RK3
        const Distribution u0 = s.F;
        transport_rhs(u0, speed, cfg.dx(), k);
        Distribution u1 = u0;
        u1.axpy(h, k);
        transport_rhs(u1, speed, cfg.dx(), k);
        Distribution u2 = u1;
        u2.axpy(h, k);
        u2 *= 0.25;
        u2.axpy(0.75, u0);
        transport_rhs(u2, speed, cfg.dx(), k);
        u2.axpy(h, k);
        u2 *= 2.0 / 3.0;
        u2.axpy(1.0 / 3.0, u0);
        s.F = std::move(u2);
    }
}

struct FrameRates {
    Distribution dG;
    MacroRates macro;
    Vec3 R{};
};

FrameRates frame_rates(const Distribution& G, const MacroState& m, const Vec3& E) {
    FrameRates r;
    const VelocityMap map = frame_map(m);
    r.R = friction_R(G, map);
    r.macro = macro_rhs(m, r.R, E);
    r.dG = transformed_rhs(G, m, r.R, r.macro.dT);
    return r;
}

void lab_collision_block(SimState& s, double tau, int sub) {
    const double h = tau / sub;
    Distribution k1, k2;
    for (int i = 0; i < sub; ++i) {
        collision_rhs(s.F, {}, 1.0, 1.0, k1);
        Distribution F1 = s.F;
        F1.axpy(h, k1);
        collision_rhs(F1, {}, 1.0, 1.0, k2);
        s.F.axpy(0.5 * h, k1);
        s.F.axpy(0.5 * h, k2);
    }
}

void frame_block(SimState& s, const SimConfig& cfg, double tau, int sub) {
    const double h = tau / sub;
    const Vec3 E = cfg.field.acceleration();
    for (int i = 0; i < sub; ++i) {
        const MacroState m0 = s.macro;
        const FrameRates k1 = frame_rates(s.F, m0, E);
        MacroState m1 = m0;
        m1.V = m0.V + h * k1.macro.dV;
        m1.T = m0.T + h * k1.macro.dT;
        m1.H = m0.H + h * k1.macro.dH;
        if (!(m1.T > 0.0)) throw RuntimeAbort("frame step: temperature became nonpositive");
        Distribution G1 = s.F;
        G1.axpy(h, k1.dG);
        const FrameRates k2 = frame_rates(G1, m1, E);
        s.F.axpy(0.5 * h, k1.dG);
        s.F.axpy(0.5 * h, k2.dG);
        s.macro.V = m0.V + (0.5 * h) * (k1.macro.dV + k2.macro.dV);
        s.macro.T = m0.T + 0.5 * h * (k1.macro.dT + k2.macro.dT);
        s.macro.H = m0.H + (0.5 * h) * (k1.macro.dH + k2.macro.dH);
        s.macro.R = k2.R;
        if (!(s.macro.T > 0.0)) throw RuntimeAbort("frame step: temperature became nonpositive");
    }
    s.macro.R = friction_R(s.F, frame_map(s.macro));
}

// Zeroes negative nodes and multiplies the rest of each cell by 1 + l.phi with
// phi spanning {1, w, |w|^2}, l chosen so the cell keeps its mass, momentum
// and energy. Returns the negative mass removed, on the distribution_mass scale.
double clip_negative(Distribution& F) {
    using Vec5 = Eigen::Matrix<double, 5, 1>;
    const VelocityGrid& g = F.grid();
    // Centred and scaled basis: same span, better conditioned far from w = 0.
    const auto phi = [&](std::size_t i) {
        const Vec3 u = (1.0 / g.L) * (g.node(i) - g.center);
        return Vec5(1.0, u[0], u[1], u[2], norm2(u));
    };
    double removed = 0.0;
    for (int c = 0; c < F.spatial_cells(); ++c) {
        const std::span<double> f = F.cell(c);
        Vec5 lost = Vec5::Zero();
        Eigen::Matrix<double, 5, 5> M = Eigen::Matrix<double, 5, 5>::Zero();
        double neg = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            const Vec5 p = phi(i);
            if (f[i] < 0.0) {
                lost += f[i] * p;
                neg += f[i];
            } else if (f[i] > 0.0) {
                M.selfadjointView<Eigen::Lower>().rankUpdate(p, f[i]);
            }
        }
        if (neg == 0.0) continue;
        M.triangularView<Eigen::StrictlyUpper>() = M.transpose();
        const Vec5 l = M.ldlt().solve(lost);
        for (std::size_t i = 0; i < f.size(); ++i) f[i] = f[i] < 0.0 ? 0.0 : f[i] * (1.0 + l.dot(phi(i)));
        removed -= neg;
    }
    return removed * g.weight() / F.spatial_cells();
}

}  // namespace

StabilityBounds stability_bounds(const SimState& s, const SimConfig& cfg) {
    StabilityBounds b;
    const VelocityGrid& g = s.F.grid();
    const double h = g.dv();
    const auto op = landau_for(g);
    double amax = 0.0;
    for (int c = 0; c < s.F.spatial_cells(); ++c) {
        const KernelFields f = op->convolve_fast(s.F.cell(c));
        for (const auto& t : f.a) amax = std::max(amax, max_eigenvalue(t));
    }
    const VelocityMap map = velocity_map(s, cfg);
    double dmax = spherical_diffusivity_max(g, map);
    if (is_frame(cfg)) {
        amax /= s.macro.T * std::sqrt(s.macro.T);
        dmax /= s.macro.T;
    }
    b.max_diffusivity = amax + dmax;
    const double inf = std::numeric_limits<double>::infinity();
    b.diffusion = b.max_diffusivity > 0.0 ? h * h / (2.0 * b.max_diffusivity) : inf;
    const double e = norm(cfg.field.E);
    b.field = e > 0.0 ? h / e : inf;
    b.transport = inf;
    if (cfg.Nx > 1) {
        const double vmax = is_frame(cfg) ? std::sqrt(s.macro.T) * g.L : std::abs(g.center[0]) + g.L;
        b.transport = cfg.dx() / vmax;
    }
    b.dt = cfg.safety * std::min({b.diffusion, b.field, b.transport});
    return b;
}

double stability_dt(const SimState& state, const SimConfig& config) { return stability_bounds(state, config).dt; }

SimState initial_state(const SimConfig& cfg) {
    cfg.validate();
    SimState s;
    const Vec3 origin{};
    if (is_frame(cfg)) {
        const VelocityGrid g = build_grid(cfg.L, cfg.N, origin);
        s.F = maxwellian(g, origin, 1.0, cfg.Nx, cfg.tol.tail_threshold);
    } else {
        const VelocityGrid g = build_grid(cfg.L, cfg.N, cfg.V0);
        s.F = maxwellian(g, cfg.V0, cfg.T0, cfg.Nx, cfg.tol.tail_threshold);
    }
    if (cfg.perturbation.enabled) {
        const double phase = perturbation_phase(cfg.seed);
        for (int c = 0; c < cfg.Nx; ++c) {
            const double x = (c + 0.5) * cfg.dx();
            const double factor = 1.0 + cfg.perturbation.amplitude * std::cos(cfg.perturbation.kx * x + phase);
            for (double& v : s.F.cell(c)) v *= factor;
        }
    }
    s.macro.t = 0.0;
    s.macro.V = cfg.V0;
    s.macro.T = cfg.T0;
    s.initial_mass = distribution_mass(s.F);
    refresh_macro(s, cfg);
    if (is_frame(cfg)) s.macro.R = friction_R(s.F, frame_map(s.macro));
    return s;
}

void refresh_macro(SimState& s, const SimConfig& cfg) {
    if (is_frame(cfg)) return;
    const MomentSet m = moments(s.F);
    s.macro.V = m.bulk;
    s.macro.T = m.temperature;
    s.macro.R = friction_R(s.F);
}

void step(SimState& s, const SimConfig& cfg, double dt) {
    if (!(dt > 0.0)) throw RuntimeAbort("step: time step must be positive");
    const StabilityBounds b = stability_bounds(s, cfg);
    const double limit = cfg.safety * b.diffusion;
    const int sub = std::max(1, static_cast<int>(std::ceil(dt / limit - 1e-12)));
    const Vec3 V_old = s.macro.V;

    transport(s, cfg, 0.5 * dt);
    if (is_frame(cfg)) {
        frame_block(s, cfg, dt, sub);
    } else {
        const Vec3 a = cfg.field.acceleration();
        s.F.set_center(s.F.grid().center + (0.5 * dt) * a);
        lab_collision_block(s, dt, sub);
        s.F.set_center(s.F.grid().center + (0.5 * dt) * a);
    }
    transport(s, cfg, 0.5 * dt);

    s.macro.t += dt;
    ++s.step;
    if (!s.F.all_finite()) {
        throw RuntimeAbort("step: non-finite distribution at t=" + std::to_string(s.macro.t) + " step " +
                           std::to_string(s.step));
    }
    const double raw = s.F.min_value() / s.F.max_value();
    s.undershoot = std::min(s.undershoot, raw);
    if (cfg.tol.positivity_limiter && raw < 0.0) s.clipped += clip_negative(s.F) / s.initial_mass;
    if (!is_frame(cfg)) {
        refresh_macro(s, cfg);
        s.macro.H += (0.5 * dt) * (V_old + s.macro.V);
    }
    check_finite(s, "step");
    // Warn on the first violation and each time the low doubles, not every step.
    const double ratio = s.F.min_value() / s.F.max_value();
    const auto level = [&](double r) {
        return r < -cfg.tol.positivity ? static_cast<int>(std::log2(-r / cfg.tol.positivity)) : -1;
    };
    if (level(ratio) > level(s.min_ratio)) {
        spdlog::warn("step {}: min F = {:.3e} max F, below -{:.1e}", s.step, ratio, cfg.tol.positivity);
    }
    s.min_ratio = std::min(s.min_ratio, ratio);
}

bool maybe_regrid(SimState& s, const SimConfig& cfg, bool force) {
    if (is_frame(cfg)) return false;
    const VelocityGrid& g = s.F.grid();
    const Vec3 drift = s.macro.V - g.center;
    const double root = std::sqrt(s.macro.T);
    bool near_edge = false;
    for (int a = 0; a < 3; ++a) near_edge = near_edge || std::abs(drift[a]) > (1.0 - cfg.tol.regrid_edge_fraction) * g.L;
    const bool narrow = 6.0 * root > g.L;
    if (!force && !near_edge && !narrow) return false;

    const double L = std::max(g.L, 6.0 * root + norm(drift));
    const VelocityGrid ng = build_grid(L, g.N, s.macro.V);
    Distribution F(ng, s.F.spatial_cells());
    for (int c = 0; c < s.F.spatial_cells(); ++c) resample_affine(g, s.F.cell(c), ng, F.cell(c), {}, 1.0);
    const double before = distribution_mass(s.F), after = distribution_mass(F);
    const double lost = before - after;
    if (std::abs(lost) > cfg.tol.regrid_loss * std::abs(before)) {
        throw RuntimeAbort("regrid: mass change " + std::to_string(lost) + " exceeds tolerance");
    }
    spdlog::info("regrid at t={:.4g}: center ({:.4g}, {:.4g}, {:.4g}), L {:.4g} -> {:.4g}", s.macro.t, ng.center[0],
                 ng.center[1], ng.center[2], g.L, L);
    s.F = std::move(F);
    s.boundary_loss += lost;
    ++s.regrids;
    refresh_macro(s, cfg);
    return true;
}

TimeSeriesRecord make_record(const SimState& s, const SimConfig& cfg) {
    TimeSeriesRecord r;
    r.t = s.macro.t;
    r.V = s.macro.V;
    r.T = s.macro.T;
    r.R = s.macro.R;
    r.mass = distribution_mass(s.F);
    r.loss = s.initial_mass - r.mass;
    r.ratio = norm(s.macro.V) / std::sqrt(s.macro.T);
    r.dist = is_frame(cfg) ? distance_to_unit_maxwellian(s.F) : frame_distance(s.F, s.macro);
    return r;
}

std::vector<TimeSeriesRecord> run(const SimConfig& cfg, const RunObserver& obs) {
    SimState s = initial_state(cfg);
    std::vector<double> snaps = cfg.snapshot_times;
    std::sort(snaps.begin(), snaps.end());
    std::size_t next_snap = 0;
    const double eps = 1e-9 * std::min(cfg.cadence, cfg.t_end);
    const long outputs = static_cast<long>(std::floor(cfg.t_end / cfg.cadence + 1e-9));

    std::vector<TimeSeriesRecord> records;
    auto emit = [&] {
        records.push_back(make_record(s, cfg));
        if (obs.on_record) obs.on_record(records.back());
    };
    auto snapshot_due = [&] {
        while (next_snap < snaps.size() && snaps[next_snap] <= s.macro.t + eps) {
            if (obs.on_snapshot) obs.on_snapshot(s);
            ++next_snap;
        }
    };
    emit();
    snapshot_due();
    long k = 1;
    while (s.macro.t < cfg.t_end - eps) {
        double target = cfg.t_end;
        if (k <= outputs) target = std::min(target, k * cfg.cadence);
        if (next_snap < snaps.size()) target = std::min(target, snaps[next_snap]);
        double dt = cfg.dt_auto ? stability_dt(s, cfg) : cfg.dt;
        const double remaining = target - s.macro.t;
        if (dt >= remaining - eps) dt = remaining;
        else if (remaining - dt < 0.1 * dt) dt = 0.5 * remaining;  // avoid a sliver step
        try {
            step(s, cfg, dt);
            if (std::abs(s.macro.t - target) <= eps) s.macro.t = target;
            maybe_regrid(s, cfg);
        } catch (const RuntimeAbort&) {
            if (obs.on_abort) obs.on_abort(s);
            throw;
        }
        if (obs.on_step) obs.on_step(s);
        if (k <= outputs && s.macro.t >= k * cfg.cadence - eps) {
            emit();
            ++k;
        }
        snapshot_due();
    }
    return records;
}

namespace {

constexpr char kMagic[12] = {'R', 'U', 'N', 'A', 'W', 'A', 'Y', 'S', 'N', 'A', 'P', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

template <class T>
T byteswap(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    std::reverse(buf, buf + sizeof(T));
    std::memcpy(&value, buf, sizeof(T));
    return value;
}

template <class T>
void put(std::string& out, T value) {
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

void put_double(std::string& out, double v) { put(out, std::bit_cast<std::uint64_t>(v)); }

template <class T>
T get(std::istream& in) {
    T value{};
    char buf[sizeof(T)];
    if (!in.read(buf, sizeof(T))) throw std::runtime_error("snapshot: truncated file");
    std::memcpy(&value, buf, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) value = byteswap(value);
    return value;
}

double get_double(std::istream& in) { return std::bit_cast<double>(get<std::uint64_t>(in)); }

}  // namespace

void write_snapshot(const std::string& path, const SimState& s) {
    const VelocityGrid& g = s.F.grid();
    std::string out(kMagic, sizeof(kMagic));
    put(out, kSnapshotVersion);
    put(out, static_cast<std::int32_t>(g.N));
    put(out, static_cast<std::int32_t>(s.F.spatial_cells()));
    put_double(out, g.L);
    for (int a = 0; a < 3; ++a) put_double(out, g.center[a]);
    put_double(out, s.macro.t);
    for (int a = 0; a < 3; ++a) put_double(out, s.macro.V[a]);
    put_double(out, s.macro.T);
    for (double v : s.F.values()) put_double(out, v);
    atomic_write_file(path, out);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open " + path);
    char magic[sizeof(kMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("snapshot: bad magic in " + path);
    }
    const auto version = get<std::uint32_t>(in);
    if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
    Snapshot snap;
    snap.grid.N = get<std::int32_t>(in);
    snap.Nx = get<std::int32_t>(in);
    snap.grid.L = get_double(in);
    for (int a = 0; a < 3; ++a) snap.grid.center[a] = get_double(in);
    snap.t = get_double(in);
    for (int a = 0; a < 3; ++a) snap.V[a] = get_double(in);
    snap.T = get_double(in);
    const std::size_t count = static_cast<std::size_t>(snap.grid.N) * snap.grid.N * snap.grid.N * snap.Nx;
    snap.values.resize(count);
    for (double& v : snap.values) v = get_double(in);
    return snap;
}

}  // namespace runaway
