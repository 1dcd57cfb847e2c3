#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "runaway/frame.hpp"
#include "runaway/friction.hpp"
#include "runaway/grid.hpp"

namespace runaway {

enum class SimMode { Lab, Frame };

/// Initial spatial modulation 1 + amplitude cos(kx x + phase); the phase is
/// drawn from the run seed.
struct Perturbation {
    bool enabled = false;
    double amplitude = 0.0;
    double kx = 1.0;

    bool operator==(const Perturbation&) const = default;
};

struct Tolerances {
    double tail_threshold = 1e-8;      // Maxwellian truncation warning level
    double regrid_loss = 1e-6;         // relative mass loss that aborts a regrid
    double regrid_edge_fraction = 0.25;
    double positivity = 1e-9;          // warn when min F < -positivity * max F
    bool positivity_limiter = true;    // clip negative nodes after each step, keeping each cell's mass

    bool operator==(const Tolerances&) const = default;
};

struct SimConfig {
    double L = 8.0;
    int N = 32;
    int Nx = 1;
    double period = 6.283185307179586;  // spatial period
    FieldSpec field{};
    Vec3 V0{};
    double T0 = 1.0;
    Perturbation perturbation{};
    std::uint64_t seed = 1;
    SimMode mode = SimMode::Lab;
    bool dt_auto = true;
    double dt = 0.0;
    double safety = 0.5;
    double t_end = 1.0;
    double cadence = 0.05;
    std::string output_dir = "out";
    std::vector<double> snapshot_times;
    double t_burn = -1.0;  // negative: max(1, 5/|E|)
    Tolerances tol{};

    double dx() const { return period / Nx; }
    double burn_in() const;
    /// Throws ConfigError on invalid values.
    void validate() const;

    bool operator==(const SimConfig&) const = default;
};

/// LAB mode: F lives on a grid that translates with the field; macro holds the
/// measured V, T and R. FRAME mode: F holds G on the fixed frame grid and
/// macro holds the integrated (V, T, H).
struct SimState {
    Distribution F;
    MacroState macro;
    long step = 0;
    double initial_mass = 0.0;
    double boundary_loss = 0.0;
    int regrids = 0;
    double min_ratio = 0.0;   // lowest min F / max F seen after any step
    double undershoot = 0.0;  // the same before the positivity limiter
    double clipped = 0.0;     // mass moved by the limiter, relative to the initial mass
};

struct StabilityBounds {
    double diffusion = 0.0;  // dv^2 / (2 max diffusivity)
    double field = 0.0;      // dv / |E|
    double transport = 0.0;  // dx / max |v_x|, infinite for Nx = 1
    double max_diffusivity = 0.0;
    double dt = 0.0;         // safety * min of the above
};

StabilityBounds stability_bounds(const SimState& state, const SimConfig& config);
double stability_dt(const SimState& state, const SimConfig& config);

/// Largest eigenvalue of a symmetric 3x3 tensor (xx, xy, xz, yy, yz, zz).
double max_eigenvalue(const std::array<double, 6>& t);

SimState initial_state(const SimConfig& config);

/// Refreshes the LAB macro fields (V, T, R) from F; FRAME states are left alone.
void refresh_macro(SimState& state, const SimConfig& config);

/// One Strang step. Throws RuntimeAbort on non-finite values or T <= 0.
void step(SimState& state, const SimConfig& config, double dt);

/// LAB regridding: recentre on V and widen to max(L, 6 sqrt(T) + drift) when
/// the bulk comes within the edge fraction of the box or the box gets too
/// narrow. Returns true when a regrid happened.
bool maybe_regrid(SimState& state, const SimConfig& config, bool force = false);

struct TimeSeriesRecord {
    double t = 0.0;
    Vec3 V{};
    double T = 0.0;
    Vec3 R{};
    double mass = 0.0;
    double loss = 0.0;
    double ratio = 0.0;  // |V| / sqrt(T)
    double dist = 0.0;   // ||G - mu||_{L^2}
};

TimeSeriesRecord make_record(const SimState& state, const SimConfig& config);

struct RunObserver {
    std::function<void(const TimeSeriesRecord&)> on_record;
    std::function<void(const SimState&)> on_snapshot;
    std::function<void(const SimState&)> on_step;   // after every completed step
    std::function<void(const SimState&)> on_abort;  // state as left by the failed step
};

/// Advances to t_end, landing exactly on output and snapshot times.
std::vector<TimeSeriesRecord> run(const SimConfig& config, const RunObserver& observer = {});

/// Snapshot file: "RUNAWAYSNAP" magic, format version, grid parameters, t, V, T,
/// then the node values as little-endian float64, spatial cell major.
void write_snapshot(const std::string& path, const SimState& state);
struct Snapshot {
    VelocityGrid grid;
    int Nx = 1;
    double t = 0.0;
    Vec3 V{};
    double T = 0.0;
    std::vector<double> values;
};
Snapshot read_snapshot(const std::string& path);

}  // namespace runaway
