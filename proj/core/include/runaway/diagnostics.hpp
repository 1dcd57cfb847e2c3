#pragma once

#include <string>
#include <utility>
#include <vector>

#include "runaway/frame.hpp"
#include "runaway/grid.hpp"

namespace runaway {

struct TimeSeriesRecord;

struct FitResult {
    std::vector<std::pair<std::string, double>> parameters;
    double r2 = 0.0;  // clamped to [0, 1]
    double t_begin = 0.0;
    double t_end = 0.0;
    std::size_t count = 0;
    std::string note;  // e.g. "no growth"

    /// Throws std::out_of_range for an unknown name.
    double param(const std::string& name) const;
};

/// Least squares T = a + alpha ln(1 + |E| t) over records with t >= t_burn.
/// Throws FitError with fewer than min_records points or a degenerate abscissa.
FitResult fit_log_growth(const std::vector<TimeSeriesRecord>& series, const Vec3& E, double t_burn,
                         std::size_t min_records = 20);

/// sup |V(t) - V0 - E t| over t >= t_burn ("deviation") and its ratio to
/// |E| t_last ("ratio").
FitResult fit_linear_momentum(const std::vector<TimeSeriesRecord>& series, const Vec3& E, const Vec3& V0,
                              double t_burn);

/// Log-log least squares |R| = C (1 + |E| t / 4)^{-p} over t >= t_burn.
FitResult fit_friction_decay(const std::vector<TimeSeriesRecord>& series, const Vec3& E, double t_burn,
                             std::size_t min_records = 3);

/// ||T^{3/2} F(V + sqrt(T) v) - mu||_{L^2}, evaluated on the lab grid through
/// the change of variables: T^{3/4} ||F - M_{V,T}||_{L^2}. Spatially averaged.
double frame_distance(const Distribution& F, const MacroState& state);

/// ||G - mu||_{L^2} for a distribution already in frame variables.
double distance_to_unit_maxwellian(const Distribution& G);

/// max over interior records of |d/dt(|V|^2 + 3T) - 2 E.V| / |2 E.V|, with
/// centered differences on the (possibly nonuniform) record times.
double energy_ledger_defect(const std::vector<TimeSeriesRecord>& series, const Vec3& E, double t_from = 0.0);

struct Check {
    std::string name;
    double value = 0.0;
    std::string threshold;  // human readable, e.g. "<0.05" or "[1.7,2.3]"
    bool pass = false;
};

struct Verdict {
    std::vector<Check> checks;
    std::vector<std::pair<std::string, double>> fits;  // fit.* entries
    bool pass() const;
    /// key=value lines: <check>.value, <check>.threshold, <check>.pass, fit.*, overall.pass.
    std::string to_text() const;
};

struct VerifyOptions {
    Vec3 E{};   // acceleration used by the run
    Vec3 V0{};
    double t_burn = 1.0;
};

/// Runs every fitter and invariant check on a LAB series.
Verdict verify_series(const std::vector<TimeSeriesRecord>& series, const VerifyOptions& options);

}  // namespace runaway
