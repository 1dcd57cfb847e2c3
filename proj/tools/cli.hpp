#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "runaway/integrator.hpp"

namespace runaway::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitVerifyFailed = 1,
    kExitConfigError = 2,
    kExitRuntimeAbort = 3,
};

inline constexpr const char* kOutputDirEnv = "RUNAWAY_OUTPUT_DIR";
inline constexpr const char* kResolvedConfigName = "config.resolved";
inline constexpr const char* kSeriesName = "series.csv";
inline constexpr const char* kVerdictName = "verdict.txt";
inline constexpr const char* kAbortName = "abort_state.bin";
inline constexpr const char* kSweepName = "sweep.csv";

/// Parses key=value text. Throws ConfigError naming the offending line for
/// unknown, duplicate or unparsable keys and for missing required keys.
/// Required: grid.L, grid.N, init.T, time.t_end and at least one field.E*.
SimConfig parse_config_text(std::string_view text);

/// Reads and parses a config file, applies the RUNAWAY_OUTPUT_DIR override,
/// validates, and echoes the resolved config into the output directory.
SimConfig parse_config(const std::string& path);

/// Every key with its resolved value; parse_config_text(render_config(c)) == c.
std::string render_config(const SimConfig& config);

/// Snapshot file name for the i-th requested snapshot time.
std::string snapshot_name(std::size_t index);

int cmd_run(const SimConfig& config, std::ostream& err);
int cmd_verify(const std::string& series_path, const SimConfig& config, std::ostream& out, std::ostream& err);

struct SweepMember {
    double E = 0.0;
    bool ok = false;
    double alpha = 0.0;
    double r2 = 0.0;
    std::string error;
};

struct SweepResult {
    std::vector<SweepMember> members;
    double spread = 0.0;  // (max - min) / mean of alpha |E| over successful members
    bool consistent = false;
};

inline constexpr double kSweepSpreadLimit = 0.30;

/// One run per field strength, along the template's field direction (x when
/// the template field is zero), with t_end, cadence, snapshot times and the
/// burn-in rescaled so that |E| t is the same as in the template. Member i
/// writes into <output.dir>/E_<value>.
SweepResult run_sweep(const SimConfig& config, const std::vector<double>& fields, int jobs);
int cmd_sweep(const SimConfig& config, const std::vector<double>& fields, int jobs, std::ostream& out,
              std::ostream& err);

int main(int argc, char** argv);

}  // namespace runaway::cli
