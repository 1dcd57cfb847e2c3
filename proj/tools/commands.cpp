#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "runaway/diagnostics.hpp"
#include "runaway/errors.hpp"
#include "runaway/io.hpp"

namespace runaway::cli {
namespace fs = std::filesystem;

std::string snapshot_name(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%03zu.bin", index);
    return buf;
}

namespace {

VerifyOptions verify_options(const SimConfig& c) {
    VerifyOptions o;
    o.E = c.field.acceleration();
    o.V0 = c.V0;
    o.t_burn = c.burn_in();
    return o;
}

// Runs and writes series.csv and snapshots; exceptions propagate.
std::vector<TimeSeriesRecord> run_and_write(const SimConfig& config) {
    config.validate();
    const fs::path dir(config.output_dir);
    fs::create_directories(dir);

    std::size_t next_snapshot = 0;
    RunObserver observer;
    observer.on_snapshot = [&](const SimState& s) {
        write_snapshot((dir / snapshot_name(next_snapshot++)).string(), s);
    };
    observer.on_abort = [&](const SimState& s) {
        const std::string path = (dir / kAbortName).string();
        try {
            write_snapshot(path, s);
            spdlog::error("state at abort written to {}", path);
        } catch (const std::exception& e) {
            spdlog::error("cannot dump state at abort: {}", e.what());
        }
    };
    auto series = run(config, observer);
    atomic_write_file((dir / kSeriesName).string(), series_csv(series));
    return series;
}

std::string format_field(double v) { return format_double(v); }

}  // namespace

int cmd_run(const SimConfig& config, std::ostream& err) {
    try {
        const auto series = run_and_write(config);
        spdlog::info("run finished: {} records in {}", series.size(), config.output_dir);
        return kExitOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "run aborted: " << e.what() << '\n';
        return kExitRuntimeAbort;
    }
}

int cmd_verify(const std::string& series_path, const SimConfig& config, std::ostream& out, std::ostream& err) {
    std::vector<TimeSeriesRecord> series;
    try {
        series = read_series_csv(series_path);
        if (series.empty()) throw std::runtime_error(series_path + ": series has no records");
    } catch (const std::exception& e) {
        err << "cannot read series: " << e.what() << '\n';
        return kExitConfigError;
    }

    Verdict verdict;
    try {
        verdict = verify_series(series, verify_options(config));
    } catch (const FitError& e) {
        err << "verification impossible: " << e.what() << '\n';
        return kExitConfigError;
    }

    const std::string text = verdict.to_text();
    try {
        fs::create_directories(config.output_dir);
        atomic_write_file((fs::path(config.output_dir) / kVerdictName).string(), text);
    } catch (const std::exception& e) {
        err << "cannot write verdict: " << e.what() << '\n';
        return kExitRuntimeAbort;
    }
    out << text;
    return verdict.pass() ? kExitOk : kExitVerifyFailed;
}

SweepResult run_sweep(const SimConfig& config, const std::vector<double>& fields, int jobs) {
    if (fields.empty()) throw ConfigError("sweep needs at least one field strength");
    for (double E : fields)
        if (!(E > 0.0)) throw ConfigError("sweep field strengths must be positive, got " + format_field(E));
    config.validate();

    const double E0 = norm(config.field.E);
    const Vec3 direction = E0 > 0.0 ? (1.0 / E0) * config.field.E : Vec3{1.0, 0.0, 0.0};
    // Templates with a zero field keep their time scales.
    const double reference = E0 > 0.0 ? E0 : 1.0;

    SweepResult result;
    result.members.resize(fields.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        while (true) {
            const std::size_t i = next++;
            if (i >= fields.size()) break;
            SweepMember& m = result.members[i];
            m.E = fields[i];
            SimConfig c = config;
            const double stretch = reference / m.E;
            c.field.E = m.E * direction;
            c.t_end *= stretch;
            c.cadence *= stretch;
            for (double& t : c.snapshot_times) t *= stretch;
            if (c.t_burn >= 0.0) c.t_burn *= stretch;
            c.output_dir = (fs::path(config.output_dir) / ("E_" + format_field(m.E))).string();
            try {
                const auto series = run_and_write(c);
                const FitResult fit = fit_log_growth(series, c.field.acceleration(), c.burn_in());
                m.alpha = fit.param("alpha");
                m.r2 = fit.r2;
                m.ok = true;
            } catch (const std::exception& e) {
                m.error = e.what();
                spdlog::error("sweep member E={} failed: {}", m.E, m.error);
            }
        }
    };
    const int threads = std::clamp(jobs, 1, static_cast<int>(fields.size()));
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    pool.clear();

    std::vector<double> products;
    for (const auto& m : result.members)
        if (m.ok) products.push_back(m.alpha * m.E);
    if (!products.empty()) {
        const auto [lo, hi] = std::minmax_element(products.begin(), products.end());
        double mean = 0.0;
        for (double p : products) mean += p;
        mean /= static_cast<double>(products.size());
        result.spread = mean > 0.0 ? (*hi - *lo) / mean : INFINITY;
        result.consistent = products.size() == fields.size() && *lo > 0.0 && result.spread <= kSweepSpreadLimit;
    }
    return result;
}

int cmd_sweep(const SimConfig& config, const std::vector<double>& fields, int jobs, std::ostream& out,
              std::ostream& err) {
    SweepResult result;
    try {
        result = run_sweep(config, fields, jobs);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    }

    std::ostringstream csv;
    csv << "E,alpha,alpha_E,r2,status\n";
    for (const auto& m : result.members) {
        if (m.ok)
            csv << format_field(m.E) << ',' << format_field(m.alpha) << ',' << format_field(m.alpha * m.E) << ','
                << format_field(m.r2) << ",ok\n";
        else
            csv << format_field(m.E) << ",nan,nan,nan,failed\n";
    }
    try {
        atomic_write_file((fs::path(config.output_dir) / kSweepName).string(), csv.str());
    } catch (const std::exception& e) {
        err << "cannot write sweep summary: " << e.what() << '\n';
        return kExitRuntimeAbort;
    }

    out << csv.str() << "alpha_E_spread=" << format_field(result.spread) << " limit=" << kSweepSpreadLimit
        << (result.consistent ? " pass" : " fail") << '\n';
    for (const auto& m : result.members)
        if (!m.ok) err << "member E=" << format_field(m.E) << " failed: " << m.error << '\n';

    const bool all_ok = std::all_of(result.members.begin(), result.members.end(), [](auto& m) { return m.ok; });
    if (!all_ok) return kExitRuntimeAbort;
    return result.consistent ? kExitOk : kExitVerifyFailed;
}

}  // namespace runaway::cli
