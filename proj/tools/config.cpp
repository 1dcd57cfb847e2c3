#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "runaway/errors.hpp"
#include "runaway/io.hpp"

namespace runaway::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <class T>
bool parse_number(std::string_view s, T& out) {
    const char* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && p == end;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        parts.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

// A setter returns false when the value does not parse.
using Setter = std::function<bool(SimConfig&, std::string_view)>;

Setter real(double SimConfig::*field) {
    return [field](SimConfig& c, std::string_view v) { return parse_number(v, c.*field); };
}

Setter real_at(std::function<double&(SimConfig&)> ref) {
    return [ref](SimConfig& c, std::string_view v) { return parse_number(v, ref(c)); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"grid.L", real(&SimConfig::L)},
        {"grid.N", [](SimConfig& c, std::string_view v) { return parse_number(v, c.N); }},
        {"grid.Nx", [](SimConfig& c, std::string_view v) { return parse_number(v, c.Nx); }},
        {"grid.period", real(&SimConfig::period)},
        {"field.Ex", real_at([](SimConfig& c) -> double& { return c.field.E[0]; })},
        {"field.Ey", real_at([](SimConfig& c) -> double& { return c.field.E[1]; })},
        {"field.Ez", real_at([](SimConfig& c) -> double& { return c.field.E[2]; })},
        {"field.sign",
         [](SimConfig& c, std::string_view v) {
             if (v == "plus") c.field.sign = FieldSpec::Sign::LhsPlus;
             else if (v == "minus") c.field.sign = FieldSpec::Sign::LhsMinus;
             else return false;
             return true;
         }},
        {"init.Vx", real_at([](SimConfig& c) -> double& { return c.V0[0]; })},
        {"init.Vy", real_at([](SimConfig& c) -> double& { return c.V0[1]; })},
        {"init.Vz", real_at([](SimConfig& c) -> double& { return c.V0[2]; })},
        {"init.T", real(&SimConfig::T0)},
        {"init.seed", [](SimConfig& c, std::string_view v) { return parse_number(v, c.seed); }},
        {"init.perturbation",
         [](SimConfig& c, std::string_view v) {
             if (v == "none") {
                 c.perturbation = {};
                 return true;
             }
             constexpr std::string_view prefix = "mode:";
             if (!v.starts_with(prefix)) return false;
             const auto parts = split(v.substr(prefix.size()), ',');
             Perturbation p;
             p.enabled = true;
             if (parts.size() != 2 || !parse_number(parts[0], p.amplitude) || !parse_number(parts[1], p.kx))
                 return false;
             c.perturbation = p;
             return true;
         }},
        {"mode",
         [](SimConfig& c, std::string_view v) {
             if (v == "lab") c.mode = SimMode::Lab;
             else if (v == "frame") c.mode = SimMode::Frame;
             else return false;
             return true;
         }},
        {"time.t_end", real(&SimConfig::t_end)},
        {"time.dt",
         [](SimConfig& c, std::string_view v) {
             if (v == "auto") {
                 c.dt_auto = true;
                 c.dt = 0.0;
                 return true;
             }
             c.dt_auto = false;
             return parse_number(v, c.dt);
         }},
        {"time.safety", real(&SimConfig::safety)},
        {"output.cadence", real(&SimConfig::cadence)},
        {"output.dir",
         [](SimConfig& c, std::string_view v) {
             c.output_dir = std::string(v);
             return !v.empty();
         }},
        {"output.snapshots",
         [](SimConfig& c, std::string_view v) {
             c.snapshot_times.clear();
             if (v.empty()) return true;
             for (auto part : split(v, ',')) {
                 double t = 0.0;
                 if (!parse_number(part, t)) return false;
                 c.snapshot_times.push_back(t);
             }
             return true;
         }},
        {"fit.t_burn",
         [](SimConfig& c, std::string_view v) {
             if (v == "auto") {
                 c.t_burn = -1.0;
                 return true;
             }
             return parse_number(v, c.t_burn) && c.t_burn >= 0.0;
         }},
        {"tolerances.tail_threshold", real_at([](SimConfig& c) -> double& { return c.tol.tail_threshold; })},
        {"tolerances.regrid_loss", real_at([](SimConfig& c) -> double& { return c.tol.regrid_loss; })},
        {"tolerances.regrid_edge_fraction",
         real_at([](SimConfig& c) -> double& { return c.tol.regrid_edge_fraction; })},
        {"tolerances.positivity", real_at([](SimConfig& c) -> double& { return c.tol.positivity; })},
        {"tolerances.positivity_limiter",
         [](SimConfig& c, std::string_view v) {
             if (v == "on") c.tol.positivity_limiter = true;
             else if (v == "off") c.tol.positivity_limiter = false;
             else return false;
             return true;
         }},
    };
    return table;
}

}  // namespace

SimConfig parse_config_text(std::string_view text) {
    SimConfig config;
    std::set<std::string, std::less<>> seen;
    int lineno = 0;
    for (std::size_t pos = 0; pos <= text.size();) {
        ++lineno;
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto at = " at line " + std::to_string(lineno);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected key=value" + at);
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));

        const auto it = setters().find(key);
        if (it == setters().end()) throw ConfigError("unknown key " + std::string(key) + at);
        if (!seen.insert(std::string(key)).second) throw ConfigError("duplicate key " + std::string(key) + at);
        if (!it->second(config, value))
            throw ConfigError("unparsable value '" + std::string(value) + "' for " + std::string(key) + at);
    }

    for (const char* key : {"grid.L", "grid.N", "init.T", "time.t_end"})
        if (!seen.contains(key)) throw ConfigError(std::string("missing required key ") + key);
    if (!seen.contains("field.Ex") && !seen.contains("field.Ey") && !seen.contains("field.Ez"))
        throw ConfigError("missing required key field.Ex (or field.Ey, field.Ez)");
    return config;
}

std::string render_config(const SimConfig& c) {
    const auto f = [](double v) { return format_double(v); };
    std::ostringstream os;
    os << "grid.L=" << f(c.L) << '\n'
       << "grid.N=" << c.N << '\n'
       << "grid.Nx=" << c.Nx << '\n'
       << "grid.period=" << f(c.period) << '\n'
       << "field.Ex=" << f(c.field.E[0]) << '\n'
       << "field.Ey=" << f(c.field.E[1]) << '\n'
       << "field.Ez=" << f(c.field.E[2]) << '\n'
       << "field.sign=" << (c.field.sign == FieldSpec::Sign::LhsPlus ? "plus" : "minus") << '\n'
       << "init.Vx=" << f(c.V0[0]) << '\n'
       << "init.Vy=" << f(c.V0[1]) << '\n'
       << "init.Vz=" << f(c.V0[2]) << '\n'
       << "init.T=" << f(c.T0) << '\n'
       << "init.seed=" << c.seed << '\n';
    if (c.perturbation.enabled)
        os << "init.perturbation=mode:" << f(c.perturbation.amplitude) << ',' << f(c.perturbation.kx) << '\n';
    else
        os << "init.perturbation=none\n";
    os << "mode=" << (c.mode == SimMode::Lab ? "lab" : "frame") << '\n'
       << "time.t_end=" << f(c.t_end) << '\n'
       << "time.dt=" << (c.dt_auto ? std::string("auto") : f(c.dt)) << '\n'
       << "time.safety=" << f(c.safety) << '\n'
       << "output.cadence=" << f(c.cadence) << '\n'
       << "output.dir=" << c.output_dir << '\n'
       << "output.snapshots=";
    for (std::size_t i = 0; i < c.snapshot_times.size(); ++i) os << (i ? "," : "") << f(c.snapshot_times[i]);
    os << '\n'
       << "fit.t_burn=" << (c.t_burn < 0.0 ? std::string("auto") : f(c.t_burn)) << '\n'
       << "tolerances.tail_threshold=" << f(c.tol.tail_threshold) << '\n'
       << "tolerances.regrid_loss=" << f(c.tol.regrid_loss) << '\n'
       << "tolerances.regrid_edge_fraction=" << f(c.tol.regrid_edge_fraction) << '\n'
       << "tolerances.positivity=" << f(c.tol.positivity) << '\n'
       << "tolerances.positivity_limiter=" << (c.tol.positivity_limiter ? "on" : "off") << '\n';
    return os.str();
}

SimConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    SimConfig config = parse_config_text(buffer.str());
    if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) config.output_dir = dir;
    config.validate();

    std::filesystem::create_directories(config.output_dir);
    atomic_write_file((std::filesystem::path(config.output_dir) / kResolvedConfigName).string(),
                      render_config(config));
    return config;
}

}  // namespace runaway::cli
