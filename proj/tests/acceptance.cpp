// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "runaway/diagnostics.hpp"
#include "runaway/frame.hpp"
#include "runaway/friction.hpp"
#include "runaway/io.hpp"
#include "runaway/landau.hpp"
#include "runaway/moments.hpp"
#include "runaway/projection.hpp"

using namespace runaway;
namespace fs = std::filesystem;

namespace {

class Report {
public:
    void add(const std::string& name, bool pass, const std::string& detail) {
        std::printf("[%s] %s: %s\n", pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
        std::fflush(stdout);
        failures_ += pass ? 0 : 1;
    }
    void note(const std::string& name, const std::string& detail) {
        std::printf("[NOTE] %s: %s\n", name.c_str(), detail.c_str());
        std::fflush(stdout);
    }
    // A criterion that throws is a failure, not a crash.
    template <class F>
    void guard(const std::string& name, F&& body) {
        try {
            body();
        } catch (const std::exception& e) {
            add(name, false, std::string("exception: ") + e.what());
        }
    }
    int failures() const { return failures_; }

private:
    int failures_ = 0;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double rel_inf(const Distribution& q, const Distribution& ref) { return q.max_abs() / ref.max_abs(); }

// Smooth random field: a few Gaussian bumps inside |v| <= radius.
Distribution random_bumps(const VelocityGrid& g, std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Distribution f(g);
    for (int b = 0; b < 3; ++b) {
        const Vec3 c = (0.5 * radius) * Vec3{u(rng), u(rng), u(rng)};
        const double width = 0.6 + 0.4 * std::abs(u(rng));
        const double amp = u(rng);
        for (std::size_t i = 0; i < g.size(); ++i) f[i] += amp * std::exp(-norm2(g.node(i) - c) / (2.0 * width * width));
    }
    return f;
}

Distribution random_compact(const VelocityGrid& g, std::mt19937_64& rng, double radius) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Distribution f(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (norm(g.node(i)) <= radius) f[i] = u(rng);
    return f;
}

void equilibrium(Report& r) {
    double e[2];
    int idx = 0;
    for (int N : {16, 32}) {
        const Distribution mu = maxwellian(build_grid(8.0, N), {}, 1.0);
        e[idx++] = rel_inf(collision_Q(mu, mu), mu);
    }
    r.add("equilibrium_fixed_point", e[1] < 1e-3 && e[0] / e[1] >= 3.5,
          fmt::format("|Q(mu,mu)|/|mu| N=16 {:.3e}, N=32 {:.3e} (<1e-3), ratio {:.2f} (>=3.5)", e[0], e[1], e[0] / e[1]));
}

void conservation(Report& r) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Vec3 c1{u(rng), u(rng), u(rng)}, c2{u(rng), u(rng), u(rng)};
    const auto field = [&](const Vec3& v) {
        return std::exp(-0.5 * norm2(v - c1)) + 0.5 * std::exp(-norm2(v - c2) / 0.8) * (1.0 + 0.3 * v[0]);
    };
    double mass = 0.0, mom[2], en[2];
    int idx = 0;
    for (int N : {16, 32}) {
        const Distribution F = sample(build_grid(8.0, N), field);
        const MomentSet mf = raw_moments(F), q = raw_moments(collision_Q(F, F)),
                        s = raw_moments(spherical_diffusion(F));
        mass = std::max({mass, std::abs(q.mass) / mf.mass, std::abs(s.mass) / mf.mass});
        mom[idx] = norm(q.momentum) / mf.mass;
        en[idx] = std::abs(q.energy) / mf.energy;
        ++idx;
    }
    const double rm = mom[0] / mom[1], re = en[0] / en[1];
    r.add("mass_conservation", mass <= 1e-12, fmt::format("max relative mass change of Q and S {:.2e} (<=1e-12)", mass));
    r.add("momentum_energy_second_order", rm >= 3.5 && re >= 3.5,
          fmt::format("Q defect ratio N=16/N=32: momentum {:.2f}, energy {:.2f} (>=3.5)", rm, re));
}

void isotropic(Report& r) {
    const Distribution mu = maxwellian(build_grid(8.0, 32), {}, 1.0);
    const double e = rel_inf(spherical_diffusion(mu), mu);
    r.add("isotropic_annihilation", e < 1e-10, fmt::format("|S(mu)|/|mu| {:.2e} (<1e-10)", e));
}

void eigenvalues(Report& r) {
    const int N = 48;
    const VelocityGrid g = build_grid(8.0, N);
    const KernelFields k = convolve_kernels(maxwellian(g, {}, 1.0));
    double worst = 0.0;
    for (int axis = 0; axis < 3; ++axis) {
        double lo1 = INFINITY, hi1 = 0.0, lo2 = INFINITY, hi2 = 0.0;
        // The node line just off the axis: the other two indices sit at N/2.
        for (int n = 0; n < N; ++n) {
            int ijk[3] = {N / 2, N / 2, N / 2};
            ijk[axis] = n;
            const std::size_t i = g.index(ijk[0], ijk[1], ijk[2]);
            const Vec3 v = g.node(i);
            const double rv = norm(v);
            if (rv < 2.0 || rv > 6.0) continue;
            const Vec3 e = (1.0 / rv) * v;
            double l1 = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) l1 += e[a] * sym_at(k.a[i], a, b) * e[b];
            const double l2 = 0.5 * (k.a[i][0] + k.a[i][3] + k.a[i][5] - l1);
            const double br = bracket(rv);
            lo1 = std::min(lo1, l1 * br * br * br);
            hi1 = std::max(hi1, l1 * br * br * br);
            lo2 = std::min(lo2, l2 * br);
            hi2 = std::max(hi2, l2 * br);
        }
        worst = std::max({worst, hi1 / lo1, hi2 / lo2});
    }
    r.add("eigenvalue_asymptotics", worst < 2.0,
          fmt::format("largest max/min of l1<v>^3 and l2<v> over 2<=|v|<=6 on three axes, N=48: {:.3f} (<2)", worst));
}

const Check* find_check(const Verdict& v, const std::string& name) {
    for (const Check& c : v.checks)
        if (c.name == name) return &c;
    return nullptr;
}

void verdict_checks(Report& r, const std::vector<TimeSeriesRecord>& series, const SimConfig& c) {
    VerifyOptions o;
    o.E = c.field.acceleration();
    o.V0 = c.V0;
    o.t_burn = c.burn_in();
    const Verdict v = verify_series(series, o);
    const auto line = [&](const std::string& label, std::initializer_list<const char*> names) {
        bool pass = true;
        std::string detail;
        for (const char* n : names) {
            const Check* ch = find_check(v, n);
            if (!ch) {
                pass = false;
                detail += std::string(detail.empty() ? "" : "; ") + n + " missing";
                continue;
            }
            pass = pass && ch->pass;
            detail += fmt::format("{}{} {:.4g} ({})", detail.empty() ? "" : "; ", n, ch->value, ch->threshold.c_str());
        }
        r.add(label, pass, detail);
    };
    line("energy_ledger", {"energy_ledger"});
    line("growth_a_linear_momentum", {"momentum_deviation_ratio"});
    line("growth_b_log_temperature", {"log_growth_r2", "log_growth_alpha"});
    line("growth_c_friction_exponent", {"friction_exponent"});
    line("growth_d_runaway_ratio", {"runaway_ratio_increasing"});
    line("growth_e_temperature_monotone", {"temperature_monotone"});
    line("profile_convergence", {"frame_distance_decay"});
}

// Sum of isotropic Gaussians with analytic value and gradient.
struct Bumps {
    struct Bump {
        Vec3 c;
        double T;
        double weight;
    };
    std::vector<Bump> parts;

    double value(const Vec3& w) const {
        double s = 0.0;
        for (const auto& b : parts) s += b.weight * maxwellian_value(w, b.c, b.T);
        return s;
    }
    Vec3 gradient(const Vec3& w) const {
        Vec3 g{};
        for (const auto& b : parts) g += (-b.weight * maxwellian_value(w, b.c, b.T) / b.T) * (w - b.c);
        return g;
    }
};

Bumps random_state(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Bumps f;
    const Vec3 V{1.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
    f.parts.push_back({V, 1.0 + 0.2 * u(rng), 0.8});
    for (int i = 0; i < 2; ++i)
        f.parts.push_back({V + Vec3{0.8 * u(rng), 0.8 * u(rng), 0.8 * u(rng)}, 0.7 + 0.1 * u(rng), 0.1});
    return f;
}

// Lab right-hand side mapped through the chain rule against transformed_rhs.
// S is unbounded at the lab origin for generic F, so a ball of radius 1
// around it is left out of the node-wise comparison.
double dual_path_error(const Bumps& f, const Vec3& E) {
    constexpr int N = 64;
    const VelocityGrid lab = build_grid(6.0, N, f.parts[0].c);
    const Distribution F = sample(lab, [&](const Vec3& w) { return f.value(w); });
    const MomentSet m = moments(F);
    MacroState s;
    s.V = m.bulk;
    s.T = m.temperature;
    const Vec3 R = friction_R(F);
    const double Tp = 4.0 / 3.0 * dot(s.V, R);

    Distribution lab_rhs = collision_Q(F, F);
    lab_rhs += spherical_diffusion(F);
    const VelocityGrid frame = build_grid(6.0, N);
    Distribution a = to_frame(lab_rhs, s, frame);
    const double root = std::sqrt(s.T), T32 = s.T * root;
    for (std::size_t i = 0; i < frame.size(); ++i) {
        const Vec3 v = frame.node(i);
        const Vec3 w = s.V + root * v;
        const Vec3 gradG = (T32 * root) * f.gradient(w);
        const Vec3 drift = (1.0 / root) * (E - 2.0 * R) + (0.5 * Tp / s.T) * v;
        a[i] += 1.5 * Tp / s.T * T32 * f.value(w) + dot(gradG, drift) - T32 * dot(E, f.gradient(w));
    }
    const Distribution G = to_frame(F, s, frame);
    const Distribution b = transformed_rhs(G, s, R, Tp);

    double worst = 0.0, scale = 0.0;
    const double gmax = G.max_abs();
    for (std::size_t i = 0; i < frame.size(); ++i) {
        if (G[i] <= 1e-3 * gmax || norm(s.V + root * frame.node(i)) < 1.0) continue;
        worst = std::max(worst, std::abs(a[i] - b[i]));
        scale = std::max(scale, std::abs(a[i]));
    }
    return worst / scale;
}

void frame_consistency(Report& r, const SimConfig& reference) {
    std::mt19937_64 rng(59);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) worst = std::max(worst, dual_path_error(random_state(rng), {20.0, 0.0, 0.0}));
    r.add("dual_path", worst <= 1e-2, fmt::format("worst node-wise relative mismatch over 5 states {:.2e} (<=1e-2)", worst));

    // |E| t = 2 from the reference start.
    std::vector<TimeSeriesRecord> series[2];
    for (SimMode mode : {SimMode::Lab, SimMode::Frame}) {
        SimConfig c = reference;
        c.mode = mode;
        c.t_end = 2.0 / norm(c.field.E);
        c.cadence = c.t_end / 10.0;
        c.snapshot_times.clear();
        series[mode == SimMode::Frame] = run(c);
    }
    double diff = 0.0;
    for (std::size_t i = 1; i < series[0].size() && i < series[1].size(); ++i) {
        const TimeSeriesRecord &l = series[0][i], &f = series[1][i];
        diff = std::max({diff, norm(l.V - f.V) / norm(l.V), std::abs(l.T - f.T) / l.T});
    }
    const bool aligned = series[0].size() == series[1].size();
    r.add("lab_frame_agreement", aligned && diff < 1e-2,
          fmt::format("worst relative (V, T) difference up to |E|t = 2: {:.2e} (<1e-2)", diff));
}

void projection(Report& r) {
    const VelocityGrid g = build_grid(8.0, 24);
    std::mt19937_64 rng(7);
    double idem = 0.0, orth = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Distribution f = random_bumps(g, rng, 6.0);
        const Projection p = project_P(f);
        const Projection pp = project_P(p.pf);
        const MacroCoefficients &a = p.coefficients[0], &b = pp.coefficients[0];
        const double scale = std::max({std::abs(a.a), norm(a.b), std::abs(a.c), 1e-30});
        idem = std::max({idem, std::abs(a.a - b.a) / scale, norm(a.b - b.b) / scale, std::abs(a.c - b.c) / scale});
        orth = std::max(orth, std::abs(inner(p.pf, f - p.pf)) / inner(f, f));
    }
    r.add("projection_algebra", idem < 1e-8 && orth < 1e-8,
          fmt::format("over 100 fields: idempotence {:.2e}, orthogonality {:.2e} (<1e-8)", idem, orth));

    const VelocityGrid gs = build_grid(8.0, 24);
    const auto op = landau_for(gs);
    std::mt19937_64 rng2(23);
    double worst = -INFINITY;
    for (int trial = 0; trial < 100; ++trial) {
        const Distribution f = random_compact(gs, rng2, 4.0);
        worst = std::max(worst, inner(op->linearized_cL(f), f) / inner(f, f));
    }
    r.add("linearized_dissipation", worst <= 1e-6, fmt::format("max <Lf,f>/<f,f> over 100 compact f {:.3e} (<=1e-6)", worst));
}

}  // namespace

int main() {
    spdlog::set_level(spdlog::level::err);
    Report r;
    const auto t0 = std::chrono::steady_clock::now();

    SimConfig reference = cli::parse_config_text(slurp(fs::path(RUNAWAY_SOURCE_DIR) / "configs" / "reference.conf"));
    const fs::path work = fs::path(RUNAWAY_ACCEPTANCE_DIR);
    fs::remove_all(work);
    reference.output_dir = (work / "reference").string();
    reference.validate();

    r.guard("equilibrium_fixed_point", [&] { equilibrium(r); });
    r.guard("conservation", [&] { conservation(r); });
    r.guard("isotropic_annihilation", [&] { isotropic(r); });
    r.guard("eigenvalue_asymptotics", [&] { eigenvalues(r); });
    r.guard("projection_algebra", [&] { projection(r); });
    r.guard("frame_consistency", [&] { frame_consistency(r, reference); });

    std::string reference_csv;
    r.guard("reference_run", [&] {
        SimState last;
        RunObserver obs;
        obs.on_step = [&](const SimState& s) {
            last.min_ratio = std::min(last.min_ratio, s.min_ratio);
            last.undershoot = std::min(last.undershoot, s.undershoot);
            last.clipped = s.clipped;
        };
        const auto series = run(reference, obs);
        reference_csv = series_csv(series);
        verdict_checks(r, series, reference);
        r.add("positivity", last.min_ratio >= -reference.tol.positivity,
              fmt::format("min F / max F {:.3e} (>=-1e-9); before the limiter {:.3e}, clipped mass {:.2e}",
                          last.min_ratio, last.undershoot, last.clipped));
    });

    r.guard("field_scaling", [&] {
        SimConfig sweep = reference;
        sweep.output_dir = (work / "sweep").string();
        const cli::SweepResult s = cli::run_sweep(sweep, {10.0, 20.0, 40.0}, 1);
        std::string detail;
        bool all_ok = true;
        for (const auto& m : s.members) {
            all_ok = all_ok && m.ok;
            detail += m.ok ? fmt::format("E={} alpha|E|={:.4f}; ", m.E, m.alpha * m.E) : fmt::format("E={} failed; ", m.E);
        }
        r.add("field_scaling", all_ok && s.consistent && s.spread <= cli::kSweepSpreadLimit,
              detail + fmt::format("spread {:.3f} (<=0.30)", s.spread));

        // The sweep member at |E| = 20 repeats the reference configuration.
        const std::string again = slurp(work / "sweep" / "E_20" / cli::kSeriesName);
        r.add("determinism", !reference_csv.empty() && again == reference_csv,
              fmt::format("reference series.csv ({} bytes) {} the repeated run", reference_csv.size(),
                  again == reference_csv ? "byte-identical to" : "differs from"));
    });

    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d failed, %.0f s\n", r.failures(), secs);
    return r.failures() == 0 ? 0 : 1;
}
