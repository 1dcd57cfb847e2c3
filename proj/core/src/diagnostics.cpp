#include "runaway/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "runaway/errors.hpp"
#include "runaway/integrator.hpp"
#include "runaway/io.hpp"
#include "runaway/moments.hpp"

namespace runaway {

double FitResult::param(const std::string& name) const {
    for (const auto& [k, v] : parameters)
        if (k == name) return v;
    throw std::out_of_range("FitResult: no parameter " + name);
}

namespace {

struct Line {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

Line least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw FitError("least squares: degenerate abscissa");
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (l.intercept + l.slope * x[i]);
        ssr += r * r;
    }
    // a constant series is reproduced exactly by the zero-slope line
    l.r2 = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
    return l;
}

std::vector<const TimeSeriesRecord*> window(const std::vector<TimeSeriesRecord>& s, double t_burn) {
    std::vector<const TimeSeriesRecord*> w;
    for (const auto& r : s)
        if (r.t >= t_burn) w.push_back(&r);
    return w;
}

void set_window(FitResult& f, const std::vector<const TimeSeriesRecord*>& w) {
    f.count = w.size();
    if (!w.empty()) {
        f.t_begin = w.front()->t;
        f.t_end = w.back()->t;
    }
}

}  // namespace

FitResult fit_log_growth(const std::vector<TimeSeriesRecord>& series, const Vec3& E, double t_burn,
                         std::size_t min_records) {
    const auto w = window(series, t_burn);
    if (w.size() < min_records) {
        throw FitError("fit_log_growth: " + std::to_string(w.size()) + " records in window, need " +
                       std::to_string(min_records));
    }
    const double e = norm(E);
    std::vector<double> x, y;
    for (const auto* r : w) {
        x.push_back(std::log1p(e * r->t));
        y.push_back(r->T);
    }
    const Line l = least_squares(x, y);
    FitResult f;
    f.parameters = {{"a", l.intercept}, {"alpha", l.slope}};
    f.r2 = l.r2;
    set_window(f, w);
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    if (l.slope <= 1e-12 * std::max(scale, 1e-300)) f.note = "no growth";
    return f;
}

FitResult fit_linear_momentum(const std::vector<TimeSeriesRecord>& series, const Vec3& E, const Vec3& V0,
                              double t_burn) {
    const auto w = window(series, t_burn);
    if (w.empty()) throw FitError("fit_linear_momentum: empty window");
    double dev = 0.0, ss_res = 0.0, ss_tot = 0.0;
    Vec3 mean{};
    for (const auto* r : w) mean += r->V;
    mean = (1.0 / w.size()) * mean;
    for (const auto* r : w) {
        const Vec3 d = r->V - V0 - r->t * E;
        dev = std::max(dev, norm(d));
        ss_res += norm2(d);
        ss_tot += norm2(r->V - mean);
    }
    FitResult f;
    const double scale = norm(E) * w.back()->t;
    f.parameters = {{"deviation", dev}, {"ratio", scale > 0.0 ? dev / scale : std::numeric_limits<double>::infinity()}};
    f.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : (ss_res == 0.0 ? 1.0 : 0.0);
    set_window(f, w);
    return f;
}

FitResult fit_friction_decay(const std::vector<TimeSeriesRecord>& series, const Vec3& E, double t_burn,
                             std::size_t min_records) {
    const auto w = window(series, t_burn);
    const double e = norm(E);
    std::vector<double> x, y;
    for (const auto* r : w) {
        const double m = norm(r->R);
        if (!(m > 0.0)) throw FitError("fit_friction_decay: |R| must be positive in the window");
        x.push_back(std::log1p(0.25 * e * r->t));
        y.push_back(std::log(m));
    }
    if (x.size() < min_records) throw FitError("fit_friction_decay: too few records in window");
    const Line l = least_squares(x, y);
    FitResult f;
    f.parameters = {{"C", std::exp(l.intercept)}, {"p", -l.slope}};
    f.r2 = l.r2;
    set_window(f, w);
    return f;
}

double frame_distance(const Distribution& F, const MacroState& s) {
    if (!(s.T > 0.0)) throw DegenerateStateError("frame_distance: temperature must be positive");
    const VelocityGrid& g = F.grid();
    double acc = 0.0;
    for (int c = 0; c < F.spatial_cells(); ++c) {
        const auto f = F.cell(c);
        for (std::size_t p = 0; p < g.size(); ++p) {
            const double d = f[p] - maxwellian_value(g.node(p), s.V, s.T);
            acc += d * d;
        }
    }
    const double l2 = std::sqrt(acc * g.weight() / F.spatial_cells());
    return std::pow(s.T, 0.75) * l2;
}

double distance_to_unit_maxwellian(const Distribution& G) {
    MacroState unit;
    unit.T = 1.0;
    return frame_distance(G, unit);
}

double energy_ledger_defect(const std::vector<TimeSeriesRecord>& s, const Vec3& E, double t_from) {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < s.size(); ++i) {
        if (s[i].t <= t_from || s[i].t <= 0.0) continue;
        auto energy = [&](std::size_t k) { return norm2(s[k].V) + 3.0 * s[k].T; };
        const double h0 = s[i].t - s[i - 1].t, h1 = s[i + 1].t - s[i].t;
        // second-order derivative on a nonuniform stencil
        const double d = (-h1 / (h0 * (h0 + h1))) * energy(i - 1) + ((h1 - h0) / (h0 * h1)) * energy(i) +
                         (h0 / (h1 * (h0 + h1))) * energy(i + 1);
        const double source = 2.0 * dot(E, s[i].V);
        if (source == 0.0) continue;
        worst = std::max(worst, std::abs(d - source) / std::abs(source));
    }
    return worst;
}

bool Verdict::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string Verdict::to_text() const {
    std::string out;
    for (const auto& c : checks) {
        out += c.name + ".value=" + format_double(c.value) + "\n";
        out += c.name + ".threshold=" + c.threshold + "\n";
        out += c.name + ".pass=" + (c.pass ? "true" : "false") + "\n";
    }
    for (const auto& [k, v] : fits) out += "fit." + k + "=" + format_double(v) + "\n";
    out += std::string("overall.pass=") + (pass() ? "true" : "false") + "\n";
    return out;
}

Verdict verify_series(const std::vector<TimeSeriesRecord>& s, const VerifyOptions& o) {
    if (s.size() < 3) throw FitError("verify: series has fewer than three records");
    Verdict v;
    auto add = [&](std::string name, double value, std::string threshold, bool pass) {
        v.checks.push_back({std::move(name), value, std::move(threshold), pass});
    };
    auto guarded = [&](const std::string& name, const std::string& threshold, auto&& fn) {
        try {
            fn();
        } catch (const FitError&) {
            add(name, std::numeric_limits<double>::quiet_NaN(), threshold, false);
        }
    };

    guarded("momentum_deviation_ratio", "<0.05", [&] {
        const FitResult f = fit_linear_momentum(s, o.E, o.V0, o.t_burn);
        v.fits.push_back({"momentum.deviation", f.param("deviation")});
        add("momentum_deviation_ratio", f.param("ratio"), "<0.05", f.param("ratio") < 0.05);
    });
    guarded("log_growth_r2", ">=0.95", [&] {
        const FitResult f = fit_log_growth(s, o.E, o.t_burn);
        v.fits.push_back({"log_growth.a", f.param("a")});
        v.fits.push_back({"log_growth.alpha", f.param("alpha")});
        v.fits.push_back({"log_growth.t_begin", f.t_begin});
        v.fits.push_back({"log_growth.t_end", f.t_end});
        add("log_growth_r2", f.r2, ">=0.95", f.r2 >= 0.95);
        add("log_growth_alpha", f.param("alpha"), ">0", f.param("alpha") > 0.0);
    });
    guarded("friction_exponent", "[1.7,2.3]", [&] {
        const FitResult f = fit_friction_decay(s, o.E, o.t_burn);
        v.fits.push_back({"friction.C", f.param("C")});
        v.fits.push_back({"friction.p", f.param("p")});
        const double p = f.param("p");
        add("friction_exponent", p, "[1.7,2.3]", p >= 1.7 && p <= 2.3);
    });

    // monotonicity over the post-transient window
    double min_ratio_step = std::numeric_limits<double>::infinity();
    double min_T_step = std::numeric_limits<double>::infinity();
    const TimeSeriesRecord* prev = nullptr;
    const TimeSeriesRecord* first = nullptr;
    for (const auto& r : s) {
        if (r.t < o.t_burn) continue;
        if (!first) first = &r;
        if (prev) {
            min_ratio_step = std::min(min_ratio_step, r.ratio - prev->ratio);
            min_T_step = std::min(min_T_step, r.T - prev->T);
        }
        prev = &r;
    }
    const bool have_window = std::isfinite(min_ratio_step);
    add("runaway_ratio_increasing", have_window ? min_ratio_step : std::numeric_limits<double>::quiet_NaN(),
        "min step >0", have_window && min_ratio_step > 0.0);
    add("temperature_monotone", have_window ? min_T_step : std::numeric_limits<double>::quiet_NaN(), "min step >=0",
        have_window && min_T_step >= 0.0);

    const double ledger = energy_ledger_defect(s, o.E);
    add("energy_ledger", ledger, "<0.01", ledger < 1e-2);

    if (first && prev && first->dist > 0.0) {
        const double r = prev->dist / first->dist;
        add("frame_distance_decay", r, "<0.5", r < 0.5);
    } else {
        add("frame_distance_decay", std::numeric_limits<double>::quiet_NaN(), "<0.5", false);
    }
    return v;
}

}  // namespace runaway
