#pragma once

#include <cmath>
#include <random>

#include <doctest.h>

#include "runaway/grid.hpp"
#include "runaway/integrator.hpp"
#include "runaway/moments.hpp"

namespace testing {

using runaway::Distribution;
using runaway::Vec3;
using runaway::VelocityGrid;
using runaway::operator*;
using runaway::operator+;
using runaway::operator+=;
using runaway::operator-;

// Smooth random field: a few random Gaussian bumps inside |v| <= radius.
inline Distribution random_bumps(const VelocityGrid& g, std::mt19937_64& rng, double radius = 4.0, int bumps = 3,
                                 bool positive = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Distribution f(g);
    for (int b = 0; b < bumps; ++b) {
        Vec3 c{u(rng), u(rng), u(rng)};
        c = (0.5 * radius) * c;
        const double width = 0.6 + 0.4 * std::abs(u(rng));
        const double amp = positive ? 1.0 + u(rng) * 0.5 : u(rng);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const Vec3 v = g.node(i);
            f[i] += amp * std::exp(-runaway::norm2(v - c) / (2.0 * width * width));
        }
    }
    return f;
}

// Random values at nodes with |v| <= radius, zero elsewhere.
inline Distribution random_compact(const VelocityGrid& g, std::mt19937_64& rng, double radius = 4.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Distribution f(g);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (runaway::norm(g.node(i)) <= radius) f[i] = u(rng);
    return f;
}

inline double max_abs_diff(const Distribution& a, const Distribution& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Records at t = 0, dt, ..., t_end with every other field zero.
inline std::vector<runaway::TimeSeriesRecord> times(double t_end, double dt) {
    std::vector<runaway::TimeSeriesRecord> s;
    const int n = static_cast<int>(std::lround(t_end / dt));
    for (int i = 0; i <= n; ++i) {
        runaway::TimeSeriesRecord r;
        r.t = i * dt;
        s.push_back(r);
    }
    return s;
}

// Macro dynamics V' = E - 2R, T' = (4/3) R.V with the fast-electron friction
// R = V / (1 + |V|^2)^{3/2}: |R| falls like |E t|^{-2} and T grows like ln t,
// and the energy identity holds exactly. Integrated with RK4 at a fine step.
inline std::vector<runaway::TimeSeriesRecord> model_series(const Vec3& E, double t_end, double cadence) {
    struct Y {
        Vec3 V;
        double T;
    };
    const auto friction = [](const Vec3& V) { return (1.0 / std::pow(1.0 + runaway::norm2(V), 1.5)) * V; };
    const auto rhs = [&](const Y& y) {
        const Vec3 R = friction(y.V);
        return Y{E - 2.0 * R, 4.0 / 3.0 * runaway::dot(R, y.V)};
    };
    const auto axpy = [](const Y& y, double h, const Y& k) { return Y{y.V + h * k.V, y.T + h * k.T}; };
    auto s = times(t_end, cadence);
    Y y{{}, 1.0};
    const int sub = 200;
    const double h = cadence / sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i > 0)
            for (int k = 0; k < sub; ++k) {
                const Y k1 = rhs(y), k2 = rhs(axpy(y, 0.5 * h, k1)), k3 = rhs(axpy(y, 0.5 * h, k2)),
                        k4 = rhs(axpy(y, h, k3));
                y.V += (h / 6.0) * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V);
                y.T += h / 6.0 * (k1.T + 2.0 * k2.T + 2.0 * k3.T + k4.T);
            }
        runaway::TimeSeriesRecord& r = s[i];
        r.V = y.V;
        r.T = y.T;
        r.R = friction(y.V);
        r.mass = 1.0;
        r.ratio = runaway::norm(y.V) / std::sqrt(y.T);
        r.dist = 0.05 / (1.0 + r.t);
    }
    return s;
}

}  // namespace testing
