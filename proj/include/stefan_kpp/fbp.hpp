#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "stefan_kpp/errors.hpp"
#include "stefan_kpp/wave_catalog.hpp"

namespace skpp {

enum class InitShape { CosineBump, QuarticBump, Table };

inline std::string to_string(InitShape s) {
    switch (s) {
        case InitShape::CosineBump: return "cosine";
        case InitShape::QuarticBump: return "quartic";
        case InitShape::Table: return "table";
    }
    return "?";
}

/// Initial datum u0 = sigma * phi with phi supported on [-h0, h0].
struct InitialData {
    double h0 = 1.0;
    InitShape shape = InitShape::CosineBump;
    double sigma = 1.0;
    std::vector<std::pair<double, double>> table; // (x, u), used for Table

    double phi(double x) const {
        if (x <= -h0 || x >= h0) return 0.0;
        switch (shape) {
            case InitShape::CosineBump:
                return std::cos(M_PI * x / (2.0 * h0));
            case InitShape::QuarticBump: {
                const double r = 1.0 - (x / h0) * (x / h0);
                return r > 0.0 ? r * r : 0.0;
            }
            case InitShape::Table: {
                if (table.empty()) return 0.0;
                if (x <= table.front().first) return 0.0;
                if (x >= table.back().first) return 0.0;
                for (std::size_t i = 1; i < table.size(); ++i) {
                    if (x <= table[i].first) {
                        const auto& [x0, u0] = table[i - 1];
                        const auto& [x1, u1] = table[i];
                        const double t = (x - x0) / (x1 - x0);
                        return u0 * (1.0 - t) + u1 * t;
                    }
                }
                return 0.0;
            }
        }
        return 0.0;
    }

    double eval(double x) const { return sigma * phi(x); }

    void check() const {
        if (!(h0 > 0.0)) throw InvalidInitialData("h0 must be positive");
        if (sigma < 0.0) throw InvalidInitialData("sigma must be >= 0");
        if (shape == InitShape::Table) {
            if (table.size() < 2)
                throw InvalidInitialData("table needs at least 2 points");
            double sup = 0.0;
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (i && !(table[i].first > table[i - 1].first))
                    throw InvalidInitialData("table x must be increasing");
                if (table[i].second < 0.0)
                    throw InvalidInitialData("table u must be >= 0");
                sup = std::max(sup, table[i].second);
            }
            if (sigma > 0.0 && sup == 0.0)
                throw InvalidInitialData("phi must not be identically 0");
        }
    }
};

struct SolverConfig {
    ProblemParams params;
    InitialData init;
    int n_grid = 1000;        // interior nodes in xi
    double dt_max = 1e-3;
    double cfl = 0.5;
    double t_max = 10.0;
    double record_every = 0.5;
    double level_m = 0.2;     // level for the back position chi_m
    double snapshot_every = 10.0;

    void check() const {
        if (n_grid < 100) throw ConfigError("n_grid must be >= 100");
        if (!(t_max > 0.0)) throw ConfigError("t_max must be positive");
        if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must be in (0,1]");
        if (!(dt_max > 0.0)) throw ConfigError("dt_max must be positive");
        if (!(level_m > 0.0 && level_m < 1.0))
            throw ConfigError("level_m must be in (0,1)");
        if (!(params.mu > 0.0) || params.beta < 0.0)
            throw ConfigError("mu must be positive and beta >= 0");
        init.check();
    }
};

/// Solver state on the front-fixed grid xi_i = i/(n_grid+1), x = g + xi(h-g).
struct FbpState {
    double t = 0.0;
    double g = 0.0, h = 0.0;
    std::vector<double> w;
    double g_dot = 0.0, h_dot = 0.0;
    long steps = 0;
    long clipped = 0;    // advection undershoots set back to 0
    double a_bound = 2.0; // A = 2 max(1, sup u0)

    double dxi(int n_grid) const { return 1.0 / double(n_grid + 1); }
    double width() const { return h - g; }
    double sup() const { return *std::max_element(w.begin(), w.end()); }

    double x_at(std::size_t i, int n_grid) const {
        return g + width() * double(i) * dxi(n_grid);
    }
};

struct FbpSample {
    double t, g, h, g_dot, h_dot, sup_u, chi_m; // chi_m = NaN when sup < m
};

struct FbpSnapshot {
    double t, g, h;
    std::vector<double> w;

    double value(double x) const {
        if (x <= g || x >= h || w.size() < 2) return 0.0;
        const double s = (x - g) / (h - g) * double(w.size() - 1);
        const std::size_t i =
            std::min(w.size() - 2, static_cast<std::size_t>(s));
        const double t_ = s - double(i);
        return w[i] * (1.0 - t_) + w[i + 1] * t_;
    }
};

enum class FbpTerminal { ReachedTmax, SupBelowFloor, WidthAboveCap };

inline std::string to_string(FbpTerminal t) {
    switch (t) {
        case FbpTerminal::ReachedTmax: return "ReachedTmax";
        case FbpTerminal::SupBelowFloor: return "SupBelowFloor";
        case FbpTerminal::WidthAboveCap: return "WidthAboveCap";
    }
    return "?";
}

struct FbpTrajectory {
    std::vector<FbpSample> samples;
    std::vector<FbpSnapshot> snapshots;
    FbpTerminal terminal = FbpTerminal::ReachedTmax;
    long clipped = 0;
};

namespace detail {

// Stefan velocities from second-order one-sided differences of w; the
// analytic signs h' > 0, g' < 0 are enforced against round-off.
inline void stefan_velocities(FbpState& st, const SolverConfig& cfg) {
    const std::size_t M = st.w.size() - 1;
    const double L = st.width();
    const double dxi = st.dxi(cfg.n_grid);
    const double mu = cfg.params.mu;
    st.h_dot = -mu * (-4.0 * st.w[M - 1] + st.w[M - 2]) / (2.0 * L * dxi);
    st.g_dot = -mu * (4.0 * st.w[1] - st.w[2]) / (2.0 * L * dxi);
    if (st.h_dot < 0.0) st.h_dot = 0.0;
    if (st.g_dot > 0.0) st.g_dot = 0.0;
}

// chi_m: leftmost x with u = m, linear interpolation on the grid.
inline double level_position(const FbpState& st, const SolverConfig& cfg,
                             double m) {
    const double L = st.width();
    const double dx = L * st.dxi(cfg.n_grid);
    for (std::size_t i = 1; i < st.w.size(); ++i) {
        if (st.w[i] >= m) {
            const double x0 = st.g + dx * double(i - 1);
            const double frac = (m - st.w[i - 1]) / (st.w[i] - st.w[i - 1]);
            return x0 + frac * dx;
        }
    }
    return kNaN;
}

} // namespace detail

/// Initial state: g = -h0, h = h0, w sampled from sigma*phi.
inline FbpState init_state(const SolverConfig& cfg) {
    cfg.check();
    FbpState st;
    st.t = 0.0;
    st.g = -cfg.init.h0;
    st.h = cfg.init.h0;
    st.w.assign(static_cast<std::size_t>(cfg.n_grid) + 2, 0.0);
    const std::size_t M = st.w.size() - 1;
    double sup = 0.0;
    for (std::size_t i = 1; i < M; ++i) {
        st.w[i] = std::max(0.0, cfg.init.eval(st.x_at(i, cfg.n_grid)));
        sup = std::max(sup, st.w[i]);
    }
    if (cfg.init.sigma > 0.0 && sup == 0.0)
        throw InvalidInitialData("initial datum is identically 0 on the grid");
    st.a_bound = 2.0 * std::max(1.0, sup);
    detail::stefan_velocities(st, cfg);
    return st;
}

/// One time step: implicit diffusion (tridiagonal), explicit advection and
/// reaction, Stefan velocities lagged from the incoming state.
inline void step(FbpState& st, const SolverConfig& cfg) {
    const std::size_t M = st.w.size() - 1;
    const double dxi = st.dxi(cfg.n_grid);
    const double L = st.width();
    const double beta = cfg.params.beta;
    const Nonlinearity& f = cfg.params.f;

    detail::stefan_velocities(st, cfg);

    // effective advection in xi: [g' + xi(h'-g') - beta] / L
    double amax = 0.0;
    for (std::size_t i = 1; i < M; ++i) {
        const double adv =
            st.g_dot + double(i) * dxi * (st.h_dot - st.g_dot) - beta;
        amax = std::max(amax, std::abs(adv));
    }
    double dt = cfg.dt_max;
    if (amax > 0.0) dt = std::min(dt, cfg.cfl * dxi * L / amax);
    dt = std::min(dt, 0.1 / f.fprime0());
    if (st.steps < 50) dt = std::min(dt, cfg.dt_max / 100.0); // startup damping

    // explicit advection + reaction
    std::vector<double> rhs(M + 1, 0.0);
    for (std::size_t i = 1; i < M; ++i) {
        const double adv =
            (st.g_dot + double(i) * dxi * (st.h_dot - st.g_dot) - beta) / L;
        const double wx = (st.w[i + 1] - st.w[i - 1]) / (2.0 * dxi);
        rhs[i] = st.w[i] + dt * (adv * wx + f.eval(st.w[i]));
    }

    // implicit diffusion: (I - s D2) w = rhs, s = dt/(L dxi)^2
    const double s = dt / (L * L * dxi * dxi);
    std::vector<double> cp(M + 1, 0.0), dp(M + 1, 0.0);
    const double diag = 1.0 + 2.0 * s;
    cp[1] = -s / diag;
    dp[1] = rhs[1] / diag;
    for (std::size_t i = 2; i < M; ++i) {
        const double m = diag + s * cp[i - 1];
        cp[i] = -s / m;
        dp[i] = (rhs[i] + s * dp[i - 1]) / m;
    }
    st.w[M - 1] = dp[M - 1];
    for (std::size_t i = M - 2; i >= 1; --i) st.w[i] = dp[i] - cp[i] * st.w[i + 1];

    for (std::size_t i = 1; i < M; ++i) {
        if (st.w[i] < 0.0) {
            st.w[i] = 0.0;
            ++st.clipped;
        }
    }
    st.w[0] = 0.0;
    st.w[M] = 0.0;

    st.g += dt * st.g_dot;
    st.h += dt * st.h_dot;
    st.t += dt;
    ++st.steps;

    const double sup = st.sup();
    if (sup > 10.0 * st.a_bound)
        throw NumericalBlowup("fbp step: sup u = " + std::to_string(sup) +
                                  " exceeded 10A at t = " + std::to_string(st.t),
                              st.t);
}

/// March to t_max (or until the solution dies out / the domain outgrows the
/// cap), recording boundary data every record_every and full snapshots
/// every snapshot_every.
inline FbpTrajectory run(const SolverConfig& cfg) {
    FbpState st = init_state(cfg);
    FbpTrajectory traj;

    auto sample = [&]() {
        traj.samples.push_back({st.t, st.g, st.h, st.g_dot, st.h_dot, st.sup(),
                                detail::level_position(st, cfg, cfg.level_m)});
    };
    auto snapshot = [&]() {
        traj.snapshots.push_back({st.t, st.g, st.h, st.w});
    };

    sample();
    snapshot();
    double next_sample = cfg.record_every;
    double next_snap = cfg.snapshot_every;

    while (true) {
        step(st, cfg);
        const double sup = st.sup();
        if (sup < 1e-10) {
            traj.terminal = FbpTerminal::SupBelowFloor;
            break;
        }
        if (st.width() > 1e4) {
            traj.terminal = FbpTerminal::WidthAboveCap;
            break;
        }
        if (st.t >= cfg.t_max) {
            traj.terminal = FbpTerminal::ReachedTmax;
            break;
        }
        if (st.t >= next_sample) {
            sample();
            next_sample += cfg.record_every;
        }
        if (st.t >= next_snap) {
            snapshot();
            next_snap += cfg.snapshot_every;
        }
    }
    if (st.t > traj.samples.back().t) sample();
    if (st.t > traj.snapshots.back().t) snapshot();
    traj.clipped = st.clipped;
    return traj;
}

enum class Frame { Front, Back };

/// Profile slice resampled to a uniform dz grid.
struct SampledProfile {
    double z_start = 0.0;
    double dz = 0.01;
    std::vector<double> values;

    double value(double z) const {
        const double s = (z - z_start) / dz;
        if (s <= 0.0) return values.front();
        if (s >= double(values.size() - 1)) return values.back();
        const std::size_t i = static_cast<std::size_t>(s);
        const double t = s - double(i);
        return values[i] * (1.0 - t) + values[i + 1] * t;
    }
};

/// Front frame: u(t, z + h(t)) for z in [-window, 0].
/// Back frame: u(t, z + chi_m(t)) for z in [-window, window].
inline SampledProfile extract_profile(const FbpSnapshot& snap, Frame frame,
                                      double window, double level_m = 0.2) {
    SampledProfile out;
    out.dz = 0.01;
    double center = 0.0;
    double zlo = 0.0, zhi = 0.0;
    if (frame == Frame::Front) {
        center = snap.h;
        zlo = -window;
        zhi = 0.0;
        if (snap.h - window < snap.g)
            throw WindowExceedsDomain("front window leaves [g, h]");
    } else {
        // leftmost level-m crossing within the snapshot
        center = kNaN;
        for (std::size_t i = 1; i < snap.w.size(); ++i) {
            if (snap.w[i] >= level_m) {
                const double dx = (snap.h - snap.g) / double(snap.w.size() - 1);
                const double x0 = snap.g + dx * double(i - 1);
                center = x0 + dx * (level_m - snap.w[i - 1]) /
                                  (snap.w[i] - snap.w[i - 1]);
                break;
            }
        }
        if (!std::isfinite(center))
            throw WindowExceedsDomain("snapshot never reaches level_m");
        zlo = -window;
        zhi = window;
        if (center - window < snap.g || center + window > snap.h)
            throw WindowExceedsDomain("back window leaves [g, h]");
    }
    const std::size_t n = static_cast<std::size_t>(std::round((zhi - zlo) / out.dz));
    out.z_start = zlo;
    out.values.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        out.values[i] = snap.value(center + zlo + double(i) * out.dz);
    return out;
}

} // namespace skpp
