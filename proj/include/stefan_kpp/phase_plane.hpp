#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stefan_kpp/errors.hpp"
#include "stefan_kpp/nonlinearity.hpp"
#include "stefan_kpp/ode.hpp"

namespace skpp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Parameters of q'' + gamma q' + f(q) = 0, integrated as q'=p,
/// p' = -gamma p - f(q).
struct PhaseParams {
    double gamma = 0.0;
    Nonlinearity f = make_logistic();
    double q_tol = 1e-8;    // tail truncation level
    double ode_tol = 1e-10; // adaptive-step tolerance
    double dz = 0.01;       // output grid spacing (refined if needed)
};

enum class WaveKind {
    DecreasingSemiWave, // U: (-inf,0], 1 -> 0
    IncreasingSemiWave, // U_l: [0,inf), 0 -> 1
    CompactBump,        // W: [-L,0]
    Tadpole,            // V: (-inf,0], head + tail
    FullFront,          // Q: R, 0 -> 1, Q(0)=1/2
};

inline std::string to_string(WaveKind k) {
    switch (k) {
        case WaveKind::DecreasingSemiWave: return "U";
        case WaveKind::IncreasingSemiWave: return "U_l";
        case WaveKind::CompactBump: return "W";
        case WaveKind::Tadpole: return "V";
        case WaveKind::FullFront: return "Q";
    }
    return "?";
}

/// A sampled wave profile on a uniform z-grid. Infinite tails are truncated
/// at q_tol; value() extends them with the recorded exponential rate so
/// consumers can compare profiles on windows that outrun the grid.
struct WaveProfile {
    WaveKind kind = WaveKind::DecreasingSemiWave;
    double gamma = 0.0;
    double b = kNaN;  // Stefan slope parameter -mu q'(0), when imposed
    double mu = kNaN;

    double dz = 0.01;
    double z_start = 0.0; // z of q_values[0]
    std::vector<double> q_values;

    double support_min = -kInf, support_max = 0.0;
    double slope_at_zero = 0.0;
    double height = 0.0;
    double width = kNaN;       // finite only for W
    double residual_sup = 0.0; // FD residual of the sampled profile

    // tail extension data, valid on sides where the support is infinite
    double left_limit = 0.0, left_rate = 0.0;   // q -> left_limit, rate > 0
    double right_limit = 0.0, right_rate = 0.0; // q -> right_limit, rate < 0

    double z_left() const { return z_start; }
    double z_right() const { return z_start + dz * double(q_values.size() - 1); }

    double value(double z) const {
        if (z < support_min || z > support_max) return 0.0;
        if (z < z_left()) {
            const double qe = q_values.front();
            return left_limit -
                   (left_limit - qe) * std::exp(left_rate * (z - z_left()));
        }
        if (z > z_right()) {
            const double qe = q_values.back();
            return right_limit -
                   (right_limit - qe) * std::exp(right_rate * (z - z_right()));
        }
        const double s = (z - z_start) / dz;
        const std::size_t i = std::min(
            q_values.size() - 2, static_cast<std::size_t>(std::max(0.0, s)));
        const double t = s - double(i);
        return q_values[i] * (1.0 - t) + q_values[i + 1] * t;
    }
};

inline double saddle_lambda_plus(const PhaseParams& pp) {
    const double g = pp.gamma, fp1 = pp.f.fprime1();
    return 0.5 * (-g + std::sqrt(g * g - 4.0 * fp1));
}

inline double saddle_lambda_minus(const PhaseParams& pp) {
    const double g = pp.gamma, fp1 = pp.f.fprime1();
    return 0.5 * (-g - std::sqrt(g * g - 4.0 * fp1));
}

/// Unstable eigendirection (1, lambda1+)/|..| at the saddle (1,0).
inline Vec2 saddle_unstable_direction(const PhaseParams& pp) {
    const double l = saddle_lambda_plus(pp);
    const double n = std::sqrt(1.0 + l * l);
    return {1.0 / n, l / n};
}

/// Stable eigendirection (1, lambda1-)/|..| at the saddle (1,0).
inline Vec2 saddle_stable_direction(const PhaseParams& pp) {
    const double l = saddle_lambda_minus(pp);
    const double n = std::sqrt(1.0 + l * l);
    return {1.0 / n, l / n};
}

// Slow eigenvalue at the origin node; real and positive for gamma <= -c0.
inline double origin_slow_rate(const PhaseParams& pp) {
    const double g = pp.gamma, fp0 = pp.f.fprime0();
    const double disc = g * g - 4.0 * fp0;
    if (disc <= 0.0) return -0.5 * g;
    return 0.5 * (-g - std::sqrt(disc));
}

enum class Direction { Forward, Backward };

/// Raw phase-plane integration with event detection (first event stops it).
inline Trajectory integrate(const PhaseParams& pp, Vec2 start, Direction dir,
                            const std::vector<Event>& events,
                            IntegrateOptions opt = {}) {
    if (start[0] < -pp.q_tol)
        throw Error("integrate: start must satisfy q >= -q_tol");
    opt.rtol = pp.ode_tol;
    opt.atol = pp.ode_tol;
    const Nonlinearity f = pp.f;
    const double gamma = pp.gamma;
    auto rhs = [f, gamma](double, const Vec2& y) -> Vec2 {
        return {y[1], -gamma * y[1] - f.eval(y[0])};
    };
    return integrate_ode(rhs, start, 0.0, dir == Direction::Forward ? 1 : -1,
                         events, opt);
}

namespace detail {

// Locate q = level between trajectory nodes by bisection on dense output.
inline double find_level(const Trajectory& traj, double level) {
    for (std::size_t i = 1; i < traj.points.size(); ++i) {
        const double a = traj.points[i - 1].q - level;
        const double b = traj.points[i].q - level;
        if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) {
            double za = traj.points[i - 1].z, zb = traj.points[i].z;
            for (int it = 0; it < 200; ++it) {
                const double zm = 0.5 * (za + zb);
                const double vm = traj.eval(zm)[0] - level;
                if (std::abs(vm) <= 1e-13) return zm;
                if ((vm > 0.0) == (a > 0.0))
                    za = zm;
                else
                    zb = zm;
            }
            return 0.5 * (za + zb);
        }
    }
    throw Error("find_level: level not crossed");
}

inline double fd_residual_sup(const PhaseParams& pp, const std::vector<double>& q,
                              double dz) {
    double sup = 0.0;
    for (std::size_t i = 1; i + 1 < q.size(); ++i) {
        const double d2 = (q[i + 1] - 2.0 * q[i] + q[i - 1]) / (dz * dz);
        const double d1 = (q[i + 1] - q[i - 1]) / (2.0 * dz);
        sup = std::max(sup, std::abs(d2 + pp.gamma * d1 + pp.f.eval(q[i])));
    }
    return sup;
}

// Run `build(dz)` with dz halved until the finite-difference residual of
// the sampled profile meets the 1e-5 contract. Steep profiles (large
// |gamma|) need finer grids than the nominal 0.01.
template <typename BuildFn>
void refine_dz(const PhaseParams& pp, WaveProfile& w, const BuildFn& build) {
    double dz = pp.dz;
    for (int attempt = 0;; ++attempt) {
        build(dz);
        w.residual_sup = fd_residual_sup(pp, w.q_values, w.dz);
        if (w.residual_sup <= 1e-5 || attempt >= 7) return;
        dz *= 0.5;
    }
}

inline double clamp0(double v) { return v < 0.0 ? 0.0 : v; }

} // namespace detail

/// Family (ii): the decreasing semi-wave U(z; gamma) on (-inf, 0] with
/// U(0)=0, U(-inf)=1. Requires gamma < c0.
inline WaveProfile decreasing_semiwave(const PhaseParams& pp) {
    const double c0 = minimal_speed(pp.f);
    if (!(pp.gamma < c0))
        throw ShootFailed("decreasing_semiwave: requires gamma < c0");
    const Vec2 dir = saddle_unstable_direction(pp);
    const double eps = 1e-8;
    const Vec2 start{1.0 - eps * dir[0], -eps * dir[1]};
    std::vector<Event> events{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    Trajectory traj = integrate(pp, start, Direction::Forward, events);
    if (traj.terminal_event != TerminalEvent::QHitZero)
        throw ShootFailed("decreasing_semiwave: trajectory exited [0, 1+q_tol] (" +
                          to_string(traj.terminal_event) + ")");
    const double z_end = traj.back().z; // q(z_end) = 0, z_end > 0

    WaveProfile w;
    w.kind = WaveKind::DecreasingSemiWave;
    w.gamma = pp.gamma;
    w.slope_at_zero = traj.back().p;
    w.support_min = -kInf;
    w.support_max = 0.0;
    w.left_limit = 1.0;
    w.left_rate = saddle_lambda_plus(pp);
    // profile coordinate is z - z_end; anchor the grid at the boundary zero
    detail::refine_dz(pp, w, [&](double dz) {
        const std::size_t n =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(z_end / dz)));
        w.dz = dz;
        w.z_start = -dz * double(n);
        w.q_values.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            w.q_values[i] =
                detail::clamp0(traj.eval(z_end - dz * double(n - i))[0]);
    });
    w.height = *std::max_element(w.q_values.begin(), w.q_values.end());
    return w;
}

/// P(gamma) = -mu U'(0; gamma), the Stefan boundary flux of the decreasing
/// semi-wave. Strictly decreasing in gamma with P(c0-0) = 0.
inline double stefan_functional(const PhaseParams& pp, double mu) {
    const double c0 = minimal_speed(pp.f);
    if (!(pp.gamma < c0) || !(mu > 0.0))
        throw ShootFailed("stefan_functional: requires gamma < c0, mu > 0");
    const Vec2 dir = saddle_unstable_direction(pp);
    const double eps = 1e-8;
    const Vec2 start{1.0 - eps * dir[0], -eps * dir[1]};
    std::vector<Event> events{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    Trajectory traj = integrate(pp, start, Direction::Forward, events);
    if (traj.terminal_event != TerminalEvent::QHitZero)
        throw ShootFailed("stefan_functional: shoot failed (" +
                          to_string(traj.terminal_event) + ")");
    return -mu * traj.back().p;
}

/// Boundary slope U_l'(0; gamma) of the increasing semi-wave, without
/// building the sampled profile (used inside speed bisections).
inline double increasing_semiwave_slope(const PhaseParams& pp) {
    const double c0 = minimal_speed(pp.f);
    if (!(std::abs(pp.gamma) < c0))
        throw ShootFailed("increasing_semiwave_slope: requires |gamma| < c0");
    const Vec2 dir = saddle_stable_direction(pp);
    const double eps = 1e-8;
    const Vec2 start{1.0 - eps * dir[0], -eps * dir[1]};
    std::vector<Event> events{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    Trajectory traj = integrate(pp, start, Direction::Backward, events);
    if (traj.terminal_event != TerminalEvent::QHitZero)
        throw ShootFailed("increasing_semiwave_slope: shoot failed (" +
                          to_string(traj.terminal_event) + ")");
    return traj.back().p;
}

/// Family (iii): the increasing semi-wave U_l(z; gamma) on [0, inf) with
/// U_l(0)=0, U_l(inf)=1. Requires |gamma| < c0.
inline WaveProfile increasing_semiwave(const PhaseParams& pp) {
    const double c0 = minimal_speed(pp.f);
    if (!(std::abs(pp.gamma) < c0))
        throw ShootFailed("increasing_semiwave: requires |gamma| < c0");
    const Vec2 dir = saddle_stable_direction(pp);
    const double eps = 1e-8;
    const Vec2 start{1.0 - eps * dir[0], -eps * dir[1]}; // p > 0 branch
    std::vector<Event> events{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    Trajectory traj = integrate(pp, start, Direction::Backward, events);
    if (traj.terminal_event != TerminalEvent::QHitZero)
        throw ShootFailed("increasing_semiwave: trajectory exited [0, 1+q_tol] (" +
                          to_string(traj.terminal_event) + ")");
    const double z_end = traj.back().z; // q(z_end) = 0, z_end < 0

    WaveProfile w;
    w.kind = WaveKind::IncreasingSemiWave;
    w.gamma = pp.gamma;
    w.slope_at_zero = traj.back().p;
    w.support_min = 0.0;
    w.support_max = kInf;
    w.right_limit = 1.0;
    w.right_rate = saddle_lambda_minus(pp);
    // profile coordinate is z - z_end, grid anchored at the boundary zero
    detail::refine_dz(pp, w, [&](double dz) {
        const std::size_t n =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(-z_end / dz)));
        w.dz = dz;
        w.z_start = 0.0;
        w.q_values.assign(n + 1, 0.0);
        for (std::size_t i = 1; i <= n; ++i)
            w.q_values[i] = detail::clamp0(traj.eval(z_end + dz * double(i))[0]);
    });
    w.height = *std::max_element(w.q_values.begin(), w.q_values.end());
    return w;
}

/// Family (iv): compactly supported W(z; b, gamma) on [-L, 0], with
/// -mu W'(0) = b. Requires |gamma| < c0 and 0 < b < P(gamma).
inline WaveProfile compact_bump(const PhaseParams& pp, double b, double mu) {
    const double c0 = minimal_speed(pp.f);
    if (!(std::abs(pp.gamma) < c0))
        throw NotInS1("compact_bump: requires |gamma| < c0");
    if (!(b > 0.0) || !(mu > 0.0))
        throw NotInS1("compact_bump: requires b > 0, mu > 0");
    const Vec2 start{0.0, -b / mu};
    std::vector<Event> events{
        {TerminalEvent::QHitZero, [](double, double q, double) { return q; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    Trajectory traj = integrate(pp, start, Direction::Backward, events);
    if (traj.terminal_event != TerminalEvent::QHitZero)
        throw NotInS1("compact_bump: b >= P(gamma), trajectory did not close (" +
                      to_string(traj.terminal_event) + ")");
    const double L = -traj.back().z;

    WaveProfile w;
    w.kind = WaveKind::CompactBump;
    w.gamma = pp.gamma;
    w.b = b;
    w.mu = mu;
    w.slope_at_zero = -b / mu;
    w.support_min = -L;
    w.support_max = 0.0;
    w.width = L;
    // both endpoints are boundary zeros: stretch dz so they land on-grid
    detail::refine_dz(pp, w, [&](double dz) {
        const std::size_t n =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(L / dz)));
        const double step = L / double(n);
        w.dz = step;
        w.z_start = -L;
        w.q_values.assign(n + 1, 0.0);
        for (std::size_t i = 1; i < n; ++i)
            w.q_values[i] = detail::clamp0(traj.eval(-L + step * double(i))[0]);
    });
    w.height = *std::max_element(w.q_values.begin(), w.q_values.end());
    return w;
}

/// Family (v): tadpole V(z; b, gamma) on (-inf, 0] with a single interior
/// maximum and a tail decaying to 0. Requires gamma <= -c0, 0 < b < P(gamma).
inline WaveProfile tadpole(const PhaseParams& pp, double b, double mu) {
    const double c0 = minimal_speed(pp.f);
    if (!(pp.gamma <= -c0))
        throw NotInS2("tadpole: requires gamma <= -c0");
    if (!(b > 0.0) || !(mu > 0.0))
        throw NotInS2("tadpole: requires b > 0, mu > 0");
    const Vec2 start{0.0, -b / mu};
    std::vector<Event> events{
        // tail: q back below q_tol on the increasing branch (p > 0)
        {TerminalEvent::TailReached,
         [qt = pp.q_tol](double, double q, double p) {
             return p > 0.0 ? q - qt : 1.0;
         }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
    };
    IntegrateOptions opt;
    if (pp.gamma >= -1.5 * c0) { // nearly defective node
        opt.origin_cap_h = 1e-3;
        opt.origin_cap_q = 1e-4;
    }
    Trajectory traj = integrate(pp, start, Direction::Backward, events, opt);
    if (traj.terminal_event != TerminalEvent::TailReached)
        throw NotInS2("tadpole: b outside (0, P(gamma)), no return to origin (" +
                      to_string(traj.terminal_event) + ")");
    // confirm monotone decay over the last decade of amplitude
    double later = -1.0;
    for (auto it = traj.points.rbegin(); it != traj.points.rend(); ++it) {
        if (it->q > 10.0 * pp.q_tol) break;
        if (later >= 0.0 && it->q < later - 1e-15)
            throw NotInS2("tadpole: tail not monotone near the origin");
        later = it->q;
    }
    const double z_end = traj.back().z; // < 0, q(z_end) = q_tol

    WaveProfile w;
    w.kind = WaveKind::Tadpole;
    w.gamma = pp.gamma;
    w.b = b;
    w.mu = mu;
    w.slope_at_zero = -b / mu;
    w.support_min = -kInf;
    w.support_max = 0.0;
    w.left_limit = 0.0;
    w.left_rate = origin_slow_rate(pp);
    detail::refine_dz(pp, w, [&](double dz) {
        const std::size_t n =
            std::max<std::size_t>(2, static_cast<std::size_t>(std::floor(-z_end / dz)));
        w.dz = dz;
        w.z_start = -dz * double(n);
        w.q_values.assign(n + 1, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            w.q_values[i] = detail::clamp0(traj.eval(-dz * double(n - i))[0]);
    });
    w.height = *std::max_element(w.q_values.begin(), w.q_values.end());
    return w;
}

/// Family (vi): the full front Q(z; gamma) on R with Q(-inf)=0, Q(inf)=1,
/// normalized so Q(0)=1/2. Requires gamma <= -c0.
inline WaveProfile full_front(const PhaseParams& pp) {
    const double c0 = minimal_speed(pp.f);
    if (!(pp.gamma <= -c0))
        throw ShootFailed("full_front: requires gamma <= -c0");
    const Vec2 dir = saddle_stable_direction(pp);
    const double eps = 1e-8;
    const Vec2 start{1.0 - eps * dir[0], -eps * dir[1]}; // p > 0 branch
    std::vector<Event> events{
        {TerminalEvent::TailReached,
         [qt = pp.q_tol](double, double q, double) { return q - qt; }},
        {TerminalEvent::QExceededBound,
         [qb = 1.0 + pp.q_tol](double, double q, double) { return qb - q; }},
        {TerminalEvent::PSignChange, [](double, double, double p) { return p; }},
    };
    IntegrateOptions opt;
    if (pp.gamma >= -1.5 * c0) {
        opt.origin_cap_h = 1e-3;
        opt.origin_cap_q = 1e-4;
    }
    Trajectory traj = integrate(pp, start, Direction::Backward, events, opt);
    if (traj.terminal_event != TerminalEvent::TailReached)
        throw ShootFailed("full_front: shoot failed (" +
                          to_string(traj.terminal_event) + ")");

    const double z_half = detail::find_level(traj, 0.5); // < 0
    const double z_tail = traj.back().z;                 // < z_half

    WaveProfile w;
    w.kind = WaveKind::FullFront;
    w.gamma = pp.gamma;
    w.support_min = -kInf;
    w.support_max = kInf;
    w.left_limit = 0.0;
    w.left_rate = origin_slow_rate(pp);
    w.right_limit = 1.0;
    w.right_rate = saddle_lambda_minus(pp);
    w.slope_at_zero = traj.eval(z_half)[1];
    // profile coordinate z - z_half; keep z=0 a grid point (q = 1/2 there)
    detail::refine_dz(pp, w, [&](double dz) {
        const std::size_t nl =
            static_cast<std::size_t>(std::floor((z_half - z_tail) / dz));
        const std::size_t nr =
            static_cast<std::size_t>(std::floor(-z_half / dz));
        w.dz = dz;
        w.z_start = -dz * double(nl);
        w.q_values.assign(nl + nr + 1, 0.0);
        for (std::size_t i = 0; i <= nl + nr; ++i) {
            const double zt = z_half + dz * (double(i) - double(nl));
            w.q_values[i] = detail::clamp0(traj.eval(zt)[0]);
        }
    });
    w.height = *std::max_element(w.q_values.begin(), w.q_values.end());
    return w;
}

} // namespace skpp
