#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stefan_kpp/errors.hpp"

namespace skpp {

using Vec2 = std::array<double, 2>;

// Dormand-Prince 5(4) with the standard 4th-order continuous extension.
// Specialized to the planar systems used here; z may run in either
// direction (h < 0 integrates backward).
namespace dopri5 {

inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;

} // namespace dopri5

// One accepted step: dense-output coefficients valid for theta in [0,1].
struct DenseSegment {
    double z0 = 0.0;
    double h = 0.0;
    Vec2 c1{}, c2{}, c3{}, c4{}, c5{};

    Vec2 eval(double z) const {
        const double s = (z - z0) / h;
        const double s1 = 1.0 - s;
        Vec2 y;
        for (int i = 0; i < 2; ++i)
            y[i] = c1[i] + s * (c2[i] + s1 * (c3[i] + s * (c4[i] + s1 * c5[i])));
        return y;
    }
};

enum class TerminalEvent {
    QHitZero,
    QExceededBound,
    PSignChange,
    TailReached,
    StepLimit,
    SpanLimit,
};

inline std::string to_string(TerminalEvent e) {
    switch (e) {
        case TerminalEvent::QHitZero: return "q hit 0";
        case TerminalEvent::QExceededBound: return "q exceeded bound";
        case TerminalEvent::PSignChange: return "p sign change";
        case TerminalEvent::TailReached: return "tail reached";
        case TerminalEvent::StepLimit: return "step limit";
        case TerminalEvent::SpanLimit: return "span limit";
    }
    return "?";
}

// Scalar event function; a sign change across a step triggers it, and the
// crossing is refined on the dense output. prev > 0 is required, so a
// trajectory starting exactly on the zero set does not fire immediately.
struct Event {
    TerminalEvent id;
    std::function<double(double z, double q, double p)> value;
};

struct TrajectoryPoint {
    double z, q, p;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points;
    std::vector<DenseSegment> segments;
    TerminalEvent terminal_event = TerminalEvent::StepLimit;

    const TrajectoryPoint& back() const { return points.back(); }

    // Dense evaluation anywhere inside the integrated span.
    Vec2 eval(double z) const {
        if (segments.empty()) return {points.front().q, points.front().p};
        // segments ordered in integration order; z monotone along them
        std::size_t lo = 0, hi = segments.size() - 1;
        const bool fwd = segments.front().h > 0;
        auto ends_before = [&](const DenseSegment& s) {
            return fwd ? (s.z0 + s.h < z) : (s.z0 + s.h > z);
        };
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (ends_before(segments[mid]))
                lo = mid + 1;
            else
                hi = mid;
        }
        return segments[lo].eval(z);
    }
};

struct IntegrateOptions {
    double rtol = 1e-10;
    double atol = 1e-10;
    double max_span = 1e4;       // |z - z_start| budget before giving up
    long max_steps = 1000000;
    double h_init = 1e-6;
    double h_max = std::numeric_limits<double>::infinity();
    // Extra step cap near the origin for the nearly defective node gamma
    // close to -c0, where both eigenvalues coalesce.
    double origin_cap_h = 0.0;   // 0 disables
    double origin_cap_q = 1e-4;
};

/// Adaptive DOPRI5 integration of (q,p)' = rhs with event localization.
/// `dir` = +1 forward in z, -1 backward. Stops at the first event whose
/// value changes sign from positive; the crossing is bisected on the dense
/// output until |value| <= 1e-12.
template <typename Rhs>
Trajectory integrate_ode(const Rhs& rhs, Vec2 y0, double z0, int dir,
                         const std::vector<Event>& events,
                         const IntegrateOptions& opt) {
    using namespace dopri5;
    Trajectory traj;
    traj.points.push_back({z0, y0[0], y0[1]});

    std::vector<double> ev_prev(events.size());
    for (std::size_t i = 0; i < events.size(); ++i)
        ev_prev[i] = events[i].value(z0, y0[0], y0[1]);

    double z = z0;
    Vec2 y = y0;
    Vec2 k1 = rhs(z, y);
    double h = dir * std::abs(opt.h_init);

    for (long step = 0; step < opt.max_steps; ++step) {
        if (std::abs(z - z0) > opt.max_span) {
            traj.terminal_event = TerminalEvent::SpanLimit;
            return traj;
        }
        double hcap = opt.h_max;
        if (opt.origin_cap_h > 0.0 && std::abs(y[0]) < opt.origin_cap_q)
            hcap = std::min(hcap, opt.origin_cap_h);
        if (std::abs(h) > hcap) h = dir * hcap;
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(z)))
            throw StepLimitExceeded("integrate: step size underflow at z=" +
                                    std::to_string(z));

        auto stage = [&](double frac, std::initializer_list<double> ws,
                         std::initializer_list<const Vec2*> ks) {
            Vec2 yy = y;
            auto w = ws.begin();
            for (const Vec2* k : ks) {
                yy[0] += h * (*w) * (*k)[0];
                yy[1] += h * (*w) * (*k)[1];
                ++w;
            }
            return rhs(z + frac * h, yy);
        };

        const Vec2 k2 = stage(c2, {a21}, {&k1});
        const Vec2 k3 = stage(c3, {a31, a32}, {&k1, &k2});
        const Vec2 k4 = stage(c4, {a41, a42, a43}, {&k1, &k2, &k3});
        const Vec2 k5 = stage(c5, {a51, a52, a53, a54}, {&k1, &k2, &k3, &k4});
        const Vec2 k6 = stage(1.0, {a61, a62, a63, a64, a65},
                              {&k1, &k2, &k3, &k4, &k5});

        Vec2 ynew;
        for (int i = 0; i < 2; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                  b5 * k5[i] + b6 * k6[i]);
        const Vec2 k7 = rhs(z + h, ynew);

        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                   e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc =
                opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / 2.0);

        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        DenseSegment seg;
        seg.z0 = z;
        seg.h = h;
        for (int i = 0; i < 2; ++i) {
            const double ydiff = ynew[i] - y[i];
            const double bspl = h * k1[i] - ydiff;
            seg.c1[i] = y[i];
            seg.c2[i] = ydiff;
            seg.c3[i] = bspl;
            seg.c4[i] = ydiff - h * k7[i] - bspl;
            seg.c5[i] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                             d6 * k6[i] + d7 * k7[i]);
        }

        const double znew = z + h;

        // event check across [z, znew]
        for (std::size_t i = 0; i < events.size(); ++i) {
            const double vnew = events[i].value(znew, ynew[0], ynew[1]);
            if (ev_prev[i] > 0.0 && vnew <= 0.0) {
                double ta = 0.0, tb = 1.0;
                double zhit = znew;
                Vec2 yhit = ynew;
                double vhit = vnew;
                for (int it = 0; it < 200 && std::abs(vhit) > 1e-12; ++it) {
                    const double tm = 0.5 * (ta + tb);
                    const double zm = z + tm * h;
                    const Vec2 ym = seg.eval(zm);
                    const double vm = events[i].value(zm, ym[0], ym[1]);
                    if (vm > 0.0)
                        ta = tm;
                    else
                        tb = tm;
                    zhit = zm;
                    yhit = ym;
                    vhit = vm;
                }
                traj.segments.push_back(seg);
                traj.points.push_back({zhit, yhit[0], yhit[1]});
                traj.terminal_event = events[i].id;
                return traj;
            }
            ev_prev[i] = vnew;
        }

        traj.segments.push_back(seg);
        traj.points.push_back({znew, ynew[0], ynew[1]});
        z = znew;
        y = ynew;
        k1 = k7; // FSAL
        h *= std::min(10.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-16), -0.2)));
    }
    throw StepLimitExceeded("integrate: no event within step budget");
}

} // namespace skpp
