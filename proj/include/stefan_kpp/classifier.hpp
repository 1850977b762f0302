#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "stefan_kpp/errors.hpp"
#include "stefan_kpp/fbp.hpp"
#include "stefan_kpp/wave_catalog.hpp"

namespace skpp {

enum class Verdict { Vanishing, VirtualVanishing, Undecided, VirtualSpreading, Spreading };

inline std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Vanishing: return "Vanishing";
        case Verdict::VirtualVanishing: return "VirtualVanishing";
        case Verdict::Undecided: return "Undecided";
        case Verdict::VirtualSpreading: return "VirtualSpreading";
        case Verdict::Spreading: return "Spreading";
    }
    return "?";
}

// Ordering used by the sigma-monotonicity properties: lower class first.
inline int verdict_rank(Verdict v) {
    switch (v) {
        case Verdict::Vanishing: return 0;
        case Verdict::VirtualVanishing:
        case Verdict::Undecided: return 1;
        case Verdict::VirtualSpreading:
        case Verdict::Spreading: return 2;
    }
    return 1;
}

struct Certificate {
    std::string name;
    double t = 0.0;
    std::string detail;
};

struct Classification {
    Verdict verdict = Verdict::Undecided;
    std::string certificate; // empty iff Undecided
    double certificate_time = kNaN;
    std::optional<double> measured_front_speed;
    std::optional<double> measured_back_speed;
    std::optional<double> front_profile_error;
    std::optional<double> back_profile_error;
    std::optional<double> log_shift_offset; // min over the final half
};

struct SpeedFit {
    double t1 = 0.0, t2 = 0.0;
    double speed = 0.0;     // least-squares slope
    double intercept = 0.0;
    double residual = 0.0;  // rms of the fit residuals
    double increment = 0.0; // (y(t2) - y(t1)) / (t2 - t1)
};

enum class BoundarySide { Right, Left, BackLevel };

/// Least-squares line fit of h, g, or chi_m over the trailing
/// window_fraction of the samples. The increment estimator is preferred for
/// speed checks, since the fit intercept absorbs the O(1) offset H_inf.
inline SpeedFit measure_speed(const FbpTrajectory& traj, BoundarySide which,
                              double window_fraction = 0.5) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : traj.samples) {
        const double y = which == BoundarySide::Right  ? s.h
                         : which == BoundarySide::Left ? s.g
                                                       : s.chi_m;
        if (std::isfinite(y)) pts.push_back({s.t, y});
    }
    if (pts.size() < 3) throw InsufficientData("measure_speed: too few samples");
    const double t_end = pts.back().first;
    const double t_begin = pts.front().first;
    const double t_cut = t_end - window_fraction * (t_end - t_begin);
    std::vector<std::pair<double, double>> win;
    for (const auto& p : pts)
        if (p.first >= t_cut) win.push_back(p);
    if (win.size() < 3 || win.back().first - win.front().first < 10.0)
        throw InsufficientData("measure_speed: window shorter than 10 time units");

    double st = 0, sy = 0, stt = 0, sty = 0;
    for (const auto& [t, y] : win) {
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
    }
    const double n = double(win.size());
    SpeedFit fit;
    fit.t1 = win.front().first;
    fit.t2 = win.back().first;
    fit.speed = (n * sty - st * sy) / (n * stt - st * st);
    fit.intercept = (sy - fit.speed * st) / n;
    double ss = 0.0;
    for (const auto& [t, y] : win) {
        const double r = y - fit.speed * t - fit.intercept;
        ss += r * r;
    }
    fit.residual = std::sqrt(ss / n);
    fit.increment =
        (win.back().second - win.front().second) / (fit.t2 - fit.t1);
    return fit;
}

/// Width certificate for spreading when beta < c0 (so H* is defined):
/// fires when h - g >= 2 H* + 2% margin.
inline std::optional<Certificate> certify_spreading_small_beta(
    const FbpTrajectory& traj, const WaveCatalog& cat) {
    if (cat.regime != Regime::SmallAdvection)
        throw RegimeError("certify_spreading_small_beta: requires beta < c0");
    const double c0 = cat.c0, beta = cat.params.beta;
    const double Hstar = M_PI / std::sqrt(c0 * c0 - beta * beta);
    const double need = 2.0 * Hstar + 0.02 * Hstar;
    for (const auto& s : traj.samples) {
        if (s.h - s.g >= need)
            return Certificate{"spreading-width", s.t,
                               "h-g reached 2H*+margin = " + std::to_string(need)};
    }
    return std::nullopt;
}

namespace detail {

// u dominates W on [x1 - L, x1]? Sampled at `step` resolution.
inline bool dominates(const FbpSnapshot& snap, const WaveProfile& W, double x1,
                      double step) {
    for (double z = -W.width; z <= 0.0; z += step)
        if (snap.value(x1 + z) < W.value(z)) return false;
    return true;
}

} // namespace detail

/// Domination certificate for virtual spreading (beta in [c0, beta*)):
/// some snapshot lies above a shifted copy of the compact wave W_delta.
/// delta = NaN selects the midpoint of its admissible range.
inline std::optional<Certificate> certify_virtual_spreading(
    const FbpTrajectory& traj, const WaveCatalog& cat, double delta = kNaN) {
    if (cat.regime != Regime::Critical && cat.regime != Regime::Medium)
        throw RegimeError("certify_virtual_spreading: requires c0 <= beta < beta*");
    const double range = cat.c_star - cat.params.beta + cat.c0;
    if (!std::isfinite(delta)) delta = 0.5 * range;
    const WaveProfile W = compact_wave_delta(cat.params, delta, cat.tols);

    for (const auto& snap : traj.snapshots) {
        if (snap.t <= 0.0) continue;
        const double dx = (snap.h - snap.g) / double(snap.w.size() - 1);
        const double coarse = std::max(0.2, dx);
        for (double x1 = snap.g + W.width; x1 <= snap.h; x1 += dx) {
            if (!detail::dominates(snap, W, x1, coarse)) continue;
            if (detail::dominates(snap, W, x1, 0.01))
                return Certificate{
                    "virtual-spreading-domination", snap.t,
                    "u(t,.) >= W_delta(. - x1), delta=" + std::to_string(delta) +
                        " L=" + std::to_string(W.width) +
                        " x1=" + std::to_string(x1)};
        }
    }
    return std::nullopt;
}

/// Vanishing certificates. (a) [Medium regime] a snapshot is dominated by a
/// shifted tadpole V* placed beyond the right boundary; (b) [any regime] an
/// operational proxy: sup u < 1e-6 and h' < 1e-6 over a trailing window of
/// length 10.
inline std::optional<Certificate> certify_vanishing(const FbpTrajectory& traj,
                                                    const WaveCatalog& cat) {
    if (cat.regime == Regime::Medium && cat.V_star.has_value()) {
        const WaveProfile& V = *cat.V_star;
        for (const auto& snap : traj.snapshots) {
            if (snap.t <= 0.0) continue;
            for (int k = 0; k <= 40; ++k) {
                const double x1 = snap.h + 0.25 * double(k);
                bool dominated = true;
                for (double x = snap.g; x <= snap.h && dominated; x += 0.01)
                    if (snap.value(x) > V.value(x - x1)) dominated = false;
                if (dominated)
                    return Certificate{"vanishing-tadpole-domination", snap.t,
                                       "u(t,.) <= V*(. - x1), x1=" +
                                           std::to_string(x1)};
            }
        }
    }
    // proxy (b); termination at the sup floor is its limiting case (the
    // amplitude fell below 1e-10, far under the proxy threshold)
    if (traj.terminal == FbpTerminal::SupBelowFloor)
        return Certificate{"vanishing-proxy", traj.samples.back().t,
                           "terminated with sup u < 1e-10"};
    const double floor_u = 1e-6, floor_v = 1e-6, window = 10.0;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const double t1 = traj.samples[i].t;
        if (t1 - traj.samples.front().t < window) continue;
        bool ok = true;
        bool seen = false;
        for (const auto& s : traj.samples) {
            if (s.t < t1 - window || s.t > t1) continue;
            seen = true;
            if (s.sup_u >= floor_u || s.h_dot >= floor_v) {
                ok = false;
                break;
            }
        }
        if (ok && seen)
            return Certificate{"vanishing-proxy", t1,
                               "sup u < 1e-6 and h' < 1e-6 over trailing 10"};
    }
    return std::nullopt;
}

/// Sup-norm distance between a frame-extracted snapshot profile and a
/// reference wave on the frame window, optionally minimized over a shift
/// (which implements the unspecified normalizations H_inf / theta(t)).
inline double profile_error(const FbpSnapshot& snap, const WaveProfile& ref,
                            Frame frame, bool fitted_shift,
                            double window = 10.0, double level_m = 0.2) {
    const SampledProfile pr = extract_profile(snap, frame, window, level_m);
    const double zlo = -window;
    const double zhi = frame == Frame::Front ? 0.0 : window;
    auto err_at = [&](double sh) {
        double e = 0.0;
        for (double z = zlo; z <= zhi; z += 0.01)
            e = std::max(e, std::abs(pr.value(z) - ref.value(z - sh)));
        return e;
    };
    if (!fitted_shift) return err_at(0.0);
    double best = err_at(0.0), bs = 0.0;
    for (double s = -5.0; s <= 5.0; s += 0.05) {
        const double e = err_at(s);
        if (e < best) {
            best = e;
            bs = s;
        }
    }
    for (double step = 0.025; step > 1e-5; step *= 0.5)
        for (const double s : {bs - step, bs + step}) {
            const double e = err_at(s);
            if (e < best) {
                best = e;
                bs = s;
            }
        }
    return best;
}

/// Bramson-shift diagnostic: chi_m(t) - (beta - c0) t - (3/c0) ln t.
/// The theory bounds it below for virtual-spreading runs with beta >= c0.
inline std::vector<std::pair<double, double>> log_shift_diagnostic(
    const FbpTrajectory& traj, const WaveCatalog& cat) {
    if (cat.regime != Regime::Critical && cat.regime != Regime::Medium)
        throw RegimeError("log_shift_diagnostic: requires c0 <= beta < beta*");
    std::vector<std::pair<double, double>> out;
    for (const auto& s : traj.samples) {
        if (s.t <= 0.0 || !std::isfinite(s.chi_m)) continue;
        out.push_back({s.t, s.chi_m - (cat.params.beta - cat.c0) * s.t -
                                (3.0 / cat.c0) * std::log(s.t)});
    }
    return out;
}

/// Apply the certificates in order (vanishing by domination, virtual
/// spreading, spreading width, vanishing proxy) and attach diagnostics.
inline Classification classify(const FbpTrajectory& traj, const WaveCatalog& cat,
                               double level_m = 0.2) {
    Classification cls;
    const bool mediumish =
        cat.regime == Regime::Critical || cat.regime == Regime::Medium;

    auto attach_front = [&]() {
        try {
            cls.measured_front_speed =
                measure_speed(traj, BoundarySide::Right).increment;
        } catch (const InsufficientData&) {}
        try {
            cls.front_profile_error = profile_error(
                traj.snapshots.back(), cat.U_star, Frame::Front, true, 10.0, level_m);
        } catch (const WindowExceedsDomain&) {}
    };

    std::optional<Certificate> van = certify_vanishing(traj, cat);
    if (van && van->name == "vanishing-tadpole-domination") {
        cls.verdict = Verdict::Vanishing;
        cls.certificate = van->name + ": " + van->detail;
        cls.certificate_time = van->t;
        return cls;
    }
    if (mediumish) {
        if (auto c = certify_virtual_spreading(traj, cat)) {
            cls.verdict = Verdict::VirtualSpreading;
            cls.certificate = c->name + ": " + c->detail;
            cls.certificate_time = c->t;
            attach_front();
            try {
                cls.measured_back_speed =
                    measure_speed(traj, BoundarySide::BackLevel).increment;
            } catch (const InsufficientData&) {}
            if (cat.Q_front) {
                try {
                    cls.back_profile_error =
                        profile_error(traj.snapshots.back(), *cat.Q_front,
                                      Frame::Back, true, 10.0, level_m);
                } catch (const WindowExceedsDomain&) {}
            }
            const auto series = log_shift_diagnostic(traj, cat);
            if (!series.empty()) {
                double mn = kInf;
                for (std::size_t i = series.size() / 2; i < series.size(); ++i)
                    mn = std::min(mn, series[i].second);
                cls.log_shift_offset = mn;
            }
            return cls;
        }
    }
    if (cat.regime == Regime::SmallAdvection) {
        if (auto c = certify_spreading_small_beta(traj, cat)) {
            cls.verdict = Verdict::Spreading;
            cls.certificate = c->name + ": " + c->detail;
            cls.certificate_time = c->t;
            attach_front();
            try {
                cls.measured_back_speed =
                    measure_speed(traj, BoundarySide::Left).increment;
            } catch (const InsufficientData&) {}
            if (cat.U_l_star) {
                // back frame centered at the left boundary: compare in the
                // frame z = x - g(t) via the Front machinery mirrored
                const auto& snap = traj.snapshots.back();
                double e = 0.0;
                bool ok = snap.g + 10.0 < snap.h;
                if (ok) {
                    double best = kInf;
                    for (double sh = -5.0; sh <= 5.0; sh += 0.01) {
                        double s = 0.0;
                        for (double z = 0.0; z <= 10.0; z += 0.01)
                            s = std::max(s, std::abs(snap.value(snap.g + z) -
                                                     cat.U_l_star->value(z - sh)));
                        best = std::min(best, s);
                    }
                    e = best;
                    cls.back_profile_error = e;
                }
            }
            return cls;
        }
    }
    if (van) {
        cls.verdict = Verdict::Vanishing;
        cls.certificate = van->name + ": " + van->detail;
        cls.certificate_time = van->t;
        return cls;
    }
    // Theorem-2.3-style middle band: bounded amplitude, still-moving h.
    if (cat.regime == Regime::Critical) {
        const double t_end = traj.samples.back().t;
        bool small = true, moving = true, seen = false;
        for (const auto& s : traj.samples) {
            if (s.t < t_end - 10.0) continue;
            seen = true;
            if (s.sup_u >= 1e-3) small = false;
            if (s.h_dot <= 0.0) moving = false;
        }
        if (seen && small && moving) {
            cls.verdict = Verdict::VirtualVanishing;
            cls.certificate =
                "virtual-vanishing-proxy: sup u < 1e-3 and h' > 0 over trailing 10";
            cls.certificate_time = t_end;
            return cls;
        }
    }
    cls.verdict = Verdict::Undecided;
    return cls;
}

} // namespace skpp
