#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <string>
#include <vector>

#include "stefan_kpp/classifier.hpp"
#include "stefan_kpp/errors.hpp"
#include "stefan_kpp/fbp.hpp"

namespace skpp {

enum class ThresholdTarget { VanishToSpread, VanishToNonvanish };

inline std::string to_string(ThresholdTarget t) {
    return t == ThresholdTarget::VanishToSpread ? "vanish_to_spread"
                                                : "vanish_to_nonvanish";
}

struct ThresholdEvaluation {
    double sigma = 0.0;
    Verdict verdict = Verdict::Undecided;
    double t_decided = 0.0; // certificate time, or t_max when undecided
    bool extended = false;  // needed the one-time t_max doubling
};

struct ThresholdResult {
    double sigma_lo = 0.0, sigma_hi = 0.0;
    Verdict verdict_lo = Verdict::Vanishing;
    Verdict verdict_hi = Verdict::Undecided;
    std::vector<ThresholdEvaluation> evaluations;
    Regime regime = Regime::Medium;
};

namespace detail {

enum class SigmaClass { Lower, Middle, Upper };

inline ThresholdEvaluation evaluate_sigma(const SolverConfig& tmpl,
                                          const WaveCatalog& cat, double sigma) {
    SolverConfig cfg = tmpl;
    cfg.init.sigma = sigma;
    Classification cls = classify(run(cfg), cat, cfg.level_m);
    ThresholdEvaluation ev;
    ev.sigma = sigma;
    if (cls.verdict == Verdict::Undecided) {
        cfg.t_max *= 2.0; // one extension, then live with the verdict
        cls = classify(run(cfg), cat, cfg.level_m);
        ev.extended = true;
    }
    ev.verdict = cls.verdict;
    ev.t_decided =
        std::isfinite(cls.certificate_time) ? cls.certificate_time : cfg.t_max;
    return ev;
}

inline SigmaClass classify_for_target(Verdict v, ThresholdTarget target) {
    switch (v) {
        case Verdict::Vanishing: return SigmaClass::Lower;
        case Verdict::Spreading:
        case Verdict::VirtualSpreading: return SigmaClass::Upper;
        case Verdict::VirtualVanishing:
        case Verdict::Undecided:
            // inner band: above the vanish edge, below the spread edge
            return target == ThresholdTarget::VanishToNonvanish
                       ? SigmaClass::Upper
                       : SigmaClass::Lower;
    }
    return SigmaClass::Lower;
}

} // namespace detail

/// Locate the sharp threshold in sigma by exponential search from 0.1
/// followed by bisection, classifying one full simulation per evaluation.
/// `jobs` > 1 evaluates the exponential ladder in parallel batches.
inline ThresholdResult find_threshold(const SolverConfig& tmpl,
                                      const WaveCatalog& cat,
                                      ThresholdTarget target, double rel_tol,
                                      double sigma_max, int jobs = 1) {
    if (!(rel_tol >= 1e-3))
        throw Error("find_threshold: rel_tol must be >= 1e-3 (each "
                    "evaluation is a full simulation)");
    if (!(sigma_max > 0.0)) throw Error("find_threshold: sigma_max must be > 0");

    ThresholdResult res;
    res.regime = cat.regime;

    auto eval = [&](double sigma) {
        const auto ev = detail::evaluate_sigma(tmpl, cat, sigma);
        res.evaluations.push_back(ev);
        return detail::classify_for_target(ev.verdict, target);
    };

    double lo = kNaN, hi = kNaN;
    Verdict v_lo = Verdict::Vanishing, v_hi = Verdict::Undecided;

    // exponential ladder up from 0.1 (shrinking first if 0.1 is already
    // in the upper class; small data always vanish in these regimes)
    double sigma = 0.1;
    auto note = [&](double s, detail::SigmaClass c) {
        if (c == detail::SigmaClass::Upper) {
            if (!std::isfinite(hi) || s < hi) {
                hi = s;
                v_hi = res.evaluations.back().verdict;
            }
        } else {
            if (!std::isfinite(lo) || s > lo) {
                lo = s;
                v_lo = res.evaluations.back().verdict;
            }
        }
    };

    note(sigma, eval(sigma));
    while (!std::isfinite(hi)) {
        std::vector<double> batch;
        for (int j = 0; j < std::max(1, jobs); ++j) {
            sigma *= 2.0;
            if (sigma > sigma_max) break;
            batch.push_back(sigma);
        }
        if (batch.empty())
            throw NoUpperClassFound(
                "find_threshold: no upper-class verdict up to sigma_max = " +
                std::to_string(sigma_max) + " (sigma* = inf operationally)");
        if (batch.size() == 1) {
            note(batch[0], eval(batch[0]));
        } else {
            std::vector<std::future<ThresholdEvaluation>> futs;
            for (double s : batch)
                futs.push_back(std::async(std::launch::async, [&, s] {
                    return detail::evaluate_sigma(tmpl, cat, s);
                }));
            for (auto& f : futs) {
                const auto ev = f.get();
                res.evaluations.push_back(ev);
                note(ev.sigma, detail::classify_for_target(ev.verdict, target));
            }
        }
    }
    while (!std::isfinite(lo)) {
        sigma = hi / 2.0;
        // degenerate threshold near 0: give up after many halvings
        if (sigma < 1e-7)
            throw BracketFailed(
                "find_threshold: no lower-class verdict found above 1e-7");
        note(sigma, eval(sigma)); // an upper verdict also lowers hi
    }

    while ((hi - lo) / hi > rel_tol) {
        const double mid = 0.5 * (lo + hi);
        const auto c = eval(mid);
        if (c == detail::SigmaClass::Upper) {
            hi = mid;
            v_hi = res.evaluations.back().verdict;
        } else {
            lo = mid;
            v_lo = res.evaluations.back().verdict;
        }
    }

    res.sigma_lo = lo;
    res.sigma_hi = hi;
    res.verdict_lo = v_lo;
    res.verdict_hi = v_hi;
    std::sort(res.evaluations.begin(), res.evaluations.end(),
              [](const ThresholdEvaluation& a, const ThresholdEvaluation& b) {
                  return a.sigma < b.sigma;
              });
    return res;
}

struct TransitionEvidence {
    double sigma = 0.0;
    double t_max_used = 0.0;
    double target_speed = 0.0; // beta - c0
    double t_escape = kNaN;    // h' left the transition band (NaN: never)
    double window_t1 = 0.0, window_t2 = 0.0;
    double h_dot_mean = 0.0;   // statistics over the shadowing window
    double h_dot_sd = 0.0;
    double v_star_fitted_error = kNaN; // best front-frame match vs V*
};

/// Diagnostics at the bisection midpoint of a Medium-regime threshold: how
/// closely the run tracks the tadpole wave (speed beta - c0, profile V*).
/// The transition orbit is unstable, so any bisected midpoint eventually
/// falls off toward vanishing or virtual spreading; the statistics are
/// taken over the trailing part of the shadowing phase, with the escape
/// time reported alongside. Evidence, not a verdict.
inline TransitionEvidence transition_evidence(const SolverConfig& cfg,
                                              const WaveCatalog& cat) {
    if (cat.regime != Regime::Medium)
        throw RegimeError("transition_evidence: requires the Medium regime");
    SolverConfig ext = cfg;
    ext.t_max *= 2.0;
    ext.snapshot_every = std::min(ext.snapshot_every, 2.0);
    const FbpTrajectory traj = run(ext);

    TransitionEvidence ev;
    ev.sigma = cfg.init.sigma;
    ev.t_max_used = ext.t_max;
    const double target = cat.params.beta - cat.c0;
    ev.target_speed = target;

    // The run shadows the transition while its front-frame profile stays
    // V*-shaped; once it departs (up toward the spreading plateau or down
    // toward extinction) the fitted V* error grows past 0.1. The speed
    // statistics are paired with that shape window.
    if (!cat.V_star)
        throw InsufficientData("transition_evidence: no V* in catalog");
    double t_shadow_end = kNaN;
    for (const auto& snap : traj.snapshots) {
        if (snap.t < 5.0) continue;
        double e = kInf;
        try {
            e = profile_error(snap, *cat.V_star, Frame::Front, true, 10.0,
                              cfg.level_m);
        } catch (const WindowExceedsDomain&) {
            continue;
        }
        if (e <= 0.1) t_shadow_end = snap.t;
    }
    if (!std::isfinite(t_shadow_end))
        throw InsufficientData(
            "transition_evidence: the run never tracks V* within 0.1");
    ev.t_escape = t_shadow_end < traj.samples.back().t - 2.0 * ext.snapshot_every
                      ? t_shadow_end
                      : kNaN;

    const double t2 = t_shadow_end;
    const double t1 = std::max(5.0, t2 - 15.0);
    ev.window_t1 = t1;
    ev.window_t2 = t2;
    double s1 = 0.0, s2 = 0.0;
    int n = 0;
    for (const auto& s : traj.samples) {
        if (s.t < t1 || s.t > t2) continue;
        s1 += s.h_dot;
        s2 += s.h_dot * s.h_dot;
        ++n;
    }
    if (n < 5)
        throw InsufficientData("transition_evidence: shadowing window too short");
    ev.h_dot_mean = s1 / n;
    ev.h_dot_sd = std::sqrt(std::max(0.0, s2 / n - ev.h_dot_mean * ev.h_dot_mean));

    for (const auto& snap : traj.snapshots) {
        if (snap.t < t1 || snap.t > t2) continue;
        try {
            const double e = profile_error(snap, *cat.V_star, Frame::Front, true,
                                           10.0, cfg.level_m);
            if (!(e >= ev.v_star_fitted_error)) ev.v_star_fitted_error = e;
        } catch (const WindowExceedsDomain&) {}
    }
    return ev;
}

} // namespace skpp
