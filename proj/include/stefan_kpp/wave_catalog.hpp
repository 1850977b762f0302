#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "stefan_kpp/errors.hpp"
#include "stefan_kpp/nonlinearity.hpp"
#include "stefan_kpp/phase_plane.hpp"

namespace skpp {

struct ProblemParams {
    Nonlinearity f = make_logistic();
    double mu = 1.0;
    double beta = 1.0;

    void check() const {
        if (!(mu > 0.0) || !(beta > 0.0))
            throw Error("ProblemParams: mu and beta must be positive");
    }
};

/// Numerical tolerances threaded into the shooting layer. Defaults match the
/// documented contract; tests tighten them for the grid-refinement
/// stability check.
struct PhaseTols {
    double q_tol = 1e-8;
    double ode_tol = 1e-10;
    double dz = 0.01;
};

enum class Regime { SmallAdvection, Critical, Medium, Large };

inline std::string to_string(Regime r) {
    switch (r) {
        case Regime::SmallAdvection: return "SmallAdvection";
        case Regime::Critical: return "Critical";
        case Regime::Medium: return "Medium";
        case Regime::Large: return "Large";
    }
    return "?";
}

namespace detail {
inline PhaseParams phase_at(const ProblemParams& prm, double gamma,
                            const PhaseTols& tol) {
    PhaseParams pp;
    pp.gamma = gamma;
    pp.f = prm.f;
    pp.q_tol = tol.q_tol;
    pp.ode_tol = tol.ode_tol;
    pp.dz = tol.dz;
    return pp;
}
} // namespace detail

/// P(gamma) for the problem's f and mu.
inline double stefan_P(const ProblemParams& prm, double gamma,
                       const PhaseTols& tol = {}) {
    return stefan_functional(detail::phase_at(prm, gamma, tol), prm.mu);
}

/// Rightward semi-wave speed c* = c*(beta): the unique root of
/// P(c - beta) = c in (0, c0 + beta), located by bisection to 1e-9.
inline double rightward_semiwave_speed(const ProblemParams& prm,
                                       const PhaseTols& tol = {}) {
    prm.check();
    const double c0 = minimal_speed(prm.f);
    // avoid the degenerate endpoint gamma = c0 where U ceases to exist
    double lo = 1e-9, hi = c0 + prm.beta - 1e-9;
    auto G = [&](double c) { return stefan_P(prm, c - prm.beta, tol) - c; };
    const double glo = G(lo), ghi = G(hi);
    if (!(glo > 0.0) || !(ghi < 0.0))
        throw BracketFailed("rightward_semiwave_speed: no sign change, G(lo)=" +
                            std::to_string(glo) + " G(hi)=" + std::to_string(ghi));
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (G(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Finite-difference d c*/d beta, which the theory places strictly in (0,1).
inline double semiwave_speed_sensitivity(const ProblemParams& prm, double dbeta,
                                         const PhaseTols& tol = {}) {
    if (!(dbeta >= 1e-4 && dbeta <= 1e-2))
        throw Error("semiwave_speed_sensitivity: dbeta must be in [1e-4, 1e-2]");
    ProblemParams hiP = prm, loP = prm;
    hiP.beta = prm.beta + dbeta;
    loP.beta = prm.beta - dbeta;
    return (rightward_semiwave_speed(hiP, tol) -
            rightward_semiwave_speed(loP, tol)) /
           (2.0 * dbeta);
}

/// beta* = P(-c0) + c0, the advection strength above which no rightward
/// semi-wave outruns the back. Cross-checked against the root of
/// c*(beta) - beta + c0.
inline double beta_star(const ProblemParams& prm, const PhaseTols& tol = {}) {
    const double c0 = minimal_speed(prm.f);
    const double bs = stefan_P(prm, -c0, tol) + c0;
    ProblemParams at = prm;
    at.beta = bs;
    const double resid = rightward_semiwave_speed(at, tol) - (bs - c0);
    if (std::abs(resid) > 1e-7)
        throw ConsistencyFailed("beta_star: |c*(beta*) - (beta* - c0)| = " +
                                std::to_string(std::abs(resid)));
    return bs;
}

/// Leftward semi-wave speed c_l* in (beta - c0, 0), defined only for
/// beta < c0: the root of -mu U_l'(0; c - beta) = c.
inline double leftward_semiwave_speed(const ProblemParams& prm,
                                      const PhaseTols& tol = {}) {
    prm.check();
    const double c0 = minimal_speed(prm.f);
    if (!(prm.beta < c0))
        throw RegimeError("leftward_semiwave_speed: requires beta < c0");
    double lo = prm.beta - c0 + 1e-9, hi = -1e-9;
    auto H = [&](double c) {
        return -prm.mu * increasing_semiwave_slope(
                             detail::phase_at(prm, c - prm.beta, tol)) -
               c;
    };
    const double hlo = H(lo), hhi = H(hi);
    if (!(hlo > 0.0) || !(hhi < 0.0))
        throw BracketFailed("leftward_semiwave_speed: no sign change");
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (H(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// V*(z) = V(z; beta - c0, -c0): the tadpole satisfying the Stefan condition
/// with speed beta - c0. Exists exactly for c0 < beta < beta*.
inline WaveProfile tadpole_star(const ProblemParams& prm,
                                const PhaseTols& tol = {}) {
    prm.check();
    const double c0 = minimal_speed(prm.f);
    if (!(prm.beta > c0))
        throw RegimeError("tadpole_star: requires beta > c0");
    return tadpole(detail::phase_at(prm, -c0, tol), prm.beta - c0, prm.mu);
}

/// V_delta(z) = V(z; beta - c0 - delta, -c0 - delta) -> V* as delta -> 0.
inline WaveProfile tadpole_delta(const ProblemParams& prm, double delta,
                                 const PhaseTols& tol = {}) {
    prm.check();
    const double c0 = minimal_speed(prm.f);
    if (!(delta > 0.0) || !(delta < prm.beta - c0))
        throw RegimeError("tadpole_delta: requires 0 < delta < beta - c0");
    return tadpole(detail::phase_at(prm, -c0 - delta, tol),
                   prm.beta - c0 - delta, prm.mu);
}

/// W_delta(z) = W(z; beta - c0 + delta, -c0 + delta) for c0 <= beta < beta*,
/// 0 < delta < c*(beta) - beta + c0. Width L_delta and height D_delta grow
/// to infinity resp. 1 at the right edge of the delta range.
inline WaveProfile compact_wave_delta(const ProblemParams& prm, double delta,
                                      const PhaseTols& tol = {}) {
    prm.check();
    const double c0 = minimal_speed(prm.f);
    if (!(prm.beta >= c0 - 1e-9))
        throw RegimeError("compact_wave_delta: requires beta >= c0");
    const double bs = beta_star(prm, tol);
    if (!(prm.beta < bs))
        throw RegimeError("compact_wave_delta: requires beta < beta*");
    const double range = rightward_semiwave_speed(prm, tol) - prm.beta + c0;
    if (!(delta > 0.0) || !(delta < range))
        throw RegimeError("compact_wave_delta: delta outside (0, " +
                          std::to_string(range) + ")");
    return compact_bump(detail::phase_at(prm, -c0 + delta, tol),
                        prm.beta - c0 + delta, prm.mu);
}

/// The resolved constants and named waves for fixed (f, mu, beta).
struct WaveCatalog {
    ProblemParams params;
    PhaseTols tols;
    double c0 = 0.0;
    double c_star = 0.0;
    double beta_star = 0.0;
    Regime regime = Regime::SmallAdvection;
    WaveProfile U_star;
    std::optional<WaveProfile> U_l_star;
    std::optional<double> c_l_star;
    std::optional<WaveProfile> V_star;
    std::optional<WaveProfile> Q_front;
};

/// Resolve c0, c*, beta*, the advection regime, and every profile the
/// regime admits. beta = c0 is declared Critical within 1e-9.
inline WaveCatalog build_catalog(const ProblemParams& prm,
                                 const PhaseTols& tol = {}) {
    prm.check();
    WaveCatalog cat;
    cat.params = prm;
    cat.tols = tol;
    cat.c0 = minimal_speed(prm.f);
    cat.c_star = rightward_semiwave_speed(prm, tol);
    cat.beta_star = beta_star(prm, tol);

    if (std::abs(prm.beta - cat.c0) <= 1e-9)
        cat.regime = Regime::Critical;
    else if (prm.beta < cat.c0)
        cat.regime = Regime::SmallAdvection;
    else {
        // Medium iff the Stefan tadpole exists; Large iff it reports NotInS2.
        try {
            cat.V_star = tadpole_star(prm, tol);
            cat.regime = Regime::Medium;
        } catch (const NotInS2&) {
            cat.regime = Regime::Large;
        }
        const bool below = prm.beta < cat.beta_star;
        if (below != (cat.regime == Regime::Medium))
            throw ConsistencyFailed(
                "build_catalog: tadpole existence disagrees with beta*");
    }

    cat.U_star = decreasing_semiwave(
        detail::phase_at(prm, cat.c_star - prm.beta, tol));
    if (cat.regime == Regime::SmallAdvection) {
        cat.c_l_star = leftward_semiwave_speed(prm, tol);
        cat.U_l_star = increasing_semiwave(
            detail::phase_at(prm, *cat.c_l_star - prm.beta, tol));
    }
    if (prm.beta >= cat.c0 - 1e-9)
        cat.Q_front = full_front(detail::phase_at(prm, -cat.c0, tol));
    return cat;
}

} // namespace skpp
