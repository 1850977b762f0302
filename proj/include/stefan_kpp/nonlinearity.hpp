#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "stefan_kpp/errors.hpp"

namespace skpp {

/// KPP reaction term represented as a polynomial f(u) = sum c_k u^k.
/// Keeping f polynomial makes f and f' exact, which matters inside the
/// shooting loop where the saddle departure spans many decades.
class Nonlinearity {
public:
    std::string name;           // "logistic", "cubic_family", "polynomial"
    std::string params;         // printable parameter string, may be empty
    std::vector<double> coeffs; // c_0..c_n

    double eval(double u) const {
        double v = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 0;) v = v * u + coeffs[k];
        return v;
    }

    double deriv(double u) const {
        double v = 0.0;
        for (std::size_t k = coeffs.size(); k-- > 1;)
            v = v * u + coeffs[k] * static_cast<double>(k);
        return v;
    }

    double fprime0() const { return coeffs.size() > 1 ? coeffs[1] : 0.0; }

    double fprime1() const { return deriv(1.0); }

    std::string key() const { return name + "(" + params + ")"; }
};

namespace detail {
// Nudge c1 (by at most ~1 ulp of the partial sums) so that Horner
// evaluation at u = 1 returns exactly 0, as the type contract requires.
// Polynomials that do not nearly vanish at 1 are left alone for
// validate_kpp to reject.
inline void snap_zero_at_one(std::vector<double>& c) {
    if (c.size() < 2) return;
    double tail = 0.0;
    for (std::size_t k = c.size(); k-- > 2;) tail += c[k];
    if (std::abs(tail + c[1]) <= 1e-12) c[1] = -tail;
}
} // namespace detail

inline Nonlinearity make_logistic() {
    return Nonlinearity{"logistic", "", {0.0, 1.0, -1.0}};
}

/// f(u) = u(1-u)(1+a*u)/(1+a); KPP-valid for a in [0,1], f'(0) = 1/(1+a).
inline Nonlinearity make_cubic_family(double a) {
    const double s = 1.0 / (1.0 + a);
    std::vector<double> c{0.0, s, (a - 1.0) * s, -a * s};
    detail::snap_zero_at_one(c);
    return Nonlinearity{"cubic_family", std::to_string(a), std::move(c)};
}

inline Nonlinearity make_polynomial(std::vector<double> coeffs) {
    std::string p;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (k) p += ",";
        p += std::to_string(coeffs[k]);
    }
    detail::snap_zero_at_one(coeffs);
    return Nonlinearity{"polynomial", p, std::move(coeffs)};
}

/// c_0 = 2 sqrt(f'(0)), the minimal front speed.
inline double minimal_speed(const Nonlinearity& f) {
    return 2.0 * std::sqrt(f.fprime0());
}

struct KppReport {
    bool pass = true;
    std::string violation; // empty when pass
    double u_at = 0.0;     // first violating sample

    void fail(const std::string& what, double u) {
        if (pass) {
            pass = false;
            violation = what;
            u_at = u;
        }
    }
};

/// Sample-based check of the standing hypotheses on f: zeros at 0 and 1,
/// sign condition (1-u)f(u) > 0, sub-tangency f(u) <= f'(0)u, and that
/// deriv matches a centered difference of eval. Never throws; reports the
/// first violating sample.
inline KppReport validate_kpp(const Nonlinearity& f, int n_samples = 10000) {
    KppReport r;
    if (n_samples < 100) {
        r.fail("n_samples must be >= 100", 0.0);
        return r;
    }
    if (f.eval(0.0) != 0.0) r.fail("f(0) != 0", 0.0);
    if (f.eval(1.0) != 0.0) r.fail("f(1) != 0", 1.0);
    if (!r.pass) return r;

    // Half geometric (resolves behavior near u=0), half uniform on [0,4].
    std::vector<double> us;
    us.reserve(static_cast<std::size_t>(n_samples));
    const int ng = n_samples / 2, nu = n_samples - ng;
    for (int i = 0; i < ng; ++i)
        us.push_back(1e-8 * std::pow(4.0 / 1e-8, double(i) / double(ng - 1)));
    for (int i = 1; i <= nu; ++i) us.push_back(4.0 * double(i) / double(nu));

    const double slack = 1e-12;
    for (double u : us) {
        const double fu = f.eval(u);
        if (u > 0.0 && u < 1.0 && !(fu > 0.0)) {
            r.fail("f <= 0 inside (0,1)", u);
            break;
        }
        if (u > 1.0 && !(fu < 0.0)) {
            r.fail("f >= 0 above 1", u);
            break;
        }
        if (fu > f.fprime0() * u + slack * std::max(1.0, u)) {
            r.fail("sub-tangency f(u) <= f'(0)u violated", u);
            break;
        }
        if (u > 0.0 && u <= 2.0) {
            const double h = 1e-5;
            const double fd = (f.eval(u + h) - f.eval(u - h)) / (2.0 * h);
            const double d = f.deriv(u);
            if (std::abs(fd - d) > 1e-6 * std::max(1.0, std::abs(d))) {
                r.fail("deriv does not match centered difference", u);
                break;
            }
        }
    }
    if (r.pass && !(f.fprime0() > 0.0)) r.fail("f'(0) <= 0", 0.0);
    if (r.pass && !(f.fprime1() < 0.0)) r.fail("f'(1) >= 0", 1.0);
    return r;
}

/// Truncation f_A of f: equal to f'(0)s on [0,1], positive on (1,A),
/// negative beyond A, with f <= f_A <= f'(0)s. The blend on [1,A] is a
/// cubic Hermite pinned to slope f'(0) at s=1 and slope -f'(0) at s=A;
/// both bounds hold for this choice for any A > 1.
class TruncatedNonlinearity {
public:
    Nonlinearity base;
    double cap = 2.0; // A

    double eval_A(double s) const {
        const double c = base.fprime0();
        if (s <= 1.0) return c * s;
        if (s >= cap) return -c * (s - cap);
        const double d = cap - 1.0;
        const double t = (s - 1.0) / d;
        return c * ((1.0 - t) * (1.0 - t) * (1.0 + 2.0 * t) + d * t * (1.0 - t));
    }
};

/// A := 2 max{1, sup u0}.
inline TruncatedNonlinearity truncate(const Nonlinearity& f, double sup_u0) {
    if (sup_u0 < 0.0) throw Error("truncate: sup_u0 must be >= 0");
    return TruncatedNonlinearity{f, 2.0 * std::max(1.0, sup_u0)};
}

} // namespace skpp
