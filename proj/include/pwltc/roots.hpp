#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace pwltc::roots {

template <class Real>
int sign_of(Real v) {
    return (v > Real(0)) - (v < Real(0));
}

struct RootOptions {
    int max_iterations = 300;
};

/// Bracketed root refinement on [lo, hi]: Newton steps with the analytic
/// derivative, falling back to bisection whenever a step leaves the
/// bracket or fails to halve the interval. `sign_lo` is the sign of f just
/// to the right of lo, which lets the bracket start on a zero of f.
template <class Real, class F, class DF>
Real safeguarded_newton(F&& f, DF&& df, Real lo, Real hi, int sign_lo, RootOptions opt = {}) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    Real x = lo + (hi - lo) / 2;
    // Prefer a Newton start from the end that is not a boundary zero.
    {
        Real fh = f(hi);
        Real dh = df(hi);
        if (dh != Real(0)) {
            Real cand = hi - fh / dh;
            if (cand > lo && cand < hi) x = cand;
        }
    }
    Real dx_old = hi - lo;
    for (int it = 0; it < opt.max_iterations; ++it) {
        Real fx = f(x);
        if (fx == Real(0)) return x;
        if (sign_of(fx) == sign_lo)
            lo = x;
        else
            hi = x;
        Real tol = 4 * eps * std::abs(x) + std::numeric_limits<Real>::denorm_min();
        if (hi - lo <= tol) return lo + (hi - lo) / 2;
        Real dfx = df(x);
        Real next = (dfx != Real(0)) ? x - fx / dfx : lo - Real(1);
        Real dx = std::abs(next - x);
        if (!(next > lo && next < hi) || dx > dx_old / 2) {
            next = lo + (hi - lo) / 2;
            dx = hi - lo;
        }
        dx_old = dx;
        if (next == x) return x;
        x = next;
    }
    return x;
}

/// Brent's method on a bracket [a, b] with opposite end signs. The
/// tolerance is relative to |t| so tiny crossing times keep their accuracy.
template <class Real, class F>
Real brent(F&& f, Real a, Real b, Real fa, Real fb, Real abs_tol = Real(0), int max_iter = 300) {
    constexpr Real eps = std::numeric_limits<Real>::epsilon();
    if (fa == Real(0)) return a;
    if (fb == Real(0)) return b;
    Real c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (sign_of(fb) == sign_of(fc)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        Real tol = 2 * eps * std::abs(b) + abs_tol / 2 + std::numeric_limits<Real>::denorm_min();
        Real m = (c - b) / 2;
        if (std::abs(m) <= tol || fb == Real(0)) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            Real s = fb / fa, p, q;
            if (a == c) {
                p = 2 * m * s;
                q = 1 - s;
            } else {
                Real qq = fa / fc, r = fb / fc;
                p = s * (2 * m * qq * (qq - r) - (b - a) * (r - 1));
                q = (qq - 1) * (r - 1) * (s - 1);
            }
            if (p > 0)
                q = -q;
            else
                p = -p;
            if (2 * p < std::min(3 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
        fb = f(b);
    }
    return b;
}

template <class Real>
struct Crossing {
    Real t;
    bool touching = false;  ///< double root: the function touches zero without changing sign
};

/// f(t) = p * expm1(rate * t) + q * t + f0.
///
/// Every quantity that matters inside one linear zone of the piecewise
/// linear systems (a coordinate, the offset from a line, a section
/// functional) has this shape. Its curvature has a fixed sign, so it has at
/// most one critical point and at most two roots, which makes the bracketing
/// exact rather than heuristic.
template <class Real>
struct ExpLinear {
    Real p = 0;
    Real rate = 1;
    Real q = 0;
    Real f0 = 0;

    // p == 0 is skipped explicitly: 0 * expm1(large) would be NaN
    Real operator()(Real t) const { return (p == Real(0) ? Real(0) : p * std::expm1(rate * t)) + q * t + f0; }
    Real derivative(Real t) const { return (p == Real(0) ? Real(0) : p * rate * std::exp(rate * t)) + q; }
    Real second(Real t) const { return p == Real(0) ? Real(0) : p * rate * rate * std::exp(rate * t); }

    /// Sign of f on (0, small): uses derivatives when f(0) == 0.
    int sign_after_zero() const {
        if (f0 != Real(0)) return sign_of(f0);
        Real d = derivative(Real(0));
        if (d != Real(0)) return sign_of(d);
        return sign_of(second(Real(0)));
    }

    std::optional<Real> critical_time() const {
        if (p == Real(0) || rate == Real(0)) return std::nullopt;
        Real ratio = -q / (p * rate);
        if (!(ratio > Real(0))) return std::nullopt;
        return std::log(ratio) / rate;
    }

    int sign_at_infinity() const {
        if (rate > Real(0) && p != Real(0)) return sign_of(p);
        if (q != Real(0)) return sign_of(q);
        return sign_of(f0 - p);
    }

    /// Rounding scale of f near t, used to decide when a critical value is
    /// indistinguishable from zero.
    Real scale_at(Real t) const {
        return std::abs(p * std::exp(rate * t)) + std::abs(q * t) + std::abs(f0 - p);
    }

    /// Smallest t in (0, t_end] with f(t) = 0. A touch at the critical point
    /// is reported when |f(t_c)| <= touch_rel * scale_at(t_c). `s0_override`
    /// fixes the sign just after t = 0; use it when the start is on the zero
    /// set and the side is already known.
    std::optional<Crossing<Real>> first_root(Real t_end, Real touch_rel = Real(0),
                                             int s0_override = 0) const {
        const int s0 = s0_override != 0 ? s0_override : sign_after_zero();
        if (s0 == 0) return std::nullopt;  // identically zero
        auto refine = [&](Real lo, Real hi, int slo) {
            return safeguarded_newton<Real>([this](Real t) { return (*this)(t); },
                                            [this](Real t) { return derivative(t); }, lo, hi, slo);
        };
        auto piece = [&](Real a, int sa, Real b) -> std::optional<Crossing<Real>> {
            if (std::isinf(b)) {
                if (sign_at_infinity() == sa || sign_at_infinity() == 0) return std::nullopt;
                Real h = std::max(Real(1), std::abs(a));
                Real hi = a + h;
                for (int i = 0; i < 4000 && sign_of((*this)(hi)) == sa; ++i) {
                    h *= 2;
                    hi = a + h;
                    if (!std::isfinite(hi)) return std::nullopt;
                }
                if (sign_of((*this)(hi)) == sa) return std::nullopt;
                if ((*this)(hi) == Real(0)) return Crossing<Real>{hi, false};
                return Crossing<Real>{refine(a, hi, sa), false};
            }
            Real fb = (*this)(b);
            if (fb == Real(0)) return Crossing<Real>{b, false};
            if (sign_of(fb) == sa) return std::nullopt;
            return Crossing<Real>{refine(a, b, sa), false};
        };

        auto tc = critical_time();
        if (tc && *tc > Real(0) && *tc < t_end) {
            Real fc = (*this)(*tc);
            bool flat = std::abs(fc) <= touch_rel * scale_at(*tc);
            // Starting on a tangency: nothing happens before the critical point.
            if (flat && f0 == Real(0)) return piece(*tc, s0, t_end);
            if (auto r = piece(Real(0), s0, *tc)) return r;
            if (flat) return Crossing<Real>{*tc, true};
            return piece(*tc, sign_of(fc), t_end);
        }
        return piece(Real(0), s0, t_end);
    }

    /// All roots in (0, t_end], at most two, in increasing order.
    std::vector<Crossing<Real>> all_roots(Real t_end, Real touch_rel = Real(0), int s0_override = 0) const {
        std::vector<Crossing<Real>> out;
        auto first = first_root(t_end, touch_rel, s0_override);
        if (!first) return out;
        out.push_back(*first);
        if (first->touching) return out;
        // A second root can only sit past the critical point.
        Real t1 = first->t;
        if (!(t1 < t_end)) return out;
        auto tc = critical_time();
        if (!tc || !(*tc > t1) || !(*tc < t_end)) return out;
        Real fc = (*this)(*tc);
        int sc = sign_of(fc);
        if (sc == 0) return out;
        Real fe = std::isinf(t_end) ? Real(sign_at_infinity()) : (*this)(t_end);
        if (sign_of(fe) == sc) return out;
        if (fe == Real(0)) {
            out.push_back({t_end, false});
            return out;
        }
        Real hi = t_end;
        if (std::isinf(hi)) {
            Real h = std::max(Real(1), std::abs(*tc));
            hi = *tc + h;
            for (int i = 0; i < 4000 && sign_of((*this)(hi)) == sc; ++i) {
                h *= 2;
                hi = *tc + h;
            }
            if (sign_of((*this)(hi)) == sc) return out;
        }
        Real r = safeguarded_newton<Real>([this](Real t) { return (*this)(t); },
                                          [this](Real t) { return derivative(t); }, *tc, hi, sc);
        out.push_back({r, false});
        return out;
    }
};

/// First root of a general smooth switching function on (0, t_end] by
/// marching with step h, bracketing by sign change (or by a sign change at
/// an interior critical point) and refining with Brent. `sign0` is the sign
/// just after t = 0.
template <class Real, class F, class DF>
std::optional<Crossing<Real>> first_root_marching(F&& f, DF&& df, int sign0, Real t_end, Real h,
                                                  Real touch_tol = Real(0), long max_steps = 10000000) {
    if (sign0 == 0) return std::nullopt;
    Real a = 0;
    Real fa = f(a);
    Real da = df(a);
    for (long step = 0; step < max_steps && a < t_end; ++step) {
        Real b = std::min(a + h, t_end);
        Real fb = f(b);
        int sa = (a == Real(0)) ? sign0 : sign_of(fa);
        if (fb == Real(0)) return Crossing<Real>{b, false};
        if (sign_of(fb) != sa) {
            Real fa_eff = (fa == Real(0)) ? Real(sa) * std::numeric_limits<Real>::denorm_min() : fa;
            return Crossing<Real>{brent<Real>(f, a, b, fa_eff, fb), false};
        }
        Real db = df(b);
        if (sign_of(da) * sign_of(db) < 0) {
            Real tc = brent<Real>(df, a, b, da, db);
            Real fc = f(tc);
            if (sign_of(fc) != sa && fc != Real(0)) {
                Real fa_eff = (fa == Real(0)) ? Real(sa) * std::numeric_limits<Real>::denorm_min() : fa;
                return Crossing<Real>{brent<Real>(f, a, tc, fa_eff, fc), false};
            }
            if (std::abs(fc) <= touch_tol) return Crossing<Real>{tc, true};
        }
        a = b;
        fa = fb;
        da = db;
    }
    return std::nullopt;
}

}  // namespace pwltc::roots
