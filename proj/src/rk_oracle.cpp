#include "pwltc/rk_oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pwltc::rk {

using Real = long double;
using Vec = std::array<Real, 2>;

namespace {

// Affine field z' = A z + b.
struct Affine {
    Real a11, a12, a21, a22, b1, b2;
    Vec operator()(const Vec& z) const { return {a11 * z[0] + a12 * z[1] + b1, a21 * z[0] + a22 * z[1] + b2}; }
};

// Dormand-Prince tableau
constexpr Real a21 = 1.0L / 5;
constexpr Real a31 = 3.0L / 40, a32 = 9.0L / 40;
constexpr Real a41 = 44.0L / 45, a42 = -56.0L / 15, a43 = 32.0L / 9;
constexpr Real a51 = 19372.0L / 6561, a52 = -25360.0L / 2187, a53 = 64448.0L / 6561, a54 = -212.0L / 729;
constexpr Real a61 = 9017.0L / 3168, a62 = -355.0L / 33, a63 = 46732.0L / 5247, a64 = 49.0L / 176,
               a65 = -5103.0L / 18656;
constexpr Real b1 = 35.0L / 384, b3 = 500.0L / 1113, b4 = 125.0L / 192, b5 = -2187.0L / 6784, b6 = 11.0L / 84;
constexpr Real e1 = 71.0L / 57600, e3 = -71.0L / 16695, e4 = 71.0L / 1920, e5 = -17253.0L / 339200, e6 = 22.0L / 525,
               e7 = -1.0L / 40;

struct StepOut {
    Vec y;
    Real err;
};

StepOut dopri_step(const Affine& f, const Vec& y, Real h, Real tol) {
    auto add = [](const Vec& y, Real h, std::initializer_list<std::pair<Real, const Vec*>> terms) {
        Vec r = y;
        for (auto& [c, k] : terms) {
            r[0] += h * c * (*k)[0];
            r[1] += h * c * (*k)[1];
        }
        return r;
    };
    Vec k1 = f(y);
    Vec k2 = f(add(y, h, {{a21, &k1}}));
    Vec k3 = f(add(y, h, {{a31, &k1}, {a32, &k2}}));
    Vec k4 = f(add(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    Vec k5 = f(add(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    Vec k6 = f(add(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Vec y5 = add(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    Vec k7 = f(y5);
    Real err = 0;
    for (int i = 0; i < 2; ++i) {
        Real e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        Real sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err = std::max(err, std::abs(e) / sc);
    }
    return {y5, err};
}

// A piecewise system: a zone owns a field and switching functions that are
// positive while inside it.
struct ZoneSpec {
    Affine field;
    std::array<std::array<Real, 3>, 3> switches;  // a x + b y + c
    int n_switches;
};

Real switch_min(const ZoneSpec& z, const Vec& y) {
    Real m = std::numeric_limits<Real>::infinity();
    for (int k = 0; k < z.n_switches; ++k)
        m = std::min(m, z.switches[k][0] * y[0] + z.switches[k][1] * y[1] + z.switches[k][2]);
    return m;
}

template <class Classify>
OracleResult integrate(Vec y, Real T, const OracleOptions& opt, Classify&& classify, bool switching) {
    OracleResult res;
    Real t = 0;
    ZoneSpec zone;
    std::string why;
    if (!classify(y, zone, why)) {
        res.ok = false;
        res.failure = why;
        res.p = {double(y[0]), double(y[1])};
        return res;
    }
    Real h = std::min<Real>(T, 1e-3L);
    while (t < T) {
        if (++res.steps > opt.max_steps) {
            res.ok = false;
            res.failure = "step budget exhausted";
            break;
        }
        h = std::min(h, T - t);
        auto s = dopri_step(zone.field, y, h, opt.tol);
        if (s.err > 1) {
            h *= std::max<Real>(0.2L, 0.9L * std::pow(s.err, -0.2L));
            if (h < opt.h_min * std::max<Real>(1, t)) {
                res.ok = false;
                res.failure = "step size underflow";
                break;
            }
            continue;
        }
        if (switching && switch_min(zone, s.y) < 0) {
            // bisect on the step length for the first exit from the zone
            Real lo = 0, hi = h;
            Vec yhi = s.y;
            for (int it = 0; it < 200 && hi - lo > 4 * std::numeric_limits<Real>::epsilon() * std::max<Real>(1, t);
                 ++it) {
                Real mid = 0.5L * (lo + hi);
                Vec ym = dopri_step(zone.field, y, mid, opt.tol).y;
                if (switch_min(zone, ym) < 0) {
                    hi = mid;
                    yhi = ym;
                } else {
                    lo = mid;
                }
            }
            y = yhi;
            t += hi;
            ++res.crossings;
            if (!classify(y, zone, why)) {
                res.ok = false;
                res.failure = why;
                break;
            }
            continue;
        }
        y = s.y;
        t += h;
        Real fac = s.err > 0 ? 0.9L * std::pow(s.err, -0.2L) : 5.0L;
        h *= std::clamp<Real>(fac, 0.2L, 5.0L);
    }
    res.p = {double(y[0]), double(y[1])};
    return res;
}

int sgn(Real v) { return (v > 0) - (v < 0); }

// -- normal form ---------------------------------------------------------------

ZoneSpec nf_zone(int sx, int sy, const Params& params) {
    Real eps = params.epsilon();
    Real le = (1.0L + Real(params.lambda_minus_one())) * eps;
    ZoneSpec z;
    z.field = {Real(sx), Real(-sy), 0, 0, le, eps};
    z.switches = {{{Real(sx), 0, 0}, {0, Real(sy), 0}, {0, 0, 0}}};
    z.n_switches = 2;
    return z;
}

std::pair<int, int> quadrant_signs(nf::Quadrant q) {
    switch (q) {
        case nf::Quadrant::Q1: return {1, 1};
        case nf::Quadrant::Q2: return {1, -1};
        case nf::Quadrant::Q3: return {-1, -1};
        case nf::Quadrant::Q4: return {-1, 1};
    }
    return {1, 1};
}

// Sign of a coordinate at a point, resolving zero by the direction of motion.
int resolve(Real value, Real rate) {
    if (value != 0) return sgn(value);
    return rate >= 0 ? 1 : -1;
}

// -- coupled system ----------------------------------------------------------------

ZoneSpec coupled_zone(bool upper, int s1, int s2, const Params& params) {
    Real eps = params.epsilon();
    Real le = (1.0L + Real(params.lambda_minus_one())) * eps;
    ZoneSpec z;
    z.n_switches = 3;
    if (upper) {
        z.field = {Real(s1), Real(-s2), -eps, eps, 0.5L * s1 + 0.5L * s2 + le, 0};
        z.switches = {{{Real(s1), 0, 0.5L * s1}, {0, Real(s2), -0.5L * s2}, {-1, 1, 0}}};
    } else {
        z.field = {Real(-s1), Real(s2), -eps, eps, 0.5L * s1 + 0.5L * s2 - le, 0};
        z.switches = {{{Real(s1), 0, -0.5L * s1}, {0, Real(s2), 0.5L * s2}, {1, -1, 0}}};
    }
    return z;
}

Vec upper_field(const Vec& y, Real eps, Real le) {
    return {std::abs(y[0] + 0.5L) - std::abs(y[1] - 0.5L) + le, eps * (y[1] - y[0])};
}
Vec lower_field(const Vec& y, Real eps, Real le) {
    return {-std::abs(y[0] - 0.5L) + std::abs(y[1] + 0.5L) - le, eps * (y[1] - y[0])};
}

}  // namespace

OracleResult normal_form_frozen(Point p0, const Params& params, nf::Quadrant zone, double T, const OracleOptions& opt) {
    auto [sx, sy] = quadrant_signs(zone);
    ZoneSpec z = nf_zone(sx, sy, params);
    if (T == 0) return {p0, true, "", 0, 0};
    return integrate(
        Vec{p0.x, p0.y}, T, opt,
        [&](const Vec&, ZoneSpec& out, std::string&) {
            out = z;
            return true;
        },
        false);
}

OracleResult normal_form(Point p0, const Params& params, double T, const OracleOptions& opt) {
    if (!(params.epsilon() > 0)) return {p0, false, "epsilon must be > 0", 0, 0};
    if (T == 0) return {p0, true, "", 0, 0};
    Real le = (1.0L + Real(params.lambda_minus_one())) * params.epsilon();
    return integrate(
        Vec{p0.x, p0.y}, T, opt,
        [&](const Vec& y, ZoneSpec& out, std::string&) {
            Real dx = std::abs(y[0]) - std::abs(y[1]) + le;
            int sy = resolve(y[1], 1);
            int sx = resolve(y[0], dx != 0 ? dx : -sy);
            out = nf_zone(sx, sy, params);
            return true;
        },
        true);
}

OracleResult coupled(Point p0, const Params& params, double T, const OracleOptions& opt) {
    if (!(params.epsilon() > 0)) return {p0, false, "epsilon must be > 0", 0, 0};
    if (T == 0) return {p0, true, "", 0, 0};
    const Real eps = params.epsilon();
    const Real le = (1.0L + Real(params.lambda_minus_one())) * eps;
    return integrate(
        Vec{p0.x, p0.y}, T, opt,
        [&](const Vec& y, ZoneSpec& out, std::string& why) {
            Real d = y[1] - y[0];
            bool upper;
            if (std::abs(d) > 1e-12L) {
                upper = d > 0;
            } else {
                Real np = -upper_field(y, eps, le)[0] + upper_field(y, eps, le)[1];
                Real nm = -lower_field(y, eps, le)[0] + lower_field(y, eps, le)[1];
                if (np > 0 && nm > 0)
                    upper = true;
                else if (np < 0 && nm < 0)
                    upper = false;
                else {
                    why = "reached the sliding segment";
                    return false;
                }
            }
            Vec f = upper ? upper_field(y, eps, le) : lower_field(y, eps, le);
            Real sh = upper ? 0.5L : -0.5L;
            int s2 = resolve(y[1] - sh, f[1]);
            int s1 = resolve(y[0] + sh, f[0]);
            out = coupled_zone(upper, s1, s2, params);
            return true;
        },
        true);
}

}  // namespace pwltc::rk
