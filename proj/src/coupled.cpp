#include "pwltc/coupled.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <thread>

#include "pwltc/csv.hpp"
#include "pwltc/errors.hpp"
#include "pwltc/roots.hpp"

namespace pwltc::coupled {

using Real = long double;

namespace {

int sgn(Real a) { return (a > 0) - (a < 0); }

char sign_char(int s) { return s > 0 ? '+' : '-'; }

}  // namespace

// -- zones and fields ------------------------------------------------------------

Zone Zone::make(Half half, int s1, int s2, const Params& params) {
    const double eps = params.epsilon();
    const double le = params.lambda() * eps;
    Zone z;
    z.half = half;
    z.s1 = s1;
    z.s2 = s2;
    if (half == Half::upper) {
        z.matrix = {{{double(s1), double(-s2)}, {-eps, eps}}};
        z.offset = {0.5 * s1 + 0.5 * s2 + le, 0.0};
    } else {
        z.matrix = {{{double(-s1), double(s2)}, {-eps, eps}}};
        z.offset = {0.5 * s1 + 0.5 * s2 - le, 0.0};
    }
    return z;
}

std::string Zone::label() const {
    std::string s = half == Half::upper ? "U" : "L";
    s += sign_char(s1);
    s += sign_char(s2);
    return s;
}

Velocity half_field(Half h, Point p, const Params& params) {
    const double eps = params.epsilon();
    const double le = params.lambda() * eps;
    const double dy = eps * (p.y - p.x);
    if (h == Half::upper) return {std::abs(p.x + 0.5) - std::abs(p.y - 0.5) + le, dy};
    return {-std::abs(p.x - 0.5) + std::abs(p.y + 0.5) - le, dy};
}

Velocity coupled_field(Point p, const Params& params) {
    return half_field(p.y - p.x >= 0.0 ? Half::upper : Half::lower, p, params);
}

SlidingSegment sliding_segment(const Params& params) {
    const double h = 0.5 * params.lambda() * params.epsilon();
    return {{-h, -h}, {h, h}};
}

FilippovResult filippov_field(Point p, const Params& params) {
    if (!(std::abs(p.y - p.x) < 1e-12)) throw ContractViolation("filippov_field: point is not on y = x");
    Velocity fp = half_field(Half::upper, p, params);
    Velocity fm = half_field(Half::lower, p, params);
    // e+- themselves: the normal component vanishes only up to rounding there
    const double e = 0.5 * params.lambda() * params.epsilon();
    if (std::abs(std::abs(p.x) - e) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, e)) {
        if (p.x > 0.0) return {SwitchState::boundary_equilibrium, fm, 0.0};
        return {SwitchState::boundary_equilibrium, fp, 1.0};
    }
    // normal (-1, 1) points into the upper half
    double np = -fp.dx + fp.dy;
    double nm = -fm.dx + fm.dy;
    if (np < 0.0 && nm < 0.0) return {SwitchState::crossing_to_lower, fm, 0.0};
    if (np > 0.0 && nm > 0.0) return {SwitchState::crossing_to_upper, fp, 1.0};
    if (np == 0.0 || nm == 0.0) {
        Velocity v = np == 0.0 ? fp : fm;
        return {SwitchState::boundary_equilibrium, v, np == 0.0 ? 1.0 : 0.0};
    }
    double alpha = nm / (nm - np);
    Velocity v{alpha * fp.dx + (1.0 - alpha) * fm.dx, alpha * fp.dy + (1.0 - alpha) * fm.dy};
    return {SwitchState::sliding, v, alpha};
}

Half half_of(Point p) { return p.y - p.x >= 0.0 ? Half::upper : Half::lower; }

// Frame of the upper half anchored at p- = (-1/2, 1/2):
//   v = y - 1/2, g = y - x - 1, u = v - g = x + 1/2.
// The lower half is handled as the upper half of the reflected point.
namespace {

struct FrameSigns {
    int s1;
    int s2;
};

FrameSigns frame_signs(Real v, Real g, Real le) {
    const Real u = v - g;
    int s2 = v != 0 ? sgn(v) : 1;  // v' = eps (1 + g) > 0 off the switching line
    int s1;
    if (u != 0) {
        s1 = sgn(u);
    } else {
        Real du = -std::abs(v) + le;
        if (du != 0)
            s1 = sgn(du);
        else
            s1 = v > 0 ? -1 : 1;
    }
    return {s1, s2};
}

}  // namespace

Zone zone_of(Point p, const Params& params) {
    Half h;
    if (p.y > p.x)
        h = Half::upper;
    else if (p.y < p.x)
        h = Half::lower;
    else
        h = filippov_field(p, params).state == SwitchState::crossing_to_lower ? Half::lower : Half::upper;
    Point q = h == Half::upper ? p : -p;
    Real le = Real(params.lambda()) * params.epsilon();
    auto fs = frame_signs(Real(q.y) - 0.5L, Real(q.y) - Real(q.x) - 1.0L, le);
    if (h == Half::upper) return Zone::make(h, fs.s1, fs.s2, params);
    return Zone::make(h, -fs.s1, -fs.s2, params);
}

// -- phi_1 of a 2x2 matrix -----------------------------------------------------------

namespace {

using Mat = std::array<std::array<Real, 2>, 2>;
using Vec = std::array<Real, 2>;

template <class T>
T phi1_scalar(T x) {
    if (std::abs(x) < T(1e-5)) return T(1) + x / T(2) + x * x / T(6);
    return std::expm1(x) / x;
}

Real dphi1_scalar(Real x) {
    if (std::abs(x) < 1e-4L) return 0.5L + x / 3.0L + x * x / 8.0L;
    return (x * std::exp(x) - std::expm1(x)) / (x * x);
}

std::complex<Real> phi1_complex(std::complex<Real> z) {
    if (std::abs(z) < 1e-5L) return Real(1) + z / Real(2) + z * z / Real(6);
    // expm1 for complex argument: e^{a}(cos b + i sin b) - 1, kept accurate for small a
    Real a = z.real(), b = z.imag();
    Real ea = std::exp(a);
    Real re = std::expm1(a) * std::cos(b) - 2.0L * std::sin(b / 2) * std::sin(b / 2);
    Real im = ea * std::sin(b);
    return std::complex<Real>(re, im) / z;
}

/// phi_1(A) applied to w.
Vec phi1_apply(const Mat& A, const Vec& w) {
    const Real tr = A[0][0] + A[1][1];
    const Real det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
    const Real half = tr / 2;
    const Real disc = half * half - det;
    Mat F;
    auto combine = [&](Real c0, Real c1, Real shift) {
        // F = c0 I + c1 (A - shift I)
        F[0][0] = c0 + c1 * (A[0][0] - shift);
        F[0][1] = c1 * A[0][1];
        F[1][0] = c1 * A[1][0];
        F[1][1] = c0 + c1 * (A[1][1] - shift);
    };
    const Real scale = std::max<Real>(1, std::abs(half));
    if (std::abs(disc) <= 1e-14L * scale * scale) {
        combine(phi1_scalar(half), dphi1_scalar(half), half);
    } else if (disc > 0) {
        Real r = std::sqrt(disc);
        Real l1 = half + r, l2 = half - r;
        Real f1 = phi1_scalar(l1), f2 = phi1_scalar(l2);
        combine(f2, (f1 - f2) / (l1 - l2), l2);
    } else {
        Real bsq = std::sqrt(-disc);
        std::complex<Real> f = phi1_complex({half, bsq});
        combine(f.real(), f.imag() / bsq, half);
    }
    return {F[0][0] * w[0] + F[0][1] * w[1], F[1][0] * w[0] + F[1][1] * w[1]};
}

}  // namespace

Point zone_flow(Point p0, double t, const Zone& zone) {
    Mat M{{{zone.matrix[0][0], zone.matrix[0][1]}, {zone.matrix[1][0], zone.matrix[1][1]}}};
    Vec z0{p0.x, p0.y};
    Vec f0{M[0][0] * z0[0] + M[0][1] * z0[1] + zone.offset[0], M[1][0] * z0[0] + M[1][1] * z0[1] + zone.offset[1]};
    Mat A{{{M[0][0] * t, M[0][1] * t}, {M[1][0] * t, M[1][1] * t}}};
    Vec inc = phi1_apply(A, f0);
    Point out{double(z0[0] + Real(t) * inc[0]), double(z0[1] + Real(t) * inc[1])};
    if (!std::isfinite(out.x) || !std::isfinite(out.y)) throw NumericError("zone_flow: non-finite result");
    return out;
}

std::array<std::array<double, 2>, 2> zone_eigenvalues(const Zone& zone) {
    const double tr = zone.matrix[0][0] + zone.matrix[1][1];
    const double det = zone.matrix[0][0] * zone.matrix[1][1] - zone.matrix[0][1] * zone.matrix[1][0];
    const double half = tr / 2, disc = half * half - det;
    if (disc >= 0) {
        double r = std::sqrt(disc);
        double l1 = half + (half >= 0 ? r : -r);
        double l2 = l1 != 0.0 ? det / l1 : half - r;
        return {{{l1, 0.0}, {l2, 0.0}}};
    }
    double b = std::sqrt(-disc);
    return {{{half, b}, {half, -b}}};
}

// -- frame integrator ------------------------------------------------------------------

namespace {

enum class Hit { none, u_zero, v_zero, sigma };

struct FrameState {
    Real v;
    Real g;
};

struct SegmentResult {
    Hit hit;
    Real dt;
    FrameState end;
    FrameSigns signs;
};

constexpr Real kTouchRel = 16 * std::numeric_limits<Real>::epsilon();

class UpperFrame {
public:
    explicit UpperFrame(const Params& params)
        : eps_(params.epsilon()),
          le_(Real(params.lambda()) * params.epsilon()),
          kappa_(-Real(params.epsilon()) * Real(params.lambda_minus_one())) {}

    Real eps() const { return eps_; }
    Real le() const { return le_; }

    /// One zone segment from z, at most `horizon` long.
    SegmentResult advance(FrameState z, Real horizon, const std::function<void(Real, FrameState, FrameSigns)>& sample,
                          Real sample_dt) const {
        FrameSigns s = frame_signs(z.v, z.g, le_);
        if (s.s1 == s.s2) return diagonal(z, s, horizon, sample, sample_dt);
        return mixed(z, s, horizon, sample, sample_dt);
    }

private:
    // s1 = s2 = s: g' = mu g + kappa decouples.
    SegmentResult diagonal(FrameState z, FrameSigns s, Real horizon,
                           const std::function<void(Real, FrameState, FrameSigns)>& sample, Real sample_dt) const {
        const Real mu = s.s1 + eps_;
        const Real gstar = -kappa_ / mu;
        const Real w0 = z.g - gstar;
        const Real drift = eps_ * (1 + gstar);
        roots::ExpLinear<Real> fg{w0, mu, 0, z.g + 1};
        roots::ExpLinear<Real> fv{eps_ * w0 / mu, mu, drift, z.v};
        roots::ExpLinear<Real> fu{eps_ * w0 / mu - w0, mu, drift, z.v - z.g};

        auto state = [&](Real t) -> FrameState {
            Real mt = mu * t;
            // w0 == 0 is an orbit on the zone's invariant line; skip e^{mt}, which may overflow
            Real em = w0 == 0 ? Real(0) : std::expm1(mt);
            Real g = w0 == 0 ? z.g : std::abs(mt) <= 1 ? z.g + w0 * em : gstar + w0 * std::exp(mt);
            Real v = z.v + drift * t + (w0 == 0 ? Real(0) : eps_ * w0 * em / mu);
            return {v, g};
        };

        Real best = horizon;
        Hit hit = Hit::none;
        auto consider = [&](const roots::ExpLinear<Real>& f, int inside, Hit h, bool on_boundary) {
            auto r = f.first_root(best, kTouchRel, on_boundary ? inside : 0);
            if (r && r->t <= best && !(r->touching && h == Hit::sigma)) {
                if (r->t < best || hit == Hit::none) {
                    best = r->t;
                    hit = h;
                }
            }
        };
        consider(fg, +1, Hit::sigma, z.g == -1);
        consider(fv, s.s2, Hit::v_zero, z.v == 0);
        consider(fu, s.s1, Hit::u_zero, z.v == z.g);

        if (sample && sample_dt > 0)
            for (Real t = sample_dt; t < best; t += sample_dt) sample(t, state(t), s);
        FrameState e = state(best);
        return {hit, best, e, s};
    }

    SegmentResult mixed(FrameState z, FrameSigns s, Real horizon,
                        const std::function<void(Real, FrameState, FrameSigns)>& sample, Real sample_dt) const {
        const Real d = s.s2 - s.s1;
        const Real m = s.s1 + eps_;
        const Vec f0{eps_ * (1 + z.g), d * z.v + m * z.g + kappa_};
        auto state = [&](Real t) -> FrameState {
            Mat A{{{0, eps_ * t}, {d * t, m * t}}};
            Vec inc = phi1_apply(A, f0);
            return {z.v + t * inc[0], z.g + t * inc[1]};
        };
        auto rate = [&](FrameState q) -> Vec { return {eps_ * (1 + q.g), d * q.v + m * q.g + kappa_}; };
        // switching functions and their time derivatives
        auto fvals = [&](FrameState q) -> std::array<Real, 3> { return {q.g + 1, q.v, q.v - q.g}; };
        auto dvals = [&](FrameState q) -> std::array<Real, 3> {
            Vec r = rate(q);
            return {r[1], r[0], r[0] - r[1]};
        };
        const std::array<int, 3> inside{+1, s.s2, s.s1};
        const std::array<Hit, 3> kinds{Hit::sigma, Hit::v_zero, Hit::u_zero};

        // step bound: resolve the fastest rate and a quarter turn of rotation
        Real tr = m, det = -eps_ * d;
        Real disc = tr * tr / 4 - det;
        Real spec = std::abs(tr) / 2 + std::sqrt(std::abs(disc));
        Real h = std::min<Real>(0.1L / eps_, 0.25L / std::max<Real>(spec, 1e-12L));
        if (disc < 0) h = std::min<Real>(h, 3.14159265358979323846L / (4 * std::sqrt(-disc)));

        Real a = 0;
        FrameState za = z;
        auto fa = fvals(za);
        auto da = dvals(za);
        Real next_sample = sample_dt;
        for (long step = 0; step < 100000000 && a < horizon; ++step) {
            Real b = std::min(a + h, horizon);
            FrameState zb = state(b);
            auto fb = fvals(zb);
            auto db = dvals(zb);
            Real best = b + 1;
            Hit hit = Hit::none;
            for (int k = 0; k < 3; ++k) {
                int sa = (a == 0 && fa[k] == 0) ? inside[k] : sgn(fa[k]);
                auto comp = [&, k](Real t) { return fvals(state(t))[k]; };
                Real lo_val = fa[k] == 0 ? Real(sa) * std::numeric_limits<Real>::denorm_min() : fa[k];
                Real root = -1;
                if (fb[k] == 0) {
                    root = b;
                } else if (sgn(fb[k]) != sa) {
                    root = roots::brent<Real>(comp, a, b, lo_val, fb[k]);
                } else if (sgn(da[k]) * sgn(db[k]) < 0) {
                    auto dcomp = [&, k](Real t) { return dvals(state(t))[k]; };
                    Real tc = roots::brent<Real>(dcomp, a, b, da[k], db[k]);
                    Real fc = comp(tc);
                    if (fc != 0 && sgn(fc) != sa) root = roots::brent<Real>(comp, a, tc, lo_val, fc);
                }
                if (root >= 0 && root < best) {
                    best = root;
                    hit = kinds[k];
                }
            }
            if (sample && sample_dt > 0)
                for (; next_sample < std::min(best, b); next_sample += sample_dt) sample(next_sample, state(next_sample), s);
            if (hit != Hit::none) return {hit, best, state(best), s};
            a = b;
            za = zb;
            fa = fb;
            da = db;
        }
        return {Hit::none, a, za, s};
    }

    Real eps_;
    Real le_;
    Real kappa_;
};

// Physical point of a frame state in the given half.
Point physical(FrameState z, Half h) {
    Real x = z.v - z.g - 0.5L;
    Real y = z.v + 0.5L;
    Point p{double(x), double(y)};
    return h == Half::upper ? p : -p;
}

std::string zone_label(FrameSigns s, Half h) {
    std::string out = h == Half::upper ? "U" : "L";
    int s1 = h == Half::upper ? s.s1 : -s.s1;
    int s2 = h == Half::upper ? s.s2 : -s.s2;
    out += sign_char(s1);
    out += sign_char(s2);
    return out;
}

Half flip(Half h) { return h == Half::upper ? Half::lower : Half::upper; }

void check_params(const Params& params) {
    if (!(params.epsilon() > 0.0 && params.epsilon() < 1.0))
        throw DomainError("coupled system needs 0 < epsilon < 1");
}

enum class SigmaOutcome { cross, slide };

// Upper-frame arrival on y = x at abscissa x = v + 1/2.
SigmaOutcome classify_arrival(Real v, Real le) {
    Real x = v + 0.5L;
    return x > le / 2 ? SigmaOutcome::cross : SigmaOutcome::slide;
}

}  // namespace

CoupledTrajectory simulate_coupled(Point p0, const Params& params, const CoupledStop& stop,
                                   const CoupledOptions& opt) {
    check_params(params);
    if (!std::isfinite(p0.x) || !std::isfinite(p0.y)) throw DomainError("non-finite start point");
    UpperFrame frame(params);
    CoupledTrajectory tr;

    Half half;
    if (p0.y > p0.x) {
        half = Half::upper;
    } else if (p0.y < p0.x) {
        half = Half::lower;
    } else {
        auto f = filippov_field(p0, params);
        if (f.state == SwitchState::sliding || f.state == SwitchState::boundary_equilibrium) {
            tr.samples.push_back({0.0, p0, "SLIDE"});
            tr.events.push_back({0.0, p0, CoupledEventKind::slide});
            tr.reason = CoupledStopReason::slid;
            return tr;
        }
        half = f.state == SwitchState::crossing_to_lower ? Half::lower : Half::upper;
    }
    Point q = half == Half::upper ? p0 : -p0;
    FrameState z{Real(q.y) - 0.5L, Real(q.y) - Real(q.x) - 1.0L};
    if (p0.y == p0.x) z.g = -1;
    Real t = 0;
    tr.samples.push_back({0.0, p0, zone_label(frame_signs(z.v, z.g, frame.le()), half)});

    int switchings = 0;
    std::size_t segments = 0;
    const Real t_max = stop.t_max;
    auto sampler = [&](Real dt, FrameState s, FrameSigns sg) {
        tr.samples.push_back({double(t + dt), physical(s, half), zone_label(sg, half)});
    };
    std::function<void(Real, FrameState, FrameSigns)> sample_fn;
    if (opt.sample_dt > 0) sample_fn = sampler;

    while (true) {
        if (++segments > opt.max_segments) {
            tr.reason = CoupledStopReason::budget;
            throw BudgetExceeded<CoupledTrajectory>("simulate_coupled: segment budget exhausted", tr);
        }
        Real horizon = t_max - t;
        if (horizon <= 0) {
            tr.reason = CoupledStopReason::time;
            return tr;
        }
        auto seg = frame.advance(z, horizon, sample_fn, Real(opt.sample_dt));
        t += seg.dt;
        z = seg.end;
        if (!std::isfinite(double(z.v)) || !std::isfinite(double(z.g)))
            throw NumericError("simulate_coupled: orbit escaped to infinity");
        if (seg.hit == Hit::none) {
            tr.samples.push_back({double(t), physical(z, half), zone_label(seg.signs, half)});
            tr.reason = CoupledStopReason::time;
            return tr;
        }
        if (seg.hit == Hit::u_zero) z.v = z.g;  // x = -1/2 exactly
        if (seg.hit == Hit::v_zero) z.v = 0;    // y = 1/2 exactly
        if (seg.hit != Hit::sigma) {
            Point p = physical(z, half);
            tr.events.push_back({double(t), p, CoupledEventKind::sign_boundary});
            tr.samples.push_back({double(t), p, zone_label(frame_signs(z.v, z.g, frame.le()), half)});
            continue;
        }
        z.g = -1;
        Point p = physical(z, half);
        if (classify_arrival(z.v, frame.le()) == SigmaOutcome::slide) {
            tr.events.push_back({double(t), p, CoupledEventKind::slide});
            tr.samples.push_back({double(t), p, "SLIDE"});
            tr.reason = CoupledStopReason::slid;
            return tr;
        }
        tr.events.push_back({double(t), p, CoupledEventKind::switching_line});
        half = flip(half);
        z.v = -z.v - 1;
        tr.samples.push_back({double(t), p, zone_label(frame_signs(z.v, z.g, frame.le()), half)});
        ++switchings;
        if (stop.max_switchings >= 0 && switchings >= stop.max_switchings) {
            tr.reason = CoupledStopReason::switching_count;
            return tr;
        }
    }
}

HalfPassage half_passage(double s, const Params& params) {
    check_params(params);
    UpperFrame frame(params);
    if (!(Real(s) < -frame.le() / 2)) throw PreconditionError("half_passage needs s < -lambda eps / 2");
    FrameState z{Real(s) - 0.5L, -1};
    Real t = 0;
    for (std::size_t k = 0; k < 1000000; ++k) {
        auto seg = frame.advance(z, std::numeric_limits<Real>::infinity(), {}, 0);
        t += seg.dt;
        z = seg.end;
        if (seg.hit == Hit::none) throw NumericError("half_passage: orbit did not return to y = x");
        if (seg.hit == Hit::u_zero) z.v = z.g;
        if (seg.hit == Hit::v_zero) z.v = 0;
        if (seg.hit == Hit::sigma) {
            double out = double(z.v + 0.5L);
            bool slid = classify_arrival(z.v, frame.le()) == SigmaOutcome::slide;
            return {slid, out, double(t), out};
        }
    }
    throw NumericError("half_passage: segment budget exhausted");
}

// -- cycles -----------------------------------------------------------------------------

std::optional<CycleResult> find_limit_cycle(const Params& params, const CycleOptions& opt) {
    check_params(params);
    if (!(params.lambda_minus_one() > 0.0)) throw DomainError("find_limit_cycle needs lambda > 1");
    const double le = params.lambda() * params.epsilon();
    double s = opt.s_start;
    if (!(s < -le / 2)) s = -le / 2 - 0.25;

    double best_s = s, best_res = std::numeric_limits<double>::infinity();
    int it = 0;
    HalfPassage hp{};
    auto eval = [&](double x) {
        hp = half_passage(x, params);
        return hp;
    };

    // fixed-point phase: the return map is strongly contracting on the cycle
    for (; it < std::min(opt.max_iterations, 40); ++it) {
        eval(s);
        if (hp.slid) return std::nullopt;
        double res = std::abs(hp.s_out + s);
        if (res < best_res) {
            best_res = res;
            best_s = s;
        }
        if (res < opt.tolerance) break;
        s = -hp.s_out;
        if (!std::isfinite(s) || std::abs(s) > 1e6) throw ConvergenceError("find_limit_cycle: iterates diverge", best_s);
    }
    // secant polish on F(s) = H(s) + s
    if (!(best_res < opt.tolerance)) {
        double s0 = best_s, s1 = s;
        double f0 = eval(s0).s_out + s0;
        if (hp.slid) return std::nullopt;
        double f1 = eval(s1).s_out + s1;
        if (hp.slid) return std::nullopt;
        for (; it < opt.max_iterations; ++it) {
            if (std::abs(f1) < best_res) {
                best_res = std::abs(f1);
                best_s = s1;
            }
            if (std::abs(f1) < opt.tolerance) break;
            if (f1 == f0) break;
            double s2 = s1 - f1 * (s1 - s0) / (f1 - f0);
            if (!(s2 < -le / 2)) s2 = 0.5 * (s1 - le / 2);
            s0 = s1;
            f0 = f1;
            s1 = s2;
            f1 = eval(s1).s_out + s1;
            if (hp.slid) return std::nullopt;
        }
    }
    if (!(best_res < opt.tolerance))
        throw ConvergenceError("find_limit_cycle: no convergence after " + std::to_string(it) + " iterations", best_s);

    eval(best_s);
    CycleResult c;
    c.residual = std::abs(hp.s_out + best_s);
    c.iterations = it + 1;
    c.period = 2.0 * hp.time;
    c.amplitude = 2.0 * hp.s_out;
    c.crossings = {Point{best_s, best_s}, Point{hp.s_out, hp.s_out}};
    if (opt.keep_samples) {
        CoupledOptions so;
        so.sample_dt = c.period / 400.0;
        CoupledStop st;
        st.max_switchings = 2;
        c.samples = simulate_coupled({best_s, best_s}, params, st, so);
    }
    return c;
}

double canard_amplitude_prediction(double epsilon, double lambda_minus_one) {
    return 1.0 - 2.0 * epsilon * std::log(lambda_minus_one);
}

static std::vector<ScanPoint> scan_impl(double epsilon, const std::vector<Params>& grid, int threads) {
    std::vector<ScanPoint> out(grid.size());
    auto work = [&](std::size_t i) {
        const Params& p = grid[i];
        ScanPoint sp{p.lambda(), p.lambda_minus_one(), epsilon, std::nan(""), std::nan(""), false, ""};
        try {
            CycleOptions o;
            o.keep_samples = false;
            if (auto c = find_limit_cycle(p, o)) {
                sp.amplitude = c->amplitude;
                sp.period = c->period;
                sp.converged = true;
            } else {
                sp.error = "no cycle";
            }
        } catch (const std::exception& e) {
            sp.error = e.what();
        }
        out[i] = sp;
    };
    unsigned n = threads > 0 ? unsigned(threads) : std::max(1u, std::thread::hardware_concurrency());
    n = std::min<unsigned>(n, unsigned(std::max<std::size_t>(1, grid.size())));
    if (n <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) work(i);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < n; ++w)
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < grid.size(); i += n) work(i);
        });
    for (auto& th : pool) th.join();
    return out;
}

std::vector<ScanPoint> canard_scan(double epsilon, const std::vector<double>& lambda_grid, int threads) {
    std::vector<Params> grid;
    for (double l : lambda_grid) {
        if (!(l > 1.0)) throw DomainError("canard_scan: grid values must exceed 1");
        grid.push_back(Params::fixed(l, epsilon));
    }
    return scan_impl(epsilon, grid, threads);
}

std::vector<ScanPoint> canard_scan_offsets(double epsilon, const std::vector<double>& offsets, int threads) {
    std::vector<Params> grid;
    for (double o : offsets) {
        if (!(o > 0.0)) throw DomainError("canard_scan: offsets must be > 0");
        grid.push_back(Params::from_offset(o, epsilon));
    }
    return scan_impl(epsilon, grid, threads);
}

// -- enhanced delay -------------------------------------------------------------------------

EnhancedDelayReport enhanced_delay_run(Point p0, double epsilon, int n_loops, const CoupledOptions& opt) {
    if (n_loops < 1) throw DomainError("enhanced_delay_run needs at least one loop");
    if (!(std::abs(p0.y - p0.x) <= 1.0)) throw PreconditionError("start point must satisfy |y - x| <= 1");
    Params params = Params::fixed(1.0, epsilon);
    CoupledStop stop;
    stop.max_switchings = 2 * n_loops;
    EnhancedDelayReport r;
    r.y0 = p0.y;
    try {
        r.trajectory = simulate_coupled(p0, params, stop, opt);
    } catch (const BudgetExceeded<CoupledTrajectory>& e) {
        r.trajectory = e.partial();
    }
    for (const auto& e : r.trajectory.events) {
        if (e.kind != CoupledEventKind::switching_line) continue;
        // y is largest where an upper passage ends and smallest where a lower one ends
        if (e.p.y >= 0)
            r.peaks.push_back(e.p.y);
        else
            r.valleys.push_back(e.p.y);
    }
    r.loops_completed = int(std::min(r.peaks.size(), r.valleys.size()));
    for (int k = 1; k <= n_loops; ++k) {
        r.predicted_peaks.push_back(2.0 * k - 1.0 - p0.y);
        r.predicted_valleys.push_back(-2.0 * k + p0.y);
    }
    r.t_end = r.trajectory.samples.empty() ? 0.0 : r.trajectory.back().t;
    return r;
}

// -- CSV ----------------------------------------------------------------------------------------

std::string trajectory_csv(const CoupledTrajectory& tr) {
    std::string out = "t,x,y,zone\n";
    for (const auto& s : tr.samples) out += csv::line({csv::real(s.t), csv::real(s.p.x), csv::real(s.p.y), s.zone});
    return out;
}

std::vector<CoupledSample> parse_trajectory_csv(std::string_view text) {
    auto tab = csv::parse(text);
    int it = tab.column("t"), ix = tab.column("x"), iy = tab.column("y"), iz = tab.column("zone");
    if (it < 0 || ix < 0 || iy < 0 || iz < 0) throw std::runtime_error("trajectory csv: missing column");
    std::vector<CoupledSample> out;
    for (const auto& r : tab.rows) out.push_back({csv::to_real(r[it]), {csv::to_real(r[ix]), csv::to_real(r[iy])}, r[iz]});
    return out;
}

std::string scan_csv(const std::vector<ScanPoint>& pts) {
    std::string out = "lambda,epsilon,amplitude,period,converged\n";
    for (const auto& p : pts)
        out += csv::line({csv::real(p.lambda), csv::real(p.epsilon), csv::real(p.amplitude), csv::real(p.period),
                          p.converged ? "1" : "0"});
    return out;
}

std::string enhanced_csv(const EnhancedDelayReport& r) {
    std::string out = "loop,peak,valley,predicted_peak,predicted_valley\n";
    for (std::size_t k = 0; k < r.predicted_peaks.size(); ++k) {
        std::string pk = k < r.peaks.size() ? csv::real(r.peaks[k]) : "nan";
        std::string vl = k < r.valleys.size() ? csv::real(r.valleys[k]) : "nan";
        out += csv::line({std::to_string(k + 1), pk, vl, csv::real(r.predicted_peaks[k]), csv::real(r.predicted_valleys[k])});
    }
    return out;
}

}  // namespace pwltc::coupled
