#include "pwltc/delay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pwltc/errors.hpp"

namespace pwltc::delay {

using nf::Quadrant;
using nf::StopCondition;

double w_function(double z) { return (1.0 + z) * std::exp(-z); }

double c_of_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw DomainError("C(lambda) needs 0 < lambda < 1");
    // log form ln(1 + C) - C = ln(1 - lambda) + lambda; decreasing in C > 0
    const double rhs = std::log1p(-lambda) + lambda;
    auto g = [rhs](double c) { return std::log1p(c) - c - rhs; };
    auto dg = [](double c) { return 1.0 / (1.0 + c) - 1.0; };
    double hi = 1.0;
    while (g(hi) > 0.0) hi *= 2.0;
    double c = roots::safeguarded_newton<double>(g, dg, 0.0, hi, +1);
    // polish on the original equation, which is what the residual is taken on
    const double target = (1.0 - lambda) * std::exp(lambda);
    for (int i = 0; i < 3; ++i) {
        double d = -c * std::exp(-c);
        if (d == 0.0) break;
        double step = (w_function(c) - target) / d;
        if (!std::isfinite(step)) break;
        double next = c - step;
        if (std::abs(w_function(next) - target) >= std::abs(w_function(c) - target)) break;
        c = next;
    }
    return c;
}

double eps0(double lambda) {
    double c = c_of_lambda(lambda);
    return std::exp(1.0 - c) / (c - 1.0);
}

double eps1(double lambda, double rho) {
    if (!(lambda > 1.0)) throw DomainError("eps1 needs lambda > 1");
    if (!(rho > 0.0)) throw DomainError("eps1 needs rho > 0");
    double em = std::expm1(lambda - 1.0);
    double a = std::sqrt(2.0 * em / (rho + lambda - 1.0));
    double b = rho / (2.0 * em + 2.0 - (lambda + 1.0));
    return std::min(a, b);
}

double eps_threshold(double lambda, double rho) {
    if (lambda == 1.0) throw DomainError("lambda = 1 is degenerate: the threshold vanishes");
    if (lambda > 1.0) return eps1(lambda, rho);
    if (lambda <= std::log(2.0)) return std::numeric_limits<double>::infinity();
    return eps0(lambda);
}

// -- tube ------------------------------------------------------------------------

Tube::Tube(const Params& params, double d) : delta(d) {
    lm1 = params.epsilon() * params.lambda_minus_one();
    xa_hi = std::min(0.0, lm1);
    xr_lo = std::max(0.0, -lm1);
}

bool Tube::contains(Point p) const {
    bool a = p.x <= xr_lo && std::abs(p.y - p.x + lm1) <= delta;
    bool r = p.x >= xa_hi && std::abs(p.y - p.x - lm1) <= delta;
    return a || r;
}

bool Tube::contains_repelling(Point p) const {
    return p.x > xr_lo && std::abs(p.y - p.x - lm1) <= delta;
}

static std::vector<std::array<double, 3>> tube_boundaries(const Tube& tube) {
    return {{1.0, 0.0, -tube.xa_hi},
            {1.0, 0.0, -tube.xr_lo},
            {-1.0, 1.0, tube.lm1 - tube.delta},
            {-1.0, 1.0, tube.lm1 + tube.delta},
            {-1.0, 1.0, -tube.lm1 - tube.delta},
            {-1.0, 1.0, -tube.lm1 + tube.delta}};
}

std::vector<Interval> membership_intervals(const nf::Segment& seg,
                                           const std::vector<std::array<double, 3>>& boundaries,
                                           const std::function<bool(Point)>& inside) {
    const double T = seg.t1 - seg.t0;
    std::vector<double> cuts{0.0, T};
    for (const auto& b : boundaries)
        for (const auto& r : seg.flow.affine(b[0], b[1], b[2]).all_roots(T))
            if (r.t > 0.0 && r.t < T) cuts.push_back(r.t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Interval> out;
    if (T <= 0.0) {
        if (inside(seg.flow.at(0.0))) out.push_back({seg.t0, seg.t0});
        return out;
    }
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        if (!inside(seg.flow.at(mid))) continue;
        double lo = seg.t0 + cuts[i], hi = seg.t0 + cuts[i + 1];
        if (!out.empty() && out.back().hi == lo)
            out.back().hi = hi;
        else
            out.push_back({lo, hi});
    }
    return out;
}

// Point at absolute time t on a trajectory made of segments.
static Point point_at(const nf::Trajectory& tr, double t) {
    for (const auto& s : tr.segments)
        if (t >= s.t0 && t <= s.t1) return s.flow.at(t - s.t0);
    return tr.back().p;
}

static std::vector<Interval> intervals_along(const nf::Trajectory& tr,
                                             const std::vector<std::array<double, 3>>& boundaries,
                                             const std::function<bool(Point)>& inside) {
    std::vector<Interval> all;
    for (const auto& s : tr.segments)
        for (auto iv : membership_intervals(s, boundaries, inside)) {
            if (!all.empty() && all.back().hi == iv.lo)
                all.back().hi = iv.hi;
            else
                all.push_back(iv);
        }
    return all;
}

// -- transition map -------------------------------------------------------------------

TransitionResult transition_map(double r, const Params& params, const SectionSpec& spec) {
    const double eps = params.epsilon();
    if (!(eps > 0.0)) throw DomainError("transition_map needs epsilon > 0");
    if (!(spec.rho > 0.0)) throw DomainError("rho must be > 0");
    const double rho = spec.rho;
    Point p0{-rho, -rho - eps * params.lambda_minus_one() + r};
    if (!(p0.y < 0.0)) throw PreconditionError("entry point is not in Q3 (need -rho + eps(1-lambda) + r < 0)");

    StopCondition stop = StopCondition::x_at_least(rho);
    stop.or_level({1.0, 0.0, rho, -1, [](Point p) { return p.y > 0.0; }, "out_a"});
    stop.or_level({0.0, 1.0, -spec.y_cap, +1, {}, "y_cap"});
    auto tr = nf::propagate_orbit(p0, params, stop);
    if (tr.reason != nf::StopReason::level || tr.level_index == 2)
        throw WindowError("orbit left the window |y| <= " + std::to_string(spec.y_cap) + " without reaching a section");

    TransitionResult res;
    const auto& last = tr.segments.back();
    res.exit_point = tr.back().p;
    res.flight_time = tr.back().t;
    if (tr.level_index == 0) {
        res.exit_section = Section::out_e;
        res.exit_offset = res.exit_point.y;
    } else {
        res.exit_section = Section::out_a;
        // on Q4 the offset from S_a^+ along x = -rho is exactly A e^{-t}
        res.exit_offset = last.flow.deviation(last.t1 - last.t0);
    }
    res.attracting_deviation = 0.0;
    for (const auto& s : tr.segments)
        if (s.flow.zone() == Quadrant::Q3) res.attracting_deviation = s.flow.deviation(s.t1 - s.t0);
    res.trajectory = std::move(tr);
    return res;
}

// -- way-in / way-out ---------------------------------------------------------------

static StopCondition far_field(double y_cap, double reach) {
    StopCondition stop = StopCondition::y_at_least(y_cap);
    stop.or_level({1.0, 0.0, -reach, +1, {}, "x_far"});
    stop.or_level({1.0, 0.0, reach, -1, {}, "x_far"});
    return stop;
}

WayInOutSample way_in_way_out(double y_in_offset, const Params& params, double delta, double rho, double y_cap) {
    const double eps = params.epsilon();
    if (!(eps > 0.0)) throw DomainError("way_in_way_out needs epsilon > 0");
    if (!(delta > 2.0 * eps)) throw PreconditionError("tube radius must satisfy delta > 2 eps");
    if (std::abs(y_in_offset) > delta) throw PreconditionError("entry offset must satisfy |offset| <= delta");
    Tube tube(params, delta);
    Point p0{-rho, -rho + y_in_offset};
    auto tr = nf::propagate_orbit(p0, params, far_field(y_cap, y_cap + rho + delta + 1.0));
    auto ivs = intervals_along(tr, tube_boundaries(tube), [&](Point p) { return tube.contains(p); });
    if (ivs.empty()) throw PreconditionError("orbit never enters the tube");
    WayInOutSample s{p0.y, 0.0, false};
    const auto& first = ivs.front();
    s.y_out = point_at(tr, first.hi).y;
    s.unbounded = (first.hi >= tr.back().t) && tr.level_index == 0;
    return s;
}

// -- maximal delay -----------------------------------------------------------------

DelayReport maximal_delay(const Params& params, double delta, double rho, double y_cap) {
    const double eps = params.epsilon();
    if (!(eps > 0.0)) throw DomainError("maximal_delay needs epsilon > 0");
    if (!(delta > 2.0 * eps)) throw PreconditionError("tube radius must satisfy delta > 2 eps");
    Tube tube(params, delta);
    Point pa = nf::entry_point_pa_minus(params);
    const double reach = std::max(rho, y_cap) + delta + 1.0;
    auto tr = nf::propagate_orbit(pa, params, far_field(y_cap, reach));
    auto ivs = intervals_along(tr, tube_boundaries(tube), [&](Point p) { return tube.contains_repelling(p); });

    DelayReport rep{0.0, pa, delta, false, false};
    if (ivs.empty()) return rep;
    const auto& last = ivs.back();
    Point q = point_at(tr, last.hi);
    rep.z_d = std::clamp(q.y, 0.0, y_cap);
    rep.exit_point = q;
    rep.followed_repelling = rep.z_d > 0.0;
    rep.unbounded = last.hi >= tr.back().t && tr.level_index == 0;
    if (rep.unbounded) rep.z_d = y_cap;
    return rep;
}

// -- Theorem-type endpoint --------------------------------------------------------------

Thm3Result thm3_endpoint(double c, double epsilon, Near sign) {
    if (!(c > 0.0) || !(epsilon > 0.0)) throw DomainError("need c > 0 and epsilon > 0");
    if (c / epsilon >= 700.0) throw DomainError("exp(-c/epsilon) underflows: need c/epsilon < 700");
    LambdaSchedule sched = sign == Near::plus ? LambdaSchedule(NearOnePlus{c}) : LambdaSchedule(NearOneMinus{c});
    Params params = sched.resolve(epsilon);

    Thm3Result r;
    r.tau1 = std::exp(-c / epsilon);
    r.tau2 = c / epsilon + std::log(c / (2.0 * epsilon));
    r.flight_time = r.tau1 + r.tau2;
    const double X = epsilon * std::log(c / (2.0 * epsilon));
    r.predicted = sign == Near::plus ? Point{2.0 * c + X, c + X} : Point{X, c + X};
    auto tr = nf::propagate_orbit(nf::entry_point_pa_minus(params), params, StopCondition::time(r.flight_time));
    r.measured = tr.back().p;
    r.deviation = r.measured - r.predicted;
    return r;
}

OriginExit origin_orbit_exit(const Params& params) {
    if (!(params.lambda() < 1.0)) throw DomainError("origin orbit returns to x = 0 only for lambda < 1");
    if (!(params.epsilon() > 0.0)) throw DomainError("origin_orbit_exit needs epsilon > 0");
    auto t = nf::crossing_time({0.0, 0.0}, params, Quadrant::Q1, nf::Axis::y_axis);
    if (!t) throw NumericError("origin orbit did not return to the y-axis");
    return {{0.0, params.epsilon() * *t}, *t};
}

}  // namespace pwltc::delay
