#include "pwltc/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pwltc/csv.hpp"
#include "pwltc/errors.hpp"

namespace pwltc {

Params LambdaSchedule::resolve(double epsilon) const {
    return std::visit(
        [&](const auto& v) -> Params {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FixedLambda>) {
                return Params::fixed(v.lambda, epsilon);
            } else {
                if (!(epsilon > 0.0)) throw DomainError("exponential schedule needs epsilon > 0");
                if (v.c / epsilon >= 700.0)
                    throw DomainError("exp(-c/epsilon) underflows: need c/epsilon < 700");
                double off = std::exp(-v.c / epsilon);
                if constexpr (std::is_same_v<T, NearOnePlus>)
                    return Params::from_offset(off, epsilon);
                else
                    return Params::from_offset(-off, epsilon);
            }
        },
        v_);
}

std::string LambdaSchedule::describe() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, FixedLambda>)
                os << "lambda=" << v.lambda;
            else if constexpr (std::is_same_v<T, NearOnePlus>)
                os << "lambda=1+exp(-" << v.c << "/eps)";
            else
                os << "lambda=1-exp(-" << v.c << "/eps)";
        },
        v_);
    return os.str();
}

}  // namespace pwltc

namespace pwltc::nf {

std::string_view to_string(Quadrant q) {
    switch (q) {
        case Quadrant::Q1: return "Q1";
        case Quadrant::Q2: return "Q2";
        case Quadrant::Q3: return "Q3";
        case Quadrant::Q4: return "Q4";
    }
    return "?";
}

std::string_view to_string(Axis a) { return a == Axis::x_axis ? "x_axis" : "y_axis"; }

Quadrant parse_quadrant(std::string_view s) {
    if (s == "Q1") return Quadrant::Q1;
    if (s == "Q2") return Quadrant::Q2;
    if (s == "Q3") return Quadrant::Q3;
    if (s == "Q4") return Quadrant::Q4;
    throw std::invalid_argument("unknown quadrant label '" + std::string(s) + "'");
}

Axis parse_axis(std::string_view s) {
    if (s == "x_axis") return Axis::x_axis;
    if (s == "y_axis") return Axis::y_axis;
    throw std::invalid_argument("unknown axis label '" + std::string(s) + "'");
}

static Quadrant from_signs(int sx, int sy) {
    if (sx > 0) return sy > 0 ? Quadrant::Q1 : Quadrant::Q2;
    return sy < 0 ? Quadrant::Q3 : Quadrant::Q4;
}

static int x_side(Quadrant q) { return (q == Quadrant::Q1 || q == Quadrant::Q2) ? 1 : -1; }
static int y_side(Quadrant q) { return (q == Quadrant::Q1 || q == Quadrant::Q4) ? 1 : -1; }

std::optional<Quadrant> open_quadrant(Point p) {
    if (p.x == 0.0 || p.y == 0.0) return std::nullopt;
    return from_signs(p.x > 0 ? 1 : -1, p.y > 0 ? 1 : -1);
}

Velocity vector_field(Point p, const Params& params) {
    double eps = params.epsilon();
    return {std::abs(p.x) - std::abs(p.y) + params.lambda() * eps, eps};
}

Quadrant classify_quadrant(Point p, const Params& params) {
    if (auto q = open_quadrant(p)) return *q;
    const double eps = params.epsilon();
    const Velocity v = vector_field(p, params);
    auto sgn = [](double a) { return (a > 0) - (a < 0); };

    int sy = p.y != 0.0 ? sgn(p.y) : sgn(v.dy);
    int sx;
    if (p.x != 0.0) {
        sx = sgn(p.x);
    } else if (p.y > 0.0 && std::abs(p.y - params.lambda() * eps) <= 1e-12) {
        sx = -1;  // tangency point: the orbit touches the axis and stays left
    } else if (v.dx != 0.0) {
        sx = sgn(v.dx);
    } else {
        // x' = 0 on x = 0, so x'' = -sign(y) eps decides
        sx = -sgn(p.y) * (eps > 0 ? 1 : 0);
    }
    if (sx != 0 && sy != 0) return from_signs(sx, sy);
    // Remaining ties: largest compatible label.
    Quadrant best = Quadrant::Q1;
    for (Quadrant q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4}) {
        if (sx != 0 && x_side(q) != sx) continue;
        if (sy != 0 && y_side(q) != sy) continue;
        best = q;
    }
    return best;
}

QuadrantCoefficients coefficients(Quadrant q, const Params& params) {
    const double eps = params.epsilon();
    const double lm1 = params.lambda_minus_one() * eps;
    const double lp1 = params.lambda_plus_one() * eps;
    switch (q) {
        case Quadrant::Q1: return {1.0, 1.0, -lm1};
        case Quadrant::Q2: return {1.0, -1.0, -lp1};
        case Quadrant::Q3: return {-1.0, 1.0, lm1};
        case Quadrant::Q4: return {-1.0, -1.0, lp1};
    }
    throw ContractViolation("bad quadrant");
}

ZoneFlow::ZoneFlow(Point p0, const Params& params, Quadrant zone)
    : p0_(p0), zone_(zone), k_(coefficients(zone, params)), eps_(params.epsilon()) {
    a_ = p0.x - k_.beta * p0.y - k_.gamma;
}

double ZoneFlow::x(double t) const {
    const double st = k_.sigma * t;
    if (std::abs(st) <= 1.0) return p0_.x + a_ * std::expm1(st) + k_.beta * eps_ * t;
    return deviation(t) + k_.beta * y(t) + k_.gamma;
}

// an orbit exactly on the slow line has a_ == 0 and must stay there for any t
double ZoneFlow::deviation(double t) const { return a_ == 0.0 ? 0.0 : a_ * std::exp(k_.sigma * t); }

Point ZoneFlow::at(double t) const { return {x(t), y(t)}; }

roots::ExpLinear<double> ZoneFlow::affine(double a, double b, double c) const {
    return {a * a_, k_.sigma, a * k_.beta * eps_ + b * eps_, a * p0_.x + b * p0_.y + c};
}

Point local_flow(Point p0, double t, const Params& params, Quadrant zone) {
    if (p0.x * x_side(zone) < 0.0 || p0.y * y_side(zone) < 0.0)
        throw ContractViolation("local_flow: starting point is not in " + std::string(to_string(zone)));
    return ZoneFlow(p0, params, zone).at(t);
}

// Relative tolerance for calling a critical value of x a tangency.
constexpr double kTouchRel = 16.0 * std::numeric_limits<double>::epsilon();

static std::optional<roots::Crossing<double>> y_axis_hit(const ZoneFlow& f, double horizon) {
    auto fx = f.affine(1.0, 0.0, 0.0);
    int s0 = f.origin().x == 0.0 ? x_side(f.zone()) : 0;
    return fx.first_root(horizon, kTouchRel, s0);
}

static std::optional<double> x_axis_hit(const ZoneFlow& f, double horizon) {
    if (y_side(f.zone()) > 0 || f.epsilon() <= 0.0) return std::nullopt;
    double t = -f.origin().y / f.epsilon();
    if (!(t > 0.0) || t > horizon) return std::nullopt;
    return t;
}

namespace {

struct AxisHit {
    Axis axis;
    double t;
    bool touching;
};

// First axis reached inside `horizon`, with near-corner ties resolved by
// the sign of x at the y = 0 time taken from the slow-line form.
std::optional<AxisHit> first_axis(const ZoneFlow& flow, double horizon) {
    auto hx = x_axis_hit(flow, horizon);
    auto hy = y_axis_hit(flow, hx ? *hx : horizon);
    if (hx && hy && hy->t >= *hx * (1.0 - 1e-9)) {
        double xs = x_side(flow.zone()) *
                    (std::abs(*hx) <= 1.0 ? flow.x(*hx) : flow.deviation(*hx) + flow.gamma());
        if (xs >= 0.0) hy.reset();
    }
    if (hy) return AxisHit{Axis::y_axis, hy->t, hy->touching};
    if (hx) return AxisHit{Axis::x_axis, *hx, false};
    return std::nullopt;
}

}  // namespace

std::optional<double> crossing_time(Point p0, const Params& params, Quadrant zone, Axis target) {
    ZoneFlow f(p0, params, zone);
    auto h = first_axis(f, std::numeric_limits<double>::infinity());
    if (!h || h->axis != target) return std::nullopt;
    return h->t;
}

std::optional<double> time_to_vertical(Point p0, const Params& params, Quadrant zone, double x_target) {
    ZoneFlow f(p0, params, zone);
    auto r = f.affine(1.0, 0.0, -x_target).first_root(std::numeric_limits<double>::infinity());
    if (!r) return std::nullopt;
    return r->t;
}

// -- stop conditions -----------------------------------------------------------

StopCondition StopCondition::time(double t) {
    StopCondition s;
    s.t_max = t;
    return s;
}

StopCondition StopCondition::x_at_least(double x) {
    StopCondition s;
    s.levels.push_back({1.0, 0.0, -x, +1, {}, "x>=" + csv::real(x)});
    return s;
}

StopCondition StopCondition::x_at_most(double x) {
    StopCondition s;
    s.levels.push_back({1.0, 0.0, -x, -1, {}, "x<=" + csv::real(x)});
    return s;
}

StopCondition StopCondition::y_at_least(double y) {
    StopCondition s;
    s.levels.push_back({0.0, 1.0, -y, +1, {}, "y>=" + csv::real(y)});
    return s;
}

StopCondition& StopCondition::or_level(LevelStop l) {
    levels.push_back(std::move(l));
    return *this;
}

StopCondition& StopCondition::or_time(double t) {
    t_max = std::min(t_max, t);
    return *this;
}

// -- propagation -----------------------------------------------------------------

namespace {

struct LevelHit {
    double t;
    int index;
};

std::optional<LevelHit> first_level_hit(const ZoneFlow& f, const StopCondition& stop, double horizon) {
    std::optional<LevelHit> best;
    for (std::size_t i = 0; i < stop.levels.size(); ++i) {
        const auto& l = stop.levels[i];
        auto g = f.affine(l.a, l.b, l.c);
        for (const auto& r : g.all_roots(horizon)) {
            if (best && r.t >= best->t) break;
            double d = g.derivative(r.t);
            if (r.touching || d == 0.0) continue;
            if (l.direction != 0 && (d > 0) != (l.direction > 0)) continue;
            if (l.accept && !l.accept(f.at(r.t))) continue;
            best = LevelHit{r.t, static_cast<int>(i)};
            break;
        }
    }
    return best;
}

Point snap_to_level(Point p, const LevelStop& l) {
    if (l.b == 0.0 && l.a != 0.0) p.x = -l.c / l.a;
    if (l.a == 0.0 && l.b != 0.0) p.y = -l.c / l.b;
    return p;
}

void push_sample(Trajectory& tr, Sample s) {
    if (!tr.samples.empty() && !(s.t > tr.samples.back().t)) {
        tr.samples.back() = s;
        return;
    }
    tr.samples.push_back(s);
}

}  // namespace

Trajectory propagate_orbit(Point p0, const Params& params, const StopCondition& stop,
                           const PropagateOptions& opt) {
    if (!(params.epsilon() > 0.0)) throw DomainError("propagation needs epsilon > 0");
    if (!std::isfinite(p0.x) || !std::isfinite(p0.y)) throw DomainError("non-finite start point");

    Trajectory tr;
    Point p = p0;
    double t = 0.0;
    Quadrant zone = classify_quadrant(p, params);
    tr.samples.push_back({0.0, p, zone});

    while (true) {
        if (tr.segments.size() >= opt.max_segments)
            throw BudgetExceeded<Trajectory>("propagate_orbit: segment budget exhausted", tr);
        ZoneFlow flow(p, params, zone);
        double horizon = stop.t_max - t;
        if (horizon <= 0.0) {
            tr.reason = StopReason::time;
            return tr;
        }

        auto hit = first_axis(flow, horizon);
        double t_axis = hit ? hit->t : horizon;
        bool axis_hit = hit.has_value();
        Axis axis = hit ? hit->axis : Axis::y_axis;
        auto lh = first_level_hit(flow, stop, t_axis);

        auto dense = [&](double dt_end) {
            for (int k = 1; k <= opt.samples_per_segment; ++k) {
                double s = dt_end * k / (opt.samples_per_segment + 1);
                push_sample(tr, {t + s, flow.at(s), zone});
            }
        };

        if (lh) {
            dense(lh->t);
            Point q = snap_to_level(flow.at(lh->t), stop.levels[lh->index]);
            tr.segments.push_back({t, t + lh->t, flow});
            push_sample(tr, {t + lh->t, q, zone});
            tr.reason = StopReason::level;
            tr.level_index = lh->index;
            return tr;
        }
        if (!axis_hit) {
            dense(horizon);
            tr.segments.push_back({t, stop.t_max, flow});
            push_sample(tr, {stop.t_max, flow.at(horizon), zone});
            tr.reason = StopReason::time;
            return tr;
        }

        dense(t_axis);
        Point q;
        if (axis == Axis::x_axis) {
            // y = 0 exactly; x from the slow-line form unless the step is short
            q.y = 0.0;
            q.x = std::abs(t_axis) <= 1.0 ? flow.x(t_axis) : flow.deviation(t_axis) + flow.gamma();
        } else {
            // x = 0 exactly; y from the slow-line relation keeps small
            // offsets from the slow line that y0 + eps t would round away
            q.x = 0.0;
            q.y = std::abs(t_axis) <= 1.0 ? flow.y(t_axis)
                                          : flow.beta() * (-flow.deviation(t_axis) - flow.gamma());
        }
        tr.segments.push_back({t, t + t_axis, flow});
        t += t_axis;
        p = q;
        zone = classify_quadrant(p, params);
        tr.events.push_back({t, p, axis, hit->touching});
        push_sample(tr, {t, p, zone});
    }
}

// -- points and branches -----------------------------------------------------------

Point tangency_point(const Params& params) { return {0.0, params.epsilon() * params.lambda()}; }

Point entry_point_pa_minus(const Params& params) {
    const double e = params.epsilon() * params.lambda_minus_one();  // eps (lambda - 1)
    const double x = std::min(0.0, e);
    // y = x + eps (1 - lambda); written so that lambda < 1 gives y = 0 exactly
    const double y = e < 0.0 ? 0.0 : -e;
    return {x, y};
}

std::string_view to_string(Stability s) { return s == Stability::attracting ? "attracting" : "repelling"; }
std::string_view to_string(BranchSign s) { return s == BranchSign::plus ? "plus" : "minus"; }

Quadrant ManifoldBranch::quadrant() const {
    if (kind == Stability::attracting) return sign == BranchSign::minus ? Quadrant::Q3 : Quadrant::Q4;
    return sign == BranchSign::minus ? Quadrant::Q2 : Quadrant::Q1;
}

ManifoldBranch slow_manifold(Stability kind, BranchSign sign, const Params& params) {
    const double eps = params.epsilon();
    const double lm1 = eps * params.lambda_minus_one();
    const double lp1 = eps * params.lambda_plus_one();
    const double inf = std::numeric_limits<double>::infinity();
    if (kind == Stability::attracting) {
        if (sign == BranchSign::minus) return {kind, sign, 1.0, -lm1, -inf, std::min(0.0, lm1)};
        return {kind, sign, -1.0, lp1, -inf, 0.0};
    }
    if (sign == BranchSign::minus) return {kind, sign, -1.0, -lp1, 0.0, inf};
    return {kind, sign, 1.0, lm1, std::max(0.0, -lm1), inf};
}

// -- CSV ---------------------------------------------------------------------------

std::string samples_csv(const Trajectory& tr) {
    std::string out = "t,x,y,zone\n";
    for (const auto& s : tr.samples)
        out += csv::line({csv::real(s.t), csv::real(s.p.x), csv::real(s.p.y), std::string(to_string(s.zone))});
    return out;
}

std::string events_csv(const Trajectory& tr) {
    std::string out = "t,x,y,axis\n";
    for (const auto& e : tr.events)
        out += csv::line({csv::real(e.t), csv::real(e.p.x), csv::real(e.p.y), std::string(to_string(e.axis))});
    return out;
}

std::vector<Sample> parse_samples_csv(std::string_view text) {
    auto tab = csv::parse(text);
    int it = tab.column("t"), ix = tab.column("x"), iy = tab.column("y"), iz = tab.column("zone");
    if (it < 0 || ix < 0 || iy < 0 || iz < 0) throw std::runtime_error("samples csv: missing column");
    std::vector<Sample> out;
    for (const auto& r : tab.rows)
        out.push_back({csv::to_real(r[it]), {csv::to_real(r[ix]), csv::to_real(r[iy])}, parse_quadrant(r[iz])});
    return out;
}

std::vector<AxisEvent> parse_events_csv(std::string_view text) {
    auto tab = csv::parse(text);
    int it = tab.column("t"), ix = tab.column("x"), iy = tab.column("y"), ia = tab.column("axis");
    if (it < 0 || ix < 0 || iy < 0 || ia < 0) throw std::runtime_error("events csv: missing column");
    std::vector<AxisEvent> out;
    for (const auto& r : tab.rows)
        out.push_back({csv::to_real(r[it]), {csv::to_real(r[ix]), csv::to_real(r[iy])}, parse_axis(r[ia])});
    return out;
}

}  // namespace pwltc::nf
