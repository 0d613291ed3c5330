#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwltc/params.hpp"
#include "pwltc/roots.hpp"

// Piecewise linear transcritical normal form
//
//   x' = |x| - |y| + lambda * eps
//   y' = eps
//
// Inside each open quadrant the system is affine and the flow has a closed
// form x(t) = A e^{sigma t} + beta y(t) + gamma, y(t) = y0 + eps t, where
// x = beta y + gamma is the slow line of that quadrant.

namespace pwltc::nf {

/// Clockwise labels: Q1 (+,+), Q2 (+,-), Q3 (-,-), Q4 (-,+).
enum class Quadrant : int { Q1 = 1, Q2 = 2, Q3 = 3, Q4 = 4 };

enum class Axis { x_axis, y_axis };

std::string_view to_string(Quadrant q);
std::string_view to_string(Axis a);
Quadrant parse_quadrant(std::string_view s);
Axis parse_axis(std::string_view s);

/// Label of the open quadrant containing p, or nullopt when p is on an axis.
std::optional<Quadrant> open_quadrant(Point p);

/// Quadrant label with the axis rule: a point on an axis belongs to the
/// quadrant its forward orbit enters. When the velocity is tangent to the
/// axis the second derivative decides, and a remaining tie goes to the
/// larger label.
Quadrant classify_quadrant(Point p, const Params& params);

Velocity vector_field(Point p, const Params& params);

/// Coefficients of the closed-form flow in one quadrant.
struct QuadrantCoefficients {
    double sigma;  ///< +1 repelling (Q1, Q2), -1 attracting (Q3, Q4)
    double beta;   ///< slope of the slow line x = beta y + gamma
    double gamma;
};

QuadrantCoefficients coefficients(Quadrant q, const Params& params);

/// Closed-form flow in one quadrant starting from p0.
class ZoneFlow {
public:
    ZoneFlow(Point p0, const Params& params, Quadrant zone);

    Quadrant zone() const noexcept { return zone_; }
    Point origin() const noexcept { return p0_; }
    /// A in x = A e^{sigma t} + beta y + gamma.
    double amplitude() const noexcept { return a_; }
    double sigma() const noexcept { return k_.sigma; }
    double beta() const noexcept { return k_.beta; }
    double gamma() const noexcept { return k_.gamma; }
    double epsilon() const noexcept { return eps_; }

    Point at(double t) const;
    double x(double t) const;
    double y(double t) const { return p0_.y + eps_ * t; }
    /// Horizontal offset from the slow line, A e^{sigma t}. Kept separate so
    /// exponentially small offsets are not lost against O(1) coordinates.
    double deviation(double t) const;

    /// a x(t) + b y(t) + c as a function of t.
    roots::ExpLinear<double> affine(double a, double b, double c) const;

private:
    Point p0_;
    Quadrant zone_;
    QuadrantCoefficients k_;
    double eps_;
    double a_;
};

/// Closed-form quadrant flow. The caller guarantees the segment [0, t]
/// stays inside `zone`. Throws ContractViolation when p0 lies strictly
/// inside a different quadrant.
Point local_flow(Point p0, double t, const Params& params, Quadrant zone);

/// Smallest t > 0 at which the orbit from p0 meets `target` without first
/// leaving the zone through the other axis.
std::optional<double> crossing_time(Point p0, const Params& params, Quadrant zone, Axis target);

/// Time for the closed-form flow of `zone`, taken on the whole plane, to
/// reach the vertical line x = x_target.
std::optional<double> time_to_vertical(Point p0, const Params& params, Quadrant zone, double x_target);

// -- global propagation ------------------------------------------------------

/// Stop when a x + b y + c changes sign in `direction` (+1 upward through
/// zero, -1 downward, 0 either) at a point accepted by `accept`.
struct LevelStop {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    int direction = 0;
    std::function<bool(Point)> accept;
    std::string name;
};

struct StopCondition {
    double t_max = std::numeric_limits<double>::infinity();
    std::vector<LevelStop> levels;

    static StopCondition time(double t);
    static StopCondition x_at_least(double x);
    static StopCondition x_at_most(double x);
    static StopCondition y_at_least(double y);

    StopCondition& or_level(LevelStop s);
    StopCondition& or_time(double t);
};

struct Sample {
    double t;
    Point p;
    Quadrant zone;
};

struct AxisEvent {
    double t;
    Point p;
    Axis axis;
    bool tangency = false;
};

struct Segment {
    double t0;
    double t1;
    ZoneFlow flow;
};

enum class StopReason { time, level, budget };

struct Trajectory {
    std::vector<Sample> samples;
    std::vector<AxisEvent> events;
    std::vector<Segment> segments;
    StopReason reason = StopReason::time;
    int level_index = -1;  ///< which LevelStop fired

    const Sample& back() const { return samples.back(); }
};

struct PropagateOptions {
    std::size_t max_segments = 100000;
    /// extra uniformly spaced samples inside each segment, for plotting
    int samples_per_segment = 0;
};

/// Chains exact quadrant flows from p0 forward in time. Requires eps > 0.
/// Throws BudgetExceeded<Trajectory> when the segment budget runs out.
Trajectory propagate_orbit(Point p0, const Params& params, const StopCondition& stop,
                           const PropagateOptions& opt = {});

// -- distinguished points and slow manifolds ---------------------------------

/// p_t = (0, eps lambda), where the flow is tangent to the y-axis.
Point tangency_point(const Params& params);
/// Boundary point of the attracting branch for y < 0.
Point entry_point_pa_minus(const Params& params);

enum class Stability { attracting, repelling };
enum class BranchSign { plus, minus };

std::string_view to_string(Stability s);
std::string_view to_string(BranchSign s);

/// Affine piece of a slow manifold, y = slope x + intercept on an open x interval.
struct ManifoldBranch {
    Stability kind;
    BranchSign sign;
    double slope;
    double intercept;
    double x_lo;
    double x_hi;

    double y_at(double x) const { return slope * x + intercept; }
    bool in_domain(double x) const { return x > x_lo && x < x_hi; }
    /// Vertical offset of p from the line.
    double offset(Point p) const { return p.y - y_at(p.x); }
    /// Quadrant the branch lives in.
    Quadrant quadrant() const;
};

ManifoldBranch slow_manifold(Stability kind, BranchSign sign, const Params& params);

// -- CSV ---------------------------------------------------------------------

std::string samples_csv(const Trajectory& tr);
std::string events_csv(const Trajectory& tr);
std::vector<Sample> parse_samples_csv(std::string_view text);
std::vector<AxisEvent> parse_events_csv(std::string_view text);

}  // namespace pwltc::nf
