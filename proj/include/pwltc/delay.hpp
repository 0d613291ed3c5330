#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pwltc/normal_form.hpp"

namespace pwltc::delay {

/// (1 + z) e^{-z}
double w_function(double z);

/// Root C > 0 of W(C) = W(-lambda), for 0 < lambda < 1.
double c_of_lambda(double lambda);

/// e^{1 - C} / (C - 1). Negative when C(lambda) < 1 (lambda below about 0.59).
double eps0(double lambda);
double eps1(double lambda, double rho);
/// Largest epsilon for which the section results are claimed. Below ln 2 the
/// attracting orbit never leaves Q4 and there is no restriction (+inf).
double eps_threshold(double lambda, double rho);

enum class Section { in, out_a, out_e };

struct SectionSpec {
    double rho = 1.0;
    double delta = 0.05;
    double y_cap = 50.0;
};

struct TransitionResult {
    Section exit_section;
    /// signed offset from the section centre: (rho, 0) for out_e, and
    /// (-rho, rho + eps (1 + lambda)) for out_a
    double exit_offset;
    double flight_time;
    Point exit_point;
    /// horizontal offset from the attracting slow line when the orbit left Q3
    double attracting_deviation;
    nf::Trajectory trajectory;
};

/// Entry on the in-section at (-rho, -rho + eps (1 - lambda) + r).
TransitionResult transition_map(double r, const Params& params, const SectionSpec& spec);

/// Tube of radius delta around S_a^- u S_r^+, measured vertically. Between
/// the two branch domains the union of both strips counts.
struct Tube {
    double delta;
    double lm1;   ///< eps (lambda - 1)
    double xa_hi; ///< right end of the S_a^- domain
    double xr_lo; ///< left end of the S_r^+ domain

    Tube(const Params& params, double delta);
    bool contains(Point p) const;
    /// Strip around S_r^+ restricted to its own domain.
    bool contains_repelling(Point p) const;
};

/// Maximal time intervals inside [t0, t1] of a segment on which `inside`
/// holds, assuming membership only changes at zeros of the listed affine
/// functionals (a, b, c) of the segment.
struct Interval {
    double lo;
    double hi;
};
std::vector<Interval> membership_intervals(const nf::Segment& seg,
                                           const std::vector<std::array<double, 3>>& boundaries,
                                           const std::function<bool(Point)>& inside);

struct WayInOutSample {
    double y_in;
    double y_out;
    bool unbounded = false;  ///< still inside the tube at y_cap
};

WayInOutSample way_in_way_out(double y_in_offset, const Params& params, double delta, double rho,
                              double y_cap = 50.0);

struct DelayReport {
    double z_d;
    Point exit_point;
    double tube_delta;
    bool followed_repelling;
    bool unbounded = false;
};

DelayReport maximal_delay(const Params& params, double delta = 0.1, double rho = 1.0, double y_cap = 50.0);

enum class Near { minus, plus };

struct Thm3Result {
    Point predicted;
    double tau1;
    double tau2;
    double flight_time;
    Point measured;
    Point deviation;  ///< measured - predicted
};

Thm3Result thm3_endpoint(double c, double epsilon, Near sign);

struct OriginExit {
    Point exit_point;
    double flight_time;
};

/// First return of the origin orbit to x = 0, for lambda < 1.
OriginExit origin_orbit_exit(const Params& params);

}  // namespace pwltc::delay
