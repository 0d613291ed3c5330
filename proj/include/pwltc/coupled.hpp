#pragma once

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pwltc/params.hpp"

// Two transcritical normal forms glued along the switching line y = x:
//
//   y - x >= 0:  x' =  |x + 1/2| - |y - 1/2| + lambda eps,  y' = eps (y - x)
//   y - x <= 0:  x' = -|x - 1/2| + |y + 1/2| - lambda eps,  y' = eps (y - x)
//
// The two halves are point reflections of each other, F-(z) = -F+(-z).

namespace pwltc::coupled {

enum class Half { upper, lower };

/// One affine sign-zone: z' = matrix z + offset.
struct Zone {
    Half half;
    int s1;  ///< sign of x + 1/2 (upper) or x - 1/2 (lower)
    int s2;  ///< sign of y - 1/2 (upper) or y + 1/2 (lower)
    std::array<std::array<double, 2>, 2> matrix;
    std::array<double, 2> offset;

    static Zone make(Half half, int s1, int s2, const Params& params);
    /// "U+-", "L--", ...
    std::string label() const;
};

Half half_of(Point p);
/// Zone containing p. Points on a sign boundary go to the side the flow
/// enters, as for the single normal form.
Zone zone_of(Point p, const Params& params);

/// Field of the half containing p (upper on the switching line itself).
Velocity coupled_field(Point p, const Params& params);
Velocity half_field(Half h, Point p, const Params& params);

/// Exact affine flow inside one zone, through phi_1(tM) = (e^{tM} - I)/(tM),
/// with separate closed forms for real, complex and repeated eigenvalues.
Point zone_flow(Point p0, double t, const Zone& zone);

/// Eigenvalues of a zone matrix as (re, im) pairs.
std::array<std::array<double, 2>, 2> zone_eigenvalues(const Zone& zone);

struct SlidingSegment {
    Point e_minus;
    Point e_plus;
};

SlidingSegment sliding_segment(const Params& params);

enum class SwitchState { crossing_to_upper, crossing_to_lower, sliding, boundary_equilibrium };

struct FilippovResult {
    SwitchState state;
    Velocity velocity;  ///< entered half's field when crossing; Filippov field otherwise
    double alpha;       ///< weight on F+ in the convex combination (sliding only)
};

/// Filippov convention on y = x. Precondition |y - x| < 1e-12.
FilippovResult filippov_field(Point p, const Params& params);

// -- simulation -------------------------------------------------------------

struct CoupledSample {
    double t;
    Point p;
    std::string zone;  ///< zone label or SLIDE
};

enum class CoupledEventKind { sign_boundary, switching_line, slide };

struct CoupledEvent {
    double t;
    Point p;
    CoupledEventKind kind;
};

enum class CoupledStopReason { time, switching_count, slid, budget };

struct CoupledTrajectory {
    std::vector<CoupledSample> samples;
    std::vector<CoupledEvent> events;
    CoupledStopReason reason = CoupledStopReason::time;
    const CoupledSample& back() const { return samples.back(); }
};

struct CoupledStop {
    double t_max = std::numeric_limits<double>::infinity();
    /// stop after this many crossings of y = x (negative: no limit)
    int max_switchings = -1;
};

struct CoupledOptions {
    std::size_t max_segments = 2000000;
    int samples_per_segment = 0;
    /// dense sampling step in time for mixed zones and long segments (0: off)
    double sample_dt = 0.0;
};

/// Event-driven propagation across x = -+1/2, y = +-1/2 and y = x. Orbits
/// reaching the open sliding segment stop there. Requires 0 < eps < 1.
CoupledTrajectory simulate_coupled(Point p0, const Params& params, const CoupledStop& stop,
                                   const CoupledOptions& opt = {});

/// Upper half-passage from the switching line: start at (s, s) with
/// s < -lambda eps / 2 and follow the upper field until y = x again.
struct HalfPassage {
    bool slid;          ///< arrival inside the closed sliding segment
    double s_out;       ///< arrival abscissa (= ordinate) on y = x
    double time;
    double y_max;       ///< largest y along the passage (= s_out)
};

HalfPassage half_passage(double s, const Params& params);

struct CycleResult {
    double period;
    double amplitude;              ///< y_max - y_min
    std::array<Point, 2> crossings;
    double residual;               ///< |H(s) + s| at the returned fixed point
    int iterations;
    CoupledTrajectory samples;
};

struct CycleOptions {
    double s_start = -0.75;
    int max_iterations = 100;
    double tolerance = 1e-9;
    bool keep_samples = true;
};

/// Symmetric cycle as a fixed point of H(s) = -s. Absent when the orbit
/// ends on the sliding segment. Throws ConvergenceError otherwise.
std::optional<CycleResult> find_limit_cycle(const Params& params, const CycleOptions& opt = {});

struct ScanPoint {
    double lambda;
    double lambda_minus_one;
    double epsilon;
    double amplitude;  ///< NaN when no cycle
    double period;
    bool converged;
    std::string error;
};

/// Amplitude per lambda. The offsets variant avoids rounding lambda - 1
/// when it is exponentially small.
std::vector<ScanPoint> canard_scan(double epsilon, const std::vector<double>& lambda_grid, int threads = 0);
std::vector<ScanPoint> canard_scan_offsets(double epsilon, const std::vector<double>& offsets, int threads = 0);

/// 1 - 2 eps ln(lambda - 1), written with the offset.
double canard_amplitude_prediction(double epsilon, double lambda_minus_one);

struct EnhancedDelayReport {
    double y0;
    std::vector<double> peaks;
    std::vector<double> valleys;
    std::vector<double> predicted_peaks;    ///< 2k - 1 - y0
    std::vector<double> predicted_valleys;  ///< -2k + y0
    int loops_completed;
    double t_end;
    CoupledTrajectory trajectory;
};

/// lambda = 1; one loop is an upper passage (peak) followed by a lower one (valley).
EnhancedDelayReport enhanced_delay_run(Point p0, double epsilon, int n_loops, const CoupledOptions& opt = {});

std::string trajectory_csv(const CoupledTrajectory& tr);
std::vector<CoupledSample> parse_trajectory_csv(std::string_view text);
std::string scan_csv(const std::vector<ScanPoint>& pts);
std::string enhanced_csv(const EnhancedDelayReport& r);

}  // namespace pwltc::coupled
