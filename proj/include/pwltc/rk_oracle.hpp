#pragma once

#include <string>

#include "pwltc/normal_form.hpp"

// Adaptive Dormand-Prince 5(4) reference integrator for the piecewise-linear
// fields. It knows nothing of the closed-form flows: each zone's field is
// frozen, stepped numerically, and zone changes are found by bisection on
// the step length. Used only to cross-check the exact propagators.

namespace pwltc::rk {

struct OracleOptions {
    long double tol = 1e-14L;
    long double h_min = 1e-13L;  ///< relative to max(1, t)
    long max_steps = 20000000;
};

struct OracleResult {
    Point p;
    bool ok = true;
    std::string failure;
    long steps = 0;
    int crossings = 0;
};

/// Normal form with the field of `zone` used everywhere (no switching).
OracleResult normal_form_frozen(Point p0, const Params& params, nf::Quadrant zone, double T,
                                const OracleOptions& opt = {});

/// Normal form over the whole plane; quadrant changes are located numerically.
OracleResult normal_form(Point p0, const Params& params, double T, const OracleOptions& opt = {});

/// Coupled two-transcritical system. Fails (ok = false) when the orbit
/// reaches the sliding segment.
OracleResult coupled(Point p0, const Params& params, double T, const OracleOptions& opt = {});

}  // namespace pwltc::rk
