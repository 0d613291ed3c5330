#pragma once

#include <map>
#include <string>
#include <vector>

#include "pwltc/params.hpp"

// Numerical checks of the asymptotic statements. Each check
// runs the exact propagators at finite parameters and compares against the
// quantitative claim, with K = 10 in front of asymptotic orders.

namespace pwltc::checks {

struct Aux {
    double rho = 1.0;
    double delta = 0.05;
    double c = 0.5;
    double d = 2.0;
};

struct CheckReport {
    std::string check_id;
    double lambda = 0.0;
    double lambda_minus_one = 0.0;
    double epsilon = 0.0;
    Aux aux;
    std::map<std::string, double> measured;
    /// "<name>.max" / "<name>.min" bound the measured value "<name>"
    std::map<std::string, double> bound;
    bool pass = true;

    void at_most(const std::string& name, double value, double max);
    void at_least(const std::string& name, double value, double min);
    void within(const std::string& name, double value, double min, double max);
};

struct Fixture {
    std::string check_id;
    Params params;
    Aux aux;
};

/// Registered ids, in report order.
const std::vector<std::string>& check_ids();

/// Parameters the shipped suite runs each check at. Throws UsageError for
/// an unknown id.
Fixture default_fixture(const std::string& check_id);

/// Throws UsageError for an unknown id and PreconditionError when params
/// violate the statement's hypotheses.
CheckReport run_check(const std::string& check_id, const Params& params, const Aux& aux);

std::vector<CheckReport> run_all();

/// JSON array, keys sorted, numbers at round-trip precision.
std::string reports_json(const std::vector<CheckReport>& reports);
std::vector<CheckReport> parse_reports_json(const std::string& text);

}  // namespace pwltc::checks
