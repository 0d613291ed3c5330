#pragma once

#include <cmath>
#include <string>
#include <variant>

#include "pwltc/errors.hpp"

namespace pwltc {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a) { return {-a.x, -a.y}; }

struct Velocity {
    double dx = 0.0;
    double dy = 0.0;
};

/// Bifurcation parameter lambda and singular parameter epsilon.
///
/// lambda - 1 is stored separately so that schedules with lambda
/// exponentially close to one keep their full relative precision; every
/// flow formula reads the offset rather than recomputing lambda - 1.
class Params {
public:
    static Params fixed(double lambda, double epsilon) {
        return Params(lambda, lambda - 1.0, epsilon);
    }

    /// lambda = 1 + offset, with the offset known exactly.
    static Params from_offset(double offset, double epsilon) {
        return Params(1.0 + offset, offset, epsilon);
    }

    double lambda() const noexcept { return lambda_; }
    double epsilon() const noexcept { return epsilon_; }
    double lambda_minus_one() const noexcept { return offset_; }
    /// (1 + lambda), computed from the stored offset.
    double lambda_plus_one() const noexcept { return 2.0 + offset_; }

private:
    Params(double lambda, double offset, double epsilon)
        : lambda_(lambda), offset_(offset), epsilon_(epsilon) {
        if (!(lambda > 0.0) || !std::isfinite(lambda))
            throw DomainError("lambda must be finite and > 0");
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw DomainError("epsilon must be finite and >= 0");
    }

    double lambda_;
    double offset_;
    double epsilon_;
};

struct FixedLambda {
    double lambda;
};
/// lambda = 1 + exp(-c / epsilon)
struct NearOnePlus {
    double c;
};
/// lambda = 1 - exp(-c / epsilon)
struct NearOneMinus {
    double c;
};

class LambdaSchedule {
public:
    using Variant = std::variant<FixedLambda, NearOnePlus, NearOneMinus>;

    LambdaSchedule(FixedLambda f) : v_(f) {}
    LambdaSchedule(NearOnePlus p) : v_(p) { check_c(p.c); }
    LambdaSchedule(NearOneMinus m) : v_(m) { check_c(m.c); }

    /// Resolves the schedule at a given epsilon.
    Params resolve(double epsilon) const;

    const Variant& variant() const noexcept { return v_; }
    std::string describe() const;

private:
    static void check_c(double c) {
        if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("schedule constant c must be > 0");
    }
    Variant v_;
};

}  // namespace pwltc
