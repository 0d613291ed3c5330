#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pwltc/normal_form.hpp"
#include "pwltc/rk_oracle.hpp"

using namespace pwltc;
using namespace pwltc::nf;

TEST_CASE("quadrant labels run clockwise") {
    Params p = Params::fixed(2.0, 0.01);
    CHECK(classify_quadrant({1, 1}, p) == Quadrant::Q1);
    CHECK(classify_quadrant({1, -1}, p) == Quadrant::Q2);
    CHECK(classify_quadrant({-1, -1}, p) == Quadrant::Q3);
    CHECK(classify_quadrant({-1, 1}, p) == Quadrant::Q4);
    CHECK_FALSE(open_quadrant({0, 1}).has_value());
}

TEST_CASE("tangency point continues into Q4") {
    CHECK(classify_quadrant({0, 0.02}, Params::fixed(2.0, 0.01)) == Quadrant::Q4);
}

TEST_CASE("axis points go where the orbit goes") {
    Params p = Params::fixed(1.0, 0.1);
    // on the y-axis below the tangency point x' < 0 for y > lambda eps
    CHECK(classify_quadrant({0, 1}, p) == Quadrant::Q4);
    // x-axis: y' = eps > 0 always carries into the upper half
    CHECK(classify_quadrant({1, 0}, p) == Quadrant::Q1);
    CHECK(classify_quadrant({-1, 0}, p) == Quadrant::Q4);
}

TEST_CASE("quadrant and axis names round trip") {
    for (auto q : {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4}) CHECK(parse_quadrant(to_string(q)) == q);
    CHECK(parse_axis(to_string(Axis::x_axis)) == Axis::x_axis);
}

TEST_CASE("vector field") {
    auto v = vector_field({0, 0}, Params::fixed(2.0, 0.1));
    CHECK(v.dx == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(v.dy == doctest::Approx(0.1).epsilon(1e-15));
    v = vector_field({1, 1}, Params::fixed(1.7, 0.03));
    CHECK(v.dx == doctest::Approx(1.7 * 0.03).epsilon(1e-14));
    v = vector_field({-1, 2}, Params::fixed(1.0, 0.01));
    CHECK(v.dx == doctest::Approx(-0.99).epsilon(1e-14));
    CHECK(v.dy == doctest::Approx(0.01).epsilon(1e-14));
}

TEST_CASE("local flow examples") {
    Point a = local_flow({-1, -1}, 5, Params::fixed(1.0, 0.1), Quadrant::Q3);
    CHECK(a.x == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(a.y == doctest::Approx(-0.5).epsilon(1e-13));

    Point b = local_flow({1, 0.5}, 1, Params::fixed(1.0, 0.1), Quadrant::Q1);
    CHECK(b.x == doctest::Approx(0.5 * std::exp(1.0) + 0.6).epsilon(1e-13));
    CHECK(b.y == doctest::Approx(0.6).epsilon(1e-13));

    Params p = Params::fixed(1.0, 0.01);
    Point c = local_flow(tangency_point(p), -1, p, Quadrant::Q4);
    CHECK(c.x == doctest::Approx(-0.01 * (std::exp(1.0) - 2)).epsilon(1e-12));
    CHECK(std::abs(c.y) < 1e-15);
}

TEST_CASE("local flow rejects a point inside another quadrant") {
    CHECK_THROWS_AS(local_flow({1, 1}, 1, Params::fixed(1.0, 0.1), Quadrant::Q3), ContractViolation);
    // axis points are allowed for either neighbour
    CHECK_NOTHROW(local_flow({0, 1}, 0.1, Params::fixed(1.0, 0.1), Quadrant::Q4));
}

TEST_CASE("local flow agrees with the variation-of-constants formula") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-2, 2);
    const int sg[4][2] = {{1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
    const Quadrant qs[] = {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4};
    for (int i = 0; i < 200; ++i) {
        int q = i % 4;
        double lam = 0.1 + std::abs(U(rng)), eps = 0.01 + 0.05 * std::abs(U(rng)), t = std::abs(U(rng));
        Point p0{sg[q][0] * (0.01 + std::abs(U(rng))), sg[q][1] * (0.01 + std::abs(U(rng)))};
        auto [x, y] = oracle::quadrant_flow(sg[q][0], sg[q][1], p0.x, p0.y, lam, eps, t);
        Point got = local_flow(p0, t, Params::fixed(lam, eps), qs[q]);
        CHECK(got.x == doctest::Approx(x).epsilon(1e-12).scale(1));
        CHECK(got.y == doctest::Approx(y).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("flow derivative equals the field") {
    Params p = Params::fixed(1.3, 0.05);
    for (auto [pt, q] : {std::pair{Point{0.7, 0.4}, Quadrant::Q1}, {Point{0.3, -0.8}, Quadrant::Q2},
                         {Point{-0.6, -0.2}, Quadrant::Q3}, {Point{-0.9, 0.5}, Quadrant::Q4}}) {
        const double h = 1e-6;
        Point a = local_flow(pt, h, p, q), b = local_flow(pt, -h, p, q);
        auto v = vector_field(pt, p);
        CHECK((a.x - b.x) / (2 * h) == doctest::Approx(v.dx).epsilon(1e-8));
        CHECK((a.y - b.y) / (2 * h) == doctest::Approx(v.dy).epsilon(1e-8));
    }
}

TEST_CASE("semigroup property") {
    Params p = Params::fixed(0.7, 0.08);
    Point p0{-1.5, -0.9};
    Point two = local_flow(local_flow(p0, 0.4, p, Quadrant::Q3), 0.7, p, Quadrant::Q3);
    Point one = local_flow(p0, 1.1, p, Quadrant::Q3);
    CHECK(two.x == doctest::Approx(one.x).epsilon(1e-14));
    CHECK(two.y == doctest::Approx(one.y).epsilon(1e-14));
}

TEST_CASE("crossing times") {
    Params p = Params::fixed(1.0, 0.01);
    auto t = crossing_time({-1, -0.95}, p, Quadrant::Q3, Axis::x_axis);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(95.0).epsilon(1e-12));
    CHECK_FALSE(crossing_time({-1, -0.95}, p, Quadrant::Q3, Axis::y_axis).has_value());

    Params q = Params::fixed(1.5, 0.01);
    auto sa = slow_manifold(Stability::attracting, BranchSign::minus, q);
    double x0 = -0.3;
    auto ty = crossing_time({x0, sa.y_at(x0)}, q, Quadrant::Q3, Axis::y_axis);
    REQUIRE(ty.has_value());
    CHECK(*ty == doctest::Approx(-x0 / 0.01).epsilon(1e-10));
}

TEST_CASE("full-plane Q1 flow reaches x = rho after time d") {
    Params p = Params::fixed(1.0, 0.1);
    double d = 2, rho = 1;
    Point pd{(rho - 0.1 * d) * std::exp(-d), 0};
    CHECK(pd.x == doctest::Approx(0.10827).epsilon(1e-4));
    auto t = time_to_vertical(pd, p, Quadrant::Q1, rho);
    REQUIRE(t.has_value());
    CHECK(*t == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("distinguished points") {
    Point pt = tangency_point(Params::fixed(2.0, 0.01));
    CHECK(pt.x == 0);
    CHECK(pt.y == doctest::Approx(0.02).epsilon(1e-15));
    Point pa = entry_point_pa_minus(Params::fixed(1.5, 0.01));
    CHECK(pa.x == 0);
    CHECK(pa.y == doctest::Approx(-0.005).epsilon(1e-13));
}

TEST_CASE("at lambda = 1 both branches lie on y = x") {
    Params p = Params::fixed(1.0, 0.03);
    auto a = slow_manifold(Stability::attracting, BranchSign::minus, p);
    auto r = slow_manifold(Stability::repelling, BranchSign::plus, p);
    CHECK(a.slope == 1);
    CHECK(r.slope == 1);
    CHECK(std::abs(a.intercept) < 1e-17);
    CHECK(std::abs(r.intercept) < 1e-17);
    CHECK(a.x_hi == 0);
    CHECK(r.x_lo == 0);
}

TEST_CASE("slow-manifold lines are orbits of the quadrant field") {
    Params p = Params::fixed(1.4, 0.06);
    for (auto k : {Stability::attracting, Stability::repelling})
        for (auto s : {BranchSign::minus, BranchSign::plus}) {
            auto b = slow_manifold(k, s, p);
            double x = std::isfinite(b.x_lo) && std::isfinite(b.x_hi) ? 0.5 * (b.x_lo + b.x_hi)
                       : std::isfinite(b.x_lo)                        ? b.x_lo + 0.5
                                                                      : b.x_hi - 0.5;
            Point q{x, b.y_at(x)};
            CHECK(open_quadrant(q) == b.quadrant());
            // field tangent to the line: dy/dx along the field equals slope
            auto v = vector_field(q, p);
            CHECK(v.dy == doctest::Approx(b.slope * v.dx).epsilon(1e-12));
        }
}

TEST_CASE("origin orbit rides y = x at lambda = 1") {
    auto tr = propagate_orbit({0, 0}, Params::fixed(1.0, 0.01), StopCondition::y_at_least(1.0));
    CHECK(tr.reason == StopReason::level);
    CHECK(std::abs(tr.back().p.x - 1) < 1e-12);
    CHECK(std::abs(tr.back().p.y - 1) < 1e-12);
}

TEST_CASE("exponential-schedule endpoint from p_a^-") {
    Params p = Params::from_offset(std::exp(-10.0), 0.05);
    auto tr = propagate_orbit(entry_point_pa_minus(p), p, StopCondition::y_at_least(0.5805));
    CHECK(tr.back().p.x == doctest::Approx(1.0805).epsilon(1e-3));
    CHECK(tr.back().p.y == doctest::Approx(0.5805).epsilon(1e-9));
}

TEST_CASE("propagation agrees with the RK oracle across axes") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.5, 1.5);
    for (int i = 0; i < 15; ++i) {
        Params p = Params::fixed(0.3 + std::abs(U(rng)), 0.02 + 0.05 * std::abs(U(rng)));
        Point p0{U(rng), U(rng)};
        double T = 3.0;
        auto tr = propagate_orbit(p0, p, StopCondition::time(T));
        auto rk = rk::normal_form(p0, p, T);
        REQUIRE(rk.ok);
        CHECK(tr.back().p.x == doctest::Approx(rk.p.x).epsilon(1e-9).scale(1));
        CHECK(tr.back().p.y == doctest::Approx(rk.p.y).epsilon(1e-9).scale(1));
    }
}

TEST_CASE("time zero and y monotonicity") {
    Params p = Params::fixed(2.0, 0.05);
    auto tr = propagate_orbit({-1, -1}, p, StopCondition::time(0.0));
    CHECK(tr.back().p == Point{-1, -1});
    PropagateOptions opt;
    opt.samples_per_segment = 10;
    auto tr2 = propagate_orbit({-1, -1}, p, StopCondition::time(40.0), opt);
    for (std::size_t i = 1; i < tr2.samples.size(); ++i) CHECK(tr2.samples[i].p.y >= tr2.samples[i - 1].p.y);
}

TEST_CASE("segment budget throws with the partial orbit") {
    PropagateOptions opt;
    opt.max_segments = 1;
    try {
        propagate_orbit({-1, -1}, Params::fixed(2.0, 0.05), StopCondition::time(1e4), opt);
        FAIL("expected BudgetExceeded");
    } catch (const BudgetExceeded<Trajectory>& e) {
        CHECK_FALSE(e.partial().samples.empty());
    }
}

TEST_CASE("level stops fire in the requested direction") {
    Params p = Params::fixed(1.0, 0.01);
    auto tr = propagate_orbit({-1, -1}, p, StopCondition::x_at_least(0.5).or_time(1e4));
    CHECK(tr.reason == StopReason::level);
    CHECK(tr.back().p.x == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("samples and events CSV round trip") {
    PropagateOptions opt;
    opt.samples_per_segment = 7;
    auto tr = propagate_orbit({-1, -1.02}, Params::fixed(1.9, 0.03), StopCondition::y_at_least(1.5), opt);
    auto s = parse_samples_csv(samples_csv(tr));
    REQUIRE(s.size() == tr.samples.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s[i].t == tr.samples[i].t);
        CHECK(s[i].p == tr.samples[i].p);
        CHECK(s[i].zone == tr.samples[i].zone);
    }
    auto e = parse_events_csv(events_csv(tr));
    REQUIRE(e.size() == tr.events.size());
    for (std::size_t i = 0; i < e.size(); ++i) {
        CHECK(e[i].t == tr.events[i].t);
        CHECK(e[i].p == tr.events[i].p);
        CHECK(e[i].axis == tr.events[i].axis);
    }
}

TEST_CASE("parameter domain") {
    CHECK_THROWS_AS(Params::fixed(0.0, 0.1), DomainError);
    CHECK_THROWS_AS(Params::fixed(1.0, -0.1), DomainError);
    CHECK_THROWS_AS(Params::fixed(NAN, 0.1), DomainError);
    CHECK_THROWS_AS(LambdaSchedule(NearOnePlus{-1}), DomainError);
    Params p = LambdaSchedule(NearOnePlus{0.5}).resolve(0.05);
    CHECK(p.lambda_minus_one() == std::exp(-10.0));
    Params m = LambdaSchedule(NearOneMinus{0.5}).resolve(0.05);
    CHECK(m.lambda_minus_one() == -std::exp(-10.0));
}

TEST_CASE("level stop far along an exactly linear zone") {
    // the zone's exponential term is identically zero here
    auto tr = propagate_orbit({0, 0}, Params::fixed(1.0, 0.01), StopCondition::y_at_least(10.0));
    CHECK(tr.reason == StopReason::level);
    CHECK(tr.back().t == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(tr.back().p.y == 10.0);
}
