#include <doctest.h>

#include <cmath>

#include "pwltc/checks.hpp"
#include "pwltc/errors.hpp"

using namespace pwltc;
using namespace pwltc::checks;

TEST_CASE("every registered check passes at its fixture") {
    for (const auto& id : check_ids()) {
        CAPTURE(id);
        auto f = default_fixture(id);
        auto r = run_check(id, f.params, f.aux);
        CHECK(r.pass);
        CHECK(r.check_id == id);
        for (const auto& [name, v] : r.bound) {
            auto base = name.substr(0, name.rfind('.'));
            CHECK(r.measured.count(base) == 1);
        }
    }
}

TEST_CASE("lemma_tech example") {
    Aux a;
    a.rho = 1;
    a.d = 2;
    auto r = run_check("lemma_tech", Params::fixed(1.0, 0.1), a);
    CHECK(r.pass);
    CHECK(r.measured.at("p_d.x") == doctest::Approx(0.10827).epsilon(1e-4));
}

TEST_CASE("thm2_tube and thm3_plus examples") {
    Aux a;
    a.delta = 0.05;
    CHECK(run_check("thm2_tube", Params::fixed(1.0, 0.01), a).pass);
    a.c = 0.5;
    CHECK(run_check("thm3_plus", Params::fixed(1.0, 0.05), a).pass);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(run_check("no_such_check", Params::fixed(1.0, 0.1), {}), UsageError);
    CHECK_THROWS_AS(default_fixture("no_such_check"), UsageError);
    // eps above eps0(0.8) violates the hypothesis
    CHECK_THROWS_AS(run_check("lemma_exist_eps0", Params::fixed(0.8, 0.9), {}), PreconditionError);
    CHECK_THROWS_AS(run_check("lemma_asm_behav_a", Params::fixed(0.9, 0.05), {}), PreconditionError);
}

TEST_CASE("a check can fail") {
    // the endpoint closed form carries an O(eps e^{-c/eps}) remainder
    auto f = default_fixture("thm3_plus");
    auto r = run_check("thm3_plus", Params::fixed(1.0, 0.3), f.aux);
    CHECK_FALSE(r.pass);
}

TEST_CASE("reports are deterministic and round trip through JSON") {
    auto a = run_all(), b = run_all();
    std::string ja = reports_json(a);
    CHECK(ja == reports_json(b));
    auto back = parse_reports_json(ja);
    REQUIRE(back.size() == a.size());
    CHECK(reports_json(back) == ja);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(back[i].check_id == a[i].check_id);
        CHECK(back[i].measured == a[i].measured);
        CHECK(back[i].epsilon == a[i].epsilon);
        CHECK(back[i].pass == a[i].pass);
    }
}
