#include "pwltc/checks.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>

#include "pwltc/delay.hpp"
#include "pwltc/errors.hpp"
#include "pwltc/normal_form.hpp"

namespace pwltc::checks {

using nf::Quadrant;
using nlohmann::json;

void CheckReport::at_most(const std::string& name, double value, double max) {
    measured[name] = value;
    bound[name + ".max"] = max;
    if (!(value <= max)) pass = false;
}

void CheckReport::at_least(const std::string& name, double value, double min) {
    measured[name] = value;
    bound[name + ".min"] = min;
    if (!(value >= min)) pass = false;
}

void CheckReport::within(const std::string& name, double value, double min, double max) {
    measured[name] = value;
    bound[name + ".min"] = min;
    bound[name + ".max"] = max;
    if (!(value >= min && value <= max)) pass = false;
}

namespace {

double eps_log(double eps) { return eps * std::abs(std::log(eps)); }

// Number of quadrant changes after t = 0 and whether every sample sits in q.
int leaves(const nf::Trajectory& tr, Quadrant q) {
    int n = 0;
    for (const auto& e : tr.events)
        if (e.t > 0.0) ++n;
    for (const auto& s : tr.samples)
        if (s.zone != q) ++n;
    return n;
}

CheckReport start(const std::string& id, const Params& p, const Aux& aux) {
    CheckReport r;
    r.check_id = id;
    r.lambda = p.lambda();
    r.lambda_minus_one = p.lambda_minus_one();
    r.epsilon = p.epsilon();
    r.aux = aux;
    return r;
}

void need(bool ok, const std::string& what) {
    if (!ok) throw PreconditionError("hypothesis violated: " + what);
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point out_a_center(const Params& p, double rho) { return {-rho, rho + p.epsilon() * p.lambda_plus_one()}; }

// -- individual checks ----------------------------------------------------------

CheckReport lemma_tech(const Params& p, const Aux& aux) {
    need(p.epsilon() > 0.0, "epsilon > 0");
    need(aux.d > 0.0, "d > 0");
    auto r = start("lemma_tech", p, aux);
    const double eps = p.epsilon(), lm = p.lambda_minus_one() * eps;
    Point pd{(aux.rho - eps * aux.d + lm) * std::exp(-aux.d) - lm, 0.0};
    // the linear field x' = x - y + eps lambda on the whole plane is the Q1 flow
    nf::ZoneFlow flow(pd, p, Quadrant::Q1);
    Point end = flow.at(aux.d);
    double scale = std::max({1.0, std::abs(aux.rho), eps * aux.d});
    r.measured["p_d.x"] = pd.x;
    r.at_most("endpoint_error_x", std::abs(end.x - aux.rho), 1e-12 * scale);
    r.at_most("endpoint_error_y", std::abs(end.y - eps * aux.d), 1e-12 * scale);
    return r;
}

CheckReport lemma_pt_behav(const Params& p, const Aux& aux) {
    need(p.epsilon() > 0.0, "epsilon > 0");
    auto r = start("lemma_pt_behav", p, aux);
    const double eps = p.epsilon(), lam = p.lambda();
    Point pt = nf::tangency_point(p);
    // (a) backward to t = -lambda in closed form
    Point back = nf::local_flow(pt, -lam, p, Quadrant::Q4);
    Point expect{eps * p.lambda_minus_one() - eps * (std::exp(lam) - 2.0), 0.0};
    r.at_most("backward_point_error", dist(back, expect), 1e-12);
    // forward containment in Q4 and (b) the arrival near the out_a section
    double tau = aux.rho / eps + 1.0;
    auto tr = nf::propagate_orbit(pt, p, nf::StopCondition::time(tau));
    r.at_most("quadrant_changes", leaves(tr, Quadrant::Q4), 0.0);
    r.at_most("distance_to_out_a", dist(tr.back().p, out_a_center(p, aux.rho)), 10.0 * std::exp(-aux.rho / eps));
    return r;
}

CheckReport lemma_asm_behav_a(const Params& p, const Aux& aux) {
    need(p.epsilon() > 0.0, "epsilon > 0");
    need(p.lambda() > 0.0 && p.lambda() <= std::log(2.0), "0 < lambda <= ln 2");
    auto r = start("lemma_asm_behav_a", p, aux);
    const double eps = p.epsilon();
    double tau = aux.rho / eps + 1.0 + p.lambda();
    auto tr = nf::propagate_orbit(nf::entry_point_pa_minus(p), p, nf::StopCondition::time(tau));
    r.at_most("quadrant_changes", leaves(tr, Quadrant::Q4), 0.0);
    r.at_most("distance_to_out_a", dist(tr.back().p, out_a_center(p, aux.rho)), 10.0 * std::exp(-aux.rho / eps));
    return r;
}

CheckReport lemma_exist_C(const Params& p, const Aux& aux) {
    need(p.epsilon() > 0.0, "epsilon > 0");
    need(p.lambda() > 0.0 && p.lambda() < 1.0, "0 < lambda < 1");
    auto r = start("lemma_exist_C", p, aux);
    const double eps = p.epsilon(), lam = p.lambda();
    double c = delay::c_of_lambda(lam);
    r.measured["C"] = c;
    r.at_most("W_residual", std::abs(delay::w_function(c) - delay::w_function(-lam)), 1e-14);
    auto ex = delay::origin_orbit_exit(p);
    r.at_most("exit_time_error", std::abs(ex.flight_time - (lam + c)), 1e-10 * (lam + c));
    r.at_most("exit_point_error", dist(ex.exit_point, {0.0, eps * (lam + c)}), 1e-12);
    // no earlier quadrant change: the run to just before the exit stays in Q1
    auto tr = nf::propagate_orbit({0.0, 0.0}, p, nf::StopCondition::time(0.999 * ex.flight_time));
    r.at_most("quadrant_changes", leaves(tr, Quadrant::Q1), 0.0);
    return r;
}

CheckReport lemma_exist_eps0(const Params& p, const Aux& aux) {
    const double lam = p.lambda();
    need(lam > std::log(2.0) && lam < 1.0, "ln 2 < lambda < 1");
    need(p.epsilon() > 0.0 && p.epsilon() <= delay::eps0(lam), "0 < epsilon <= eps0(lambda)");
    auto r = start("lemma_exist_eps0", p, aux);
    const double eps = p.epsilon(), c = delay::c_of_lambda(lam);
    Point pc{0.0, eps * (lam + c)};
    double tau = aux.rho / eps + (c - 1.0) * std::expm1(-aux.rho / eps);
    auto tr = nf::propagate_orbit(pc, p, nf::StopCondition::time(tau));
    r.measured["eps0"] = delay::eps0(lam);
    r.at_most("quadrant_changes", leaves(tr, Quadrant::Q4), 0.0);
    r.at_most("distance_to_out_a", dist(tr.back().p, out_a_center(p, aux.rho)), 10.0 * std::exp(-aux.rho / eps));
    return r;
}

CheckReport lemma_asm_behav_b(const Params& p, const Aux& aux) {
    const double lam = p.lambda();
    need(lam > std::log(2.0) && lam < 1.0, "ln 2 < lambda < 1");
    need(p.epsilon() > 0.0 && p.epsilon() <= delay::eps0(lam), "0 < epsilon <= eps0(lambda)");
    auto r = start("lemma_asm_behav_b", p, aux);
    const double eps = p.epsilon();
    const double tau_a = aux.rho / eps + 1.0 + lam;
    Point target = out_a_center(p, aux.rho);
    // run until the orbit reaches the ordinate of the out_a centre
    auto tr = nf::propagate_orbit(nf::entry_point_pa_minus(p), p, nf::StopCondition::y_at_least(target.y));
    double bound = 10.0 * std::exp(-aux.rho / eps);
    r.at_most("time_offset", std::abs(tr.back().t - tau_a), bound);
    r.at_most("distance_to_out_a", dist(tr.back().p, target), bound);
    bool visited_q1 = false;
    for (const auto& s : tr.samples) visited_q1 = visited_q1 || s.zone == Quadrant::Q1;
    r.at_least("visited_Q1", visited_q1 ? 1.0 : 0.0, 1.0);
    return r;
}

CheckReport lemma_exist_eps1(const Params& p, const Aux& aux) {
    const double lam = p.lambda();
    need(lam > 1.0, "lambda > 1");
    need(p.epsilon() > 0.0 && p.epsilon() <= delay::eps1(lam, aux.rho), "0 < epsilon <= eps1(lambda)");
    auto r = start("lemma_exist_eps1", p, aux);
    auto run = [&](double eps) {
        Params q = Params::from_offset(p.lambda_minus_one(), eps);
        Point p1{eps * (2.0 * std::exp(p.lambda_minus_one()) - p.lambda_plus_one()), 0.0};
        return nf::propagate_orbit(p1, q, nf::StopCondition::x_at_least(aux.rho));
    };
    const double eps = p.epsilon();
    auto tr = run(eps);
    r.measured["eps1"] = delay::eps1(lam, aux.rho);
    r.at_most("quadrant_changes", leaves(tr, Quadrant::Q1), 0.0);
    r.at_most("h", tr.back().p.y, 10.0 * eps_log(eps));
    r.at_most("tau", tr.back().t, 10.0 * std::abs(std::log(eps)));
    r.at_most("exit_x_error", std::abs(tr.back().p.x - aux.rho), 1e-12);
    auto half = run(eps / 2.0);
    r.at_most("h_half_eps", half.back().p.y, tr.back().p.y);
    return r;
}

CheckReport thm1(const Params& p, const Aux& aux) {
    const double lam = p.lambda(), eps = p.epsilon();
    need(eps > 0.0, "epsilon > 0");
    need(lam != 1.0, "lambda != 1");
    need(aux.delta > 0.0 && aux.delta < aux.rho, "0 < delta < rho");
    need(eps <= delay::eps_threshold(lam, aux.rho), "epsilon <= threshold(lambda)");
    auto r = start("thm1", p, aux);
    delay::SectionSpec spec{aux.rho, aux.delta, 50.0};
    const double off = 0.8 * aux.delta;
    auto hi = delay::transition_map(+off, p, spec);
    auto lo = delay::transition_map(-off, p, spec);
    const bool expect_e = lam > 1.0;
    auto want = expect_e ? delay::Section::out_e : delay::Section::out_a;
    r.at_least("correct_section", (hi.exit_section == want && lo.exit_section == want) ? 1.0 : 0.0, 1.0);
    double spread = std::abs(hi.exit_offset - lo.exit_offset);
    r.at_most("exit_spread", spread, 10.0 * std::exp(-aux.rho / (2.0 * eps)));
    if (expect_e) {
        r.at_most("h", std::max(std::abs(hi.exit_offset), std::abs(lo.exit_offset)), 10.0 * eps_log(eps));
        Params q = Params::from_offset(p.lambda_minus_one(), eps / 2.0);
        auto half = delay::transition_map(+off, q, spec);
        r.at_most("h_half_eps", std::abs(half.exit_offset), std::abs(hi.exit_offset));
    } else {
        r.at_most("exit_offset", std::max(std::abs(hi.exit_offset), std::abs(lo.exit_offset)),
                  10.0 * std::exp(-aux.rho / eps));
    }
    return r;
}

CheckReport thm1delay(const Params& p, const Aux& aux) {
    const double lam = p.lambda(), eps = p.epsilon();
    need(eps > 0.0, "epsilon > 0");
    need(lam != 1.0, "lambda != 1");
    need(aux.delta > 2.0 * eps, "delta > 2 epsilon");
    auto r = start("thm1delay", p, aux);
    auto rep = delay::maximal_delay(p, aux.delta, aux.rho);
    double bound = lam > 1.0 ? 10.0 * eps_log(eps) : eps * (lam + delay::c_of_lambda(lam));
    r.at_most("z_d", rep.z_d, bound);
    Params q = Params::from_offset(p.lambda_minus_one(), eps / 2.0);
    r.at_most("z_d_half_eps", delay::maximal_delay(q, aux.delta, aux.rho).z_d, rep.z_d);
    return r;
}

CheckReport thm2_tube(const Params& p, const Aux& aux) {
    need(p.lambda_minus_one() == 0.0, "lambda = 1");
    need(p.epsilon() > 0.0, "epsilon > 0");
    need(aux.delta > 2.0 * p.epsilon(), "delta > 2 epsilon");
    auto r = start("thm2_tube", p, aux);
    // the origin orbit rides y = x
    auto line = nf::propagate_orbit({0.0, 0.0}, p, nf::StopCondition::y_at_least(aux.rho));
    double off_line = 0.0;
    for (const auto& s : line.samples) off_line = std::max(off_line, std::abs(s.p.y - s.p.x));
    r.at_most("origin_orbit_offset", off_line, 1e-12);
    auto s = delay::way_in_way_out(aux.delta, p, aux.delta, aux.rho);
    // the exit lands on rho - delta itself; allow for rounding of the root
    const double slack = 1e-12;
    r.within("exit_y", s.y_out, aux.rho - aux.delta - slack, aux.rho + slack);
    double worst = 0.0;
    for (int k = 0; k <= 20; ++k) {
        double off = -aux.delta + 2.0 * aux.delta * k / 20.0;
        if (off == 0.0) continue;  // on the invariant line: never exits
        auto w = delay::way_in_way_out(off, p, aux.delta, aux.rho);
        worst = std::max(worst, std::abs(w.y_out - std::abs(w.y_in)));
    }
    r.at_most("way_in_way_out_gap", worst, aux.delta);
    return r;
}

CheckReport thm3(const Params& p, const Aux& aux, delay::Near sign) {
    const double eps = p.epsilon();
    need(aux.c > 0.0 && eps > 0.0, "c > 0 and epsilon > 0");
    need(aux.c / eps < 700.0, "c / epsilon < 700");
    auto r = start(sign == delay::Near::plus ? "thm3_plus" : "thm3_minus", p, aux);
    // the schedule fixes lambda from (c, eps); report what was used
    LambdaSchedule sched = sign == delay::Near::plus ? LambdaSchedule(NearOnePlus{aux.c}) : LambdaSchedule(NearOneMinus{aux.c});
    Params used = sched.resolve(eps);
    r.lambda = used.lambda();
    r.lambda_minus_one = used.lambda_minus_one();
    auto res = delay::thm3_endpoint(aux.c, eps, sign);
    double dev = std::max(std::abs(res.deviation.x), std::abs(res.deviation.y));
    r.measured["endpoint.x"] = res.measured.x;
    r.measured["endpoint.y"] = res.measured.y;
    r.at_most("deviation", dev, 1e-3);
    if (aux.c / (eps / 2.0) < 700.0) {
        auto half = delay::thm3_endpoint(aux.c, eps / 2.0, sign);
        r.at_most("deviation_half_eps", std::max(std::abs(half.deviation.x), std::abs(half.deviation.y)), dev);
    }
    return r;
}

}  // namespace

const std::vector<std::string>& check_ids() {
    static const std::vector<std::string> ids{
        "lemma_tech",        "lemma_pt_behav", "lemma_asm_behav_a", "lemma_exist_C",
        "lemma_exist_eps0",  "lemma_asm_behav_b", "lemma_exist_eps1", "thm1",
        "thm1delay",         "thm2_tube",      "thm3_plus",         "thm3_minus"};
    return ids;
}

Fixture default_fixture(const std::string& id) {
    Aux a;
    if (id == "lemma_tech") {
        a.d = 2.0;
        return {id, Params::fixed(1.0, 0.1), a};
    }
    if (id == "lemma_pt_behav") return {id, Params::fixed(2.0, 0.05), a};
    if (id == "lemma_asm_behav_a") return {id, Params::fixed(0.5, 0.05), a};
    if (id == "lemma_exist_C") return {id, Params::fixed(0.8, 0.01), a};
    if (id == "lemma_exist_eps0") return {id, Params::fixed(0.8, 0.1), a};
    if (id == "lemma_asm_behav_b") return {id, Params::fixed(0.8, 0.1), a};
    if (id == "lemma_exist_eps1") return {id, Params::fixed(2.0, 0.05), a};
    if (id == "thm1") return {id, Params::fixed(2.0, 0.05), a};
    if (id == "thm1delay") {
        a.delta = 0.1;
        return {id, Params::fixed(0.8, 0.01), a};
    }
    if (id == "thm2_tube") return {id, Params::fixed(1.0, 0.01), a};
    if (id == "thm3_plus" || id == "thm3_minus") {
        a.c = 0.5;
        return {id, Params::fixed(1.0, 0.05), a};
    }
    throw UsageError("unknown check id '" + id + "'");
}

CheckReport run_check(const std::string& id, const Params& p, const Aux& aux) {
    if (id == "lemma_tech") return lemma_tech(p, aux);
    if (id == "lemma_pt_behav") return lemma_pt_behav(p, aux);
    if (id == "lemma_asm_behav_a") return lemma_asm_behav_a(p, aux);
    if (id == "lemma_exist_C") return lemma_exist_C(p, aux);
    if (id == "lemma_exist_eps0") return lemma_exist_eps0(p, aux);
    if (id == "lemma_asm_behav_b") return lemma_asm_behav_b(p, aux);
    if (id == "lemma_exist_eps1") return lemma_exist_eps1(p, aux);
    if (id == "thm1") return thm1(p, aux);
    if (id == "thm1delay") return thm1delay(p, aux);
    if (id == "thm2_tube") return thm2_tube(p, aux);
    if (id == "thm3_plus") return thm3(p, aux, delay::Near::plus);
    if (id == "thm3_minus") return thm3(p, aux, delay::Near::minus);
    throw UsageError("unknown check id '" + id + "'");
}

std::vector<CheckReport> run_all() {
    std::vector<CheckReport> out;
    for (const auto& id : check_ids()) {
        auto f = default_fixture(id);
        out.push_back(run_check(id, f.params, f.aux));
    }
    return out;
}

// -- JSON ---------------------------------------------------------------------------

static json to_json(const CheckReport& r) {
    json j;
    j["check_id"] = r.check_id;
    j["params"] = {{"lambda", r.lambda}, {"lambda_minus_one", r.lambda_minus_one}, {"epsilon", r.epsilon},
                   {"rho", r.aux.rho},   {"delta", r.aux.delta},                   {"c", r.aux.c},
                   {"d", r.aux.d}};
    j["measured"] = r.measured;
    j["bound"] = r.bound;
    j["pass"] = r.pass;
    return j;
}

std::string reports_json(const std::vector<CheckReport>& reports) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    return arr.dump(2) + "\n";
}

std::vector<CheckReport> parse_reports_json(const std::string& text) {
    json arr = json::parse(text);
    std::vector<CheckReport> out;
    for (const auto& j : arr) {
        CheckReport r;
        r.check_id = j.at("check_id").get<std::string>();
        const auto& p = j.at("params");
        r.lambda = p.at("lambda").get<double>();
        r.lambda_minus_one = p.at("lambda_minus_one").get<double>();
        r.epsilon = p.at("epsilon").get<double>();
        r.aux = {p.at("rho").get<double>(), p.at("delta").get<double>(), p.at("c").get<double>(),
                 p.at("d").get<double>()};
        r.measured = j.at("measured").get<std::map<std::string, double>>();
        r.bound = j.at("bound").get<std::map<std::string, double>>();
        r.pass = j.at("pass").get<bool>();
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace pwltc::checks
