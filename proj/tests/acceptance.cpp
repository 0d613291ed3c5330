// Acceptance report: one PASS/FAIL line per criterion. Exits 0 when every
// criterion was evaluated (failures are reported, not hidden), non-zero only
// if the harness itself breaks. --strict makes any FAIL a non-zero exit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "pwltc/checks.hpp"
#include "pwltc/coupled.hpp"
#include "pwltc/csv.hpp"
#include "pwltc/delay.hpp"
#include "pwltc/normal_form.hpp"
#include "pwltc/rk_oracle.hpp"

using namespace pwltc;
using nf::Quadrant;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        notes.push_back((ok ? "ok: " : "FAILED: ") + what);
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string g(double v) { return fmt("%.6g", v); }

double eps_log(double e) { return e * std::abs(std::log(e)); }

// -- 1 -----------------------------------------------------------------------

Outcome quadrant_flows() {
    Outcome o;
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const Quadrant qs[] = {Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4};
    const int sgn[4][2] = {{1, 1}, {1, -1}, {-1, -1}, {-1, 1}};
    double worst = 0, worst_oracle = 0;
    int n = 0;
    while (n < 50) {
        int qi = int(U(rng) * 4) % 4;
        double lam = 0.2 + 2.8 * U(rng), eps = 0.005 + 0.195 * U(rng);
        Params p = Params::fixed(lam, eps);
        Point p0{sgn[qi][0] * (0.1 + 1.9 * U(rng)), sgn[qi][1] * (0.1 + 1.9 * U(rng))};
        double t = 0.05 + 2.95 * U(rng);
        // shrink t until the closed-form path stays strictly inside the quadrant
        auto inside = [&](double tt) {
            for (int k = 1; k <= 200; ++k) {
                auto [x, y] = oracle::quadrant_flow(sgn[qi][0], sgn[qi][1], p0.x, p0.y, lam, eps, tt * k / 200);
                if (x * sgn[qi][0] <= 0 || y * sgn[qi][1] <= 0) return false;
            }
            return true;
        };
        while (!inside(t)) t *= 0.5;
        Point exact = nf::local_flow(p0, t, p, qs[qi]);
        auto rk = rk::normal_form_frozen(p0, p, qs[qi], t);
        if (!rk.ok) {
            o.require(false, "oracle failed: " + rk.failure);
            return o;
        }
        auto [ox, oy] = oracle::quadrant_flow(sgn[qi][0], sgn[qi][1], p0.x, p0.y, lam, eps, t);
        double scale = std::max({1.0, std::abs(exact.x), std::abs(exact.y)});
        worst = std::max(worst, std::hypot(exact.x - rk.p.x, exact.y - rk.p.y) / scale);
        worst_oracle = std::max(worst_oracle, std::hypot(exact.x - ox, exact.y - oy) / scale);
        ++n;
    }
    o.require(worst <= 1e-9, "max endpoint gap to RK oracle " + g(worst) + " <= 1e-9");
    o.require(worst_oracle <= 1e-9, "max gap to variation-of-constants formula " + g(worst_oracle));
    return o;
}

// -- 2 -----------------------------------------------------------------------

Outcome manifold_invariance() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    struct B {
        nf::Stability k;
        nf::BranchSign s;
        const char* name;
    };
    const B branches[] = {{nf::Stability::attracting, nf::BranchSign::minus, "S_a^-"},
                          {nf::Stability::attracting, nf::BranchSign::plus, "S_a^+"},
                          {nf::Stability::repelling, nf::BranchSign::minus, "S_r^-"},
                          {nf::Stability::repelling, nf::BranchSign::plus, "S_r^+"}};
    for (const auto& b : branches) {
        double worst = 0;
        long checked = 0;
        int runs = 0;
        while (runs < 100) {
            double lam = 0.3 + 2.2 * U(rng), eps = 0.01 + 0.09 * U(rng);
            Params p = Params::fixed(lam, eps);
            auto br = nf::slow_manifold(b.k, b.s, p);
            double lo = std::max(br.x_lo, -3.0), hi = std::min(br.x_hi, 3.0);
            if (!(hi - lo > 1e-2)) continue;
            double x0 = lo + (hi - lo) * (0.01 + 0.98 * U(rng));
            Point p0{x0, br.y_at(x0)};
            nf::PropagateOptions opt;
            opt.samples_per_segment = 50;
            auto tr = nf::propagate_orbit(p0, p, nf::StopCondition::time(5.0), opt);
            for (const auto& s : tr.samples) {
                if (!br.in_domain(s.p.x) || s.zone != br.quadrant()) break;
                worst = std::max(worst, std::abs(br.offset(s.p)));
                ++checked;
            }
            ++runs;
        }
        o.require(worst <= 1e-12, std::string(b.name) + ": max offset " + g(worst) + " over " +
                                      std::to_string(checked) + " samples");
    }
    return o;
}

// -- 3 -----------------------------------------------------------------------

Outcome lambda_one() {
    Outcome o;
    Params p = Params::fixed(1.0, 0.01);
    nf::PropagateOptions opt;
    opt.samples_per_segment = 500;
    auto tr = nf::propagate_orbit({0, 0}, p, nf::StopCondition::y_at_least(10.0), opt);
    double worst = 0;
    for (const auto& s : tr.samples) worst = std::max(worst, std::abs(s.p.y - s.p.x));
    o.require(tr.back().p.y >= 10.0 - 1e-9, "origin orbit reached y = " + g(tr.back().p.y));
    o.require(worst <= 1e-12, "origin orbit max |y - x| " + g(worst) + " <= 1e-12");
    for (double off : {0.05, -0.05}) {
        auto w = delay::way_in_way_out(off, p, 0.05, 1.0);
        bool ok = !w.unbounded && w.y_out >= 0.95 - 1e-12 && w.y_out <= 1.0 + 1e-12;
        o.require(ok, "entry (-1, " + g(-1 + off) + ") exits at y = " + fmt("%.6f", w.y_out) + ", wanted [0.95, 1]");
    }
    return o;
}

// -- 4 -----------------------------------------------------------------------

Outcome passage_above_one() {
    Outcome o;
    delay::SectionSpec spec{1.0, 0.05, 50.0};
    double prev = INFINITY;
    for (double eps : {0.05, 0.02, 0.01}) {
        Params p = Params::fixed(2.0, eps);
        auto c = delay::transition_map(0.0, p, spec);
        double h = c.exit_offset;
        o.require(c.exit_section == delay::Section::out_e && std::abs(h) <= 10 * eps_log(eps),
                  "eps " + g(eps) + ": h = " + g(h) + ", bound " + g(10 * eps_log(eps)));
        o.require(h < prev, "eps " + g(eps) + ": h decreased");
        prev = h;
        auto hp = delay::transition_map(0.04, p, spec), hm = delay::transition_map(-0.04, p, spec);
        double d = std::abs(hp.exit_offset - hm.exit_offset);
        o.require(d <= 10 * std::exp(-1 / (2 * eps)),
                  "eps " + g(eps) + ": contraction " + g(d) + " <= " + g(10 * std::exp(-1 / (2 * eps))));
    }
    return o;
}

// -- 5 -----------------------------------------------------------------------

Outcome passage_below_one() {
    Outcome o;
    delay::SectionSpec spec{1.0, 0.05, 50.0};
    for (double lam : {0.5, 0.8}) {
        double thr = delay::eps_threshold(lam, 1.0);
        for (double eps : {0.05, 0.02, 0.01}) {
            if (!(eps <= thr)) {
                o.require(false, "eps " + g(eps) + " above the threshold for lambda " + g(lam));
                continue;
            }
            double worst = 0;
            bool on_a = true;
            for (double r : {-0.04, -0.02, 0.0, 0.02, 0.04}) {
                auto t = delay::transition_map(r, Params::fixed(lam, eps), spec);
                on_a = on_a && t.exit_section == delay::Section::out_a;
                worst = std::max(worst, std::abs(t.exit_offset));
            }
            double bound = 10 * std::exp(-1 / eps);
            o.require(on_a && worst <= bound, "lambda " + g(lam) + " eps " + g(eps) + ": offset " + g(worst) +
                                                  " <= " + g(bound));
        }
    }
    return o;
}

// -- 6 -----------------------------------------------------------------------

Outcome maximal_delays() {
    Outcome o;
    auto [c08, res] = oracle::bisect_c(0.8);
    // the quoted 1.861 carries three decimals
    o.require(res <= 1e-14 && std::abs(c08 - 1.861) <= 1e-3, "C(0.8) = " + fmt("%.12f", c08) + ", residual " + g(res));
    o.require(std::abs(delay::c_of_lambda(0.8) - c08) <= 1e-12, "library C(0.8) agrees with bisection");
    const double e3[] = {0.02, 0.01, 0.005};
    for (double lam : {2.0, 0.8}) {
        double prev = INFINITY;
        std::string series;
        bool mono = true;
        for (double eps : e3) {
            auto r = delay::maximal_delay(Params::fixed(lam, eps), 0.1, 1.0);
            double bound = lam > 1 ? 10 * eps_log(eps) : eps * (0.8 + c08);
            o.require(!r.unbounded && r.z_d <= bound,
                      "lambda " + g(lam) + " eps " + g(eps) + ": z_d = " + g(r.z_d) + " <= " + g(bound));
            mono = mono && r.z_d < prev && r.z_d > 0;
            prev = r.z_d;
            series += (series.empty() ? "" : ", ") + g(r.z_d);
        }
        o.require(mono, "lambda " + g(lam) + ": z_d decreasing to 0 over eps 0.02, 0.01, 0.005 (" + series + ")");
    }
    return o;
}

// -- 7 -----------------------------------------------------------------------

Outcome exponential_schedule() {
    Outcome o;
    for (double c : {0.3, 0.5}) {
        for (auto sign : {delay::Near::plus, delay::Near::minus}) {
            const char* sn = sign == delay::Near::plus ? "+" : "-";
            double prev = INFINITY;
            for (double eps : {0.05, 0.02}) {
                auto r = delay::thm3_endpoint(c, eps, sign);
                double X = eps * std::log(c / (2 * eps));
                Point want = sign == delay::Near::plus ? Point{2 * c + X, c + X} : Point{X, c + X};
                double d = std::hypot(r.measured.x - want.x, r.measured.y - want.y);
                double dp = std::hypot(r.predicted.x - want.x, r.predicted.y - want.y);
                o.require(dp <= 1e-12, std::string("c ") + g(c) + sn + " eps " + g(eps) +
                                           ": library prediction matches closed form");
                if (eps == 0.05) o.require(d <= 1e-3, "c " + g(c) + sn + " eps 0.05: deviation " + g(d));
                else o.require(d < prev, "c " + g(c) + sn + " eps " + g(eps) + ": deviation " + g(d) + " decreased");
                prev = d;
            }
        }
        for (double eps : {0.05, 0.02}) {
            Params p = LambdaSchedule(NearOnePlus{c}).resolve(eps);
            auto r = delay::maximal_delay(p, std::max(0.1, 3 * eps), 1.0);
            double tol = 5 * eps_log(eps);
            o.require(!r.unbounded && std::abs(r.z_d - c) <= tol,
                      "c " + g(c) + " eps " + g(eps) + ": z_d = " + g(r.z_d) + ", |z_d - c| <= " + g(tol));
        }
    }
    return o;
}

// -- 8 -----------------------------------------------------------------------

Outcome endpoint_lemma() {
    Outcome o;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double worst = 0;
    bool harness = true;
    for (int i = 0; i < 20; ++i) {
        double rho = 0.5 + 1.5 * U(rng), d = 0.5 + 4.5 * U(rng);
        double lam = 0.2 + 2.8 * U(rng), eps = 0.005 + 0.195 * U(rng);
        double lm = eps * (lam - 1);
        Point start{(rho - eps * d + lm) * std::exp(-d) - lm, 0.0};
        auto [x, y] = oracle::quadrant_flow(1, 1, start.x, start.y, lam, eps, d);
        // the linear system on the whole plane is the Q1 field; start may have x < 0
        Point lib = nf::ZoneFlow(start, Params::fixed(lam, eps), Quadrant::Q1).at(d);
        double scale = std::max(1.0, rho);
        worst = std::max({worst, std::abs(x - rho) / scale, std::abs(y - eps * d) / scale,
                          std::abs(lib.x - rho) / scale, std::abs(lib.y - eps * d) / scale});
        checks::Aux aux;
        aux.rho = rho;
        aux.d = d;
        harness = harness && checks::run_check("lemma_tech", Params::fixed(lam, eps), aux).pass;
    }
    o.require(worst <= 1e-12, "max endpoint error " + g(worst));
    o.require(harness, "verification harness agrees on all 20 draws");
    return o;
}

// -- 9 -----------------------------------------------------------------------

Outcome canard_explosion() {
    Outcome o;
    for (double eps : {0.02, 0.05}) {
        std::vector<double> cs = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, offs;
        for (double c : cs) offs.push_back(std::exp(-c / eps));
        auto pts = coupled::canard_scan_offsets(eps, offs);
        double worst = 0, worst_c = 0;
        std::string list;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!pts[i].converged) {
                o.require(false, "eps " + g(eps) + " c " + g(cs[i]) + ": no cycle (" + pts[i].error + ")");
                continue;
            }
            double pred = coupled::canard_amplitude_prediction(eps, offs[i]);
            double rel = std::abs(pts[i].amplitude / pred - 1);
            double relc = std::abs(pts[i].amplitude / (1 + 2 * cs[i]) - 1);
            worst = std::max(worst, rel);
            worst_c = std::max(worst_c, relc);
            list += (list.empty() ? "" : " ") + fmt("%.1f%%", 100 * rel);
        }
        o.require(worst <= 0.05, "eps " + g(eps) + ": relative error vs 1 - 2 eps ln(lambda - 1) per c=0.1..0.6: " +
                                     list);
        o.require(worst_c <= 0.05, "eps " + g(eps) + ": max relative error vs 1 + 2c " + fmt("%.1f%%", 100 * worst_c));
    }
    return o;
}

// -- 10 ----------------------------------------------------------------------

Outcome fixed_lambda_amplitude() {
    Outcome o;
    const std::vector<double> eps = {0.04, 0.02, 0.01, 0.005};
    std::vector<std::vector<double>> amp;
    for (double lam : {1.5, 2.0}) {
        std::vector<double> row;
        std::string list;
        double worst = 0;
        for (double e : eps) {
            auto pts = coupled::canard_scan(e, {lam});
            double a = pts[0].converged ? pts[0].amplitude : NAN;
            row.push_back(a);
            double rel = std::abs(a / (1 + 2 * eps_log(e)) - 1);
            worst = std::isnan(rel) ? INFINITY : std::max(worst, rel);
            list += (list.empty() ? "" : " ") + fmt("%.1f%%", 100 * rel);
        }
        o.require(worst <= 0.10, "lambda " + g(lam) + ": relative error vs 1 + 2 eps|ln eps| per eps: " + list);
        amp.push_back(row);
    }
    std::string list;
    double worst = 0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double d = std::abs(amp[0][i] - amp[1][i]) / (0.5 * (amp[0][i] + amp[1][i]));
        worst = std::max(worst, d);
        list += (list.empty() ? "" : " ") + fmt("%.1f%%", 100 * d);
    }
    o.require(worst < 0.02, "lambda-dependence per eps: " + list + " (< 2%)");
    return o;
}

// -- 11 ----------------------------------------------------------------------

Outcome enhanced_delay() {
    Outcome o;
    std::map<double, coupled::EnhancedDelayReport> runs;
    for (double e : {0.02, 0.01, 0.005}) runs.emplace(e, coupled::enhanced_delay_run({-0.6, -0.5}, e, 4));
    const auto& r = runs.at(0.01);
    bool complete = r.loops_completed == 4 && r.peaks.size() == 4 && r.valleys.size() == 4;
    o.require(complete, "eps 0.01: " + std::to_string(r.loops_completed) + " loops completed");
    if (!complete) return o;
    const double pk[] = {1.5, 3.5, 5.5, 7.5};
    std::string pl, vl;
    bool pok = true, vok = true;
    for (int k = 0; k < 4; ++k) {
        pok = pok && std::abs(r.peaks[k] - pk[k]) <= 0.1;
        vok = vok && std::abs(r.valleys[k] + pk[k]) <= 0.1;
        pl += (k ? " " : "") + fmt("%.4f", r.peaks[k]);
        vl += (k ? " " : "") + fmt("%.4f", r.valleys[k]);
    }
    o.require(pok, "eps 0.01 peaks " + pl + " within 0.1 of 1.5 3.5 5.5 7.5");
    o.require(vok, "eps 0.01 valleys " + vl + " within 0.1 of -1.5 -3.5 -5.5 -7.5");
    double prev_gap = INFINITY;
    std::string incs;
    bool conv = true;
    for (double e : {0.02, 0.01, 0.005}) {
        const auto& p = runs.at(e).peaks;
        if (p.size() < 4) {
            conv = false;
            continue;
        }
        double inc = (p[3] - p[0]) / 3;
        double gap = std::abs(inc - 2.0);
        conv = conv && gap < prev_gap;
        prev_gap = gap;
        incs += (incs.empty() ? "" : " ") + fmt("%.4f", inc);
    }
    o.require(conv, "mean peak increment at eps 0.02, 0.01, 0.005: " + incs + " approaching 2");
    // published values are given to two decimals
    const double published[] = {1.49, 3.44, 5.35, 7.23};
    const auto &a = runs.at(0.005).peaks, &b = runs.at(0.02).peaks;
    bool strict = a.size() == 4 && b.size() == 4, rounded = strict;
    for (int k = 0; strict && k < 4; ++k) {
        double lo = std::min(a[k], b[k]), hi = std::max(a[k], b[k]);
        strict = strict && published[k] >= lo && published[k] <= hi;
        rounded = rounded && published[k] >= lo - 0.005 && published[k] <= hi + 0.005;
    }
    o.require(rounded, std::string("published peaks bracketed by runs at eps 0.005 and 0.02 to two-decimal rounding") +
                           (strict ? "" : " (not strictly: 7.23 vs " + fmt("%.4f", a.size() == 4 ? a[3] : NAN) + ")"));
    return o;
}

// -- 12 ----------------------------------------------------------------------

Outcome filippov() {
    Outcome o;
    double worst = 0, worst_lib = 0, worst_alpha = 0, worst_eq = 0, worst_eq_lib = 0;
    int n = 0;
    for (double lam : {0.5, 1.0, 2.0}) {
        for (double eps : {0.01, 0.1}) {
            Params p = Params::fixed(lam, eps);
            double e = lam * eps / 2;
            auto seg = coupled::sliding_segment(p);
            worst_eq = std::max({worst_eq, std::abs(seg.e_plus.x - e), std::abs(seg.e_plus.y - e),
                                 std::abs(seg.e_minus.x + e), std::abs(seg.e_minus.y + e)});
            auto fl = oracle::lower(e, e, lam, eps), fu = oracle::upper(-e, -e, lam, eps);
            worst_eq = std::max({worst_eq, std::hypot(fl.dx, fl.dy), std::hypot(fu.dx, fu.dy)});
            auto vl = coupled::half_field(coupled::Half::lower, seg.e_plus, p);
            auto vu = coupled::half_field(coupled::Half::upper, seg.e_minus, p);
            worst_eq_lib = std::max({worst_eq_lib, std::hypot(vl.dx, vl.dy), std::hypot(vu.dx, vu.dy)});
        }
    }
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> U(0.02, 0.98);
    for (int i = 0; i < 100; ++i) {
        double lam = i % 2 ? 1.5 : 0.7, eps = i % 3 ? 0.05 : 0.2;
        double e = lam * eps / 2, s = -e + 2 * e * U(rng);
        auto [alpha, v] = oracle::filippov(s, s, lam, eps);
        worst = std::max(worst, std::hypot(v.dx, v.dy));
        auto r = coupled::filippov_field({s, s}, Params::fixed(lam, eps));
        if (r.state != coupled::SwitchState::sliding) worst_lib = INFINITY;
        worst_lib = std::max(worst_lib, std::hypot(r.velocity.dx, r.velocity.dy));
        worst_alpha = std::max(worst_alpha, std::abs(r.alpha - alpha));
        ++n;
    }
    o.require(worst < 1e-14, "brute-force sliding field max " + g(worst) + " on " + std::to_string(n) + " points");
    o.require(worst_lib < 1e-14, "library sliding field max " + g(worst_lib));
    o.require(worst_alpha < 1e-12, "convex weight agrees to " + g(worst_alpha));
    o.require(worst_eq < 1e-14, "e_+- positions and half-fields (test side) " + g(worst_eq));
    o.require(worst_eq_lib < 1e-14, "e_+- half-fields (library) " + g(worst_eq_lib));
    return o;
}

// -- 13 ----------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    Outcome o;
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "pwltc_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    auto f = [&](const char* name) { return (dir / name).string(); };
    std::vector<std::vector<std::string>> cmds = {
        {"orbit", "--lambda", "1", "--epsilon", "0.01", "--x0", "-1", "--y0", "-1.05", "--y-stop", "2",
         "--samples-per-segment", "5", "--out", f("nf.csv"), "--events", f("nf_events.csv")},
        {"orbit", "--coupled", "--lambda", "1.5", "--epsilon", "0.05", "--x0", "-0.75", "--y0", "-0.75",
         "--switchings", "4", "--sample-dt", "0.5", "--out", f("cp.csv")},
        {"canard-scan", "--epsilon", "0.05", "--cs", "0.2,0.4", "--out", f("scan.csv")},
        {"enhanced-delay", "--epsilon", "0.02", "--loops", "2", "--out", f("ed.csv")},
        {"verify", "--all", "--json", f("verify.json")},
    };
    std::vector<std::string> first;
    for (int round = 0; round < 2; ++round) {
        std::vector<std::string> got;
        for (const auto& c : cmds) {
            std::ostringstream out, err;
            int rc = cli::dispatch(c, out, err);
            if (rc != 0) o.require(false, c[0] + " exited " + std::to_string(rc) + ": " + err.str());
            got.push_back(out.str());
        }
        for (auto& e : fs::directory_iterator(dir)) got.push_back(e.path().filename().string() + "\n" + slurp(e.path()));
        std::sort(got.begin() + cmds.size(), got.end());
        if (round == 0) {
            first = got;
            fs::remove_all(dir);
            fs::create_directories(dir);
        } else {
            o.require(got == first, "two rounds of " + std::to_string(cmds.size()) + " commands, " +
                                        std::to_string(got.size() - cmds.size()) + " files byte-identical");
        }
    }

    // lossless CSV: parse then serialise again, and compare values with memory
    std::string nf_text = slurp(f("nf.csv"));
    nf::Trajectory tr;
    tr.samples = nf::parse_samples_csv(nf_text);
    tr.events = nf::parse_events_csv(slurp(f("nf_events.csv")));
    o.require(nf::samples_csv(tr) == nf_text, "normal-form samples CSV reserialises byte-identically");
    o.require(nf::events_csv(tr) == slurp(f("nf_events.csv")), "events CSV reserialises byte-identically");
    nf::PropagateOptions popt;
    popt.samples_per_segment = 5;
    auto mem = nf::propagate_orbit({-1, -1.05}, Params::fixed(1, 0.01), nf::StopCondition::y_at_least(2), popt);
    bool same = mem.samples.size() == tr.samples.size();
    for (std::size_t i = 0; same && i < mem.samples.size(); ++i)
        same = mem.samples[i].t == tr.samples[i].t && mem.samples[i].p == tr.samples[i].p &&
               mem.samples[i].zone == tr.samples[i].zone;
    o.require(same, "parsed samples equal the in-memory orbit bit for bit");

    std::string cp_text = slurp(f("cp.csv"));
    coupled::CoupledTrajectory ct;
    ct.samples = coupled::parse_trajectory_csv(cp_text);
    o.require(coupled::trajectory_csv(ct) == cp_text, "coupled trajectory CSV reserialises byte-identically");

    auto scan = coupled::canard_scan_offsets(0.05, {std::exp(-0.2 / 0.05), std::exp(-0.4 / 0.05)});
    auto table = csv::parse(slurp(f("scan.csv")));
    bool scan_ok = table.rows.size() == scan.size();
    for (std::size_t i = 0; scan_ok && i < scan.size(); ++i) {
        scan_ok = csv::to_real(table.rows[i][table.column("lambda")]) == scan[i].lambda &&
                  csv::to_real(table.rows[i][table.column("amplitude")]) == scan[i].amplitude &&
                  csv::to_real(table.rows[i][table.column("period")]) == scan[i].period;
    }
    o.require(scan_ok, "scan CSV values equal the in-memory scan bit for bit");

    std::string vj = slurp(f("verify.json"));
    o.require(checks::reports_json(checks::parse_reports_json(vj)) == vj, "verify JSON reserialises byte-identically");
    fs::remove_all(dir);
    return o;
}

struct Criterion {
    int id;
    const char* title;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    bool strict = argc > 1 && std::string(argv[1]) == "--strict";
    bool verbose = !(argc > 1 && std::string(argv[1]) == "--quiet");
    const std::vector<Criterion> all = {
        {1, "closed-form quadrant flows match the RK oracle", 5, quadrant_flows},
        {2, "slow manifolds are invariant lines", 5, manifold_invariance},
        {3, "lambda = 1: origin orbit and way-in/way-out", 5, lambda_one},
        {4, "lambda = 2: exit ordinate and contraction", 10, passage_above_one},
        {5, "lambda < 1: exit near the attracting slow manifold", 10, passage_below_one},
        {6, "maximal delay bounds and monotone decay", 10, maximal_delays},
        {7, "exponential schedule endpoints and delay", 10, exponential_schedule},
        {8, "endpoint of the linear flow after time d", 1, endpoint_lemma},
        {9, "canard explosion amplitude", 60, canard_explosion},
        {10, "fixed-lambda cycle amplitude", 60, fixed_lambda_amplitude},
        {11, "enhanced delay peaks and valleys", 120, enhanced_delay},
        {12, "Filippov sliding segment and boundary equilibria", 1, filippov},
        {13, "CLI determinism and CSV round trip", 5, determinism},
    };
    int failed = 0;
    for (const auto& c : all) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        o.require(secs < c.limit_s, fmt("runtime %.2f s", secs) + fmt(" < %.0f s", c.limit_s));
        if (!o.pass) ++failed;
        std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.title);
        if (verbose)
            for (const auto& n : o.notes) std::printf("    %s\n", n.c_str());
    }
    std::printf("%zu criteria, %d passed, %d failed\n", all.size(), int(all.size()) - failed, failed);
    return strict && failed ? 1 : 0;
}
