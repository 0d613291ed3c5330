#include "cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "pwltc/checks.hpp"
#include "pwltc/coupled.hpp"
#include "pwltc/csv.hpp"
#include "pwltc/delay.hpp"
#include "pwltc/errors.hpp"
#include "pwltc/figures.hpp"
#include "pwltc/normal_form.hpp"
#include "pwltc/svg.hpp"

namespace pwltc::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct RunConfig {
    std::string command;
    // parameters
    std::optional<double> lambda;
    std::optional<double> c;
    std::optional<std::string> near_one;
    std::optional<double> epsilon;
    std::vector<double> lambdas;
    std::vector<double> epsilons;
    std::vector<double> offsets;
    std::vector<double> cs;
    // section
    std::optional<double> rho;
    std::optional<double> delta;
    std::optional<double> y_cap;
    // orbit
    std::optional<double> x0;
    std::optional<double> y0;
    std::optional<double> x_stop;
    std::optional<double> y_stop;
    std::optional<double> t_max;
    std::optional<int> switchings;
    std::optional<int> samples_per_segment;
    std::optional<double> sample_dt;
    bool coupled = false;
    std::optional<std::string> events;
    // scans
    std::optional<int> n;
    std::optional<int> loops;
    std::optional<std::string> trajectory;
    // verify
    bool all = false;
    std::vector<std::string> checks;
    std::optional<double> d;
    std::optional<std::string> json_path;
    // figure
    std::optional<std::string> figure;
    bool svg = false;
    // output
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<int> threads;
    std::optional<std::string> config;
};

// -- config file ----------------------------------------------------------------------

template <class T>
void take(const json& j, const char* key, std::optional<T>& field) {
    if (!field && j.contains(key) && !j.at(key).is_null()) field = j.at(key).get<T>();
}

template <class T>
void take_vec(const json& j, const char* key, std::vector<T>& field) {
    if (field.empty() && j.contains(key)) field = j.at(key).get<std::vector<T>>();
}

void take_flag(const json& j, const char* key, bool& field) {
    if (!field && j.contains(key)) field = j.at(key).get<bool>();
}

void merge_config(RunConfig& rc, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    try {
        if (j.contains("command") && j.at("command").get<std::string>() != rc.command)
            throw UsageError("config command '" + j.at("command").get<std::string>() + "' does not match '" +
                             rc.command + "'");
        json params = j.value("params", json::object());
        take(params, "lambda", rc.lambda);
        take(params, "c", rc.c);
        take(params, "near_one", rc.near_one);
        take(params, "epsilon", rc.epsilon);
        json section = j.value("section", json::object());
        take(section, "rho", rc.rho);
        take(section, "delta", rc.delta);
        take(section, "y_cap", rc.y_cap);
        json output = j.value("output", json::object());
        take(output, "path", rc.out);
        take(output, "format", rc.format);
        // command-specific keys sit at the top level
        take_vec(j, "lambdas", rc.lambdas);
        take_vec(j, "epsilons", rc.epsilons);
        take_vec(j, "offsets", rc.offsets);
        take_vec(j, "cs", rc.cs);
        take(j, "x0", rc.x0);
        take(j, "y0", rc.y0);
        take(j, "x_stop", rc.x_stop);
        take(j, "y_stop", rc.y_stop);
        take(j, "t_max", rc.t_max);
        take(j, "switchings", rc.switchings);
        take(j, "samples_per_segment", rc.samples_per_segment);
        take(j, "sample_dt", rc.sample_dt);
        take_flag(j, "coupled", rc.coupled);
        take(j, "events", rc.events);
        take(j, "n", rc.n);
        take(j, "loops", rc.loops);
        take(j, "trajectory", rc.trajectory);
        take_flag(j, "all", rc.all);
        take_vec(j, "checks", rc.checks);
        take(j, "d", rc.d);
        take(j, "json", rc.json_path);
        take(j, "figure", rc.figure);
        take_flag(j, "svg", rc.svg);
        take(j, "threads", rc.threads);
    } catch (const json::exception& e) {
        throw UsageError(std::string("bad value in config file: ") + e.what());
    }
}

template <class T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

json config_json(const RunConfig& rc) {
    json j;
    j["command"] = rc.command;
    j["params"] = {{"lambda", opt_json(rc.lambda)},
                   {"c", opt_json(rc.c)},
                   {"near_one", opt_json(rc.near_one)},
                   {"epsilon", opt_json(rc.epsilon)}};
    j["section"] = {{"rho", opt_json(rc.rho)}, {"delta", opt_json(rc.delta)}, {"y_cap", opt_json(rc.y_cap)}};
    j["output"] = {{"path", opt_json(rc.out)}, {"format", opt_json(rc.format)}};
    auto put = [&](const char* k, const json& v) {
        if (!v.is_null()) j[k] = v;
    };
    if (!rc.lambdas.empty()) j["lambdas"] = rc.lambdas;
    if (!rc.epsilons.empty()) j["epsilons"] = rc.epsilons;
    if (!rc.offsets.empty()) j["offsets"] = rc.offsets;
    if (!rc.cs.empty()) j["cs"] = rc.cs;
    put("x0", opt_json(rc.x0));
    put("y0", opt_json(rc.y0));
    put("x_stop", opt_json(rc.x_stop));
    put("y_stop", opt_json(rc.y_stop));
    put("t_max", opt_json(rc.t_max));
    put("switchings", opt_json(rc.switchings));
    put("samples_per_segment", opt_json(rc.samples_per_segment));
    put("sample_dt", opt_json(rc.sample_dt));
    if (rc.coupled) j["coupled"] = true;
    put("events", opt_json(rc.events));
    put("n", opt_json(rc.n));
    put("loops", opt_json(rc.loops));
    put("trajectory", opt_json(rc.trajectory));
    if (rc.all) j["all"] = true;
    if (!rc.checks.empty()) j["checks"] = rc.checks;
    put("d", opt_json(rc.d));
    put("json", opt_json(rc.json_path));
    put("figure", opt_json(rc.figure));
    if (rc.svg) j["svg"] = true;
    return j;
}

// -- validation helpers -------------------------------------------------------------

double require(const std::optional<double>& v, const char* flag) {
    if (!v) throw UsageError(std::string("missing required --") + flag);
    return *v;
}

void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(what) + " must be finite and > 0");
}

bool has_schedule(const RunConfig& rc) { return rc.c.has_value() || rc.near_one.has_value(); }

LambdaSchedule schedule(const RunConfig& rc) {
    if (rc.lambda && has_schedule(rc)) throw UsageError("--lambda is mutually exclusive with --c/--near-one");
    if (rc.lambda) {
        positive(*rc.lambda, "lambda");
        return LambdaSchedule(FixedLambda{*rc.lambda});
    }
    if (has_schedule(rc)) {
        if (!rc.c || !rc.near_one) throw UsageError("the exponential schedule needs both --c and --near-one");
        positive(*rc.c, "c");
        if (*rc.near_one == "plus") return LambdaSchedule(NearOnePlus{*rc.c});
        if (*rc.near_one == "minus") return LambdaSchedule(NearOneMinus{*rc.c});
        throw UsageError("--near-one must be plus or minus");
    }
    throw UsageError("give --lambda or --c with --near-one");
}

Params params_at(const RunConfig& rc, double eps) {
    auto s = schedule(rc);
    if (!(eps > 0.0) || !std::isfinite(eps)) throw UsageError("epsilon must be finite and > 0");
    try {
        return s.resolve(eps);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

Params params_of(const RunConfig& rc) { return params_at(rc, require(rc.epsilon, "epsilon")); }

int thread_count(const RunConfig& rc) {
    int n = rc.threads.value_or(0);
    if (n <= 0) n = int(std::max(1u, std::thread::hardware_concurrency()));
    if (const char* env = std::getenv("PWLTC_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min<int>(n, int(cap));
    }
    return n;
}

std::string format_of(const RunConfig& rc, std::initializer_list<const char*> allowed) {
    std::string f = rc.format.value_or(*allowed.begin());
    for (const char* a : allowed)
        if (f == a) return f;
    std::string list;
    for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
    throw UsageError("--format " + f + " not supported here (use " + list + ")");
}

// -- output -------------------------------------------------------------------------

struct Output {
    std::ostream& out;
    std::vector<std::string> files;

    void emit(const std::optional<std::string>& path, const std::string& text) {
        if (!path) {
            out << text;
            return;
        }
        write(*path, text);
    }

    void write(const std::string& path, const std::string& text) {
        std::filesystem::path p(path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open " + path + " for writing");
        f << text;
        if (!f) throw std::runtime_error("write failed: " + path);
        files.push_back(path);
    }
};

void write_meta(Output& o, const RunConfig& rc) {
    if (o.files.empty()) return;
    json meta;
    meta["program"] = "pwltc";
    meta["version"] = kVersion;
    meta["config"] = config_json(rc);
    meta["outputs"] = o.files;
    std::ofstream f(o.files.front() + ".meta.json", std::ios::binary);
    f << meta.dump(2) << "\n";
}

// -- commands -------------------------------------------------------------------------

int cmd_orbit(const RunConfig& rc, Output& o) {
    Params p = params_of(rc);
    Point p0{require(rc.x0, "x0"), require(rc.y0, "y0")};
    if (!std::isfinite(p0.x) || !std::isfinite(p0.y)) throw UsageError("start point must be finite");
    std::string fmt = format_of(rc, {"csv", "json", "svg"});

    if (rc.coupled) {
        coupled::CoupledStop stop;
        stop.t_max = rc.t_max.value_or(std::numeric_limits<double>::infinity());
        stop.max_switchings = rc.switchings.value_or(-1);
        if (!rc.t_max && !rc.switchings) throw UsageError("coupled orbit needs --t-max or --switchings");
        if (!(p.epsilon() < 1.0)) throw UsageError("coupled system needs epsilon < 1");
        coupled::CoupledOptions opt;
        opt.sample_dt = rc.sample_dt.value_or(0.0);
        auto tr = coupled::simulate_coupled(p0, p, stop, opt);
        if (fmt == "csv") {
            o.emit(rc.out, coupled::trajectory_csv(tr));
        } else if (fmt == "json") {
            json j = json::array();
            for (const auto& s : tr.samples) j.push_back({{"t", s.t}, {"x", s.p.x}, {"y", s.p.y}, {"zone", s.zone}});
            o.emit(rc.out, j.dump(1) + "\n");
        } else {
            svg::Series s{"orbit", {}, {}};
            for (const auto& smp : tr.samples) s.x.push_back(smp.p.x), s.y.push_back(smp.p.y);
            o.emit(rc.out, svg::line_plot({s}, {"coupled orbit", "x", "y"}));
        }
        return 0;
    }

    nf::StopCondition stop;
    bool any = false;
    if (rc.t_max) stop.or_time(*rc.t_max), any = true;
    if (rc.y_stop) stop.or_level({0.0, 1.0, -*rc.y_stop, +1, {}, "y_stop"}), any = true;
    if (rc.x_stop) {
        int dir = *rc.x_stop >= p0.x ? +1 : -1;
        stop.or_level({1.0, 0.0, -*rc.x_stop, dir, {}, "x_stop"});
        any = true;
    }
    if (!any) throw UsageError("orbit needs at least one of --t-max, --x-stop, --y-stop");
    nf::PropagateOptions opt;
    opt.samples_per_segment = rc.samples_per_segment.value_or(0);
    nf::Trajectory tr;
    try {
        tr = nf::propagate_orbit(p0, p, stop, opt);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (fmt == "csv") {
        o.emit(rc.out, nf::samples_csv(tr));
    } else if (fmt == "json") {
        json j;
        j["samples"] = json::array();
        for (const auto& s : tr.samples)
            j["samples"].push_back({{"t", s.t}, {"x", s.p.x}, {"y", s.p.y}, {"zone", nf::to_string(s.zone)}});
        j["events"] = json::array();
        for (const auto& e : tr.events)
            j["events"].push_back(
                {{"t", e.t}, {"x", e.p.x}, {"y", e.p.y}, {"axis", e.axis == nf::Axis::x_axis ? "x" : "y"}});
        o.emit(rc.out, j.dump(1) + "\n");
    } else {
        svg::Series s{"orbit", {}, {}};
        for (const auto& smp : tr.samples) s.x.push_back(smp.p.x), s.y.push_back(smp.p.y);
        o.emit(rc.out, svg::line_plot({s}, {"normal-form orbit", "x", "y"}));
    }
    if (rc.events) o.write(*rc.events, nf::events_csv(tr));
    return 0;
}

int cmd_manifolds(const RunConfig& rc, Output& o) {
    double eps = require(rc.epsilon, "epsilon");
    if (!(eps >= 0.0)) throw UsageError("epsilon must be >= 0");
    if (eps == 0.0 && !rc.lambda) throw UsageError("epsilon = 0 needs a fixed --lambda");
    Params p = eps > 0.0 ? params_at(rc, eps) : Params::fixed(*rc.lambda, 0.0);
    std::string fmt = format_of(rc, {"csv", "json"});
    std::vector<nf::ManifoldBranch> bs;
    for (auto k : {nf::Stability::attracting, nf::Stability::repelling})
        for (auto s : {nf::BranchSign::minus, nf::BranchSign::plus}) bs.push_back(nf::slow_manifold(k, s, p));
    std::string text;
    if (fmt == "csv") {
        text = "kind,sign,slope,intercept,x_lo,x_hi,quadrant\n";
        for (const auto& b : bs)
            text += csv::line({std::string(nf::to_string(b.kind)), std::string(nf::to_string(b.sign)), csv::real(b.slope),
                               csv::real(b.intercept), csv::real(b.x_lo), csv::real(b.x_hi),
                               std::string(nf::to_string(b.quadrant()))});
    } else {
        json j = json::array();
        for (const auto& b : bs)
            j.push_back({{"kind", nf::to_string(b.kind)},
                         {"sign", nf::to_string(b.sign)},
                         {"slope", b.slope},
                         {"intercept", b.intercept},
                         {"x_lo", std::isfinite(b.x_lo) ? json(b.x_lo) : json("-inf")},
                         {"x_hi", std::isfinite(b.x_hi) ? json(b.x_hi) : json("inf")}});
        text = j.dump(2) + "\n";
    }
    o.emit(rc.out, text);
    return 0;
}

int cmd_delay_scan(const RunConfig& rc, Output& o) {
    std::vector<double> eps = rc.epsilons;
    if (eps.empty() && rc.epsilon) eps.push_back(*rc.epsilon);
    if (eps.empty()) throw UsageError("delay-scan needs --epsilon or --epsilons");
    double delta = rc.delta.value_or(0.1), rho = rc.rho.value_or(1.0), cap = rc.y_cap.value_or(50.0);
    positive(delta, "delta");
    positive(rho, "rho");
    std::vector<RunConfig> variants;
    if (!rc.lambdas.empty()) {
        if (rc.lambda || has_schedule(rc)) throw UsageError("--lambdas excludes --lambda and --c/--near-one");
        for (double l : rc.lambdas) {
            RunConfig v = rc;
            v.lambda = l;
            variants.push_back(v);
        }
    } else {
        variants.push_back(rc);
    }
    std::string fmt = format_of(rc, {"csv", "json"});
    std::string text = "lambda,epsilon,z_d,followed_repelling\n";
    json arr = json::array();
    for (const auto& v : variants)
        for (double e : eps) {
            Params p = params_at(v, e);
            if (!(delta > 2.0 * e)) throw UsageError("tube radius must satisfy delta > 2 epsilon");
            auto r = delay::maximal_delay(p, delta, rho, cap);
            text += csv::line({csv::real(p.lambda()), csv::real(e), csv::real(r.z_d), r.followed_repelling ? "1" : "0"});
            arr.push_back({{"lambda", p.lambda()},
                           {"lambda_minus_one", p.lambda_minus_one()},
                           {"epsilon", e},
                           {"z_d", r.z_d},
                           {"followed_repelling", r.followed_repelling},
                           {"unbounded", r.unbounded},
                           {"exit_point", {r.exit_point.x, r.exit_point.y}},
                           {"tube_delta", r.tube_delta}});
        }
    o.emit(rc.out, fmt == "csv" ? text : arr.dump(2) + "\n");
    return 0;
}

int cmd_wayinout(const RunConfig& rc, Output& o) {
    Params p = params_of(rc);
    double delta = rc.delta.value_or(0.05), rho = rc.rho.value_or(1.0), cap = rc.y_cap.value_or(50.0);
    positive(delta, "delta");
    positive(rho, "rho");
    if (!(delta > 2.0 * p.epsilon())) throw UsageError("tube radius must satisfy delta > 2 epsilon");
    std::vector<double> offs = rc.offsets;
    if (offs.empty()) {
        int n = rc.n.value_or(20);
        if (n < 1) throw UsageError("--n must be >= 1");
        for (int k = 0; k < n; ++k) offs.push_back(n == 1 ? delta : -delta + 2.0 * delta * k / (n - 1));
    }
    for (double v : offs)
        if (std::abs(v) > delta) throw UsageError("entry offsets must satisfy |offset| <= delta");
    std::string fmt = format_of(rc, {"csv", "json", "svg"});
    std::string text = "y_in,y_out\n";
    json arr = json::array();
    svg::Series s{"way-in/way-out", {}, {}};
    for (double v : offs) {
        auto w = delay::way_in_way_out(v, p, delta, rho, cap);
        text += csv::line({csv::real(w.y_in), csv::real(w.y_out)});
        arr.push_back({{"y_in", w.y_in}, {"y_out", w.y_out}, {"unbounded", w.unbounded}});
        s.x.push_back(w.y_in);
        s.y.push_back(w.y_out);
    }
    if (fmt == "csv")
        o.emit(rc.out, text);
    else if (fmt == "json")
        o.emit(rc.out, arr.dump(2) + "\n");
    else
        o.emit(rc.out, svg::line_plot({s}, {"way-in/way-out", "y_in", "y_out"}));
    return 0;
}

int cmd_thm3(const RunConfig& rc, Output& o) {
    if (rc.lambda) throw UsageError("thm3 takes --c and --near-one, not --lambda");
    double c = require(rc.c, "c"), eps = require(rc.epsilon, "epsilon");
    positive(c, "c");
    positive(eps, "epsilon");
    if (!rc.near_one || (*rc.near_one != "plus" && *rc.near_one != "minus"))
        throw UsageError("--near-one must be plus or minus");
    if (c / eps >= 700.0) throw UsageError("c / epsilon must be < 700");
    auto sign = *rc.near_one == "plus" ? delay::Near::plus : delay::Near::minus;
    auto r = delay::thm3_endpoint(c, eps, sign);
    std::string fmt = format_of(rc, {"json", "csv"});
    if (fmt == "json") {
        json j = {{"c", c},
                  {"epsilon", eps},
                  {"near_one", *rc.near_one},
                  {"predicted", {r.predicted.x, r.predicted.y}},
                  {"measured", {r.measured.x, r.measured.y}},
                  {"deviation", {r.deviation.x, r.deviation.y}},
                  {"tau1", r.tau1},
                  {"tau2", r.tau2},
                  {"flight_time", r.flight_time}};
        o.emit(rc.out, j.dump(2) + "\n");
    } else {
        std::string t = "c,epsilon,predicted_x,predicted_y,measured_x,measured_y,flight_time\n";
        t += csv::line({csv::real(c), csv::real(eps), csv::real(r.predicted.x), csv::real(r.predicted.y),
                        csv::real(r.measured.x), csv::real(r.measured.y), csv::real(r.flight_time)});
        o.emit(rc.out, t);
    }
    return 0;
}

int cmd_canard_scan(const RunConfig& rc, Output& o) {
    double eps = require(rc.epsilon, "epsilon");
    positive(eps, "epsilon");
    if (!(eps < 1.0)) throw UsageError("coupled system needs epsilon < 1");
    int sources = !rc.lambdas.empty() + !rc.offsets.empty() + !rc.cs.empty();
    if (sources != 1) throw UsageError("canard-scan needs exactly one of --lambdas, --offsets, --cs");
    std::vector<coupled::ScanPoint> pts;
    int th = thread_count(rc);
    try {
        if (!rc.lambdas.empty()) {
            pts = coupled::canard_scan(eps, rc.lambdas, th);
        } else {
            std::vector<double> offs = rc.offsets;
            for (double c : rc.cs) {
                positive(c, "c");
                offs.push_back(std::exp(-c / eps));
            }
            pts = coupled::canard_scan_offsets(eps, offs, th);
        }
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    std::string fmt = format_of(rc, {"csv", "json", "svg"});
    if (fmt == "csv") {
        o.emit(rc.out, coupled::scan_csv(pts));
    } else if (fmt == "json") {
        json arr = json::array();
        for (const auto& p : pts)
            arr.push_back({{"lambda", p.lambda},
                           {"lambda_minus_one", p.lambda_minus_one},
                           {"epsilon", p.epsilon},
                           {"amplitude", std::isfinite(p.amplitude) ? json(p.amplitude) : json(nullptr)},
                           {"period", std::isfinite(p.period) ? json(p.period) : json(nullptr)},
                           {"prediction", coupled::canard_amplitude_prediction(eps, p.lambda_minus_one)},
                           {"converged", p.converged},
                           {"error", p.error}});
        o.emit(rc.out, arr.dump(2) + "\n");
    } else {
        svg::Series s{"amplitude", {}, {}}, q{"1 - 2 eps ln(lambda - 1)", {}, {}};
        for (const auto& p : pts) {
            s.x.push_back(p.lambda_minus_one);
            s.y.push_back(p.amplitude);
            q.x.push_back(p.lambda_minus_one);
            q.y.push_back(coupled::canard_amplitude_prediction(eps, p.lambda_minus_one));
        }
        svg::PlotSpec spec{"canard explosion", "lambda - 1", "amplitude", true};
        o.emit(rc.out, svg::line_plot({s, q}, spec));
    }
    return 0;
}

int cmd_enhanced(const RunConfig& rc, Output& o) {
    if (rc.lambda && *rc.lambda != 1.0) throw UsageError("enhanced-delay runs at lambda = 1");
    if (has_schedule(rc)) throw UsageError("enhanced-delay runs at lambda = 1");
    double eps = require(rc.epsilon, "epsilon");
    positive(eps, "epsilon");
    if (!(eps < 1.0)) throw UsageError("coupled system needs epsilon < 1");
    Point p0{rc.x0.value_or(-0.6), rc.y0.value_or(-0.5)};
    int loops = rc.loops.value_or(4);
    if (loops < 1) throw UsageError("--loops must be >= 1");
    if (!(std::abs(p0.y - p0.x) <= 1.0)) throw UsageError("start point must satisfy |y - x| <= 1");
    coupled::CoupledOptions opt;
    opt.sample_dt = rc.sample_dt.value_or(rc.trajectory ? 1.0 : 0.0);
    auto r = coupled::enhanced_delay_run(p0, eps, loops, opt);
    std::string fmt = format_of(rc, {"csv", "json", "svg"});
    if (fmt == "csv") {
        o.emit(rc.out, coupled::enhanced_csv(r));
    } else if (fmt == "json") {
        json j = {{"y0", r.y0},
                  {"peaks", r.peaks},
                  {"valleys", r.valleys},
                  {"predicted_peaks", r.predicted_peaks},
                  {"predicted_valleys", r.predicted_valleys},
                  {"loops_completed", r.loops_completed},
                  {"t_end", r.t_end}};
        o.emit(rc.out, j.dump(2) + "\n");
    } else {
        svg::Series s{"y(t)", {}, {}};
        for (const auto& smp : r.trajectory.samples) s.x.push_back(smp.t), s.y.push_back(smp.p.y);
        o.emit(rc.out, svg::line_plot({s}, {"enhanced delay", "t", "y"}));
    }
    if (rc.trajectory) o.write(*rc.trajectory, coupled::trajectory_csv(r.trajectory));
    return r.loops_completed == loops ? 0 : 1;
}

int cmd_verify(const RunConfig& rc, Output& o, std::ostream& err) {
    std::vector<std::string> ids = rc.checks;
    if (rc.all) {
        if (!ids.empty()) throw UsageError("--all excludes --check");
        ids = checks::check_ids();
    }
    if (ids.empty()) throw UsageError("verify needs --all or --check <id>");
    bool overrides = rc.lambda || has_schedule(rc) || rc.epsilon || rc.rho || rc.delta || rc.d;
    std::vector<checks::CheckReport> reps;
    for (const auto& id : ids) {
        auto fx = checks::default_fixture(id);
        Params p = fx.params;
        checks::Aux a = fx.aux;
        if (overrides && !rc.all) {
            double eps = rc.epsilon.value_or(p.epsilon());
            if (rc.lambda || has_schedule(rc)) {
                p = params_at(rc, eps);
            } else {
                p = Params::from_offset(p.lambda_minus_one(), eps);
            }
            if (rc.rho) a.rho = *rc.rho;
            if (rc.delta) a.delta = *rc.delta;
            if (rc.c) a.c = *rc.c;
            if (rc.d) a.d = *rc.d;
        }
        reps.push_back(checks::run_check(id, p, a));
    }
    std::string text = checks::reports_json(reps);
    if (rc.json_path)
        o.write(*rc.json_path, text);
    else
        o.emit(rc.out, text);
    bool all_pass = true;
    for (const auto& r : reps) {
        if (!r.pass) err << "check " << r.check_id << " failed\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_figure(const RunConfig& rc, Output& o) {
    if (!rc.figure) throw UsageError("figure needs --id fig3|fig4|fig5");
    if (!rc.out) throw UsageError("figure needs --out");
    auto id = figures::parse_figure(*rc.figure);
    figures::FigureOptions opt;
    opt.threads = thread_count(rc);
    opt.svg = rc.svg;
    if (rc.epsilon) {
        positive(*rc.epsilon, "epsilon");
        if (id != figures::FigureId::fig5) throw UsageError("--epsilon applies to fig5 only");
        opt.fig5_epsilon = *rc.epsilon;
    }
    for (const auto& f : figures::reproduce_figure(id, *rc.out, opt)) o.files.push_back(f.string());
    return 0;
}

// -- argument grammar -------------------------------------------------------------------

void add_params(CLI::App* s, RunConfig& rc) {
    s->add_option("--lambda", rc.lambda, "fixed lambda > 0");
    s->add_option("--c", rc.c, "schedule constant for lambda = 1 +- exp(-c/eps)");
    s->add_option("--near-one", rc.near_one, "plus or minus")->check(CLI::IsMember({"plus", "minus"}));
    s->add_option("--epsilon", rc.epsilon, "singular parameter");
}

void add_output(CLI::App* s, RunConfig& rc) {
    s->add_option("--out", rc.out, "output file (stdout when absent)");
    s->add_option("--format", rc.format, "csv, json or svg");
    s->add_option("--config", rc.config, "JSON file with a RunConfig object");
    s->add_option("--threads", rc.threads, "worker threads (capped by PWLTC_THREADS)");
}

void add_section(CLI::App* s, RunConfig& rc) {
    s->add_option("--rho", rc.rho, "section abscissa");
    s->add_option("--delta", rc.delta, "section half-width / tube radius");
    s->add_option("--y-cap", rc.y_cap, "window cap on y");
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig rc;
    CLI::App app{"Exact event-driven simulator for piecewise-linear transcritical slow passages", "pwltc"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", kVersion);

    auto* orbit = app.add_subcommand("orbit", "propagate one orbit");
    add_params(orbit, rc);
    add_output(orbit, rc);
    orbit->add_option("--x0", rc.x0);
    orbit->add_option("--y0", rc.y0);
    orbit->add_option("--x-stop", rc.x_stop);
    orbit->add_option("--y-stop", rc.y_stop);
    orbit->add_option("--t-max", rc.t_max);
    orbit->add_option("--samples-per-segment", rc.samples_per_segment);
    orbit->add_flag("--coupled", rc.coupled, "use the two-transcritical system");
    orbit->add_option("--switchings", rc.switchings, "coupled: stop after this many crossings of y = x");
    orbit->add_option("--sample-dt", rc.sample_dt, "coupled: dense sampling step");
    orbit->add_option("--events", rc.events, "also write boundary events CSV here");

    auto* man = app.add_subcommand("manifolds", "slow-manifold branches");
    add_params(man, rc);
    add_output(man, rc);

    auto* ds = app.add_subcommand("delay-scan", "maximal delay over lambda and epsilon");
    add_params(ds, rc);
    add_output(ds, rc);
    add_section(ds, rc);
    ds->add_option("--lambdas", rc.lambdas)->delimiter(',');
    ds->add_option("--epsilons", rc.epsilons)->delimiter(',');

    auto* wio = app.add_subcommand("wayinout", "way-in/way-out samples");
    add_params(wio, rc);
    add_output(wio, rc);
    add_section(wio, rc);
    wio->add_option("--offsets", rc.offsets)->delimiter(',');
    wio->add_option("--n", rc.n, "number of evenly spaced offsets in [-delta, delta]");

    auto* t3 = app.add_subcommand("thm3", "endpoint on the exponential schedule");
    add_params(t3, rc);
    add_output(t3, rc);

    auto* cs = app.add_subcommand("canard-scan", "cycle amplitude against lambda");
    add_params(cs, rc);
    add_output(cs, rc);
    cs->add_option("--lambdas", rc.lambdas)->delimiter(',');
    cs->add_option("--offsets", rc.offsets, "values of lambda - 1")->delimiter(',');
    cs->add_option("--cs", rc.cs, "lambda - 1 = exp(-c/eps) for each c")->delimiter(',');

    auto* ed = app.add_subcommand("enhanced-delay", "peaks and valleys at lambda = 1");
    add_params(ed, rc);
    add_output(ed, rc);
    ed->add_option("--x0", rc.x0);
    ed->add_option("--y0", rc.y0);
    ed->add_option("--loops", rc.loops);
    ed->add_option("--sample-dt", rc.sample_dt);
    ed->add_option("--trajectory", rc.trajectory, "also write the sampled trajectory CSV here");

    auto* ver = app.add_subcommand("verify", "run numerical checks");
    add_params(ver, rc);
    add_output(ver, rc);
    add_section(ver, rc);
    ver->add_flag("--all", rc.all);
    ver->add_option("--check", rc.checks)->delimiter(',');
    ver->add_option("--d", rc.d, "lemma_tech time d");
    ver->add_option("--json", rc.json_path, "report file");

    auto* fig = app.add_subcommand("figure", "figure datasets");
    add_params(fig, rc);
    add_output(fig, rc);
    fig->add_option("--id", rc.figure, "fig3, fig4 or fig5");
    fig->add_flag("--svg", rc.svg, "also write an SVG plot");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }
    std::string name = app.get_subcommands().front()->get_name();
    rc.command = name;

    Output o{out, {}};
    try {
        if (rc.config) merge_config(rc, *rc.config);
        int status = 0;
        if (name == "orbit") status = cmd_orbit(rc, o);
        else if (name == "manifolds") status = cmd_manifolds(rc, o);
        else if (name == "delay-scan") status = cmd_delay_scan(rc, o);
        else if (name == "wayinout") status = cmd_wayinout(rc, o);
        else if (name == "thm3") status = cmd_thm3(rc, o);
        else if (name == "canard-scan") status = cmd_canard_scan(rc, o);
        else if (name == "enhanced-delay") status = cmd_enhanced(rc, o);
        else if (name == "verify") status = cmd_verify(rc, o, err);
        else if (name == "figure") status = cmd_figure(rc, o);
        write_meta(o, rc);
        return status;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dispatch(args, std::cout, std::cerr);
}

}  // namespace pwltc::cli
