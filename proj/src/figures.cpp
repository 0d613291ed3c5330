#include "pwltc/figures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pwltc/errors.hpp"
#include "pwltc/svg.hpp"

namespace pwltc::figures {

FigureId parse_figure(std::string_view s) {
    if (s == "fig3") return FigureId::fig3;
    if (s == "fig4") return FigureId::fig4;
    if (s == "fig5") return FigureId::fig5;
    throw UsageError("unknown figure '" + std::string(s) + "' (expected fig3, fig4 or fig5)");
}

std::string_view to_string(FigureId id) {
    switch (id) {
        case FigureId::fig3: return "fig3";
        case FigureId::fig4: return "fig4";
        case FigureId::fig5: return "fig5";
    }
    return "";
}

std::vector<coupled::ScanPoint> fig3_data(int threads) {
    std::vector<coupled::ScanPoint> all;
    for (double eps : {0.02, 0.05}) {
        std::vector<double> offsets;
        for (int k = 12; k >= 1; --k) offsets.push_back(std::exp(-0.05 * k / eps));
        for (double o : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0, 2.0}) offsets.push_back(o);
        auto pts = coupled::canard_scan_offsets(eps, offsets, threads);
        all.insert(all.end(), pts.begin(), pts.end());
    }
    return all;
}

std::vector<coupled::ScanPoint> fig4_data(int threads) {
    std::vector<coupled::ScanPoint> all;
    for (double eps : {0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05}) {
        auto pts = coupled::canard_scan(eps, {1.5, 2.0}, threads);
        all.insert(all.end(), pts.begin(), pts.end());
    }
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.lambda < b.lambda; });
    return all;
}

coupled::EnhancedDelayReport fig5_data(double epsilon) {
    coupled::CoupledOptions opt;
    opt.sample_dt = 1.0;
    return coupled::enhanced_delay_run({-0.6, -0.5}, epsilon, 4, opt);
}

static void write_file(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + p.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("write failed: " + p.string());
}

static std::filesystem::path sibling(const std::filesystem::path& p, const std::string& suffix, const std::string& ext) {
    return p.parent_path() / (p.stem().string() + suffix + ext);
}

static std::vector<svg::Series> by_epsilon(const std::vector<coupled::ScanPoint>& pts, bool x_is_offset) {
    std::vector<svg::Series> out;
    for (const auto& p : pts) {
        char buf[48];
        if (x_is_offset)
            std::snprintf(buf, sizeof buf, "eps = %g", p.epsilon);
        else
            std::snprintf(buf, sizeof buf, "lambda = %g", p.lambda);
        std::string label = buf;
        if (out.empty() || out.back().label != label) out.push_back({label, {}, {}});
        out.back().x.push_back(x_is_offset ? p.lambda_minus_one : p.epsilon);
        out.back().y.push_back(p.amplitude);
    }
    return out;
}

std::vector<std::filesystem::path> reproduce_figure(FigureId id, const std::filesystem::path& out,
                                                    const FigureOptions& opt) {
    std::vector<std::filesystem::path> files;
    if (id == FigureId::fig3 || id == FigureId::fig4) {
        auto pts = id == FigureId::fig3 ? fig3_data(opt.threads) : fig4_data(opt.threads);
        write_file(out, coupled::scan_csv(pts));
        files.push_back(out);
        if (opt.svg) {
            svg::PlotSpec spec;
            spec.log_x = true;
            spec.y_label = "amplitude";
            spec.title = id == FigureId::fig3 ? "cycle amplitude against lambda - 1" : "cycle amplitude against eps";
            spec.x_label = id == FigureId::fig3 ? "lambda - 1" : "eps";
            auto p = sibling(out, "", ".svg");
            write_file(p, svg::line_plot(by_epsilon(pts, id == FigureId::fig3), spec));
            files.push_back(p);
        }
        return files;
    }
    auto rep = fig5_data(opt.fig5_epsilon);
    write_file(out, coupled::enhanced_csv(rep));
    files.push_back(out);
    auto traj = sibling(out, "_trajectory", ".csv");
    write_file(traj, coupled::trajectory_csv(rep.trajectory));
    files.push_back(traj);
    if (opt.svg) {
        svg::Series s{"y(t)", {}, {}};
        for (const auto& smp : rep.trajectory.samples) {
            s.x.push_back(smp.t);
            s.y.push_back(smp.p.y);
        }
        svg::PlotSpec spec;
        spec.title = "enhanced delay from (-0.6, -0.5)";
        spec.x_label = "t";
        spec.y_label = "y";
        auto p = sibling(out, "", ".svg");
        write_file(p, svg::line_plot({s}, spec));
        files.push_back(p);
    }
    return files;
}

}  // namespace pwltc::figures
