#include "pwltc/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace pwltc::svg {

namespace {

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace

std::string line_plot(const std::vector<Series>& series, const PlotSpec& spec) {
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            double x = tx(s.x[i]), y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y)) continue;
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x0 == x1) x0 -= 0.5, x1 += 0.5;
    if (y0 == y1) y0 -= 0.5, y1 += 0.5;

    const double L = 70, R = 20, T = 40, B = 50;
    const double W = spec.width - L - R, H = spec.height - T - B;
    auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * W; };
    auto py = [&](double y) { return T + (y1 - y) / (y1 - y0) * H; };

    std::string o;
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o += "<rect x=\"" + num(L) + "\" y=\"" + num(T) + "\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
    o += "<text x=\"" + num(L + W / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" + escape(spec.title) +
         "</text>\n";
    o += "<text x=\"" + num(L + W / 2) + "\" y=\"" + num(spec.height - 12.0) +
         "\" text-anchor=\"middle\" font-size=\"12\">" + escape(spec.x_label) + "</text>\n";
    o += "<text x=\"16\" y=\"" + num(T + H / 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " +
         num(T + H / 2) + ")\">" + escape(spec.y_label) + "</text>\n";
    auto xtick = [&](double v) { return spec.log_x ? num(std::pow(10.0, v)) : num(v); };
    o += "<text x=\"" + num(L) + "\" y=\"" + num(T + H + 16) + "\" font-size=\"10\">" + xtick(x0) + "</text>\n";
    o += "<text x=\"" + num(L + W) + "\" y=\"" + num(T + H + 16) + "\" font-size=\"10\" text-anchor=\"end\">" +
         xtick(x1) + "</text>\n";
    o += "<text x=\"" + num(L - 4) + "\" y=\"" + num(T + H) + "\" font-size=\"10\" text-anchor=\"end\">" + num(y0) +
         "</text>\n";
    o += "<text x=\"" + num(L - 4) + "\" y=\"" + num(T + 10) + "\" font-size=\"10\" text-anchor=\"end\">" + num(y1) +
         "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* col = kColors[k % 6];
        std::string pts;
        auto flush = [&] {
            if (!pts.empty())
                o += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts +
                     "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(tx(s.x[i])) || !std::isfinite(s.y[i])) {
                flush();
                continue;
            }
            pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        }
        flush();
        o += "<text x=\"" + num(L + W - 4) + "\" y=\"" + num(T + 14 + 14.0 * k) + "\" font-size=\"11\" text-anchor=\"end\" fill=\"" +
             col + "\">" + escape(s.label) + "</text>\n";
    }
    o += "</svg>\n";
    return o;
}

}  // namespace pwltc::svg
