#pragma once

#include <string>
#include <vector>

namespace pwltc::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    int width = 640;
    int height = 420;
};

/// Polylines on a box with min/max tick labels. Non-finite points split a line.
std::string line_plot(const std::vector<Series>& series, const PlotSpec& spec);

}  // namespace pwltc::svg
