#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pwltc/coupled.hpp"

namespace pwltc::figures {

enum class FigureId { fig3, fig4, fig5 };

/// Throws UsageError for anything but fig3, fig4, fig5.
FigureId parse_figure(std::string_view s);
std::string_view to_string(FigureId id);

struct FigureOptions {
    int threads = 0;
    bool svg = false;
    double fig5_epsilon = 0.01;
};

/// Canard explosion: amplitude against lambda at eps 0.02 and 0.05, with
/// lambda - 1 = exp(-c/eps) on the canard branch and plain values above it.
std::vector<coupled::ScanPoint> fig3_data(int threads = 0);
/// Amplitude against eps at lambda 1.5 and 2.
std::vector<coupled::ScanPoint> fig4_data(int threads = 0);
/// Enhanced-delay run from (-0.6, -0.5), four loops, with a sampled trajectory.
coupled::EnhancedDelayReport fig5_data(double epsilon = 0.01);

/// Writes the dataset(s) and returns the files written. fig5 writes the peak
/// table at `out` and the trajectory next to it as <stem>_trajectory.csv.
std::vector<std::filesystem::path> reproduce_figure(FigureId id, const std::filesystem::path& out,
                                                    const FigureOptions& opt = {});

}  // namespace pwltc::figures
