#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace loopgrade {

struct PlotCurve {
    std::string label; // empty = not shown in the legend
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    double width = 1.5;
};

/// Static line plot; axes are auto-ranged over all curves and long curves
/// are thinned to keep the file small.
void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotCurve>& curves);

/// Vertical bar chart with the value printed above each bar.
void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values, const std::string& y_label);

} // namespace loopgrade
