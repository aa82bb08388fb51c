#include "loopgrade/svg.hpp"

#include "loopgrade/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace loopgrade {

namespace {

constexpr double kWidth = 840.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0, kRight = 30.0, kTop = 50.0, kBottom = 60.0;
constexpr std::size_t kMaxPointsPerCurve = 600;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0, hi = 1.0;

    void include(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (hi - lo < 1e-12) hi = lo + 1.0;
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    double frac(double v) const { return (v - lo) / (hi - lo); }

    std::vector<double> ticks() const {
        const double raw = (hi - lo) / 6.0;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        double step = mag;
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (mag * m >= raw) {
                step = mag * m;
                break;
            }
        std::vector<double> out;
        for (double v = std::ceil(lo / step) * step; v <= hi + 1e-12 * step; v += step)
            out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
        return out;
    }
};

std::string header(const std::string& title) {
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) +
                    "\" height=\"" + fmt(kHeight) + "\" viewBox=\"0 0 " + fmt(kWidth) + " " +
                    fmt(kHeight) + "\" font-family=\"sans-serif\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\">" +
         escape(title) + "</text>\n";
    return s;
}

} // namespace

void write_line_plot_svg(const std::filesystem::path& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<PlotCurve>& curves) {
    Axis ax{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    Axis ay = ax;
    for (const PlotCurve& c : curves)
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            ax.include(c.x[i]);
            ay.include(c.y[i]);
        }
    if (!std::isfinite(ax.lo)) {
        ax = {};
        ay = {};
    }
    ax.finish();
    ay.finish();

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto px = [&](double v) { return kLeft + ax.frac(v) * plot_w; };
    const auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * plot_h; };

    std::string s = header(title);
    for (double v : ax.ticks()) {
        s += "<line x1=\"" + fmt(px(v)) + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + fmt(px(v)) +
             "\" y2=\"" + fmt(kTop + plot_h) + "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + fmt(px(v)) + "\" y=\"" + fmt(kTop + plot_h + 18) +
             "\" text-anchor=\"middle\" font-size=\"11\">" + fmt(v) + "</text>\n";
    }
    for (double v : ay.ticks()) {
        s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(py(v)) + "\" x2=\"" +
             fmt(kLeft + plot_w) + "\" y2=\"" + fmt(py(v)) + "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(v) + 4) +
             "\" text-anchor=\"end\" font-size=\"11\">" + fmt(v) + "</text>\n";
    }
    s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(plot_w) +
         "\" height=\"" + fmt(plot_h) + "\" fill=\"none\" stroke=\"#404040\"/>\n";
    s += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 16) +
         "\" text-anchor=\"middle\" font-size=\"13\">" + escape(x_label) + "</text>\n";
    s += "<text x=\"20\" y=\"" + fmt(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 " +
         fmt(kTop + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";

    for (const PlotCurve& c : curves) {
        if (c.x.empty()) continue;
        const std::size_t stride = std::max<std::size_t>(1, c.x.size() / kMaxPointsPerCurve);
        std::string pts;
        for (std::size_t i = 0; i < c.x.size(); i += stride)
            pts += fmt(px(c.x[i])) + "," + fmt(py(c.y[i])) + " ";
        if ((c.x.size() - 1) % stride != 0)
            pts += fmt(px(c.x.back())) + "," + fmt(py(c.y.back()));
        s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + c.color +
             "\" stroke-width=\"" + fmt(c.width) + "\"/>\n";
    }

    double ly = kTop + 12;
    for (const PlotCurve& c : curves) {
        if (c.label.empty()) continue;
        s += "<line x1=\"" + fmt(kLeft + plot_w - 150) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
             fmt(kLeft + plot_w - 126) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + c.color +
             "\" stroke-width=\"" + fmt(c.width) + "\"/>\n";
        s += "<text x=\"" + fmt(kLeft + plot_w - 120) + "\" y=\"" + fmt(ly) +
             "\" font-size=\"12\">" + escape(c.label) + "</text>\n";
        ly += 16;
    }
    s += "</svg>\n";
    write_file(path, s);
}

void write_bar_chart_svg(const std::filesystem::path& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values, const std::string& y_label) {
    Axis ay;
    ay.lo = 0.0;
    ay.hi = 0.0;
    for (double v : values) ay.include(v);
    ay.finish();
    ay.lo = 0.0;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto py = [&](double v) { return kTop + (1.0 - ay.frac(v)) * plot_h; };

    std::string s = header(title);
    for (double v : ay.ticks()) {
        s += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + fmt(py(v)) + "\" x2=\"" +
             fmt(kLeft + plot_w) + "\" y2=\"" + fmt(py(v)) + "\" stroke=\"#e0e0e0\"/>\n";
        s += "<text x=\"" + fmt(kLeft - 8) + "\" y=\"" + fmt(py(v) + 4) +
             "\" text-anchor=\"end\" font-size=\"11\">" + fmt(v) + "</text>\n";
    }
    const double slot = plot_w / static_cast<double>(std::max<std::size_t>(1, values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double x = kLeft + slot * (static_cast<double>(i) + 0.2);
        const double y = py(values[i]);
        s += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(slot * 0.6) +
             "\" height=\"" + fmt(kTop + plot_h - y) + "\" fill=\"#4878b0\"/>\n";
        s += "<text x=\"" + fmt(x + slot * 0.3) + "\" y=\"" + fmt(y - 6) +
             "\" text-anchor=\"middle\" font-size=\"12\">" + fmt(values[i]) + "</text>\n";
        s += "<text x=\"" + fmt(x + slot * 0.3) + "\" y=\"" + fmt(kTop + plot_h + 18) +
             "\" text-anchor=\"middle\" font-size=\"12\">" + escape(labels[i]) + "</text>\n";
    }
    s += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(plot_w) +
         "\" height=\"" + fmt(plot_h) + "\" fill=\"none\" stroke=\"#404040\"/>\n";
    s += "<text x=\"20\" y=\"" + fmt(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 " +
         fmt(kTop + plot_h / 2) + ")\">" + escape(y_label) + "</text>\n";
    s += "</svg>\n";
    write_file(path, s);
}

} // namespace loopgrade
