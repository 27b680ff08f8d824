#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qrc {

struct PlotSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;
};

struct PlotCurve {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct PlotLine {
    double y = 0.0;
    std::string color = "#555555";
    std::string label;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<PlotSeries> series;
    std::vector<PlotCurve> curves;
    /// Horizontal dashed asymptotes.
    std::vector<PlotLine> asymptotes;
    /// Free text stored in the SVG <desc> element.
    std::string description;
};

/// Standalone SVG: one circle.marker per data point with error bars, polylines
/// for curves and line.asymptote elements for the asymptotes.
void write_svg(std::ostream& out, const PlotSpec& spec);

}  // namespace qrc
