#include "qrc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace qrc {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish() {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
};

}  // namespace

void write_svg(std::ostream& out, const PlotSpec& spec) {
    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    Range rx, ry;
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            rx.add(tx(s.x[i]));
            const double e = i < s.err.size() ? s.err[i] : 0.0;
            ry.add(s.y[i] - e);
            ry.add(s.y[i] + e);
        }
    }
    for (const auto& c : spec.curves) {
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (spec.log_x && !(c.x[i] > 0.0)) continue;
            rx.add(tx(c.x[i]));
            ry.add(c.y[i]);
        }
    }
    for (const auto& a : spec.asymptotes) ry.add(a.y);
    rx.finish();
    ry.finish();
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (tx(x) - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto py = [&](double y) { return kTop + (ry.hi - y) / (ry.hi - ry.lo) * ph; };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<title>" << escape(spec.title) << "</title>\n";
    if (!spec.description.empty()) out << "<desc>" << escape(spec.description) << "</desc>\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
        << "</text>\n";
    out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">"
        << escape(spec.x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kTop + ph / 2 << ")\">" << escape(spec.y_label) << "</text>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        const double sx = kLeft + pw * i / 4.0;
        const double sy = kTop + ph - ph * i / 4.0;
        out << "<text x=\"" << num(sx) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
            << tick(spec.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy + 4) << "\" text-anchor=\"end\">" << tick(fy)
            << "</text>\n";
    }

    for (const auto& a : spec.asymptotes) {
        out << "<line class=\"asymptote\" x1=\"" << num(kLeft) << "\" y1=\"" << num(py(a.y)) << "\" x2=\""
            << num(kLeft + pw) << "\" y2=\"" << num(py(a.y)) << "\" stroke=\"" << a.color
            << "\" stroke-dasharray=\"6,4\"><title>" << escape(a.label) << "</title></line>\n";
    }
    for (const auto& c : spec.curves) {
        out << "<polyline class=\"curve\" fill=\"none\" stroke=\"" << c.color << "\" stroke-width=\"1.5\"";
        if (c.dashed) out << " stroke-dasharray=\"4,3\"";
        out << " points=\"";
        for (std::size_t i = 0; i < c.x.size(); ++i) {
            if (spec.log_x && !(c.x[i] > 0.0)) continue;
            if (!std::isfinite(c.y[i])) continue;
            out << num(px(c.x[i])) << ',' << num(py(c.y[i])) << ' ';
        }
        out << "\"><title>" << escape(c.label) << "</title></polyline>\n";
    }
    for (const auto& s : spec.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (spec.log_x && !(s.x[i] > 0.0)) continue;
            const double e = i < s.err.size() ? s.err[i] : 0.0;
            if (e > 0.0) {
                out << "<line class=\"errorbar\" x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - e))
                    << "\" x2=\"" << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + e)) << "\" stroke=\"" << s.color
                    << "\"/>\n";
            }
            out << "<circle class=\"marker\" cx=\"" << num(px(s.x[i])) << "\" cy=\"" << num(py(s.y[i]))
                << "\" r=\"3.5\" fill=\"" << s.color << "\"><title>" << escape(s.label) << "</title></circle>\n";
        }
    }
    double ly = kTop + 14;
    auto legend = [&](const std::string& label, const std::string& color) {
        out << "<rect x=\"" << num(kLeft + pw - 150) << "\" y=\"" << num(ly - 9) << "\" width=\"10\" height=\"10\" fill=\""
            << color << "\"/><text x=\"" << num(kLeft + pw - 135) << "\" y=\"" << num(ly) << "\">" << escape(label)
            << "</text>\n";
        ly += 16;
    };
    for (const auto& s : spec.series) legend(s.label, s.color);
    out << "</svg>\n";
}

}  // namespace qrc
