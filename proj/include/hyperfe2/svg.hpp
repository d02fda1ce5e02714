#pragma once

// Minimal SVG line charts for error curves and stress-strain plots.

#include "hyperfe2/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace hyperfe2 {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct SvgChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<SvgSeries> series;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string render_svg(const SvgChart& chart) {
    const double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto ty = [&](double y) { return chart.log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (chart.log_y && !(s.y[i] > 0.0)) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::xml_escape(chart.title) << "</text>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
       << detail::xml_escape(chart.x_label) << "</text>\n";
    os << "<text x=\"16\" y=\"" << top + ph / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 " << top + ph / 2
       << ")\" text-anchor=\"middle\">" << detail::xml_escape(chart.y_label) << "</text>\n";
    for (int t = 0; t <= 4; ++t) {
        const double xv = x0 + (x1 - x0) * t / 4.0;
        const double yv = y0 + (y1 - y0) * t / 4.0;
        std::ostringstream xl, yl;
        xl.precision(3);
        yl.precision(3);
        xl << xv;
        yl << (chart.log_y ? std::pow(10.0, yv) : yv);
        os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
           << xl.str() << "</text>\n";
        const double yy = top + ph - (yv - y0) / (y1 - y0) * ph;
        os << "<text x=\"" << left - 6 << "\" y=\"" << yy + 3 << "\" text-anchor=\"end\" font-size=\"10\">" << yl.str()
           << "</text>\n";
    }
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = colors[k % 7];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (s.dashed) os << " stroke-dasharray=\"5,4\"";
        os << " points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (chart.log_y && !(s.y[i] > 0.0)) continue;
            os << px(s.x[i]) << "," << py(s.y[i]) << " ";
        }
        os << "\"/>\n";
        const double ly = top + 14 + 16.0 * static_cast<double>(k);
        os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
        os << "<text x=\"" << left + pw + 34 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">"
           << detail::xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void save_svg(const std::string& path, const SvgChart& chart) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot write " + path);
    os << render_svg(chart);
}

}  // namespace hyperfe2
