/*
* Copyright (C) 2026 gravepi contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/

#pragma once

#include "gravepi/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

// Minimal static SVG line and scatter charts for plot-ready output.
namespace gravepi::svg {

struct Line {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false; ///< draw points instead of a polyline
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Line> lines;
    double width  = 720.0;
    double height = 440.0;
};

namespace detail {

inline const char* colour(std::size_t k)
{
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[k % 10];
}

inline std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '&':
            out += "&amp;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

inline std::string num(double v)
{
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace detail

inline void write(std::ostream& out, const Chart& chart)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& l : chart.lines) {
        if (l.x.size() != l.y.size()) {
            throw StructuralError("chart line '" + l.label + "' has mismatched x/y lengths");
        }
        for (std::size_t k = 0; k < l.x.size(); ++k) {
            if (std::isfinite(l.x[k]) && std::isfinite(l.y[k])) {
                x0 = std::min(x0, l.x[k]);
                x1 = std::max(x1, l.x[k]);
                y0 = std::min(y0, l.y[k]);
                y1 = std::max(y1, l.y[k]);
            }
        }
    }
    if (!(x0 <= x1)) {
        x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    }
    if (x1 == x0) {
        x1 = x0 + 1.0;
    }
    if (y1 == y0) {
        y1 = y0 + 1.0;
    }
    const double left = 70, right = 150, top = 40, bottom = 50;
    const double pw = chart.width - left - right, ph = chart.height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

    using detail::num;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(chart.width) << "\" height=\""
        << num(chart.height) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(chart.width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << detail::escape(chart.title) << "</text>\n";
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw) << "\" height=\"" << num(ph)
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
        out << "<text x=\"" << num(px(fx)) << "\" y=\"" << num(top + ph + 16) << "\" text-anchor=\"middle\">"
            << num(fx) << "</text>\n";
        out << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(fy) + 4) << "\" text-anchor=\"end\">" << num(fy)
            << "</text>\n";
    }
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(chart.height - 10) << "\" text-anchor=\"middle\">"
        << detail::escape(chart.x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << num(top + ph / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << detail::escape(chart.y_label) << "</text>\n";
    for (std::size_t k = 0; k < chart.lines.size(); ++k) {
        const auto& l = chart.lines[k];
        if (l.markers) {
            for (std::size_t i = 0; i < l.x.size(); ++i) {
                if (std::isfinite(l.x[i]) && std::isfinite(l.y[i])) {
                    out << "<circle cx=\"" << num(px(l.x[i])) << "\" cy=\"" << num(py(l.y[i]))
                        << "\" r=\"2.5\" fill=\"" << detail::colour(k) << "\"/>\n";
                }
            }
        }
        else {
            out << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << detail::colour(k) << "\" points=\"";
            for (std::size_t i = 0; i < l.x.size(); ++i) {
                if (std::isfinite(l.x[i]) && std::isfinite(l.y[i])) {
                    out << num(px(l.x[i])) << ',' << num(py(l.y[i])) << ' ';
                }
            }
            out << "\"/>\n";
        }
        if (chart.lines.size() <= 12) {
            const double ly = top + 14.0 * static_cast<double>(k) + 8;
            out << "<rect x=\"" << num(left + pw + 10) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
                << detail::colour(k) << "\"/>\n";
            out << "<text x=\"" << num(left + pw + 24) << "\" y=\"" << num(ly + 1) << "\">" << detail::escape(l.label)
                << "</text>\n";
        }
    }
    out << "</svg>\n";
}

} // namespace gravepi::svg
