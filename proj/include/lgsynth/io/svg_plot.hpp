#pragma once

#include "lgsynth/io/key_value.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace lgsynth::io {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal line chart rendered straight to SVG text. Output depends only on the
/// data, so identical runs produce identical files.
struct LinePlot {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<PlotSeries> series;

    [[nodiscard]] std::string render(int width = 720, int height = 440) const {
        constexpr double left = 80, right = 20, top = 40, bottom = 60;
        const double pw = width - left - right;
        const double ph = height - top - bottom;

        auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
        auto ty = [&](double v) { return log_y ? std::log10(v) : v; };
        auto usable = [&](double x, double y) {
            return std::isfinite(x) && std::isfinite(y) && (!log_x || x > 0) && (!log_y || y > 0);
        };

        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (const auto& s : series)
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if (!usable(s.x[i], s.y[i])) continue;
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        if (!(x0 <= x1)) x0 = 0, x1 = 1;
        if (!(y0 <= y1)) y0 = 0, y1 = 1;
        if (x1 == x0) x1 = x0 + 1;
        if (y1 == y0) {
            y0 -= 0.5;
            y1 += 0.5;
        }
        const double pad = 0.05 * (y1 - y0);
        y0 -= pad;
        y1 += pad;

        auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
        auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };
        auto num = [](double v) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v);
            return std::string(buf);
        };
        auto tick_text = [](double v, bool log) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3g", log ? std::pow(10.0, v) : v);
            return std::string(buf);
        };

        static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

        std::ostringstream svg;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
            << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        svg << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
            << "</text>\n";
        svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
            << "\" fill=\"none\" stroke=\"black\"/>\n";

        for (int i = 0; i <= 5; ++i) {
            const double fx = x0 + (x1 - x0) * i / 5.0;
            const double fy = y0 + (y1 - y0) * i / 5.0;
            const double gx = left + pw * i / 5.0;
            const double gy = top + ph - ph * i / 5.0;
            svg << "<line x1=\"" << num(gx) << "\" y1=\"" << top << "\" x2=\"" << num(gx) << "\" y2=\"" << top + ph
                << "\" stroke=\"#ddd\"/>\n";
            svg << "<line x1=\"" << left << "\" y1=\"" << num(gy) << "\" x2=\"" << left + pw << "\" y2=\"" << num(gy)
                << "\" stroke=\"#ddd\"/>\n";
            svg << "<text x=\"" << num(gx) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
                << tick_text(fx, log_x) << "</text>\n";
            svg << "<text x=\"" << left - 6 << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
                << tick_text(fy, log_y) << "</text>\n";
        }
        svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16 << "\" text-anchor=\"middle\">"
            << escape(x_label) << "</text>\n";
        svg << "<text x=\"16\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
            << top + ph / 2 << ")\">" << escape(y_label) << "</text>\n";

        for (std::size_t k = 0; k < series.size(); ++k) {
            const auto& s = series[k];
            const char* colour = palette[k % std::size(palette)];
            svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if (!usable(s.x[i], s.y[i])) continue;
                svg << (first ? "" : " ") << num(px(s.x[i])) << ',' << num(py(s.y[i]));
                first = false;
            }
            svg << "\"/>\n";
            const double ly = top + 14 + 16.0 * static_cast<double>(k);
            svg << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << num(ly) << "\" x2=\"" << left + pw - 130
                << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
            svg << "<text x=\"" << left + pw - 124 << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
                << "</text>\n";
        }
        svg << "</svg>\n";
        return svg.str();
    }

private:
    static std::string escape(const std::string& s) {
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
};

}  // namespace lgsynth::io
