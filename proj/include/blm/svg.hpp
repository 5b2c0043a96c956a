#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "blm/common.hpp"

namespace blm {

// Minimal SVG line/scatter plotting: textual, diffable, no rendering
// dependencies.

struct XYSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
    bool markers_only = false;
    std::string color = "#1f6fb4";
};

struct Panel {
    std::string title, xlabel, ylabel;
    std::vector<XYSeries> series;
};

namespace detail {

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace detail

inline std::string render_svg(const std::vector<Panel>& panels, int panel_w = 560,
                              int panel_h = 420) {
    const int margin_l = 70, margin_r = 20, margin_t = 40, margin_b = 50;
    const int width = panel_w * static_cast<int>(panels.size());
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << panel_h << "\" viewBox=\"0 0 " << width << " " << panel_h << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << panel_h << "\" fill=\"white\"/>\n";

    const char* palette[] = {"#1f6fb4", "#d6562b", "#3a923a", "#8a5fb0"};
    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const Panel& panel = panels[pi];
        const double x0 = pi * panel_w + margin_l, x1 = (pi + 1.0) * panel_w - margin_r;
        const double y0 = panel_h - margin_b, y1 = margin_t;

        double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
        for (const auto& s : panel.series)
            for (const auto& [x, y] : s.points) {
                xmin = std::min(xmin, x);
                xmax = std::max(xmax, x);
                ymin = std::min(ymin, y);
                ymax = std::max(ymax, y);
            }
        if (xmin > xmax) { xmin = 0; xmax = 1; }
        if (ymin > ymax) { ymin = 0; ymax = 1; }
        if (xmax == xmin) { xmax += 0.5; xmin -= 0.5; }
        if (ymax == ymin) { ymax += 0.5 * std::abs(ymax) + 0.5; ymin -= 0.5 * std::abs(ymin) + 0.5; }
        const double ypad = 0.05 * (ymax - ymin);
        ymin -= ypad;
        ymax += ypad;

        const auto px = [&](double x) { return x0 + (x - xmin) / (xmax - xmin) * (x1 - x0); };
        const auto py = [&](double y) { return y0 + (y - ymin) / (ymax - ymin) * (y1 - y0); };

        out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
        out << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << (x1 - x0)
            << "\" height=\"" << (y0 - y1) << "\" fill=\"none\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << 0.5 * (x0 + x1) << "\" y=\"" << (y1 - 14)
            << "\" text-anchor=\"middle\" font-size=\"14\">" << panel.title << "</text>\n";
        out << "<text x=\"" << 0.5 * (x0 + x1) << "\" y=\"" << (y0 + 36)
            << "\" text-anchor=\"middle\">" << panel.xlabel << "</text>\n";
        out << "<text x=\"" << (x0 - 52) << "\" y=\"" << 0.5 * (y0 + y1)
            << "\" text-anchor=\"middle\" transform=\"rotate(-90 " << (x0 - 52) << " "
            << 0.5 * (y0 + y1) << ")\">" << panel.ylabel << "</text>\n";

        const int nticks = 5;
        for (int k = 0; k <= nticks; ++k) {
            const double tx = xmin + (xmax - xmin) * k / nticks;
            const double ty = ymin + (ymax - ymin) * k / nticks;
            out << "<line x1=\"" << px(tx) << "\" y1=\"" << y0 << "\" x2=\"" << px(tx)
                << "\" y2=\"" << (y0 + 5) << "\" stroke=\"#444\"/>\n";
            out << "<text x=\"" << px(tx) << "\" y=\"" << (y0 + 18)
                << "\" text-anchor=\"middle\">" << detail::tick_label(tx) << "</text>\n";
            out << "<line x1=\"" << (x0 - 5) << "\" y1=\"" << py(ty) << "\" x2=\"" << x0
                << "\" y2=\"" << py(ty) << "\" stroke=\"#444\"/>\n";
            out << "<text x=\"" << (x0 - 8) << "\" y=\"" << (py(ty) + 4)
                << "\" text-anchor=\"end\">" << detail::tick_label(ty) << "</text>\n";
        }

        int color_idx = 0;
        double legend_y = y1 + 16;
        for (const auto& s : panel.series) {
            const std::string color = s.color.empty() ? palette[color_idx % 4] : s.color;
            ++color_idx;
            if (s.markers_only) {
                for (const auto& [x, y] : s.points)
                    out << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
                        << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
            } else if (!s.points.empty()) {
                out << "<polyline fill=\"none\" stroke=\"" << color
                    << "\" stroke-width=\"1.5\" points=\"";
                for (const auto& [x, y] : s.points) out << px(x) << "," << py(y) << " ";
                out << "\"/>\n";
            }
            if (!s.label.empty()) {
                out << "<text x=\"" << (x1 - 8) << "\" y=\"" << legend_y
                    << "\" text-anchor=\"end\" fill=\"" << color << "\">" << s.label
                    << "</text>\n";
                legend_y += 16;
            }
        }
        out << "</g>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace blm
