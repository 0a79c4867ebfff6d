#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace tats::svg {

struct Line {
    std::string name;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false;
};

namespace detail {

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

inline std::string escape(const std::string& s) {
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

}  // namespace detail

/// Standalone SVG line chart with axes, five ticks per axis and a legend.
inline std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                              const std::vector<Line>& lines, bool log_x = false) {
    constexpr double width = 900, height = 480, left = 80, right = 190, top = 40, bottom = 60;
    const double plot_w = width - left - right, plot_h = height - top - bottom;

    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& l : lines) {
        for (double x : l.x) {
            x_min = std::min(x_min, tx(x));
            x_max = std::max(x_max, tx(x));
        }
        for (double y : l.y) {
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
    }
    if (!std::isfinite(x_min)) x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    if (x_max == x_min) x_max = x_min + 1;
    if (y_max == y_min) y_max = y_min + 1;
    const double pad = 0.05 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    auto px = [&](double x) { return left + (tx(x) - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return top + (y_max - y) / (y_max - y_min) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
       << detail::escape(title) << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << plot_h
       << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = x_min + (x_max - x_min) * i / 4.0;
        const double fy = y_min + (y_max - y_min) * i / 4.0;
        const double sx = left + plot_w * i / 4.0;
        const double sy = top + plot_h - plot_h * i / 4.0;
        os << "<line x1=\"" << detail::num(sx) << "\" y1=\"" << top << "\" x2=\"" << detail::num(sx) << "\" y2=\""
           << top + plot_h << "\" stroke=\"#ddd\"/>\n";
        os << "<line x1=\"" << left << "\" y1=\"" << detail::num(sy) << "\" x2=\"" << left + plot_w << "\" y2=\""
           << detail::num(sy) << "\" stroke=\"#ddd\"/>\n";
        os << "<text x=\"" << detail::num(sx) << "\" y=\"" << top + plot_h + 16 << "\" text-anchor=\"middle\">"
           << detail::tick(log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << detail::num(sy + 4) << "\" text-anchor=\"end\">"
           << detail::tick(fy) << "</text>\n";
    }
    os << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 18 << "\" text-anchor=\"middle\">"
       << detail::escape(x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << top + plot_h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(y_label) << "</text>\n";

    for (std::size_t k = 0; k < lines.size(); ++k) {
        const auto& l = lines[k];
        os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.6\" points=\"";
        for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i)
            os << (i ? " " : "") << detail::num(px(l.x[i])) << "," << detail::num(py(l.y[i]));
        os << "\"/>\n";
        if (l.markers)
            for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i)
                os << "<circle cx=\"" << detail::num(px(l.x[i])) << "\" cy=\"" << detail::num(py(l.y[i]))
                   << "\" r=\"3\" fill=\"" << l.color << "\"/>\n";
        const double ly = top + 10 + 20.0 * static_cast<double>(k);
        os << "<line x1=\"" << width - right + 15 << "\" y1=\"" << ly << "\" x2=\"" << width - right + 40
           << "\" y2=\"" << ly << "\" stroke=\"" << l.color << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << width - right + 46 << "\" y=\"" << ly + 4 << "\">" << detail::escape(l.name)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace tats::svg
