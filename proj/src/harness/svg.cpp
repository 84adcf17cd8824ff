#include "sonata/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace sonata {

namespace {

constexpr double width = 720.0;
constexpr double height = 480.0;
constexpr double left = 80.0;
constexpr double right = 160.0;
constexpr double top = 40.0;
constexpr double bottom = 60.0;

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", v);
    return buffer;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_svg_chart(std::ostream& out, const std::vector<Series>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label) {
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!(s.y[k] > 0.0) || !std::isfinite(s.y[k])) continue;
            x_min = std::min(x_min, s.x[k]);
            x_max = std::max(x_max, s.x[k]);
            y_min = std::min(y_min, std::log10(s.y[k]));
            y_max = std::max(y_max, std::log10(s.y[k]));
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0;
        x_max = 1.0;
        y_min = 0.0;
        y_max = 1.0;
    }
    y_min = std::floor(y_min);
    y_max = std::ceil(y_max);
    if (y_max <= y_min) y_max = y_min + 1.0;
    if (x_max <= x_min) x_max = x_min + 1.0;

    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double ly) { return top + (y_max - ly) / (y_max - y_min) * plot_h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << escape(title) << "</text>\n";
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\"" << num(left + plot_w)
        << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + plot_h) << "\" stroke=\"black\"/>\n";

    for (double e = y_min; e <= y_max + 0.5; e += 1.0) {
        out << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(py(e)) << "\" x2=\"" << num(left + plot_w)
            << "\" y2=\"" << num(py(e)) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(py(e) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << static_cast<int>(e) << "</text>\n";
    }
    for (int k = 0; k <= 5; ++k) {
        const double x = x_min + (x_max - x_min) * k / 5.0;
        out << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top + plot_h + 18)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << num(x) << "</text>\n";
    }
    out << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 16)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 18 " << num(top + plot_h / 2) << ")\">" << escape(y_label) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette[s % (sizeof palette / sizeof palette[0])];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        const auto& line = series[s];
        for (std::size_t k = 0; k < std::min(line.x.size(), line.y.size()); ++k) {
            if (!(line.y[k] > 0.0) || !std::isfinite(line.y[k])) continue;
            out << num(px(line.x[k])) << ',' << num(py(std::log10(line.y[k]))) << ' ';
        }
        out << "\"/>\n";
        const double ly = top + 16.0 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << num(left + plot_w + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + plot_w + 32)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(left + plot_w + 38) << "\" y=\"" << num(ly + 4) << "\" font-size=\"12\">"
            << escape(line.name) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace sonata
