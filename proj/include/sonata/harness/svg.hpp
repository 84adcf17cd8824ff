#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sonata {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal line chart: axes, log-scale y, one polyline per series.
/// Nonpositive or non-finite y values are skipped.
void write_svg_chart(std::ostream& out, const std::vector<Series>& series, const std::string& title,
                     const std::string& x_label, const std::string& y_label);

}  // namespace sonata
