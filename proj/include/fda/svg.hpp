#pragma once

#include <string>
#include <vector>

namespace fda {

// Minimal hand-rolled SVG output for learning curves and accuracy bars.

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label);

std::string svg_bar_chart(const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& title, const std::string& y_label);

}  // namespace fda
