#include "fda/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fda/tensor.hpp"

namespace fda {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kMarginL = 60, kMarginR = 20, kMarginT = 40, kMarginB = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2"};

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

void header(std::ostringstream& out, const std::string& title) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
}

}  // namespace

std::string svg_line_chart(const std::vector<Series>& series, const std::string& title,
                           const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw Error("svg_line_chart: no series");
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) throw Error("svg_line_chart: x/y length mismatch");
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double pw = kWidth - kMarginL - kMarginR;
    const double ph = kHeight - kMarginT - kMarginB;
    auto px = [&](double x) { return kMarginL + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * ph; };

    std::ostringstream out;
    header(out, title);
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
        << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
        << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        out << "<text x=\"" << kMarginL - 6 << "\" y=\"" << py(fy) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << num(fy) << "</text>\n";
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        out << "<text x=\"" << px(fx) << "\" y=\"" << kHeight - kMarginB + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << num(fx) << "</text>\n";
    }
    out << "<text x=\"" << kMarginL + pw / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << x_label
        << "</text>\n"
        << "<text x=\"16\" y=\"" << kMarginT + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << kMarginT + ph / 2 << ")\">" << y_label
        << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = kPalette[si % (sizeof kPalette / sizeof *kPalette)];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            out << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kMarginR - 4 << "\" y=\"" << kMarginT + 14 * (si + 1)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
            << color << "\">" << s.label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string svg_bar_chart(const std::vector<std::pair<std::string, double>>& bars,
                          const std::string& title, const std::string& y_label) {
    if (bars.empty()) throw Error("svg_bar_chart: no bars");
    double ymax = 0.0;
    for (const auto& [l, v] : bars) ymax = std::max(ymax, v);
    if (ymax <= 0.0) ymax = 1.0;
    const double pw = kWidth - kMarginL - kMarginR;
    const double ph = kHeight - kMarginT - kMarginB;
    const double bw = pw / static_cast<double>(bars.size());

    std::ostringstream out;
    header(out, title);
    out << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
        << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
    out << "<text x=\"16\" y=\"" << kMarginT + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
        << "transform=\"rotate(-90 16 " << kMarginT + ph / 2 << ")\">" << y_label
        << "</text>\n";
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const double h = bars[i].second / ymax * ph;
        const double x = kMarginL + bw * static_cast<double>(i) + bw * 0.15;
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(kHeight - kMarginB - h)
            << "\" width=\"" << num(bw * 0.7) << "\" height=\"" << num(h) << "\" fill=\""
            << kPalette[i % (sizeof kPalette / sizeof *kPalette)] << "\"/>\n";
        out << "<text x=\"" << num(x + bw * 0.35) << "\" y=\"" << kHeight - kMarginB + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << bars[i].first << "</text>\n";
        out << "<text x=\"" << num(x + bw * 0.35) << "\" y=\""
            << num(kHeight - kMarginB - h - 4)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << num(bars[i].second) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace fda
