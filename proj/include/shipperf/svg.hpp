#ifndef SHIPPERF_SVG_HPP
#define SHIPPERF_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace shipperf {

// Minimal static SVG charts for the report files. No dependencies, no
// timestamps, so rerunning a command reproduces the file byte for byte.

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

inline const char* svg_palette(std::size_t i) {
    static const char* colors[] = {"#3a6ea5", "#c1554d", "#58955c", "#8864b0", "#c58f38", "#5b8f8f", "#a05c7b", "#777777"};
    return colors[i % (sizeof(colors) / sizeof(colors[0]))];
}

} // namespace detail

/// Horizontal bar chart; one bar per labelled value.
inline std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                                 const std::vector<double>& values, const std::string& value_label) {
    const double width = 760.0, bar_h = 22.0, gap = 8.0, left = 260.0, top = 48.0;
    const double height = top + labels.size() * (bar_h + gap) + 30.0;
    double vmax = 0.0;
    for (double v : values) {
        if (std::isfinite(v)) vmax = std::max(vmax, v);
    }
    if (vmax <= 0.0) vmax = 1.0;

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) + "\" height=\"" +
                    detail::svg_num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<text x=\"16\" y=\"24\" font-size=\"15\" font-weight=\"bold\">" + title + "</text>\n";
    s += "<text x=\"16\" y=\"40\" fill=\"#555\">" + value_label + "</text>\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = top + i * (bar_h + gap);
        const bool ok = std::isfinite(values[i]);
        const double w = ok ? (width - left - 90.0) * values[i] / vmax : 0.0;
        s += "<text x=\"" + detail::svg_num(left - 8.0) + "\" y=\"" + detail::svg_num(y + bar_h * 0.72) +
             "\" text-anchor=\"end\">" + labels[i] + "</text>\n";
        if (ok) {
            s += "<rect x=\"" + detail::svg_num(left) + "\" y=\"" + detail::svg_num(y) + "\" width=\"" +
                 detail::svg_num(std::max(w, 1.0)) + "\" height=\"" + detail::svg_num(bar_h) + "\" fill=\"" +
                 detail::svg_palette(i) + "\"/>\n";
            s += "<text x=\"" + detail::svg_num(left + std::max(w, 1.0) + 6.0) + "\" y=\"" +
                 detail::svg_num(y + bar_h * 0.72) + "\">" + detail::svg_num(values[i]) + "</text>\n";
        } else {
            s += "<text x=\"" + detail::svg_num(left + 6.0) + "\" y=\"" + detail::svg_num(y + bar_h * 0.72) +
                 "\" fill=\"#999\">out of validity</text>\n";
        }
    }
    s += "</svg>\n";
    return s;
}

/// Grouped line chart over bin centers, one polyline per series. Used for the
/// binned-error figures; NaN gaps break the line.
inline std::string svg_line_chart(const std::string& title, const std::vector<double>& bin_centers,
                                  const std::vector<std::pair<std::string, std::vector<double>>>& series,
                                  const std::string& x_label, const std::string& y_label) {
    const double width = 760.0, height = 420.0, left = 70.0, right = 24.0, top = 54.0, bottom = 56.0;
    double ymax = 0.0;
    for (const auto& [name, ys] : series) {
        for (double v : ys) {
            if (std::isfinite(v)) ymax = std::max(ymax, v);
        }
    }
    if (ymax <= 0.0) ymax = 1.0;
    const double xmin = bin_centers.front(), xmax = bin_centers.back();
    const double xspan = xmax > xmin ? xmax - xmin : 1.0;
    auto px = [&](double x) { return left + (x - xmin) / xspan * (width - left - right); };
    auto py = [&](double y) { return height - bottom - y / ymax * (height - top - bottom); };

    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) + "\" height=\"" +
                    detail::svg_num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<text x=\"16\" y=\"24\" font-size=\"15\" font-weight=\"bold\">" + title + "</text>\n";
    s += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(height - bottom) + "\" x2=\"" +
         detail::svg_num(width - right) + "\" y2=\"" + detail::svg_num(height - bottom) + "\" stroke=\"#333\"/>\n";
    s += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" + detail::svg_num(top) + "\" x2=\"" + detail::svg_num(left) +
         "\" y2=\"" + detail::svg_num(height - bottom) + "\" stroke=\"#333\"/>\n";
    s += "<text x=\"" + detail::svg_num((left + width - right) / 2.0) + "\" y=\"" + detail::svg_num(height - 16.0) +
         "\" text-anchor=\"middle\">" + x_label + "</text>\n";
    s += "<text x=\"20\" y=\"" + detail::svg_num(top - 10.0) + "\">" + y_label + "</text>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = ymax * tick / 4.0;
        s += "<text x=\"" + detail::svg_num(left - 6.0) + "\" y=\"" + detail::svg_num(py(v) + 4.0) +
             "\" text-anchor=\"end\" fill=\"#555\">" + detail::svg_num(v) + "</text>\n";
    }
    for (std::size_t i = 0; i < bin_centers.size(); ++i) {
        s += "<text x=\"" + detail::svg_num(px(bin_centers[i])) + "\" y=\"" + detail::svg_num(height - bottom + 16.0) +
             "\" text-anchor=\"middle\" fill=\"#555\">" + detail::svg_num(bin_centers[i]) + "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& [name, ys] = series[k];
        std::string points;
        for (std::size_t i = 0; i < ys.size() && i < bin_centers.size(); ++i) {
            if (!std::isfinite(ys[i])) {
                if (!points.empty()) {
                    s += "<polyline fill=\"none\" stroke=\"" + std::string(detail::svg_palette(k)) +
                         "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
                    points.clear();
                }
                continue;
            }
            points += detail::svg_num(px(bin_centers[i])) + "," + detail::svg_num(py(ys[i])) + " ";
            s += "<circle cx=\"" + detail::svg_num(px(bin_centers[i])) + "\" cy=\"" + detail::svg_num(py(ys[i])) +
                 "\" r=\"3\" fill=\"" + detail::svg_palette(k) + "\"/>\n";
        }
        if (!points.empty()) {
            s += "<polyline fill=\"none\" stroke=\"" + std::string(detail::svg_palette(k)) +
                 "\" stroke-width=\"2\" points=\"" + points + "\"/>\n";
        }
        s += "<rect x=\"" + detail::svg_num(width - 190.0) + "\" y=\"" + detail::svg_num(top + k * 18.0) +
             "\" width=\"12\" height=\"12\" fill=\"" + detail::svg_palette(k) + "\"/>\n";
        s += "<text x=\"" + detail::svg_num(width - 172.0) + "\" y=\"" + detail::svg_num(top + k * 18.0 + 10.0) +
             "\">" + name + "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace shipperf

#endif
