#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coreg/csv.hpp"
#include "coreg/error.hpp"
#include "coreg/matrix.hpp"
#include "coreg/network.hpp"

namespace coreg {

namespace svg_detail {

/// Diverging map on the fixed scale [-1, 1]: blue for negative, white at
/// zero, red for positive.
inline std::string diverging_color(double v) {
    v = std::clamp(v, -1.0, 1.0);
    int r = 255, g = 255, b = 255;
    if (v >= 0.0) {
        g = b = static_cast<int>(std::lround(255.0 * (1.0 - v)));
    } else {
        r = g = static_cast<int>(std::lround(255.0 * (1.0 + v)));
    }
    char buf[8];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

}  // namespace svg_detail

/// Renders a symmetric matrix as a cell heatmap on the fixed diverging scale
/// [-1, 1]. When a permutation is given, cells appear in permuted order
/// (modules first), which exposes the block structure.
inline void render_heatmap(const SymmetricMatrix& matrix,
                           const std::optional<std::vector<int>>& permutation,
                           const std::filesystem::path& path,
                           const std::string& title = {}) {
    const Index dim = matrix.dim();
    if (dim < 2) throw invalid_input("render_heatmap: need dim >= 2");
    Eigen::MatrixXd m = matrix.matrix();
    if (permutation) {
        if (static_cast<Index>(permutation->size()) != dim)
            throw invalid_input("render_heatmap: permutation length mismatch");
        m = apply_permutation(m, *permutation);
    }
    const int header = title.empty() ? 0 : 16;
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\""
        << (640 + header) << "\" viewBox=\"0 0 " << dim << ' '
        << (title.empty() ? dim : dim + 1) << "\">\n";
    double y0 = 0.0;
    if (!title.empty()) {
        out << "<text x=\"0\" y=\"0.8\" font-size=\"0.8\">" << title
            << "</text>\n";
        y0 = 1.0;
    }
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            out << "<rect x=\"" << j << "\" y=\"" << svg_detail::num(y0 + i)
                << "\" width=\"1\" height=\"1\" fill=\""
                << svg_detail::diverging_color(m(i, j)) << "\"/>\n";
        }
    }
    out << "</svg>\n";
    atomic_write(path, out.str());
}

/// ROC plot: unit square with ticks every 0.1, the chance diagonal, and one
/// polyline per labelled curve.
inline void render_roc(
    const std::vector<std::pair<std::string,
                                std::vector<std::pair<double, double>>>>& curves,
    const std::filesystem::path& path, const std::string& title = {}) {
    const double size = 440.0, margin = 50.0, plot = size - 2 * margin;
    auto px = [&](double x) { return margin + x * plot; };
    auto py = [&](double y) { return size - margin - y * plot; };
    static const char* palette[] = {"#c0392b", "#2471a3", "#1e8449", "#8e44ad"};

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size
        << "\" height=\"" << size << "\">\n";
    if (!title.empty())
        out << "<text x=\"" << px(0.0) << "\" y=\"24\" font-size=\"14\">" << title
            << "</text>\n";
    out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\"" << plot
        << "\" height=\"" << plot
        << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (int t = 0; t <= 10; ++t) {
        const double v = t / 10.0;
        out << "<line x1=\"" << px(v) << "\" y1=\"" << py(0.0) << "\" x2=\""
            << px(v) << "\" y2=\"" << (py(0.0) + 5) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << (px(v) - 8) << "\" y=\"" << (py(0.0) + 18)
            << "\" font-size=\"10\">" << svg_detail::num(v) << "</text>\n";
        out << "<line x1=\"" << (px(0.0) - 5) << "\" y1=\"" << py(v) << "\" x2=\""
            << px(0.0) << "\" y2=\"" << py(v) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << (px(0.0) - 32) << "\" y=\"" << (py(v) + 4)
            << "\" font-size=\"10\">" << svg_detail::num(v) << "</text>\n";
    }
    out << "<line x1=\"" << px(0.0) << "\" y1=\"" << py(0.0) << "\" x2=\""
        << px(1.0) << "\" y2=\"" << py(1.0)
        << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
    out << "<text x=\"" << (px(0.4)) << "\" y=\"" << (size - 12)
        << "\" font-size=\"12\">false positive rate</text>\n";
    int ci = 0;
    for (const auto& [label, pts] : curves) {
        const char* color = palette[ci % 4];
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : pts)
            out << svg_detail::num(px(x)) << ',' << svg_detail::num(py(y)) << ' ';
        out << "\"/>\n";
        out << "<text x=\"" << (px(1.0) - 110) << "\" y=\""
            << (py(0.0) - 14 - 16 * ci) << "\" font-size=\"12\" fill=\"" << color
            << "\">" << label << "</text>\n";
        ++ci;
    }
    out << "</svg>\n";
    atomic_write(path, out.str());
}

/// Replicability summary panel: one row per method with the only-arm-1 /
/// intersection / only-arm-2 counts and proportions. Counts matter here, so
/// this is a labelled three-column panel rather than geometric circles.
struct VennRow {
    std::string method;
    double only1 = 0.0, intersection = 0.0, only2 = 0.0;
    double prop1 = 0.0, prop_intersection = 0.0, prop2 = 0.0;
};

inline void render_venn_panel(const std::vector<VennRow>& rows,
                              const std::filesystem::path& path,
                              const std::string& title = {}) {
    const double row_h = 64.0, width = 560.0;
    const double height = 60.0 + row_h * rows.size();
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<text x=\"16\" y=\"24\" font-size=\"14\">"
        << (title.empty() ? "true-positive overlap" : title) << "</text>\n";
    const char* headers[3] = {"dataset 1 only", "both", "dataset 2 only"};
    const char* fills[3] = {"#d6e4f0", "#b8e0c2", "#f0ddd6"};
    for (int c = 0; c < 3; ++c)
        out << "<text x=\"" << (150 + 130 * c) << "\" y=\"44\" font-size=\"11\">"
            << headers[c] << "</text>\n";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double y = 56.0 + row_h * r;
        out << "<text x=\"16\" y=\"" << (y + 28) << "\" font-size=\"13\">"
            << rows[r].method << "</text>\n";
        const double vals[3] = {rows[r].only1, rows[r].intersection,
                                rows[r].only2};
        const double props[3] = {rows[r].prop1, rows[r].prop_intersection,
                                 rows[r].prop2};
        for (int c = 0; c < 3; ++c) {
            const double x = 140 + 130 * c;
            out << "<rect x=\"" << x << "\" y=\"" << y
                << "\" width=\"120\" height=\"44\" fill=\"" << fills[c]
                << "\" stroke=\"#555555\"/>\n";
            out << "<text x=\"" << (x + 10) << "\" y=\"" << (y + 19)
                << "\" font-size=\"13\">" << svg_detail::num(vals[c])
                << "</text>\n";
            out << "<text x=\"" << (x + 10) << "\" y=\"" << (y + 36)
                << "\" font-size=\"10\">" << svg_detail::num(100.0 * props[c])
                << "%</text>\n";
        }
    }
    out << "</svg>\n";
    atomic_write(path, out.str());
}

}  // namespace coreg
