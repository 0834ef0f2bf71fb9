#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "coreg/error.hpp"

namespace coreg {

/// Confusion metrics plus the ROC sweep for one fitted method against the
/// ground-truth signal set. sensitivity is NaN (and flagged undefined) when
/// the truth set is empty.
struct MetricsSummary {
    double sensitivity = 0.0;
    double specificity = 0.0;
    double f1 = 0.0;
    double fdr = 0.0;
    double auc = 0.0;
    bool sensitivity_defined = true;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    std::vector<std::pair<double, double>> roc_points;  // (fpr, tpr)
};

/// ROC curve from raw p-values: sweep the rejection threshold over every
/// distinct p-value (ties enter together). Endpoints (0,0) and (1,1) are
/// always present and both coordinates are nondecreasing.
inline std::vector<std::pair<double, double>> roc_curve(
    const std::vector<double>& p_values, const std::vector<char>& is_signal) {
    const std::size_t m = p_values.size();
    long pos = 0, neg = 0;
    for (char s : is_signal) (s ? pos : neg) += 1;

    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return p_values[a] < p_values[b];
    });

    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(0.0, 0.0);
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < m) {
        std::size_t j = i;
        while (j < m && p_values[order[j]] == p_values[order[i]]) {
            (is_signal[order[j]] ? tp : fp) += 1;
            ++j;
        }
        const double tpr = pos > 0 ? static_cast<double>(tp) / pos : 1.0;
        const double fpr = neg > 0 ? static_cast<double>(fp) / neg : 1.0;
        pts.emplace_back(fpr, tpr);
        i = j;
    }
    if (pts.back() != std::make_pair(1.0, 1.0)) pts.emplace_back(1.0, 1.0);
    return pts;
}

/// Trapezoidal area under an ROC polyline.
inline double roc_auc(const std::vector<std::pair<double, double>>& pts) {
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        area += 0.5 * (pts[i].first - pts[i - 1].first) *
                (pts[i].second + pts[i - 1].second);
    }
    return area;
}

/// Builds the full summary from per-outcome raw p-values, rejection flags,
/// and the signal mask. Conventions: FDR = FP / max(TP + FP, 1),
/// F1 = 2 TP / (2 TP + FP + FN).
inline MetricsSummary compute_metrics(const std::vector<double>& p_values,
                                      const std::vector<char>& rejected,
                                      const std::vector<char>& is_signal) {
    const std::size_t m = p_values.size();
    if (rejected.size() != m || is_signal.size() != m)
        throw dimension_error("compute_metrics: input length mismatch");
    MetricsSummary s;
    for (std::size_t i = 0; i < m; ++i) {
        if (is_signal[i]) {
            (rejected[i] ? s.tp : s.fn) += 1;
        } else {
            (rejected[i] ? s.fp : s.tn) += 1;
        }
    }
    if (s.tp + s.fn > 0) {
        s.sensitivity = static_cast<double>(s.tp) / (s.tp + s.fn);
    } else {
        s.sensitivity = std::numeric_limits<double>::quiet_NaN();
        s.sensitivity_defined = false;
    }
    s.specificity =
        s.tn + s.fp > 0 ? static_cast<double>(s.tn) / (s.tn + s.fp) : 1.0;
    s.fdr = static_cast<double>(s.fp) /
            static_cast<double>(std::max<long>(s.tp + s.fp, 1));
    const long f1_den = 2 * s.tp + s.fp + s.fn;
    s.f1 = f1_den > 0 ? 2.0 * static_cast<double>(s.tp) / f1_den : 0.0;
    s.roc_points = roc_curve(p_values, is_signal);
    s.auc = roc_auc(s.roc_points);
    return s;
}

/// Interpolates a ROC polyline at one false-positive rate (linear between
/// sweep points); used to average curves across replications.
inline double roc_tpr_at(const std::vector<std::pair<double, double>>& pts,
                         double fpr) {
    double tpr = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const auto& [x0, y0] = pts[i - 1];
        const auto& [x1, y1] = pts[i];
        if (fpr >= x0 && fpr <= x1) {
            tpr = x1 > x0 ? y0 + (y1 - y0) * (fpr - x0) / (x1 - x0)
                          : std::max(y0, y1);
        }
    }
    return std::clamp(tpr, 0.0, 1.0);
}

}  // namespace coreg
