#pragma once

#include <Eigen/Dense>
#include <map>
#include <utility>
#include <vector>

#include "coreg/network.hpp"
#include "coreg/rng.hpp"

namespace coreg::test {

/// Random dense symmetric matrix with unit diagonal, entries in [-b, b].
inline Eigen::MatrixXd random_correlation_like(int p, double b, RngStream& rng) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
            m(i, j) = m(j, i) = b * (2.0 * rng.uniform() - 1.0);
    return m;
}

/// Cluster labels from a partition: module index for members, a unique
/// label per singleton.
inline std::vector<int> partition_labels(const ModulePartition& part, int p) {
    std::vector<int> labels(p, -1);
    for (int k = 0; k < part.module_count(); ++k)
        for (int v : part.modules[k]) labels[v] = k;
    int next = part.module_count();
    for (int v : part.singletons) labels[v] = next++;
    return labels;
}

/// Adjusted Rand index between two labelings.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::map<std::pair<int, int>, long> joint;
    std::map<int, long> ma, mb;
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[{a[i], b[i]}];
        ++ma[a[i]];
        ++mb[b[i]];
    }
    auto c2 = [](long x) { return 0.5 * x * (x - 1); };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [k, v] : joint) sum_joint += c2(v);
    for (const auto& [k, v] : ma) sum_a += c2(v);
    for (const auto& [k, v] : mb) sum_b += c2(v);
    const double total = c2(static_cast<long>(n));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;
    return (sum_joint - expected) / (max_index - expected);
}

}  // namespace coreg::test
