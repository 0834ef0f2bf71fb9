#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "coreg/error.hpp"
#include "coreg/matrix.hpp"

namespace coreg {

/// Weighted undirected graph over variables. Weights are |correlation|,
/// so they live in [0, 1] with a zero diagonal.
struct WeightedGraph {
    Eigen::MatrixXd weights;
    std::vector<std::string> node_labels;  // optional, may be empty

    Index size() const { return weights.rows(); }
};

/// Disjoint dense modules G_1..G_K plus the singleton set G_0, with the
/// lambda that produced them and the value of the density objective.
struct ModulePartition {
    std::vector<std::vector<int>> modules;  // each sorted ascending, size >= 2
    std::vector<int> singletons;            // sorted ascending
    double lambda = 0.0;
    double objective_value = 0.0;

    int module_count() const { return static_cast<int>(modules.size()); }

    int total_nodes() const {
        int p = static_cast<int>(singletons.size());
        for (const auto& m : modules) p += static_cast<int>(m.size());
        return p;
    }

    /// Checks disjointness, coverage of 0..p-1, and minimum module size.
    void validate(int p) const {
        std::vector<char> seen(p, 0);
        auto mark = [&](int v) {
            if (v < 0 || v >= p)
                throw invalid_input("ModulePartition: node index out of range");
            if (seen[v]) throw invalid_input("ModulePartition: node listed twice");
            seen[v] = 1;
        };
        for (const auto& m : modules) {
            if (m.size() < 2)
                throw invalid_input("ModulePartition: module with fewer than 2 nodes");
            for (int v : m) mark(v);
        }
        for (int v : singletons) mark(v);
        if (std::find(seen.begin(), seen.end(), 0) != seen.end())
            throw invalid_input("ModulePartition: node not covered");
    }
};

/// Builds the co-expression graph from a correlation matrix: weight(j,j') is
/// |corr(j,j')| off the diagonal, zero on it.
inline WeightedGraph build_graph(const SymmetricMatrix& corr,
                                 std::vector<std::string> labels = {}) {
    const Eigen::MatrixXd& r = corr.matrix();
    for (Index i = 0; i < corr.dim(); ++i) {
        if (std::abs(r(i, i) - 1.0) > 1e-8)
            throw invalid_input("build_graph: diagonal entry " +
                                std::to_string(r(i, i)) + " at index " +
                                std::to_string(i) + " is not 1");
    }
    if (r.cwiseAbs().maxCoeff() > 1.0 + 1e-8)
        throw invalid_input("build_graph: correlation entry outside [-1, 1]");
    Eigen::MatrixXd w = r.cwiseAbs();
    w.diagonal().setZero();
    return WeightedGraph{std::move(w), std::move(labels)};
}

/// Sum over modules of |W(G_k)| / |V_k|^lambda, where |W(G_k)| adds the
/// weights of all within-module edges.
inline double module_objective(const WeightedGraph& g,
                               const ModulePartition& partition) {
    double total = 0.0;
    for (const auto& m : partition.modules) {
        double w = 0.0;
        for (std::size_t a = 0; a < m.size(); ++a)
            for (std::size_t b = a + 1; b < m.size(); ++b)
                w += g.weights(m[a], m[b]);
        total += w / std::pow(static_cast<double>(m.size()), partition.lambda);
    }
    return total;
}

struct PeelOptions {
    /// A candidate module is accepted only if its density ratio exceeds this.
    double acceptance_threshold = 0.05;
};

namespace detail {

struct PeelCandidate {
    std::vector<int> nodes;  // best prefix subgraph, sorted ascending
    double ratio = -1.0;
};

/// One peeling pass over `active`: repeatedly remove the minimum
/// weighted-degree node (ties to the lowest index) and keep the surviving
/// subgraph maximizing |W| / |V|^lambda over the whole removal sequence.
inline PeelCandidate peel_once(const Eigen::MatrixXd& w,
                               std::vector<int> active, double lambda) {
    const std::size_t s = active.size();
    PeelCandidate best;
    if (s < 2) return best;

    std::vector<double> wdeg(s, 0.0);
    double total = 0.0;
    for (std::size_t a = 0; a < s; ++a) {
        for (std::size_t b = a + 1; b < s; ++b) {
            const double wij = w(active[a], active[b]);
            wdeg[a] += wij;
            wdeg[b] += wij;
            total += wij;
        }
    }

    std::vector<char> alive(s, 1);
    std::vector<std::size_t> removal_order;
    removal_order.reserve(s);

    std::size_t live = s;
    double live_weight = total;
    // Evaluate the full set, then each suffix of the peeling sequence.
    best.ratio = total / std::pow(static_cast<double>(s), lambda);
    std::size_t best_removed = 0;

    while (live > 2) {
        std::size_t victim = s;
        for (std::size_t a = 0; a < s; ++a) {
            if (!alive[a]) continue;
            if (victim == s || wdeg[a] < wdeg[victim]) victim = a;
        }
        alive[victim] = 0;
        removal_order.push_back(victim);
        live_weight -= wdeg[victim];
        --live;
        for (std::size_t a = 0; a < s; ++a) {
            if (alive[a]) wdeg[a] -= w(active[a], active[victim]);
        }
        const double ratio =
            live_weight / std::pow(static_cast<double>(live), lambda);
        if (ratio > best.ratio) {
            best.ratio = ratio;
            best_removed = removal_order.size();
        }
    }

    std::vector<char> in_best(s, 1);
    for (std::size_t i = 0; i < best_removed; ++i) in_best[removal_order[i]] = 0;
    for (std::size_t a = 0; a < s; ++a)
        if (in_best[a]) best.nodes.push_back(active[a]);
    return best;  // `active` ascending implies best.nodes ascending
}

}  // namespace detail

/// Extracts dense modules by repeated greedy peeling. Each round peels the
/// current graph, keeps the density-maximizing subgraph, and accepts it as a
/// module when it has >= 2 nodes and ratio above the threshold; accepted
/// nodes leave the graph and the next round starts. Nodes left when no
/// candidate passes become singletons, so K emerges from the data.
inline ModulePartition extract_modules(const WeightedGraph& g, double lambda,
                                       const PeelOptions& opts = {}) {
    if (!(lambda > 1.0) || !(lambda <= 2.0))
        throw invalid_input("extract_modules: lambda must lie in (1, 2], got " +
                            std::to_string(lambda));
    ModulePartition part;
    part.lambda = lambda;

    std::vector<int> active(g.size());
    std::iota(active.begin(), active.end(), 0);

    while (active.size() >= 2) {
        detail::PeelCandidate cand = detail::peel_once(g.weights, active, lambda);
        if (cand.nodes.size() < 2 || cand.ratio <= opts.acceptance_threshold) break;
        std::vector<int> rest;
        rest.reserve(active.size() - cand.nodes.size());
        std::set_difference(active.begin(), active.end(), cand.nodes.begin(),
                            cand.nodes.end(), std::back_inserter(rest));
        part.modules.push_back(std::move(cand.nodes));
        active = std::move(rest);
    }
    part.singletons = std::move(active);
    part.objective_value = module_objective(g, part);
    return part;
}

/// Permutation placing module-1 nodes first (ascending within the module),
/// then module 2, ..., then singletons. Applying it to the correlation
/// matrix exposes the block structure.
inline std::vector<int> reorder_permutation(const ModulePartition& partition) {
    std::vector<int> perm;
    perm.reserve(partition.total_nodes());
    for (const auto& m : partition.modules)
        perm.insert(perm.end(), m.begin(), m.end());
    perm.insert(perm.end(), partition.singletons.begin(),
                partition.singletons.end());
    return perm;
}

/// Symmetric re-indexing of a matrix: out(i,j) = m(perm[i], perm[j]).
inline Eigen::MatrixXd apply_permutation(const Eigen::MatrixXd& m,
                                         const std::vector<int>& perm) {
    const Index p = static_cast<Index>(perm.size());
    Eigen::MatrixXd out(p, p);
    for (Index i = 0; i < p; ++i)
        for (Index j = 0; j < p; ++j) out(i, j) = m(perm[i], perm[j]);
    return out;
}

}  // namespace coreg
