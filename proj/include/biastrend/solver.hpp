#pragma once

#include "biastrend/cooc.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace biastrend {

// Harmonic label propagation on a weighted undirected graph.
//
// Labeled nodes are clamped; every unlabeled node u takes the weighted mean
// of its neighbours, i.e. (D_uu - W_uu) f_u = W_ul f_l with D the degree
// matrix. Self-loops cancel out of the system. The solution lies in the
// convex hull of the labels (here [0, 1]).
struct PropagationOptions {
    double tol = 1e-8;       // max_u |r_u| / D_u stopping criterion
    uint32_t max_iters = 10000;
    uint32_t dense_cutoff = 2000; // unlabeled count at or below -> dense solve
    bool force_iterative = false; // testing hook
    int workers = 1;
};

struct PropagationResult {
    std::vector<double> values;    // per graph node; labels echoed back
    std::vector<uint8_t> reached;  // 0 for nodes cut off from every label
    std::string method;            // "dense" or "pcg"
    uint32_t iterations = 0;
    double residual = 0.0;         // final max_u |r_u| / D_u
};

// labels: (node, value) pairs, values in [0, 1]. Duplicate nodes with
// conflicting values throw ConflictingLabel. Nodes unreachable from any
// labeled node keep value 0 and reached = 0.
PropagationResult propagate_labels(const SparseRows& graph,
                                   const std::vector<std::pair<uint32_t, double>>& labels,
                                   const PropagationOptions& opt);

// Dense reference: assembles (D_uu - W_uu) and solves by Cholesky.
// Intended for tests and small systems.
std::vector<double> propagate_labels_dense(const SparseRows& graph,
                                           const std::vector<std::pair<uint32_t, double>>& labels,
                                           const std::vector<uint32_t>& unlabeled);

// Serial conjugate gradient reference with Jacobi preconditioner; the
// parallel path must match it to solver tolerance.
std::vector<double> propagate_labels_pcg_serial(
    const SparseRows& graph, const std::vector<std::pair<uint32_t, double>>& labels,
    const std::vector<uint32_t>& unlabeled, double tol, uint32_t max_iters,
    uint32_t* iterations, double* residual);

} // namespace biastrend
