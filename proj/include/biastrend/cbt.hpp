#pragma once

#include "biastrend/cooc.hpp"
#include "biastrend/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace biastrend {

struct CbtOptions {
    PropagationOptions propagation;
    uint32_t vocab_cap = 50000; // frequency rank cap for the graph
};

struct CbtResult {
    double t = 0.0;
    double p_value = 0.0; // two-sided
    double mean_t1 = 0.0;
    double mean_t2 = 0.0;
    std::string method;
    uint32_t iterations = 0;
    double residual = 0.0;
    std::vector<std::string> excluded; // targets cut off from all labels
};

// Concept bias test over the PPMI graph of one slice.
//
// A1 terms are clamped to 1, A2 terms to 0, target terms stay unlabeled
// even when the graph caps the vocabulary. Propagated scores of T1 and T2
// are compared with a pooled two-sample t test; positive t means T1 sits
// closer to A1.
//
// A term in both A1 and A2 throws ConflictingLabel. Targets not reachable
// from any labeled node are dropped from the test and listed in `excluded`.
CbtResult cbt_test(const PpmiMatrix& ppmi, const Vocabulary& vocab,
                   const std::vector<std::string>& t1, const std::vector<std::string>& t2,
                   const std::vector<std::string>& a1, const std::vector<std::string>& a2,
                   const CbtOptions& opt);

// The graph construction used by cbt_test: keeps the vocab_cap most
// frequent tokens plus every listed term. Nodes without PPMI mass stay in
// the graph and fall out downstream as unreachable.
SparseRows build_cbt_graph(const PpmiMatrix& ppmi, const Vocabulary& vocab,
                           const std::vector<std::string>& keep_terms, uint32_t vocab_cap,
                           std::vector<uint32_t>* node_of_vocab);

} // namespace biastrend
