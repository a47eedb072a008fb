#include "biastrend/cbt.hpp"

#include "biastrend/errors.hpp"
#include "biastrend/stats.hpp"
#include "biastrend/weat.hpp"

#include <algorithm>

namespace biastrend {

SparseRows build_cbt_graph(const PpmiMatrix& ppmi, const Vocabulary& vocab,
                           const std::vector<std::string>& keep_terms, uint32_t vocab_cap,
                           std::vector<uint32_t>* node_of_vocab) {
    const uint32_t v = vocab.size();
    std::vector<uint8_t> active(v, 0);
    for (uint32_t i = 0; i < std::min(v, vocab_cap); ++i)
        active[i] = 1;
    for (const auto& t : keep_terms) {
        const int32_t id = vocab.id_of(t);
        if (id >= 0)
            active[static_cast<uint32_t>(id)] = 1;
    }

    std::vector<uint32_t> node(v, UINT32_MAX);
    uint32_t next = 0;
    for (uint32_t i = 0; i < v; ++i)
        if (active[i])
            node[i] = next++;

    std::vector<uint32_t> rows, cols;
    std::vector<double> weights;
    for (size_t k = 0; k < ppmi.rows.size(); ++k) {
        const uint32_t i = ppmi.rows[k], j = ppmi.cols[k];
        if (i < v && j < v && active[i] && active[j]) {
            rows.push_back(node[i]);
            cols.push_back(node[j]);
            weights.push_back(ppmi.weights[k]);
        }
    }
    if (node_of_vocab)
        *node_of_vocab = std::move(node);
    return SparseRows::from_upper(next, rows, cols, weights);
}

CbtResult cbt_test(const PpmiMatrix& ppmi, const Vocabulary& vocab,
                   const std::vector<std::string>& t1, const std::vector<std::string>& t2,
                   const std::vector<std::string>& a1, const std::vector<std::string>& a2,
                   const CbtOptions& opt) {
    std::vector<std::string> keep;
    for (const auto* list : {&t1, &t2, &a1, &a2})
        for (const auto& t : *list)
            keep.push_back(t);

    std::vector<uint32_t> node_of_vocab;
    const SparseRows graph =
        build_cbt_graph(ppmi, vocab, keep, opt.vocab_cap, &node_of_vocab);

    auto nodes_of = [&](const std::vector<std::string>& terms) {
        std::vector<uint32_t> out;
        for (const auto& t : terms) {
            const int32_t id = vocab.id_of(t);
            if (id >= 0 && node_of_vocab[static_cast<uint32_t>(id)] != UINT32_MAX)
                out.push_back(node_of_vocab[static_cast<uint32_t>(id)]);
        }
        return out;
    };
    const std::vector<uint32_t> n_t1 = nodes_of(t1);
    const std::vector<uint32_t> n_t2 = nodes_of(t2);
    std::vector<uint8_t> is_target(graph.n, 0);
    for (uint32_t u : n_t1)
        is_target[u] = 1;
    for (uint32_t u : n_t2)
        is_target[u] = 1;

    std::vector<std::pair<uint32_t, double>> labels;
    for (uint32_t u : nodes_of(a1)) {
        if (!is_target[u])
            labels.emplace_back(u, 1.0);
    }
    for (uint32_t u : nodes_of(a2)) {
        if (!is_target[u]) {
            for (const auto& [node, val] : labels)
                if (node == u && val != 0.0)
                    throw ConflictingLabel("attribute term labeled both 1 and 0");
            labels.emplace_back(u, 0.0);
        }
    }
    if (labels.empty())
        throw EmptySetError("no attribute term found in the graph vocabulary");

    const PropagationResult prop = propagate_labels(graph, labels, opt.propagation);

    CbtResult res;
    res.method = prop.method;
    res.iterations = prop.iterations;
    res.residual = prop.residual;

    auto collect = [&](const std::vector<std::string>& terms, std::vector<double>& scores) {
        for (const auto& t : terms) {
            const int32_t id = vocab.id_of(t);
            if (id < 0 || node_of_vocab[static_cast<uint32_t>(id)] == UINT32_MAX)
                continue; // OOV, reported through coverage upstream
            const uint32_t u = node_of_vocab[static_cast<uint32_t>(id)];
            if (prop.reached[u])
                scores.push_back(prop.values[u]);
            else
                res.excluded.push_back(t);
        }
    };
    std::vector<double> s1, s2;
    collect(t1, s1);
    collect(t2, s2);
    if (s1.size() < 2 || s2.size() < 2)
        throw TooFewTargets("need >= 2 propagated scores per target set, have " +
                            std::to_string(s1.size()) + " and " + std::to_string(s2.size()));

    const stats::TwoSampleT t = stats::pooled_t_test(s1, s2);
    res.t = t.t;
    res.p_value = t.p;
    res.mean_t1 = t.mean1;
    res.mean_t2 = t.mean2;
    return res;
}

} // namespace biastrend
