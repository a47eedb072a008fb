// Compares the serial reference paths against the OpenMP kernels on
// synthetic workloads sized to run in seconds. Each row reports best-of-3
// wall time and cross-checks that both paths agree before timing counts.
#include "biastrend/cooc.hpp"
#include "biastrend/corpus.hpp"
#include "biastrend/embedding.hpp"
#include "biastrend/solver.hpp"
#include "biastrend/stats.hpp"
#include "biastrend/weat.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

using namespace biastrend;

namespace {

double best_of(int runs, const std::function<void()>& fn) {
    double best = 1e30;
    for (int r = 0; r < runs; ++r) {
        const double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

void report(const char* name, double serial, double parallel, const char* note) {
    std::printf("%-28s %9.3f s %9.3f s %6.2fx  %s\n", name, serial, parallel,
                serial / parallel, note);
}

TokenizedDocument synthetic_stream(uint64_t seed, size_t tokens, uint32_t vocab) {
    stats::Rng rng(seed);
    TokenizedDocument d;
    d.id = "bench";
    d.tokens.reserve(tokens);
    for (size_t i = 0; i < tokens; ++i) {
        // Skewed draw: low ids dominate, like word frequencies do.
        const uint32_t id = uint32_t(std::min(rng.below(vocab), rng.below(vocab)));
        d.tokens.push_back("w" + std::to_string(id));
    }
    return d;
}

void bench_cooc(int threads) {
    const TokenizedDocument doc = synthetic_stream(1, 2000000, 20000);
    const std::vector<const TokenizedDocument*> ptrs = {&doc};
    const Vocabulary vocab = build_vocabulary(ptrs, 1);
    CoocOptions opt;
    opt.window = 5;
    opt.min_count = 1;

    opt.workers = 1;
    uint64_t serial_pairs = 0;
    const double ts = best_of(3, [&] {
        serial_pairs = count_cooccurrences(ptrs, vocab, opt).total_pairs;
    });
    opt.workers = threads;
    uint64_t parallel_pairs = 0;
    const double tp = best_of(3, [&] {
        parallel_pairs = count_cooccurrences(ptrs, vocab, opt).total_pairs;
    });
    report("cooccurrence counting", ts, tp,
           serial_pairs == parallel_pairs ? "counts identical" : "COUNTS DIFFER");
}

SparseRows bench_graph(stats::Rng& rng, uint32_t n) {
    std::vector<uint32_t> rows, cols;
    std::vector<double> weights;
    auto add = [&](uint32_t i, uint32_t j) {
        rows.push_back(std::min(i, j));
        cols.push_back(std::max(i, j));
        weights.push_back(0.1 + rng.uniform01() * 4.0);
    };
    for (uint32_t v = 1; v < n; ++v)
        add(uint32_t(rng.below(v)), v);
    for (uint32_t e = 0; e < 4 * n; ++e) {
        const uint32_t i = uint32_t(rng.below(n));
        const uint32_t j = uint32_t(rng.below(n));
        if (i != j)
            add(i, j);
    }
    return SparseRows::from_upper(n, rows, cols, weights);
}

void bench_propagation(int threads) {
    stats::Rng rng(2);
    const uint32_t n = 20000;
    const SparseRows g = bench_graph(rng, n);
    std::map<uint32_t, double> chosen;
    while (chosen.size() < 100)
        chosen.emplace(uint32_t(rng.below(n)), rng.uniform01());
    const std::vector<std::pair<uint32_t, double>> labels(chosen.begin(), chosen.end());
    std::vector<uint32_t> unlabeled;
    std::vector<uint8_t> labeled(n, 0);
    for (const auto& [node, value] : labels)
        labeled[node] = 1;
    for (uint32_t u = 0; u < n; ++u)
        if (!labeled[u])
            unlabeled.push_back(u);

    const double tol = 1e-8;
    std::vector<double> serial_f;
    const double ts = best_of(3, [&] {
        uint32_t iters = 0;
        double resid = 0;
        serial_f = propagate_labels_pcg_serial(g, labels, unlabeled, tol, 10000,
                                               &iters, &resid);
    });
    PropagationOptions opt;
    opt.force_iterative = true;
    opt.tol = tol;
    opt.workers = threads;
    PropagationResult parallel;
    const double tp = best_of(3, [&] { parallel = propagate_labels(g, labels, opt); });

    double spread = 0;
    for (size_t s = 0; s < unlabeled.size(); ++s)
        spread = std::max(spread, std::abs(parallel.values[unlabeled[s]] -
                                           std::clamp(serial_f[s], 0.0, 1.0)));
    char note[64];
    std::snprintf(note, sizeof note, "max diff %.1e, %u iters", spread,
                  parallel.iterations);
    report("label propagation (pcg)", ts, tp, note);
}

void bench_weat(int threads) {
    stats::Rng rng(3);
    const uint32_t dim = 64;
    const uint32_t V = 24 + 8;
    EmbeddingMatrix m;
    m.vocab_size = V;
    m.dim = dim;
    m.data.resize(size_t(V) * dim);
    for (auto& v : m.data)
        v = float(rng.uniform01() * 2 - 1);
    std::vector<uint32_t> t1(12), t2(12), a1(4), a2(4);
    for (uint32_t i = 0; i < 12; ++i) {
        t1[i] = i;
        t2[i] = 12 + i;
    }
    for (uint32_t i = 0; i < 4; ++i) {
        a1[i] = 24 + i;
        a2[i] = 28 + i;
    }
    WeatOptions opt;
    opt.max_permutations = 3000000; // C(24,12) partitions enumerate exhaustively

    opt.workers = 1;
    WeatResult serial;
    const double ts = best_of(3, [&] { serial = weat_test(m, t1, t2, a1, a2, opt); });
    opt.workers = threads;
    WeatResult parallel;
    const double tp = best_of(3, [&] { parallel = weat_test(m, t1, t2, a1, a2, opt); });
    report("permutation enumeration", ts, tp,
           serial.p_value == parallel.p_value ? "p identical" : "P DIFFERS");
}

void bench_neighbors(int threads) {
    stats::Rng rng(4);
    const uint32_t V = 40000;
    const uint32_t dim = 96;
    EmbeddingSpace s;
    for (uint32_t i = 0; i < V; ++i) {
        s.vocab.index.emplace("w" + std::to_string(i), i);
        s.vocab.words.push_back("w" + std::to_string(i));
        s.vocab.counts.push_back(1);
    }
    s.vectors.vocab_size = V;
    s.vectors.dim = dim;
    s.vectors.data.resize(size_t(V) * dim);
    for (auto& v : s.vectors.data)
        v = float(rng.uniform01() * 2 - 1);

    std::vector<std::string> queries;
    for (int q = 0; q < 50; ++q)
        queries.push_back("w" + std::to_string(rng.below(V)));

    std::vector<Neighbor> last_serial, last_parallel;
    const double ts = best_of(3, [&] {
        for (const auto& q : queries)
            last_serial = nearest_neighbors(s, q, 10, 1);
    });
    const double tp = best_of(3, [&] {
        for (const auto& q : queries)
            last_parallel = nearest_neighbors(s, q, 10, threads);
    });
    bool same = last_serial.size() == last_parallel.size();
    for (size_t i = 0; same && i < last_serial.size(); ++i)
        same = last_serial[i].word == last_parallel[i].word;
    report("nearest neighbors (50q)", ts, tp, same ? "ranks identical" : "RANKS DIFFER");
}

} // namespace

int main() {
    const int threads = omp_get_max_threads();
    std::printf("threads available: %d\n", threads);
    std::printf("%-28s %11s %11s %7s\n", "kernel", "serial", "parallel", "speedup");
    bench_cooc(threads);
    bench_propagation(threads);
    bench_weat(threads);
    bench_neighbors(threads);
    return 0;
}
