#include "biastrend/weat.hpp"

#include "biastrend/errors.hpp"
#include "biastrend/stats.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace biastrend {

TermResolution resolve_in_vocab(const std::vector<std::string>& terms,
                                const Vocabulary& vocab) {
    TermResolution r;
    for (const auto& t : terms) {
        const int32_t id = vocab.id_of(t);
        if (id >= 0) {
            r.ids.push_back(static_cast<uint32_t>(id));
            r.found.push_back(t);
        } else {
            r.missing.push_back(t);
        }
    }
    r.coverage = terms.empty()
                     ? 0.0
                     : static_cast<double>(r.found.size()) / static_cast<double>(terms.size());
    return r;
}

uint64_t partition_count(uint64_t n1, uint64_t n2) {
    const uint64_t n = n1 + n2;
    const uint64_t k = std::min(n1, n2);
    unsigned __int128 c = 1;
    for (uint64_t i = 1; i <= k; ++i) {
        c = c * (n - k + i) / i;
        if (c > UINT64_MAX)
            return UINT64_MAX;
    }
    return static_cast<uint64_t>(c);
}

namespace {

double mean_cosine(const EmbeddingMatrix& m, uint32_t t, const std::vector<uint32_t>& a) {
    double acc = 0.0;
    for (uint32_t id : a)
        acc += cosine(m, t, id);
    return acc / static_cast<double>(a.size());
}

// s(t, A1, A2)
double association(const EmbeddingMatrix& m, uint32_t t, const std::vector<uint32_t>& a1,
                   const std::vector<uint32_t>& a2) {
    return mean_cosine(m, t, a1) - mean_cosine(m, t, a2);
}

// Lexicographically next k-combination over {0..n-1}; false after the last.
bool next_combination(std::vector<uint32_t>& comb, uint32_t n) {
    const auto k = static_cast<uint32_t>(comb.size());
    for (uint32_t ii = k; ii > 0; --ii) {
        const uint32_t i = ii - 1;
        if (comb[i] < n - k + i) {
            ++comb[i];
            for (uint32_t j = i + 1; j < k; ++j)
                comb[j] = comb[j - 1] + 1;
            return true;
        }
    }
    return false;
}

// rank-th k-combination in lexicographic order.
std::vector<uint32_t> unrank_combination(uint64_t rank, uint32_t n, uint32_t k) {
    std::vector<uint32_t> comb(k);
    uint32_t x = 0;
    for (uint32_t i = 0; i < k; ++i) {
        while (true) {
            const uint64_t c = partition_count(k - i - 1, n - x - k + i);
            // combinations that keep position i at x
            if (rank < c) {
                comb[i] = x;
                ++x;
                break;
            }
            rank -= c;
            ++x;
        }
    }
    return comb;
}

// Statistic of the subset interpretation: members of `subset` play T1.
// Computed identically for the observed partition and every permuted one so
// the strict comparison is exact.
double subset_statistic(const std::vector<double>& assoc, const std::vector<uint32_t>& subset,
                        double total) {
    double s = 0.0;
    for (uint32_t i : subset)
        s += assoc[i];
    return 2.0 * s - total;
}

} // namespace

WeatResult weat_test(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
                     const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
                     const std::vector<uint32_t>& a2, const WeatOptions& opt) {
    if (t1.empty() || t2.empty() || a1.empty() || a2.empty())
        throw EmptySetError("every term set must resolve to at least one vector");

    const size_t n1 = t1.size(), n2 = t2.size();
    const uint32_t n = static_cast<uint32_t>(n1 + n2);
    std::vector<double> assoc(n);
    for (size_t i = 0; i < n1; ++i)
        assoc[i] = association(m, t1[i], a1, a2);
    for (size_t i = 0; i < n2; ++i)
        assoc[n1 + i] = association(m, t2[i], a1, a2);

    WeatResult res;
    const double total = std::accumulate(assoc.begin(), assoc.end(), 0.0);
    std::vector<uint32_t> identity(n1);
    std::iota(identity.begin(), identity.end(), 0u);
    res.statistic = subset_statistic(assoc, identity, total);

    std::vector<double> g1(assoc.begin(), assoc.begin() + static_cast<ptrdiff_t>(n1));
    std::vector<double> g2(assoc.begin() + static_cast<ptrdiff_t>(n1), assoc.end());
    const auto [mn, mx] = std::minmax_element(assoc.begin(), assoc.end());
    if (*mn == *mx)
        throw DegenerateDistribution("all target associations coincide");
    res.effect_size =
        (stats::mean(g1) - stats::mean(g2)) / stats::stddev_population(assoc);

    const uint64_t n_partitions = partition_count(n1, n2);
    const auto k = static_cast<uint32_t>(n1);
    uint64_t above = 0;
    if (n_partitions <= opt.max_permutations) {
        res.exhaustive = true;
        res.partitions = n_partitions;
        const int workers = std::max(1, opt.workers);
        const uint64_t chunk = (n_partitions + workers - 1) / static_cast<uint64_t>(workers);
#pragma omp parallel num_threads(workers) reduction(+ : above)
        {
            const auto w = static_cast<uint64_t>(omp_get_thread_num());
            const uint64_t lo = std::min(w * chunk, n_partitions);
            const uint64_t hi = std::min(lo + chunk, n_partitions);
            if (lo < hi) {
                std::vector<uint32_t> comb = unrank_combination(lo, n, k);
                for (uint64_t r = lo; r < hi; ++r) {
                    if (subset_statistic(assoc, comb, total) > res.statistic)
                        ++above;
                    if (r + 1 < hi)
                        next_combination(comb, n);
                }
            }
        }
        res.p_value = static_cast<double>(above) / static_cast<double>(n_partitions);
    } else {
        res.exhaustive = false;
        res.partitions = opt.max_permutations;
        stats::Rng rng(opt.seed);
        std::vector<uint32_t> pool(n);
        std::vector<uint32_t> subset(k);
        for (uint64_t s = 0; s < opt.max_permutations; ++s) {
            std::iota(pool.begin(), pool.end(), 0u);
            for (uint32_t i = 0; i < k; ++i) {
                const uint64_t j = i + rng.below(n - i);
                std::swap(pool[i], pool[j]);
                subset[i] = pool[i];
            }
            if (subset_statistic(assoc, subset, total) > res.statistic)
                ++above;
        }
        res.p_value = static_cast<double>(above) / static_cast<double>(opt.max_permutations);
    }
    return res;
}

EctResult ect_test(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
                   const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
                   const std::vector<uint32_t>& a2) {
    if (t1.empty() || t2.empty() || a1.empty() || a2.empty())
        throw EmptySetError("every term set must resolve to at least one vector");

    const uint32_t dim = m.dim;
    auto centroid = [&](const std::vector<uint32_t>& ids) {
        std::vector<double> mu(dim, 0.0);
        for (uint32_t id : ids) {
            const float* row = m.row(id);
            for (uint32_t kk = 0; kk < dim; ++kk)
                mu[kk] += row[kk];
        }
        for (auto& x : mu)
            x /= static_cast<double>(ids.size());
        return mu;
    };
    const std::vector<double> mu1 = centroid(t1);
    const std::vector<double> mu2 = centroid(t2);

    std::vector<uint32_t> attrs;
    for (uint32_t id : a1)
        if (std::find(attrs.begin(), attrs.end(), id) == attrs.end())
            attrs.push_back(id);
    for (uint32_t id : a2)
        if (std::find(attrs.begin(), attrs.end(), id) == attrs.end())
            attrs.push_back(id);

    std::vector<double> s1, s2;
    s1.reserve(attrs.size());
    s2.reserve(attrs.size());
    for (uint32_t id : attrs) {
        const float* row = m.row(id);
        std::vector<double> v(row, row + dim);
        s1.push_back(cosine(mu1.data(), v.data(), dim));
        s2.push_back(cosine(mu2.data(), v.data(), dim));
    }

    EctResult res;
    res.n_attributes = attrs.size();
    res.correlation = stats::spearman(s1, s2);
    res.p_value = stats::spearman_p_approx(res.correlation, attrs.size());
    return res;
}

} // namespace biastrend
