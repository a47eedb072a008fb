#pragma once

#include "biastrend/embedding.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace biastrend {

// Resolves spec terms against a vocabulary. `found`/`missing` keep list
// order; coverage is found / requested.
struct TermResolution {
    std::vector<uint32_t> ids;
    std::vector<std::string> found;
    std::vector<std::string> missing;
    double coverage = 0.0;
};

TermResolution resolve_in_vocab(const std::vector<std::string>& terms,
                                const Vocabulary& vocab);

struct WeatOptions {
    uint64_t max_permutations = 100000; // enumeration budget before sampling
    uint64_t seed = 1;
    int workers = 1;
};

struct WeatResult {
    double statistic = 0.0;   // s(T1, T2, A1, A2)
    double effect_size = 0.0; // Cohen's d over per-term associations
    double p_value = 0.0;     // one-sided, strict inequality
    bool exhaustive = true;   // false when partitions were sampled
    uint64_t partitions = 0;  // evaluated partitions
};

// Differential association test over one embedding space.
// s(t, A1, A2) = mean cos(t, a in A1) - mean cos(t, a in A2);
// statistic sums s over T1 minus s over T2; effect size divides the mean
// difference by the population std of all target associations; the p-value
// counts size-preserving repartitions of T1 u T2 with a larger statistic.
// Throws EmptySetError on an empty id list, DegenerateDistribution when all
// associations coincide.
WeatResult weat_test(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
                     const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
                     const std::vector<uint32_t>& a2, const WeatOptions& opt);

// Association profile correlation. Target means are compared against every
// attribute (A1 then A2, duplicates dropped) by Spearman correlation;
// 1.0 is unbiased, lower is more biased.
struct EctResult {
    double correlation = 0.0;
    double p_value = 0.0; // t approximation, two-sided
    size_t n_attributes = 0;
};

EctResult ect_test(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
                   const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
                   const std::vector<uint32_t>& a2);

// Number of distinct size-preserving partitions C(n1 + n2, n1), saturating
// at uint64 max.
uint64_t partition_count(uint64_t n1, uint64_t n2);

} // namespace biastrend
