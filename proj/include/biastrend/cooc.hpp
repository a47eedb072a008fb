#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace biastrend {

struct TokenizedDocument;

// Token ids are assigned by descending corpus frequency, ties broken
// lexicographically, so id 0 is the most frequent surviving token.
struct Vocabulary {
    std::vector<std::string> words;
    std::vector<uint64_t> counts;
    std::unordered_map<std::string, uint32_t> index;

    uint32_t size() const { return static_cast<uint32_t>(words.size()); }
    bool contains(const std::string& w) const { return index.count(w) != 0; }
    int32_t id_of(const std::string& w) const {
        auto it = index.find(w);
        return it == index.end() ? -1 : static_cast<int32_t>(it->second);
    }
};

// Tokens occurring fewer than min_count times are dropped.
Vocabulary build_vocabulary(const std::vector<const TokenizedDocument*>& docs,
                            uint64_t min_count);

struct CoocOptions {
    uint32_t window = 5;      // symmetric context width in tokens
    uint64_t min_count = 10;  // vocabulary threshold
    int workers = 1;
};

// Upper-triangle sparse counts (i <= j). Pairs never cross document
// boundaries. A pair of equal tokens inside one window counts once per
// ordered co-occurrence, stored on the diagonal.
struct CoocCounts {
    uint32_t vocab_size = 0;
    std::vector<uint32_t> rows;   // i, with rows[k] <= cols[k]
    std::vector<uint32_t> cols;   // j
    std::vector<uint64_t> counts; // c_ij
    uint64_t total_pairs = 0;     // sum of counts
    std::vector<uint64_t> margins; // per-token pair participation

    // entries are sorted by (i, j) and unique
};

// Counts co-occurrences within a fixed window over each document.
// Result is independent of worker count.
CoocCounts count_cooccurrences(const std::vector<const TokenizedDocument*>& docs,
                               const Vocabulary& vocab, const CoocOptions& opt);

// Sparse symmetric PPMI matrix; zero entries are not stored.
struct PpmiMatrix {
    uint32_t vocab_size = 0;
    std::vector<uint32_t> rows;
    std::vector<uint32_t> cols;
    std::vector<double> weights;
};

// ppmi = max(0, ln(c_ij * total / (margin_i * margin_j))).
// Throws DegenerateCounts when total_pairs is zero.
PpmiMatrix compute_ppmi(const CoocCounts& counts);

// CSR view with both triangles materialized, rows sorted by column.
struct SparseRows {
    uint32_t n = 0;
    std::vector<uint64_t> offsets; // n + 1
    std::vector<uint32_t> cols;
    std::vector<double> weights;

    static SparseRows from_upper(uint32_t n, const std::vector<uint32_t>& rows,
                                 const std::vector<uint32_t>& cols,
                                 const std::vector<double>& weights);
};

// Text serialization: header "PPMI <V> <nnz>", then "<i> <j> <w>" per entry,
// upper triangle, row-major. Vocabulary is stored alongside as "<word> <count>".
void write_ppmi(const std::string& path, const PpmiMatrix& m);
PpmiMatrix read_ppmi(const std::string& path);
void write_vocabulary(const std::string& path, const Vocabulary& v);
Vocabulary read_vocabulary(const std::string& path);

} // namespace biastrend
