#include "biastrend/cooc.hpp"

#include "biastrend/corpus.hpp"
#include "biastrend/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace biastrend {

Vocabulary build_vocabulary(const std::vector<const TokenizedDocument*>& docs,
                            uint64_t min_count) {
    std::unordered_map<std::string, uint64_t> freq;
    for (const auto* d : docs)
        for (const auto& t : d->tokens)
            ++freq[t];
    std::vector<std::pair<std::string, uint64_t>> kept;
    kept.reserve(freq.size());
    for (auto& [w, c] : freq)
        if (c >= min_count)
            kept.emplace_back(w, c);
    if (kept.empty())
        throw EmptyVocabulary("no token reaches min_count " + std::to_string(min_count));
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second)
            return a.second > b.second;
        return a.first < b.first;
    });
    Vocabulary v;
    v.words.reserve(kept.size());
    v.counts.reserve(kept.size());
    for (uint32_t id = 0; id < kept.size(); ++id) {
        v.index.emplace(kept[id].first, id);
        v.words.push_back(std::move(kept[id].first));
        v.counts.push_back(kept[id].second);
    }
    return v;
}

namespace {

using PairMap = std::unordered_map<uint64_t, uint64_t>;

inline uint64_t pair_key(uint32_t a, uint32_t b) {
    if (a > b)
        std::swap(a, b);
    return (static_cast<uint64_t>(a) << 32) | b;
}

void count_document(const TokenizedDocument& doc, const Vocabulary& vocab, uint32_t window,
                    PairMap& into) {
    std::vector<int32_t> ids;
    ids.reserve(doc.tokens.size());
    for (const auto& t : doc.tokens)
        ids.push_back(vocab.id_of(t));
    const size_t n = ids.size();
    for (size_t i = 0; i < n; ++i) {
        if (ids[i] < 0)
            continue;
        const size_t hi = std::min(n, i + 1 + window);
        for (size_t j = i + 1; j < hi; ++j) {
            if (ids[j] < 0)
                continue;
            ++into[pair_key(static_cast<uint32_t>(ids[i]), static_cast<uint32_t>(ids[j]))];
        }
    }
}

} // namespace

CoocCounts count_cooccurrences(const std::vector<const TokenizedDocument*>& docs,
                               const Vocabulary& vocab, const CoocOptions& opt) {
    const int workers = std::max(1, opt.workers);
    const int n = static_cast<int>(docs.size());
    std::vector<PairMap> partial(static_cast<size_t>(workers));

#pragma omp parallel num_threads(workers)
    {
        PairMap& mine = partial[static_cast<size_t>(omp_get_thread_num())];
#pragma omp for schedule(dynamic)
        for (int i = 0; i < n; ++i)
            count_document(*docs[static_cast<size_t>(i)], vocab, opt.window, mine);
    }

    // Integer sums commute, so the merged map is worker-count independent.
    PairMap merged = std::move(partial[0]);
    for (size_t k = 1; k < partial.size(); ++k)
        for (const auto& [key, c] : partial[k])
            merged[key] += c;

    std::vector<uint64_t> keys;
    keys.reserve(merged.size());
    for (const auto& [key, c] : merged)
        keys.push_back(key);
    std::sort(keys.begin(), keys.end());

    CoocCounts out;
    out.vocab_size = vocab.size();
    out.rows.reserve(keys.size());
    out.cols.reserve(keys.size());
    out.counts.reserve(keys.size());
    out.margins.assign(vocab.size(), 0);
    for (uint64_t key : keys) {
        const auto i = static_cast<uint32_t>(key >> 32);
        const auto j = static_cast<uint32_t>(key & 0xFFFFFFFFu);
        const uint64_t c = merged[key];
        out.rows.push_back(i);
        out.cols.push_back(j);
        out.counts.push_back(c);
        out.total_pairs += c;
        out.margins[i] += c;
        if (j != i)
            out.margins[j] += c;
    }
    return out;
}

PpmiMatrix compute_ppmi(const CoocCounts& counts) {
    if (counts.total_pairs == 0)
        throw DegenerateCounts("no co-occurrence pairs counted");
    PpmiMatrix m;
    m.vocab_size = counts.vocab_size;
    const double total = static_cast<double>(counts.total_pairs);
    for (size_t k = 0; k < counts.counts.size(); ++k) {
        const double c = static_cast<double>(counts.counts[k]);
        const double mi = static_cast<double>(counts.margins[counts.rows[k]]);
        const double mj = static_cast<double>(counts.margins[counts.cols[k]]);
        const double pmi = std::log(c * total / (mi * mj));
        if (pmi > 0.0) {
            m.rows.push_back(counts.rows[k]);
            m.cols.push_back(counts.cols[k]);
            m.weights.push_back(pmi);
        }
    }
    return m;
}

SparseRows SparseRows::from_upper(uint32_t n, const std::vector<uint32_t>& rows,
                                  const std::vector<uint32_t>& cols,
                                  const std::vector<double>& weights) {
    SparseRows out;
    out.n = n;
    std::vector<uint64_t> degree(n, 0);
    for (size_t k = 0; k < rows.size(); ++k) {
        ++degree[rows[k]];
        if (cols[k] != rows[k])
            ++degree[cols[k]];
    }
    out.offsets.assign(n + 1, 0);
    for (uint32_t i = 0; i < n; ++i)
        out.offsets[i + 1] = out.offsets[i] + degree[i];
    out.cols.resize(out.offsets[n]);
    out.weights.resize(out.offsets[n]);
    std::vector<uint64_t> cursor(out.offsets.begin(), out.offsets.end() - 1);
    for (size_t k = 0; k < rows.size(); ++k) {
        const uint32_t i = rows[k], j = cols[k];
        out.cols[cursor[i]] = j;
        out.weights[cursor[i]] = weights[k];
        ++cursor[i];
        if (j != i) {
            out.cols[cursor[j]] = i;
            out.weights[cursor[j]] = weights[k];
            ++cursor[j];
        }
    }
    // upper-triangle input sorted by (i, j) yields sorted rows already for
    // the mirrored half only; sort each row to make the layout canonical
    for (uint32_t i = 0; i < n; ++i) {
        const auto b = static_cast<ptrdiff_t>(out.offsets[i]);
        const auto e = static_cast<ptrdiff_t>(out.offsets[i + 1]);
        std::vector<std::pair<uint32_t, double>> row;
        row.reserve(static_cast<size_t>(e - b));
        for (ptrdiff_t k = b; k < e; ++k)
            row.emplace_back(out.cols[static_cast<size_t>(k)],
                             out.weights[static_cast<size_t>(k)]);
        std::sort(row.begin(), row.end());
        for (ptrdiff_t k = b; k < e; ++k) {
            out.cols[static_cast<size_t>(k)] = row[static_cast<size_t>(k - b)].first;
            out.weights[static_cast<size_t>(k)] = row[static_cast<size_t>(k - b)].second;
        }
    }
    return out;
}

void write_ppmi(const std::string& path, const PpmiMatrix& m) {
    std::ostringstream out;
    out << "PPMI " << m.vocab_size << ' ' << m.rows.size() << '\n';
    char buf[64];
    for (size_t k = 0; k < m.rows.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%u %u %.12g\n", m.rows[k], m.cols[k], m.weights[k]);
        out << buf;
    }
    write_text_file(path, out.str());
}

PpmiMatrix read_ppmi(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    std::string magic;
    PpmiMatrix m;
    size_t nnz = 0;
    if (!(in >> magic >> m.vocab_size >> nnz) || magic != "PPMI")
        throw FormatError(path + ": expected 'PPMI <V> <nnz>' header");
    m.rows.reserve(nnz);
    m.cols.reserve(nnz);
    m.weights.reserve(nnz);
    uint32_t i = 0, j = 0;
    double w = 0.0;
    for (size_t k = 0; k < nnz; ++k) {
        if (!(in >> i >> j >> w))
            throw FormatError(path + ": truncated at entry " + std::to_string(k));
        if (i > j || j >= m.vocab_size)
            throw FormatError(path + ": entry " + std::to_string(k) + " out of range");
        m.rows.push_back(i);
        m.cols.push_back(j);
        m.weights.push_back(w);
    }
    return m;
}

void write_vocabulary(const std::string& path, const Vocabulary& v) {
    std::ostringstream out;
    for (uint32_t i = 0; i < v.size(); ++i)
        out << v.words[i] << ' ' << v.counts[i] << '\n';
    write_text_file(path, out.str());
}

Vocabulary read_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    Vocabulary v;
    std::string w;
    uint64_t c = 0;
    while (in >> w >> c) {
        v.index.emplace(w, static_cast<uint32_t>(v.words.size()));
        v.words.push_back(w);
        v.counts.push_back(c);
    }
    if (v.words.empty())
        throw EmptyVocabulary(path + " holds no vocabulary rows");
    return v;
}

} // namespace biastrend
