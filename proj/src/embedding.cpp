#include "biastrend/embedding.hpp"

#include "biastrend/corpus.hpp"
#include "biastrend/errors.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace biastrend {

namespace {

constexpr size_t kNegTableSize = 1000000;
constexpr double kMaxExp = 6.0;
constexpr double kMinAlphaRatio = 1e-4;

// Multiplicative congruential stream used throughout training; kept
// platform-independent on purpose so seeded runs reproduce everywhere.
inline uint64_t lcg_next(uint64_t& state) {
    state = state * 25214903917ULL + 11ULL;
    return state;
}

std::vector<uint32_t> build_negative_table(const Vocabulary& vocab) {
    std::vector<uint32_t> table(kNegTableSize);
    double norm = 0.0;
    for (uint64_t c : vocab.counts)
        norm += std::pow(static_cast<double>(c), 0.75);
    size_t i = 0;
    double cum = std::pow(static_cast<double>(vocab.counts[0]), 0.75) / norm;
    for (size_t k = 0; k < kNegTableSize; ++k) {
        table[k] = static_cast<uint32_t>(i);
        if (static_cast<double>(k) / kNegTableSize > cum && i + 1 < vocab.size()) {
            ++i;
            cum += std::pow(static_cast<double>(vocab.counts[i]), 0.75) / norm;
        }
    }
    return table;
}

inline double sigmoid_clipped(double f) {
    if (f > kMaxExp)
        return 1.0;
    if (f < -kMaxExp)
        return 0.0;
    return 1.0 / (1.0 + std::exp(-f));
}

struct TrainerState {
    const TrainOptions* opt;
    const std::vector<uint32_t>* neg_table;
    uint64_t total_words = 0; // in-vocab tokens per epoch
    EmbeddingMatrix* in;
    EmbeddingMatrix* out;
};

void train_stream(const TrainerState& st, const std::vector<std::vector<uint32_t>>& stream,
                  size_t doc_begin, size_t doc_end, uint64_t rng_seed,
                  uint64_t words_before) {
    const TrainOptions& opt = *st.opt;
    const uint32_t dim = opt.dim;
    const int window = static_cast<int>(opt.window);
    uint64_t rng = rng_seed;
    uint64_t processed = words_before;
    const uint64_t schedule_total = st.total_words * opt.epochs + 1;
    double alpha = opt.alpha *
                   std::max(1.0 - static_cast<double>(processed) /
                                      static_cast<double>(schedule_total),
                            kMinAlphaRatio);
    std::vector<double> h(dim), grad(dim);

    for (uint32_t epoch = 0; epoch < opt.epochs; ++epoch) {
        for (size_t d = doc_begin; d < doc_end; ++d) {
            const std::vector<uint32_t>& sent = stream[d];
            const int n = static_cast<int>(sent.size());
            for (int pos = 0; pos < n; ++pos) {
                const uint32_t center = sent[pos];
                if (processed % 10000 == 0) {
                    alpha = opt.alpha *
                            std::max(1.0 - static_cast<double>(processed) /
                                               static_cast<double>(schedule_total),
                                     kMinAlphaRatio);
                }
                ++processed;
                const int shrink = static_cast<int>(lcg_next(rng) % opt.window);
                const int lo = std::max(0, pos - window + shrink);
                const int hi = std::min(n - 1, pos + window - shrink);

                if (opt.arch == TrainArchitecture::kCbow) {
                    std::fill(h.begin(), h.end(), 0.0);
                    std::fill(grad.begin(), grad.end(), 0.0);
                    int cw = 0;
                    for (int c = lo; c <= hi; ++c) {
                        if (c == pos)
                            continue;
                        const float* vin = st.in->row(sent[c]);
                        for (uint32_t k = 0; k < dim; ++k)
                            h[k] += vin[k];
                        ++cw;
                    }
                    if (cw == 0)
                        continue;
                    for (uint32_t k = 0; k < dim; ++k)
                        h[k] /= cw;
                    for (uint32_t s = 0; s <= opt.negative; ++s) {
                        uint32_t target;
                        double label;
                        if (s == 0) {
                            target = center;
                            label = 1.0;
                        } else {
                            target = (*st.neg_table)[(lcg_next(rng) >> 16) % kNegTableSize];
                            if (target == center)
                                continue;
                            label = 0.0;
                        }
                        float* vout = st.out->row(target);
                        double f = 0.0;
                        for (uint32_t k = 0; k < dim; ++k)
                            f += h[k] * vout[k];
                        const double g = (label - sigmoid_clipped(f)) * alpha;
                        for (uint32_t k = 0; k < dim; ++k) {
                            grad[k] += g * vout[k];
                            vout[k] += static_cast<float>(g * h[k]);
                        }
                    }
                    for (int c = lo; c <= hi; ++c) {
                        if (c == pos)
                            continue;
                        float* vin = st.in->row(sent[c]);
                        for (uint32_t k = 0; k < dim; ++k)
                            vin[k] += static_cast<float>(grad[k]);
                    }
                } else { // skip-gram
                    for (int c = lo; c <= hi; ++c) {
                        if (c == pos)
                            continue;
                        float* vin = st.in->row(sent[c]);
                        std::fill(grad.begin(), grad.end(), 0.0);
                        for (uint32_t s = 0; s <= opt.negative; ++s) {
                            uint32_t target;
                            double label;
                            if (s == 0) {
                                target = center;
                                label = 1.0;
                            } else {
                                target =
                                    (*st.neg_table)[(lcg_next(rng) >> 16) % kNegTableSize];
                                if (target == center)
                                    continue;
                                label = 0.0;
                            }
                            float* vout = st.out->row(target);
                            double f = 0.0;
                            for (uint32_t k = 0; k < dim; ++k)
                                f += vin[k] * vout[k];
                            const double g = (label - sigmoid_clipped(f)) * alpha;
                            for (uint32_t k = 0; k < dim; ++k) {
                                grad[k] += g * vout[k];
                                vout[k] += static_cast<float>(g * vin[k]);
                            }
                        }
                        for (uint32_t k = 0; k < dim; ++k)
                            vin[k] += static_cast<float>(grad[k]);
                    }
                }
            }
        }
    }
}

} // namespace

EmbeddingSpace train_embeddings(const std::vector<const TokenizedDocument*>& docs,
                                const TrainOptions& opt) {
    if (opt.dim < 2 || opt.window < 1 || opt.epochs < 1)
        throw UsageError("training needs dim >= 2, window >= 1, epochs >= 1");
    EmbeddingSpace space;
    space.vocab = build_vocabulary(docs, opt.min_count);
    const uint32_t v = space.vocab.size();

    space.vectors.vocab_size = v;
    space.vectors.dim = opt.dim;
    space.vectors.data.assign(static_cast<size_t>(v) * opt.dim, 0.0f);
    EmbeddingMatrix out_vectors;
    out_vectors.vocab_size = v;
    out_vectors.dim = opt.dim;
    out_vectors.data.assign(static_cast<size_t>(v) * opt.dim, 0.0f);

    uint64_t rng = opt.seed;
    for (size_t i = 0; i < space.vectors.data.size(); ++i) {
        const double u =
            (static_cast<double>(lcg_next(rng) & 0xFFFF) / 65536.0 - 0.5) / opt.dim;
        space.vectors.data[i] = static_cast<float>(u);
    }

    std::vector<std::vector<uint32_t>> stream;
    stream.reserve(docs.size());
    uint64_t total_words = 0;
    for (const auto* d : docs) {
        std::vector<uint32_t> ids;
        ids.reserve(d->tokens.size());
        for (const auto& t : d->tokens) {
            const int32_t id = space.vocab.id_of(t);
            if (id >= 0)
                ids.push_back(static_cast<uint32_t>(id));
        }
        total_words += ids.size();
        stream.push_back(std::move(ids));
    }

    const std::vector<uint32_t> neg_table = build_negative_table(space.vocab);
    TrainerState st;
    st.opt = &opt;
    st.neg_table = &neg_table;
    st.total_words = total_words;
    st.in = &space.vectors;
    st.out = &out_vectors;

    const int workers = std::max(1, opt.workers);
    if (workers == 1) {
        train_stream(st, stream, 0, stream.size(), opt.seed, 0);
    } else {
        // Unsynchronized shared updates: fast, but results vary run to run.
        std::vector<uint64_t> words_before(static_cast<size_t>(workers) + 1, 0);
        std::vector<size_t> bounds(static_cast<size_t>(workers) + 1, 0);
        for (int w = 0; w <= workers; ++w)
            bounds[static_cast<size_t>(w)] = stream.size() * static_cast<size_t>(w) /
                                             static_cast<size_t>(workers);
        for (int w = 0; w < workers; ++w) {
            uint64_t sum = 0;
            for (size_t d = bounds[static_cast<size_t>(w)];
                 d < bounds[static_cast<size_t>(w) + 1]; ++d)
                sum += stream[d].size();
            words_before[static_cast<size_t>(w) + 1] =
                words_before[static_cast<size_t>(w)] + sum;
        }
#pragma omp parallel num_threads(workers)
        {
            const int w = omp_get_thread_num();
            train_stream(st, stream, bounds[static_cast<size_t>(w)],
                         bounds[static_cast<size_t>(w) + 1],
                         opt.seed + 0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(w + 1),
                         words_before[static_cast<size_t>(w)]);
        }
    }

    for (float x : space.vectors.data)
        if (!std::isfinite(x))
            throw DataError("trained vectors contain non-finite entries");
    return space;
}

double cosine(const double* a, const double* b, size_t dim) {
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (size_t k = 0; k < dim; ++k) {
        ab += a[k] * b[k];
        aa += a[k] * a[k];
        bb += b[k] * b[k];
    }
    if (aa == 0.0 || bb == 0.0)
        throw ZeroVector("cosine of a zero vector");
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double cosine(const EmbeddingMatrix& m, uint32_t a, uint32_t b) {
    const float* va = m.row(a);
    const float* vb = m.row(b);
    double ab = 0.0, aa = 0.0, bb = 0.0;
    for (uint32_t k = 0; k < m.dim; ++k) {
        ab += static_cast<double>(va[k]) * vb[k];
        aa += static_cast<double>(va[k]) * va[k];
        bb += static_cast<double>(vb[k]) * vb[k];
    }
    if (aa == 0.0 || bb == 0.0)
        throw ZeroVector("cosine of a zero vector");
    return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const std::string& word,
                                        uint32_t k, int workers) {
    const int32_t q = space.vocab.id_of(word);
    if (q < 0)
        throw OovTerm("term '" + word + "' not in vocabulary");
    const uint32_t v = space.vocab.size();
    const uint32_t dim = space.vectors.dim;
    const auto nq = static_cast<uint32_t>(q);
    const float* vq = space.vectors.row(nq);
    double qq = 0.0;
    for (uint32_t k = 0; k < dim; ++k)
        qq += static_cast<double>(vq[k]) * vq[k];
    if (qq == 0.0)
        throw ZeroVector("query term has a zero vector");
    // zero rows rank below every real similarity instead of failing the scan
    std::vector<double> sims(v, -2.0);
#pragma omp parallel for schedule(static) num_threads(std::max(1, workers))
    for (int64_t i = 0; i < static_cast<int64_t>(v); ++i) {
        const float* vi = space.vectors.row(static_cast<uint32_t>(i));
        double ab = 0.0, bb = 0.0;
        for (uint32_t k = 0; k < dim; ++k) {
            ab += static_cast<double>(vq[k]) * vi[k];
            bb += static_cast<double>(vi[k]) * vi[k];
        }
        if (bb > 0.0)
            sims[static_cast<size_t>(i)] = ab / (std::sqrt(qq) * std::sqrt(bb));
    }
    std::vector<uint32_t> order;
    order.reserve(v - 1);
    for (uint32_t i = 0; i < v; ++i)
        if (i != nq)
            order.push_back(i);
    const uint32_t want = std::min<uint32_t>(k, v - 1);
    std::partial_sort(order.begin(), order.begin() + want, order.end(),
                      [&](uint32_t a, uint32_t b) {
                          if (sims[a] != sims[b])
                              return sims[a] > sims[b];
                          return space.vocab.words[a] < space.vocab.words[b];
                      });
    std::vector<Neighbor> result;
    result.reserve(want);
    for (uint32_t i = 0; i < want; ++i)
        result.push_back({space.vocab.words[order[i]], sims[order[i]]});
    return result;
}

void write_embeddings(const std::string& path, const EmbeddingSpace& space) {
    std::ostringstream out;
    out << space.vocab.size() << ' ' << space.vectors.dim << '\n';
    char buf[48];
    for (uint32_t i = 0; i < space.vocab.size(); ++i) {
        out << space.vocab.words[i];
        const float* row = space.vectors.row(i);
        for (uint32_t k = 0; k < space.vectors.dim; ++k) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(row[k]));
            out << buf;
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

EmbeddingSpace read_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    uint32_t v = 0, dim = 0;
    if (!(in >> v >> dim) || v == 0 || dim == 0)
        throw FormatError(path + ": expected '<vocab_size> <dimension>' header");
    EmbeddingSpace space;
    space.vectors.vocab_size = v;
    space.vectors.dim = dim;
    space.vectors.data.resize(static_cast<size_t>(v) * dim);
    space.vocab.words.reserve(v);
    space.vocab.counts.assign(v, 0);
    for (uint32_t i = 0; i < v; ++i) {
        std::string word;
        if (!(in >> word))
            throw FormatError(path + ": declared " + std::to_string(v) + " rows, found " +
                              std::to_string(i));
        if (space.vocab.index.count(word))
            throw DuplicateTerm(path + ": term '" + word + "' appears twice");
        space.vocab.index.emplace(word, i);
        space.vocab.words.push_back(word);
        float* row = space.vectors.row(i);
        for (uint32_t k = 0; k < dim; ++k) {
            if (!(in >> row[k]))
                throw FormatError(path + ": row for '" + word + "' has fewer than " +
                                  std::to_string(dim) + " values");
        }
    }
    return space;
}

} // namespace biastrend
