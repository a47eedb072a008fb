#pragma once

#include "biastrend/cooc.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace biastrend {

struct TokenizedDocument;

// Dense word vectors, row per vocabulary entry, float storage.
struct EmbeddingMatrix {
    uint32_t vocab_size = 0;
    uint32_t dim = 0;
    std::vector<float> data; // row-major

    const float* row(uint32_t i) const { return data.data() + size_t(i) * dim; }
    float* row(uint32_t i) { return data.data() + size_t(i) * dim; }
};

struct EmbeddingSpace {
    Vocabulary vocab;
    EmbeddingMatrix vectors;
};

enum class TrainArchitecture { kCbow, kSkipGram };

struct TrainOptions {
    uint32_t dim = 200;
    uint32_t window = 5;
    uint64_t min_count = 5;
    uint32_t epochs = 5;
    uint32_t negative = 5;
    double alpha = 0.025;       // initial learning rate, decays linearly
    TrainArchitecture arch = TrainArchitecture::kCbow;
    uint64_t seed = 1;
    int workers = 1; // >1 uses lock-free updates; results then vary per run
};

// Trains word vectors with negative sampling over the slice token stream.
// Single-worker training is bit-deterministic for a fixed seed.
EmbeddingSpace train_embeddings(const std::vector<const TokenizedDocument*>& docs,
                                const TrainOptions& opt);

// Cosine of two vocabulary rows; throws ZeroVector on an all-zero operand.
double cosine(const EmbeddingMatrix& m, uint32_t a, uint32_t b);
double cosine(const double* a, const double* b, size_t dim);

struct Neighbor {
    std::string word;
    double similarity;
};

// Top-k rows by cosine against `word`, excluding the word itself,
// sorted descending; equal similarities order lexicographically.
std::vector<Neighbor> nearest_neighbors(const EmbeddingSpace& space, const std::string& word,
                                        uint32_t k, int workers);

// Text format: "<V> <D>" header, then "<word> v1 .. vD" rows. Values are
// printed with enough digits to round-trip float32 exactly.
void write_embeddings(const std::string& path, const EmbeddingSpace& space);
EmbeddingSpace read_embeddings(const std::string& path);

} // namespace biastrend
