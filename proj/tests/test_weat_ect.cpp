#include "doctest.h"

#include "biastrend/embedding.hpp"
#include "biastrend/errors.hpp"
#include "biastrend/stats.hpp"
#include "biastrend/weat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

using namespace biastrend;

namespace {

EmbeddingMatrix random_space(uint32_t vocab, uint32_t dim, stats::Rng& rng) {
    EmbeddingMatrix m;
    m.vocab_size = vocab;
    m.dim = dim;
    m.data.resize(static_cast<size_t>(vocab) * dim);
    for (auto& x : m.data)
        x = static_cast<float>(rng.uniform01() * 2.0 - 1.0);
    return m;
}

std::vector<uint32_t> ids(std::initializer_list<uint32_t> l) { return {l}; }

} // namespace

namespace {
namespace reference {

// Everything below re-derives the test from raw cosines, sharing no code
// with the measured implementation beyond the cosine primitive.

double mean_cos(const EmbeddingMatrix& m, uint32_t t, const std::vector<uint32_t>& a) {
    double acc = 0.0;
    for (uint32_t id : a)
        acc += biastrend::cosine(m, t, id);
    return acc / static_cast<double>(a.size());
}

std::vector<double> associations(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
                                 const std::vector<uint32_t>& t2,
                                 const std::vector<uint32_t>& a1,
                                 const std::vector<uint32_t>& a2) {
    std::vector<double> assoc;
    for (uint32_t t : t1)
        assoc.push_back(mean_cos(m, t, a1) - mean_cos(m, t, a2));
    for (uint32_t t : t2)
        assoc.push_back(mean_cos(m, t, a1) - mean_cos(m, t, a2));
    return assoc;
}

struct Weat {
    double statistic;
    double effect_size;
    double p_value;
    uint64_t partitions;
};

// Exhaustive oracle: every size-|T1| subset of the pooled targets via a
// selection mask; the statistic of a subset S is 2 * sum(S) - sum(all),
// accumulated in ascending index order.
Weat weat(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
          const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
          const std::vector<uint32_t>& a2) {
    const std::vector<double> assoc = associations(m, t1, t2, a1, a2);
    const size_t n = assoc.size(), k = t1.size();
    const double total = std::accumulate(assoc.begin(), assoc.end(), 0.0);

    auto stat_of = [&](const std::vector<uint8_t>& mask) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i)
            if (mask[i])
                s += assoc[i];
        return 2.0 * s - total;
    };
    std::vector<uint8_t> identity(n, 0);
    for (size_t i = 0; i < k; ++i)
        identity[i] = 1;
    const double observed = stat_of(identity);

    double m1 = 0.0, m2 = 0.0;
    for (size_t i = 0; i < k; ++i)
        m1 += assoc[i];
    for (size_t i = k; i < n; ++i)
        m2 += assoc[i];
    m1 /= static_cast<double>(k);
    m2 /= static_cast<double>(n - k);
    const double mu = total / static_cast<double>(n);
    double var = 0.0;
    for (double a : assoc)
        var += (a - mu) * (a - mu);
    var /= static_cast<double>(n);

    // mask starts at the lexicographically largest arrangement so
    // prev_permutation walks every distinct one exactly once
    std::vector<uint8_t> mask(n, 0);
    for (size_t i = 0; i < k; ++i)
        mask[i] = 1;
    std::sort(mask.begin(), mask.end(), std::greater<>());
    uint64_t above = 0, count = 0;
    do {
        ++count;
        if (stat_of(mask) > observed)
            ++above;
    } while (std::prev_permutation(mask.begin(), mask.end()));

    Weat w;
    w.statistic = observed;
    w.effect_size = (m1 - m2) / std::sqrt(var);
    w.p_value = static_cast<double>(above) / static_cast<double>(count);
    w.partitions = count;
    return w;
}

// Spearman via explicit sort-based average ranks, then a textbook Pearson.
std::vector<double> ranks(const std::vector<double>& x) {
    const size_t n = x.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return x[a] < x[b]; });
    std::vector<double> r(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]])
            ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t t = i; t <= j; ++t)
            r[order[t]] = avg;
        i = j + 1;
    }
    return r;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

double ect(const EmbeddingMatrix& m, const std::vector<uint32_t>& t1,
           const std::vector<uint32_t>& t2, const std::vector<uint32_t>& a1,
           const std::vector<uint32_t>& a2) {
    const uint32_t dim = m.dim;
    auto centroid = [&](const std::vector<uint32_t>& list) {
        std::vector<double> mu(dim, 0.0);
        for (uint32_t id : list)
            for (uint32_t d = 0; d < dim; ++d)
                mu[d] += m.row(id)[d];
        for (auto& v : mu)
            v /= static_cast<double>(list.size());
        return mu;
    };
    const auto mu1 = centroid(t1);
    const auto mu2 = centroid(t2);
    std::vector<uint32_t> attrs;
    for (const auto* list : {&a1, &a2})
        for (uint32_t id : *list)
            if (std::find(attrs.begin(), attrs.end(), id) == attrs.end())
                attrs.push_back(id);
    // Divides by the two norms separately, like the production cosine;
    // anything else can break exact ties and shift the ranks.
    auto cos_to = [&](const std::vector<double>& mu, uint32_t id) {
        double num = 0.0, da = 0.0, db = 0.0;
        for (uint32_t d = 0; d < dim; ++d) {
            const double b = m.row(id)[d];
            num += mu[d] * b;
            da += mu[d] * mu[d];
            db += b * b;
        }
        return num / (std::sqrt(da) * std::sqrt(db));
    };
    std::vector<double> s1, s2;
    for (uint32_t id : attrs) {
        s1.push_back(cos_to(mu1, id));
        s2.push_back(cos_to(mu2, id));
    }
    return pearson(ranks(s1), ranks(s2));
}

} // namespace reference
} // namespace

TEST_CASE("term resolution against a vocabulary") {
    Vocabulary v;
    v.words = {"alpha", "beta", "gamma"};
    for (uint32_t i = 0; i < 3; ++i) {
        v.index[v.words[i]] = i;
        v.counts.push_back(1);
    }
    const TermResolution r = resolve_in_vocab({"beta", "delta", "alpha"}, v);
    CHECK(r.ids == ids({1, 0}));
    CHECK(r.found == std::vector<std::string>{"beta", "alpha"});
    CHECK(r.missing == std::vector<std::string>{"delta"});
    CHECK(r.coverage == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(resolve_in_vocab({}, v).coverage == 0.0);
}

TEST_CASE("partition counts") {
    CHECK(partition_count(1, 1) == 2);
    CHECK(partition_count(2, 1) == 3);
    CHECK(partition_count(5, 5) == 252);
    CHECK(partition_count(1, 9) == 10);
    CHECK(partition_count(0, 4) == 1);
    CHECK(partition_count(30, 30) == 118264581564861424ull);
    CHECK(partition_count(40, 40) == UINT64_MAX); // saturates
}

TEST_CASE("two's-company space: statistic 2, effect size 2, p 0") {
    // t1 = a1 = (1,0), t2 = a2 = (0,1): assoc = {1, -1}
    EmbeddingMatrix m;
    m.vocab_size = 4;
    m.dim = 2;
    m.data = {1.0f, 0.0f, 0.0f, 1.0f, 1.0f, 0.0f, 0.0f, 1.0f};
    const WeatResult r = weat_test(m, ids({0}), ids({1}), ids({2}), ids({3}), {});
    CHECK(r.statistic == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.effect_size == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.p_value == 0.0); // only the swapped partition competes, at -2
    CHECK(r.exhaustive);
    CHECK(r.partitions == 2);
}

TEST_CASE("statistic, effect size and exhaustive p match the oracle") {
    stats::Rng rng(101);
    for (int trial = 0; trial < 20; ++trial) {
        const uint32_t dim = 2 + static_cast<uint32_t>(rng.below(7));
        const auto n1 = static_cast<size_t>(1 + rng.below(5));
        const auto n2 = static_cast<size_t>(1 + rng.below(5));
        const auto na1 = static_cast<size_t>(1 + rng.below(4));
        const auto na2 = static_cast<size_t>(1 + rng.below(4));
        const uint32_t vocab = static_cast<uint32_t>(n1 + n2 + na1 + na2);
        const EmbeddingMatrix m = random_space(vocab, dim, rng);
        std::vector<uint32_t> t1(n1), t2(n2), a1(na1), a2(na2);
        uint32_t next = 0;
        for (auto* v : {&t1, &t2, &a1, &a2})
            for (auto& x : *v)
                x = next++;

        const reference::Weat expect = reference::weat(m, t1, t2, a1, a2);
        WeatOptions opt;
        opt.workers = 1 + static_cast<int>(trial % 3); // unranking exercised at chunk starts
        const WeatResult got = weat_test(m, t1, t2, a1, a2, opt);
        CHECK(got.exhaustive);
        CHECK(got.partitions == expect.partitions);
        CHECK(std::abs(got.statistic - expect.statistic) < 1e-12);
        CHECK(std::abs(got.effect_size - expect.effect_size) < 1e-12);
        CHECK(got.p_value == expect.p_value); // same doubles, same comparisons
    }
}

TEST_CASE("swapping target sets negates statistic and effect size") {
    stats::Rng rng(7);
    const EmbeddingMatrix m = random_space(12, 5, rng);
    const auto t1 = ids({0, 1, 2});
    const auto t2 = ids({3, 4, 5});
    const auto a1 = ids({6, 7, 8});
    const auto a2 = ids({9, 10, 11});
    const WeatResult f = weat_test(m, t1, t2, a1, a2, {});
    const WeatResult b = weat_test(m, t2, t1, a1, a2, {});
    CHECK(f.statistic == doctest::Approx(-b.statistic).epsilon(1e-12));
    CHECK(f.effect_size == doctest::Approx(-b.effect_size).epsilon(1e-12));

    // swapping the attribute sides negates the associations likewise
    const WeatResult s = weat_test(m, t1, t2, a2, a1, {});
    CHECK(f.statistic == doctest::Approx(-s.statistic).epsilon(1e-12));
    CHECK(f.effect_size == doctest::Approx(-s.effect_size).epsilon(1e-12));
}

TEST_CASE("identical attribute sides leave no signal to test") {
    stats::Rng rng(9);
    const EmbeddingMatrix m = random_space(8, 4, rng);
    CHECK_THROWS_AS(
        weat_test(m, ids({0, 1}), ids({2, 3}), ids({4, 5}), ids({4, 5}), {}),
        DegenerateDistribution);
    CHECK_THROWS_AS(weat_test(m, {}, ids({1}), ids({2}), ids({3}), {}), EmptySetError);
}

TEST_CASE("sampled permutation path is reproducible and seed-sensitive") {
    stats::Rng rng(13);
    const uint32_t n_side = 12; // C(24, 12) = 2704156 partitions
    const EmbeddingMatrix m = random_space(2 * n_side + 8, 6, rng);
    std::vector<uint32_t> t1, t2;
    for (uint32_t i = 0; i < n_side; ++i)
        t1.push_back(i);
    for (uint32_t i = n_side; i < 2 * n_side; ++i)
        t2.push_back(i);
    const auto a1 = ids({24, 25, 26, 27});
    const auto a2 = ids({28, 29, 30, 31});

    WeatOptions opt;
    opt.max_permutations = 2000;
    opt.seed = 5;
    const WeatResult r1 = weat_test(m, t1, t2, a1, a2, opt);
    const WeatResult r2 = weat_test(m, t1, t2, a1, a2, opt);
    CHECK_FALSE(r1.exhaustive);
    CHECK(r1.partitions == 2000);
    CHECK(r1.p_value == r2.p_value);
    CHECK(r1.statistic == r2.statistic);

    opt.seed = 6;
    const WeatResult r3 = weat_test(m, t1, t2, a1, a2, opt);
    CHECK(r3.statistic == r1.statistic); // observed side is seed-free
    CHECK(r1.p_value >= 0.0);
    CHECK(r3.p_value <= 1.0);
}

TEST_CASE("ect: correlation matches the rank oracle, ties included") {
    stats::Rng rng(211);
    for (int trial = 0; trial < 50; ++trial) {
        const uint32_t dim = 2 + static_cast<uint32_t>(rng.below(6));
        const auto n1 = static_cast<size_t>(1 + rng.below(4));
        const auto n2 = static_cast<size_t>(1 + rng.below(4));
        const auto na = static_cast<size_t>(4 + rng.below(6));
        const uint32_t vocab = static_cast<uint32_t>(n1 + n2 + na);
        EmbeddingMatrix m;
        m.vocab_size = vocab;
        m.dim = dim;
        m.data.resize(static_cast<size_t>(vocab) * dim);
        // small integer coordinates so identical attribute vectors (and hence
        // exact cosine ties) happen regularly
        for (auto& x : m.data)
            x = static_cast<float>(1.0 + static_cast<double>(rng.below(3)));

        std::vector<uint32_t> t1(n1), t2(n2), attrs(na);
        uint32_t next = 0;
        for (auto* v : {&t1, &t2, &attrs})
            for (auto& x : *v)
                x = next++;
        // split attrs between a1 and a2 with one shared id to exercise dedup
        std::vector<uint32_t> a1(attrs.begin(), attrs.begin() + static_cast<ptrdiff_t>(na / 2) + 1);
        std::vector<uint32_t> a2(attrs.begin() + static_cast<ptrdiff_t>(na / 2), attrs.end());

        const double expect = reference::ect(m, t1, t2, a1, a2);
        if (std::isnan(expect)) {
            // a constant cosine profile has no ranking to correlate
            CHECK_THROWS_AS(ect_test(m, t1, t2, a1, a2), ConstantSequence);
        } else {
            const EctResult got = ect_test(m, t1, t2, a1, a2);
            CHECK(got.n_attributes == na);
            CHECK(std::abs(got.correlation - expect) < 1e-12);
        }
    }
}

TEST_CASE("ect: identical target sets correlate exactly 1") {
    stats::Rng rng(19);
    const EmbeddingMatrix m = random_space(10, 4, rng);
    const auto t = ids({0, 1, 2});
    const EctResult r = ect_test(m, t, t, ids({3, 4, 5}), ids({6, 7, 8, 9}));
    CHECK(r.correlation == 1.0);
    CHECK(r.n_attributes == 7);
}

TEST_CASE("ect: symmetric in the target sets, invariant to doubling vectors") {
    stats::Rng rng(29);
    EmbeddingMatrix m = random_space(12, 5, rng);
    const auto t1 = ids({0, 1});
    const auto t2 = ids({2, 3, 4});
    const auto a1 = ids({5, 6, 7});
    const auto a2 = ids({8, 9, 10, 11});
    const EctResult f = ect_test(m, t1, t2, a1, a2);
    const EctResult b = ect_test(m, t2, t1, a1, a2);
    CHECK(f.correlation == doctest::Approx(b.correlation).epsilon(1e-12));

    EmbeddingMatrix scaled = m;
    for (auto& x : scaled.data)
        x *= 2.0f; // exact in binary floating point
    const EctResult s = ect_test(scaled, t1, t2, a1, a2);
    CHECK(s.correlation == f.correlation);

    CHECK_THROWS_AS(ect_test(m, {}, t2, a1, a2), EmptySetError);
}
