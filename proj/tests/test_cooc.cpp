#include "doctest.h"

#include "biastrend/cooc.hpp"
#include "biastrend/corpus.hpp"
#include "biastrend/errors.hpp"
#include "biastrend/stats.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

using namespace biastrend;

namespace {

TokenizedDocument make_doc(std::vector<std::string> tokens, const std::string& id = "d") {
    TokenizedDocument d;
    d.id = id;
    d.year = 1900;
    d.date = "1900";
    d.tokens = std::move(tokens);
    return d;
}

} // namespace

namespace {
namespace reference {

// Brute-force pair enumeration: for every position pair (i, j) with
// 0 < j - i <= window inside one document, bump the unordered pair count.
std::map<std::pair<std::string, std::string>, uint64_t>
count_pairs(const std::vector<const TokenizedDocument*>& docs, uint32_t window,
            const Vocabulary& vocab) {
    std::map<std::pair<std::string, std::string>, uint64_t> counts;
    for (const auto* d : docs) {
        const auto& t = d->tokens;
        for (size_t i = 0; i < t.size(); ++i) {
            for (size_t j = i + 1; j < t.size() && j - i <= window; ++j) {
                if (!vocab.contains(t[i]) || !vocab.contains(t[j]))
                    continue;
                auto key = std::minmax(t[i], t[j]);
                ++counts[{key.first, key.second}];
            }
        }
    }
    return counts;
}

} // namespace reference
} // namespace

TEST_CASE("vocabulary: min_count filter and frequency-then-lexicographic order") {
    const auto d = make_doc({"b", "a", "b", "c", "a", "b", "x"});
    const Vocabulary v = build_vocabulary({&d}, 2);
    REQUIRE(v.size() == 2);
    CHECK(v.words[0] == "b"); // count 3
    CHECK(v.words[1] == "a"); // count 2
    CHECK(v.id_of("c") == -1);
    CHECK(v.id_of("x") == -1);

    const auto tie = make_doc({"z", "y", "z", "y"});
    const Vocabulary vt = build_vocabulary({&tie}, 1);
    CHECK(vt.words[0] == "y"); // equal counts: lexicographic
    CHECK(vt.words[1] == "z");

    CHECK_THROWS_AS(build_vocabulary({&d}, 10), EmptyVocabulary);
}

TEST_CASE("co-occurrence counting: worked example") {
    // stream [a, b, a, c], window 2: pairs ab, aa, bc, ac -> ab twice
    const auto d = make_doc({"a", "b", "a", "c"});
    const Vocabulary v = build_vocabulary({&d}, 1);
    CoocOptions opt;
    opt.window = 2;
    const CoocCounts c = count_cooccurrences({&d}, v, opt);
    CHECK(c.total_pairs == 5);
    std::map<std::pair<std::string, std::string>, uint64_t> got;
    for (size_t k = 0; k < c.counts.size(); ++k)
        got[{v.words[c.rows[k]], v.words[c.cols[k]]}] = c.counts[k];
    // ids order by count: a=0, b=1, c=2
    CHECK(got[{"a", "b"}] == 2);
    CHECK(got[{"a", "a"}] == 1);
    CHECK(got[{"a", "c"}] == 1);
    CHECK(got[{"b", "c"}] == 1);
    CHECK(c.margins[static_cast<uint32_t>(v.id_of("a"))] == 4);
    CHECK(c.margins[static_cast<uint32_t>(v.id_of("b"))] == 3);
    CHECK(c.margins[static_cast<uint32_t>(v.id_of("c"))] == 2);
}

TEST_CASE("counting equals brute-force oracle on random streams") {
    stats::Rng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const uint32_t window = 1 + static_cast<uint32_t>(rng.below(6));
        std::vector<TokenizedDocument> docs;
        const size_t n_docs = 1 + rng.below(4);
        for (size_t di = 0; di < n_docs; ++di) {
            std::vector<std::string> toks;
            const size_t len = rng.below(300);
            for (size_t i = 0; i < len; ++i)
                toks.push_back(std::string(1, static_cast<char>('a' + rng.below(8))));
            docs.push_back(make_doc(std::move(toks), "d" + std::to_string(di)));
        }
        std::vector<const TokenizedDocument*> ptrs;
        for (const auto& d : docs)
            ptrs.push_back(&d);
        uint64_t total_tokens = 0;
        for (const auto& d : docs)
            total_tokens += d.tokens.size();
        if (total_tokens == 0)
            continue;

        Vocabulary v;
        try {
            v = build_vocabulary(ptrs, 2);
        } catch (const EmptyVocabulary&) {
            continue;
        }
        CoocOptions opt;
        opt.window = window;
        const CoocCounts c = count_cooccurrences(ptrs, v, opt);
        const auto expect = reference::count_pairs(ptrs, window, v);

        std::map<std::pair<std::string, std::string>, uint64_t> got;
        uint64_t total = 0;
        for (size_t k = 0; k < c.counts.size(); ++k) {
            got[{std::min(v.words[c.rows[k]], v.words[c.cols[k]]),
                 std::max(v.words[c.rows[k]], v.words[c.cols[k]])}] = c.counts[k];
            total += c.counts[k];
        }
        CHECK(got == expect);
        CHECK(total == c.total_pairs);

        // margins: row sums of the symmetric matrix, diagonal counted once
        for (uint32_t i = 0; i < v.size(); ++i) {
            uint64_t margin = 0;
            for (const auto& [key, count] : expect) {
                if (key.first == v.words[i])
                    margin += count;
                if (key.second == v.words[i] && key.first != key.second)
                    margin += count;
            }
            CHECK(c.margins[i] == margin);
        }
    }
}

TEST_CASE("counting never crosses document boundaries") {
    const auto d1 = make_doc({"a", "b"}, "d1");
    const auto d2 = make_doc({"c", "d"}, "d2");
    const Vocabulary v = build_vocabulary({&d1, &d2}, 1);
    CoocOptions opt;
    opt.window = 5;
    const CoocCounts c = count_cooccurrences({&d1, &d2}, v, opt);
    CHECK(c.total_pairs == 2); // ab and cd only, never bc
    for (size_t k = 0; k < c.counts.size(); ++k) {
        const auto wi = v.words[c.rows[k]];
        const auto wj = v.words[c.cols[k]];
        const bool within = (wi == "a" && wj == "b") || (wi == "b" && wj == "a") ||
                            (wi == "c" && wj == "d") || (wi == "d" && wj == "c");
        CHECK(within);
    }
}

TEST_CASE("counting is worker-count independent") {
    stats::Rng rng(5);
    std::vector<TokenizedDocument> docs;
    for (int di = 0; di < 12; ++di) {
        std::vector<std::string> toks;
        for (int i = 0; i < 200; ++i)
            toks.push_back(std::string(1, static_cast<char>('a' + rng.below(6))));
        docs.push_back(make_doc(std::move(toks), "d" + std::to_string(di)));
    }
    std::vector<const TokenizedDocument*> ptrs;
    for (const auto& d : docs)
        ptrs.push_back(&d);
    const Vocabulary v = build_vocabulary(ptrs, 1);
    CoocOptions o1, o4;
    o1.window = 4;
    o1.workers = 1;
    o4.window = 4;
    o4.workers = 4;
    const CoocCounts c1 = count_cooccurrences(ptrs, v, o1);
    const CoocCounts c4 = count_cooccurrences(ptrs, v, o4);
    CHECK(c1.rows == c4.rows);
    CHECK(c1.cols == c4.cols);
    CHECK(c1.counts == c4.counts);
    CHECK(c1.margins == c4.margins);
    CHECK(c1.total_pairs == c4.total_pairs);
}

TEST_CASE("ppmi: formula against hand computation, negatives suppressed") {
    // window 1 pairs: ab x3, bc x1, cd x1; total 5
    // margins: a=3, b=4, c=2, d=1
    // pmi(a,b) = ln(3*5/12) > 0 kept, pmi(b,c) = ln(5/8) < 0 dropped,
    // pmi(c,d) = ln(5/2) > 0 kept
    const auto d = make_doc({"a", "b", "a", "b", "c", "d"});
    const Vocabulary v = build_vocabulary({&d}, 1);
    CoocOptions opt;
    opt.window = 1;
    const CoocCounts c = count_cooccurrences({&d}, v, opt);
    CHECK(c.total_pairs == 5);
    const PpmiMatrix m = compute_ppmi(c);
    REQUIRE(m.rows.size() == 2);
    std::map<std::pair<std::string, std::string>, double> got;
    for (size_t k = 0; k < m.rows.size(); ++k)
        got[{std::min(v.words[m.rows[k]], v.words[m.cols[k]]),
             std::max(v.words[m.rows[k]], v.words[m.cols[k]])}] = m.weights[k];
    REQUIRE(got.count({"a", "b"}) == 1);
    REQUIRE(got.count({"c", "d"}) == 1);
    CHECK(got[{"a", "b"}] == doctest::Approx(std::log(15.0 / 12.0)).epsilon(1e-15));
    CHECK(got[{"c", "d"}] == doctest::Approx(std::log(5.0 / 2.0)).epsilon(1e-15));
}

TEST_CASE("ppmi equals brute-force oracle on random streams up to 1000 tokens") {
    stats::Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<std::string> toks;
        const size_t len = 100 + rng.below(900);
        for (size_t i = 0; i < len; ++i)
            toks.push_back(std::string(1, static_cast<char>('a' + rng.below(10))));
        const auto d = make_doc(std::move(toks));
        const Vocabulary v = build_vocabulary({&d}, 1);
        CoocOptions opt;
        opt.window = 3;
        const CoocCounts c = count_cooccurrences({&d}, v, opt);
        const auto pairs = reference::count_pairs({&d}, 3, v);

        uint64_t total = 0;
        std::map<std::string, uint64_t> margins;
        for (const auto& [key, count] : pairs) {
            total += count;
            margins[key.first] += count;
            if (key.second != key.first)
                margins[key.second] += count;
        }
        const PpmiMatrix m = compute_ppmi(c);
        std::map<std::pair<std::string, std::string>, double> got;
        for (size_t k = 0; k < m.rows.size(); ++k)
            got[{std::min(v.words[m.rows[k]], v.words[m.cols[k]]),
                 std::max(v.words[m.rows[k]], v.words[m.cols[k]])}] = m.weights[k];
        for (const auto& [key, count] : pairs) {
            const double pmi = std::log(static_cast<double>(count) * total /
                                        (static_cast<double>(margins[key.first]) *
                                         static_cast<double>(margins[key.second])));
            if (pmi > 0.0) {
                REQUIRE(got.count(key) == 1);
                CHECK(got[key] == doctest::Approx(pmi).epsilon(1e-12));
            } else {
                CHECK(got.count(key) == 0);
            }
        }
        CHECK(got.size() == [&] {
            size_t positive = 0;
            for (const auto& [key, count] : pairs) {
                const double pmi = std::log(static_cast<double>(count) * total /
                                            (static_cast<double>(margins[key.first]) *
                                             static_cast<double>(margins[key.second])));
                if (pmi > 0.0)
                    ++positive;
            }
            return positive;
        }());
    }
}

TEST_CASE("ppmi: single pair type means perfect independence, weight 0, nothing stored") {
    std::vector<std::string> toks;
    for (int i = 0; i < 50; ++i) {
        toks.push_back("a");
        toks.push_back("b");
    }
    const auto d = make_doc(std::move(toks));
    const Vocabulary v = build_vocabulary({&d}, 1);
    CoocOptions opt;
    opt.window = 1;
    const CoocCounts c = count_cooccurrences({&d}, v, opt);
    // every pair is (a, b): c_ab = total, margins both equal total
    const PpmiMatrix m = compute_ppmi(c);
    CHECK(m.rows.empty());

    CoocCounts empty;
    empty.vocab_size = 2;
    CHECK_THROWS_AS(compute_ppmi(empty), DegenerateCounts);
}

TEST_CASE("sparse row expansion mirrors the upper triangle") {
    // 0-1 (w 2), 1-2 (w 3), self loop 1-1 (w 5)
    const SparseRows g = SparseRows::from_upper(3, {0, 1, 1}, {1, 1, 2}, {2.0, 5.0, 3.0});
    REQUIRE(g.offsets.size() == 4);
    CHECK(g.offsets[3] == 5); // 2 mirrored edges twice + diagonal once
    auto row = [&](uint32_t i) {
        std::vector<std::pair<uint32_t, double>> r;
        for (uint64_t k = g.offsets[i]; k < g.offsets[i + 1]; ++k)
            r.emplace_back(g.cols[k], g.weights[k]);
        return r;
    };
    CHECK(row(0) == std::vector<std::pair<uint32_t, double>>{{1, 2.0}});
    CHECK(row(1) == std::vector<std::pair<uint32_t, double>>{{0, 2.0}, {1, 5.0}, {2, 3.0}});
    CHECK(row(2) == std::vector<std::pair<uint32_t, double>>{{1, 3.0}});
}

TEST_CASE("ppmi and vocabulary serialization round trip") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "biastrend_cooc_test";
    fs::create_directories(dir);

    const auto d = make_doc({"a", "b", "a", "c", "b", "a", "c", "b", "a"});
    const Vocabulary v = build_vocabulary({&d}, 1);
    CoocOptions opt;
    opt.window = 2;
    const PpmiMatrix m = compute_ppmi(count_cooccurrences({&d}, v, opt));

    const std::string pp = (dir / "x.ppmi").string();
    const std::string vp = (dir / "x.vocab").string();
    write_ppmi(pp, m);
    write_vocabulary(vp, v);
    const PpmiMatrix m2 = read_ppmi(pp);
    const Vocabulary v2 = read_vocabulary(vp);
    CHECK(m2.vocab_size == m.vocab_size);
    CHECK(m2.rows == m.rows);
    CHECK(m2.cols == m.cols);
    REQUIRE(m2.weights.size() == m.weights.size());
    for (size_t k = 0; k < m.weights.size(); ++k)
        CHECK(m2.weights[k] == doctest::Approx(m.weights[k]).epsilon(1e-12));
    CHECK(v2.words == v.words);
    CHECK(v2.counts == v.counts);
}
