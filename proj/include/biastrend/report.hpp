#pragma once

#include "biastrend/bias_spec.hpp"
#include "biastrend/cbt.hpp"
#include "biastrend/corpus.hpp"
#include "biastrend/embedding.hpp"
#include "biastrend/weat.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace biastrend {

enum class Measure { kWeat, kEct, kCbt };
std::string_view measure_name(Measure m);

// One measurement cell. Failed cells carry `error` and leave the numeric
// fields unset rather than aborting the run.
struct BiasReportRow {
    std::string slice;
    std::string bias;
    std::string view;
    Measure measure = Measure::kWeat;
    std::optional<double> statistic;
    // effect size for WEAT, correlation for ECT, t for CBT
    std::optional<double> effect_size;
    std::optional<double> p_value;
    std::optional<bool> exhaustive; // WEAT only
    std::optional<double> coverage_t1, coverage_t2, coverage_a1, coverage_a2;
    std::string solver_method; // CBT only
    std::optional<uint32_t> iterations;
    std::optional<double> residual;
    std::string excluded_terms; // ';'-joined
    std::string error;
};

struct AggregateRow {
    std::string slice;
    std::string bias;
    Measure measure = Measure::kWeat;
    double mean = 0.0;
    std::optional<double> ci_low, ci_high; // absent when n_views < 2
    size_t n_views = 0;
};

struct SuiteOptions {
    double min_coverage = 0.5;        // per-list threshold
    uint64_t min_embed_tokens = 100000; // below: skip embedding measures
    WeatOptions weat;
    CbtOptions cbt;
    bool run_weat = true;
    bool run_ect = true;
    bool run_cbt = true;
};

// Per-slice inputs the suite consumes; absent parts skip their measures.
struct SliceArtifacts {
    std::string label;
    int start_year = 0;
    uint64_t token_count = 0;
    const EmbeddingSpace* space = nullptr; // for WEAT and ECT
    const PpmiMatrix* ppmi = nullptr;      // for CBT
    const Vocabulary* graph_vocab = nullptr;
};

// Runs every requested measure for every (slice, view). Row order is slice
// input order (chronology), then spec view order, then WEAT, ECT, CBT.
std::vector<BiasReportRow> run_measure_suite(const std::vector<SliceArtifacts>& slices,
                                             const BiasSpec& spec, const SuiteOptions& opt);

// Means and 95% CIs across views per (slice, bias, measure); input order of
// slices is kept. Rows with errors are left out of the aggregation.
std::vector<AggregateRow> aggregate_views(const std::vector<BiasReportRow>& rows);

// CSV schema:
//   slice,bias,view,measure,statistic,effect_size,p_value,exhaustive,
//   coverage_t1,coverage_t2,coverage_a1,coverage_a2,error
// `with_solver_columns` appends solver_method,iterations,residual,excluded_terms.
std::string rows_to_csv(const std::vector<BiasReportRow>& rows, bool with_solver_columns);
std::string aggregates_to_csv(const std::vector<AggregateRow>& rows);
std::vector<BiasReportRow> rows_from_csv(std::string_view csv);

// One chart per (bias, measure): aggregate mean per slice in input order
// with a shaded CI band. Self-contained SVG, no external references.
std::string render_trend_svg(const std::vector<AggregateRow>& aggregates,
                             const std::string& bias, Measure measure);

// Frequency curves: one row per (term, slice), occurrences per 100k tokens.
struct FrequencyRow {
    std::string term;
    std::string slice;
    double per_100k = 0.0;
    uint64_t count = 0;
};
std::string frequencies_to_csv(const std::vector<FrequencyRow>& rows);
std::string render_frequency_svg(const std::vector<FrequencyRow>& rows);

// Formats one double the way every CSV writer here does: shortest
// round-trip representation, "" for absent values.
std::string csv_number(double v);

} // namespace biastrend
