#include "biastrend/report.hpp"

#include "biastrend/errors.hpp"
#include "biastrend/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace biastrend {

std::string_view measure_name(Measure m) {
    switch (m) {
    case Measure::kWeat:
        return "WEAT";
    case Measure::kEct:
        return "ECT";
    case Measure::kCbt:
        return "CBT";
    }
    return "?";
}

static Measure measure_from_name(std::string_view s) {
    if (s == "WEAT")
        return Measure::kWeat;
    if (s == "ECT")
        return Measure::kEct;
    if (s == "CBT")
        return Measure::kCbt;
    throw FormatError("unknown measure '" + std::string(s) + "'");
}

std::string csv_number(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

namespace {

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string opt_number(const std::optional<double>& v) {
    return v ? csv_number(*v) : std::string();
}

// Minimal CSV row reader handling quoted fields.
std::vector<std::string> split_csv_row(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::optional<double> parse_opt_number(const std::string& s) {
    if (s.empty())
        return std::nullopt;
    return std::stod(s);
}

struct MeasureContext {
    const SliceArtifacts* slice;
    const ResolvedView* view;
    const BiasSpec* spec;
    const SuiteOptions* opt;
};

BiasReportRow base_row(const MeasureContext& ctx, Measure m) {
    BiasReportRow row;
    row.slice = ctx.slice->label;
    row.bias = ctx.spec->name;
    row.view = ctx.view->view_name;
    row.measure = m;
    return row;
}

void fill_coverage(BiasReportRow& row, const TermResolution& t1, const TermResolution& t2,
                   const TermResolution& a1, const TermResolution& a2) {
    row.coverage_t1 = t1.coverage;
    row.coverage_t2 = t2.coverage;
    row.coverage_a1 = a1.coverage;
    row.coverage_a2 = a2.coverage;
}

// Returns the first list below the coverage floor, or empty string.
std::string coverage_gap(const SuiteOptions& opt, const TermResolution& t1,
                         const TermResolution& t2, const TermResolution& a1,
                         const TermResolution& a2) {
    if (t1.coverage < opt.min_coverage)
        return "T1";
    if (t2.coverage < opt.min_coverage)
        return "T2";
    if (a1.coverage < opt.min_coverage)
        return "A1";
    if (a2.coverage < opt.min_coverage)
        return "A2";
    return "";
}

BiasReportRow run_weat_cell(const MeasureContext& ctx) {
    BiasReportRow row = base_row(ctx, Measure::kWeat);
    const Vocabulary& vocab = ctx.slice->space->vocab;
    const TermResolution t1 = resolve_in_vocab(ctx.view->t1, vocab);
    const TermResolution t2 = resolve_in_vocab(ctx.view->t2, vocab);
    const TermResolution a1 = resolve_in_vocab(ctx.view->a1, vocab);
    const TermResolution a2 = resolve_in_vocab(ctx.view->a2, vocab);
    fill_coverage(row, t1, t2, a1, a2);
    const std::string gap = coverage_gap(*ctx.opt, t1, t2, a1, a2);
    if (!gap.empty()) {
        row.error = "InsufficientCoverage: " + gap;
        return row;
    }
    try {
        const WeatResult r = weat_test(ctx.slice->space->vectors, t1.ids, t2.ids, a1.ids,
                                       a2.ids, ctx.opt->weat);
        row.statistic = r.statistic;
        row.effect_size = r.effect_size;
        row.p_value = r.p_value;
        row.exhaustive = r.exhaustive;
    } catch (const DataError& e) {
        row.error = e.what();
    }
    return row;
}

BiasReportRow run_ect_cell(const MeasureContext& ctx) {
    BiasReportRow row = base_row(ctx, Measure::kEct);
    const Vocabulary& vocab = ctx.slice->space->vocab;
    const TermResolution t1 = resolve_in_vocab(ctx.view->t1, vocab);
    const TermResolution t2 = resolve_in_vocab(ctx.view->t2, vocab);
    const TermResolution a1 = resolve_in_vocab(ctx.view->a1, vocab);
    const TermResolution a2 = resolve_in_vocab(ctx.view->a2, vocab);
    fill_coverage(row, t1, t2, a1, a2);
    const std::string gap = coverage_gap(*ctx.opt, t1, t2, a1, a2);
    if (!gap.empty()) {
        row.error = "InsufficientCoverage: " + gap;
        return row;
    }
    try {
        const EctResult r =
            ect_test(ctx.slice->space->vectors, t1.ids, t2.ids, a1.ids, a2.ids);
        row.statistic = r.correlation;
        row.effect_size = r.correlation;
        row.p_value = r.p_value;
    } catch (const DataError& e) {
        row.error = e.what();
    }
    return row;
}

BiasReportRow run_cbt_cell(const MeasureContext& ctx) {
    BiasReportRow row = base_row(ctx, Measure::kCbt);
    const Vocabulary& vocab = *ctx.slice->graph_vocab;
    const TermResolution t1 = resolve_in_vocab(ctx.view->t1, vocab);
    const TermResolution t2 = resolve_in_vocab(ctx.view->t2, vocab);
    const TermResolution a1 = resolve_in_vocab(ctx.view->a1, vocab);
    const TermResolution a2 = resolve_in_vocab(ctx.view->a2, vocab);
    fill_coverage(row, t1, t2, a1, a2);
    const std::string gap = coverage_gap(*ctx.opt, t1, t2, a1, a2);
    if (!gap.empty()) {
        row.error = "InsufficientCoverage: " + gap;
        return row;
    }
    try {
        const CbtResult r = cbt_test(*ctx.slice->ppmi, vocab, ctx.view->t1, ctx.view->t2,
                                     ctx.view->a1, ctx.view->a2, ctx.opt->cbt);
        row.statistic = r.t;
        row.effect_size = r.t;
        row.p_value = r.p_value;
        row.solver_method = r.method;
        row.iterations = r.iterations;
        row.residual = r.residual;
        std::string joined;
        for (const auto& t : r.excluded) {
            if (!joined.empty())
                joined += ';';
            joined += t;
        }
        row.excluded_terms = joined;
    } catch (const DataError& e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

std::vector<BiasReportRow> run_measure_suite(const std::vector<SliceArtifacts>& slices,
                                             const BiasSpec& spec, const SuiteOptions& opt) {
    std::vector<BiasReportRow> rows;
    for (const auto& slice : slices) {
        std::vector<ResolvedView> views;
        try {
            views = resolve_views(spec, slice.start_year);
        } catch (const DataError& e) {
            BiasReportRow row;
            row.slice = slice.label;
            row.bias = spec.name;
            row.error = e.what();
            rows.push_back(std::move(row));
            continue;
        }
        const bool embeddings_ok = slice.space != nullptr &&
                                   slice.token_count >= opt.min_embed_tokens;
        const bool graph_ok = slice.ppmi != nullptr && slice.graph_vocab != nullptr;
        for (const auto& view : views) {
            MeasureContext ctx{&slice, &view, &spec, &opt};
            if (opt.run_weat && embeddings_ok)
                rows.push_back(run_weat_cell(ctx));
            if (opt.run_ect && embeddings_ok)
                rows.push_back(run_ect_cell(ctx));
            if (opt.run_cbt && graph_ok)
                rows.push_back(run_cbt_cell(ctx));
        }
    }
    return rows;
}

std::vector<AggregateRow> aggregate_views(const std::vector<BiasReportRow>& rows) {
    struct Key {
        std::string slice, bias;
        Measure measure;
    };
    std::vector<Key> order;
    auto same = [](const Key& k, const BiasReportRow& r) {
        return k.slice == r.slice && k.bias == r.bias && k.measure == r.measure;
    };
    std::vector<std::vector<double>> values;
    for (const auto& r : rows) {
        if (!r.error.empty() || !r.effect_size)
            continue;
        size_t i = 0;
        for (; i < order.size(); ++i)
            if (same(order[i], r))
                break;
        if (i == order.size()) {
            order.push_back({r.slice, r.bias, r.measure});
            values.emplace_back();
        }
        values[i].push_back(*r.effect_size);
    }
    std::vector<AggregateRow> out;
    for (size_t i = 0; i < order.size(); ++i) {
        AggregateRow a;
        a.slice = order[i].slice;
        a.bias = order[i].bias;
        a.measure = order[i].measure;
        a.n_views = values[i].size();
        if (values[i].size() >= 2) {
            const stats::ConfidenceInterval ci = stats::mean_ci(values[i], 0.95);
            a.mean = ci.mean;
            a.ci_low = ci.low;
            a.ci_high = ci.high;
        } else {
            a.mean = values[i][0];
        }
        out.push_back(std::move(a));
    }
    return out;
}

static const char* kBaseHeader = "slice,bias,view,measure,statistic,effect_size,p_value,"
                                 "exhaustive,coverage_t1,coverage_t2,coverage_a1,"
                                 "coverage_a2,error";

std::string rows_to_csv(const std::vector<BiasReportRow>& rows, bool with_solver_columns) {
    std::ostringstream out;
    out << kBaseHeader;
    if (with_solver_columns)
        out << ",solver_method,iterations,residual,excluded_terms";
    out << '\n';
    for (const auto& r : rows) {
        out << csv_field(r.slice) << ',' << csv_field(r.bias) << ',' << csv_field(r.view)
            << ',' << measure_name(r.measure) << ',' << opt_number(r.statistic) << ','
            << opt_number(r.effect_size) << ',' << opt_number(r.p_value) << ','
            << (r.exhaustive ? (*r.exhaustive ? "true" : "false") : "") << ','
            << opt_number(r.coverage_t1) << ',' << opt_number(r.coverage_t2) << ','
            << opt_number(r.coverage_a1) << ',' << opt_number(r.coverage_a2) << ','
            << csv_field(r.error);
        if (with_solver_columns) {
            out << ',' << csv_field(r.solver_method) << ','
                << (r.iterations ? std::to_string(*r.iterations) : "") << ','
                << opt_number(r.residual) << ',' << csv_field(r.excluded_terms);
        }
        out << '\n';
    }
    return out.str();
}

std::vector<BiasReportRow> rows_from_csv(std::string_view csv) {
    std::vector<BiasReportRow> rows;
    size_t pos = 0;
    bool header = true;
    bool with_solver = false;
    while (pos < csv.size()) {
        size_t nl = csv.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = csv.size();
        const std::string_view line = csv.substr(pos, nl - pos);
        pos = nl + 1;
        if (line.empty())
            continue;
        if (header) {
            with_solver = line.find("solver_method") != std::string_view::npos;
            header = false;
            continue;
        }
        const std::vector<std::string> f = split_csv_row(line);
        const size_t want = with_solver ? 17u : 13u;
        if (f.size() != want)
            throw FormatError("report row has " + std::to_string(f.size()) +
                              " fields, expected " + std::to_string(want));
        BiasReportRow r;
        r.slice = f[0];
        r.bias = f[1];
        r.view = f[2];
        r.measure = measure_from_name(f[3]);
        r.statistic = parse_opt_number(f[4]);
        r.effect_size = parse_opt_number(f[5]);
        r.p_value = parse_opt_number(f[6]);
        if (!f[7].empty())
            r.exhaustive = f[7] == "true";
        r.coverage_t1 = parse_opt_number(f[8]);
        r.coverage_t2 = parse_opt_number(f[9]);
        r.coverage_a1 = parse_opt_number(f[10]);
        r.coverage_a2 = parse_opt_number(f[11]);
        r.error = f[12];
        if (with_solver) {
            r.solver_method = f[13];
            if (!f[14].empty())
                r.iterations = static_cast<uint32_t>(std::stoul(f[14]));
            r.residual = parse_opt_number(f[15]);
            r.excluded_terms = f[16];
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string aggregates_to_csv(const std::vector<AggregateRow>& rows) {
    std::ostringstream out;
    out << "slice,bias,measure,mean,ci_low,ci_high,n_views\n";
    for (const auto& r : rows) {
        out << csv_field(r.slice) << ',' << csv_field(r.bias) << ',' << measure_name(r.measure)
            << ',' << csv_number(r.mean) << ',' << opt_number(r.ci_low) << ','
            << opt_number(r.ci_high) << ',' << r.n_views << '\n';
    }
    return out.str();
}

namespace {

struct Series {
    std::vector<std::string> labels;
    std::vector<double> means, lows, highs;
    bool has_band = false;
};

std::string svg_polyline(const std::vector<double>& xs, const std::vector<double>& ys,
                         const char* color, double width) {
    std::ostringstream out;
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\" points=\"";
    for (size_t i = 0; i < xs.size(); ++i)
        out << (i ? " " : "") << csv_number(xs[i]) << ',' << csv_number(ys[i]);
    out << "\"/>\n";
    return out.str();
}

} // namespace

std::string render_trend_svg(const std::vector<AggregateRow>& aggregates,
                             const std::string& bias, Measure measure) {
    Series s;
    for (const auto& a : aggregates) {
        if (a.bias != bias || a.measure != measure)
            continue;
        s.labels.push_back(a.slice);
        s.means.push_back(a.mean);
        s.lows.push_back(a.ci_low.value_or(a.mean));
        s.highs.push_back(a.ci_high.value_or(a.mean));
        if (a.ci_low)
            s.has_band = true;
    }
    const double w = 640, h = 360, ml = 60, mr = 20, mt = 30, mb = 50;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<text x=\"" << w / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
        << bias << " / " << measure_name(measure) << "</text>\n";
    if (s.means.empty()) {
        out << "<text x=\"" << w / 2 << "\" y=\"" << h / 2
            << "\" text-anchor=\"middle\" font-size=\"12\">no data</text>\n</svg>\n";
        return out.str();
    }
    double lo = *std::min_element(s.lows.begin(), s.lows.end());
    double hi = *std::max_element(s.highs.begin(), s.highs.end());
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = (hi - lo) * 0.08;
    lo -= pad;
    hi += pad;
    const size_t n = s.means.size();
    auto x_at = [&](size_t i) {
        return n == 1 ? ml + (w - ml - mr) / 2
                      : ml + (w - ml - mr) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    };
    auto y_at = [&](double v) { return h - mb - (h - mt - mb) * (v - lo) / (hi - lo); };

    if (s.has_band && n >= 2) {
        out << "<polygon fill=\"#4a90d9\" fill-opacity=\"0.25\" stroke=\"none\" points=\"";
        for (size_t i = 0; i < n; ++i)
            out << (i ? " " : "") << csv_number(x_at(i)) << ',' << csv_number(y_at(s.highs[i]));
        for (size_t ii = n; ii > 0; --ii)
            out << ' ' << csv_number(x_at(ii - 1)) << ',' << csv_number(y_at(s.lows[ii - 1]));
        out << "\"/>\n";
    }
    std::vector<double> xs(n), ys(n);
    for (size_t i = 0; i < n; ++i) {
        xs[i] = x_at(i);
        ys[i] = y_at(s.means[i]);
    }
    out << svg_polyline(xs, ys, "#1f5fa8", 2.0);
    // zero line when it falls inside the range
    if (lo < 0.0 && hi > 0.0) {
        out << "<line x1=\"" << ml << "\" y1=\"" << csv_number(y_at(0.0)) << "\" x2=\""
            << w - mr << "\" y2=\"" << csv_number(y_at(0.0))
            << "\" stroke=\"#888\" stroke-dasharray=\"4 3\" stroke-width=\"1\"/>\n";
    }
    for (size_t i = 0; i < n; ++i) {
        out << "<circle cx=\"" << csv_number(xs[i]) << "\" cy=\"" << csv_number(ys[i])
            << "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
        out << "<text x=\"" << csv_number(xs[i]) << "\" y=\"" << h - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << s.labels[i] << "</text>\n";
    }
    out << "<text x=\"14\" y=\"" << csv_number(y_at(hi - pad)) << "\" font-size=\"11\">"
        << csv_number(hi - pad) << "</text>\n";
    out << "<text x=\"14\" y=\"" << csv_number(y_at(lo + pad)) << "\" font-size=\"11\">"
        << csv_number(lo + pad) << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

std::string frequencies_to_csv(const std::vector<FrequencyRow>& rows) {
    std::ostringstream out;
    out << "term,slice,count,per_100k\n";
    for (const auto& r : rows)
        out << csv_field(r.term) << ',' << csv_field(r.slice) << ',' << r.count << ','
            << csv_number(r.per_100k) << '\n';
    return out.str();
}

std::string render_frequency_svg(const std::vector<FrequencyRow>& rows) {
    // group rows by term, slices in first-seen order
    std::vector<std::string> terms, slices;
    for (const auto& r : rows) {
        if (std::find(terms.begin(), terms.end(), r.term) == terms.end())
            terms.push_back(r.term);
        if (std::find(slices.begin(), slices.end(), r.slice) == slices.end())
            slices.push_back(r.slice);
    }
    const double w = 640, h = 360, ml = 60, mr = 130, mt = 30, mb = 50;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
        << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    out << "<text x=\"" << (ml + (w - mr - ml) / 2)
        << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">occurrences per 100k "
           "tokens</text>\n";
    if (rows.empty()) {
        out << "</svg>\n";
        return out.str();
    }
    double hi = 0.0;
    for (const auto& r : rows)
        hi = std::max(hi, r.per_100k);
    if (hi <= 0.0)
        hi = 1.0;
    const size_t n = slices.size();
    auto x_at = [&](size_t i) {
        return n == 1 ? ml + (w - ml - mr) / 2
                      : ml + (w - ml - mr) * static_cast<double>(i) /
                                 static_cast<double>(n - 1);
    };
    auto y_at = [&](double v) { return h - mb - (h - mt - mb) * v / (hi * 1.08); };
    static const char* kColors[] = {"#1f5fa8", "#c0392b", "#27ae60", "#8e44ad",
                                    "#d35400", "#16a085", "#7f8c8d", "#2c3e50"};
    for (size_t t = 0; t < terms.size(); ++t) {
        std::vector<double> xs, ys;
        for (size_t i = 0; i < n; ++i) {
            for (const auto& r : rows) {
                if (r.term == terms[t] && r.slice == slices[i]) {
                    xs.push_back(x_at(i));
                    ys.push_back(y_at(r.per_100k));
                    break;
                }
            }
        }
        const char* color = kColors[t % (sizeof kColors / sizeof kColors[0])];
        out << svg_polyline(xs, ys, color, 2.0);
        out << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 16 * static_cast<double>(t)
            << "\" font-size=\"11\" fill=\"" << color << "\">" << terms[t] << "</text>\n";
    }
    for (size_t i = 0; i < n; ++i)
        out << "<text x=\"" << csv_number(x_at(i)) << "\" y=\"" << h - mb + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << slices[i] << "</text>\n";
    out << "</svg>\n";
    return out.str();
}

} // namespace biastrend
