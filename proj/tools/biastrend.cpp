// Command line front end: corpus preprocessing, slicing, representation
// building, bias measures, and report generation.
#include "CLI11.hpp"

#include "biastrend/bias_spec.hpp"
#include "biastrend/cbt.hpp"
#include "biastrend/cooc.hpp"
#include "biastrend/corpus.hpp"
#include "biastrend/embedding.hpp"
#include "biastrend/errors.hpp"
#include "biastrend/report.hpp"
#include "biastrend/solver.hpp"
#include "biastrend/weat.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

namespace fs = std::filesystem;
using namespace biastrend;

namespace {

struct GlobalOpts {
    uint64_t seed = 1;
    int workers = 1;
    std::string out_dir = ".";
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
    fs::path p(name);
    if (p.is_absolute())
        return name;
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / p).string();
}

BiasSpec spec_by_name_or_path(const std::string& spec_arg) {
    if (fs::exists(spec_arg))
        return load_bias_spec(spec_arg);
    return builtin_spec(spec_arg);
}

std::vector<PeriodConfig> periods_from(const std::string& periods_arg) {
    if (periods_arg.empty())
        return parse_periods(builtin_periods_tsv());
    return load_periods(periods_arg);
}

const PeriodConfig& period_by_label(const std::vector<PeriodConfig>& periods,
                                    const std::string& label) {
    for (const auto& p : periods)
        if (p.label == label)
            return p;
    throw UsageError("unknown period label '" + label + "'");
}

std::vector<const TokenizedDocument*> doc_pointers(const std::vector<TokenizedDocument>& docs) {
    std::vector<const TokenizedDocument*> out;
    out.reserve(docs.size());
    for (const auto& d : docs)
        out.push_back(&d);
    return out;
}

// ---- preprocess ----

struct PreprocessArgs {
    std::string manifest, lemmas, out = "corpus.tok";
    bool no_session = false;
    std::vector<std::string> open_patterns, close_patterns;
};

void run_preprocess(const GlobalOpts& g, const PreprocessArgs& a) {
    const std::vector<DocumentRecord> records = load_manifest(a.manifest);
    LemmaTable lemmas;
    PreprocessOptions opt;
    opt.extract_session = !a.no_session;
    opt.open_patterns = a.open_patterns;
    opt.close_patterns = a.close_patterns;
    if (!a.lemmas.empty()) {
        lemmas = LemmaTable::from_file(a.lemmas);
        opt.lemmas = &lemmas;
    }
    std::vector<std::string> warnings;
    const std::vector<TokenizedDocument> docs =
        preprocess_corpus(records, opt, g.workers, &warnings);
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << '\n';
    uint64_t tokens = 0;
    for (const auto& d : docs)
        tokens += d.tokens.size();
    write_token_file(out_path(g, a.out), docs);
    std::cout << docs.size() << " documents, " << tokens << " tokens -> " << a.out << '\n';
}

// ---- slice ----

struct SliceArgs {
    std::string tokens, periods;
};

void run_slice(const GlobalOpts& g, const SliceArgs& a) {
    const std::vector<TokenizedDocument> docs = read_token_file(a.tokens);
    const std::vector<PeriodConfig> periods = periods_from(a.periods);
    std::vector<std::string> unassigned;
    const std::vector<CorpusSlice> slices = slice_corpus(docs, periods, &unassigned);
    for (const auto& u : unassigned)
        std::cerr << "warning: outside every period: " << u << '\n';
    for (const auto& s : slices) {
        std::vector<TokenizedDocument> copy;
        copy.reserve(s.docs.size());
        for (const auto* d : s.docs)
            copy.push_back(*d);
        if (copy.empty()) {
            std::cerr << "warning: period " << s.label << " holds no documents\n";
            continue;
        }
        const std::string path = out_path(g, s.label + ".slice");
        write_token_file(path, copy);
        std::cout << s.label << ": " << s.docs.size() << " documents, " << s.token_count
                  << " tokens -> " << path << '\n';
    }
}

// ---- cooc ----

struct CoocArgs {
    std::string tokens, out_prefix = "slice";
    uint32_t window = 5;
    uint64_t min_count = 10;
};

void run_cooc(const GlobalOpts& g, const CoocArgs& a) {
    const std::vector<TokenizedDocument> docs = read_token_file(a.tokens);
    const auto ptrs = doc_pointers(docs);
    const Vocabulary vocab = build_vocabulary(ptrs, a.min_count);
    CoocOptions opt;
    opt.window = a.window;
    opt.min_count = a.min_count;
    opt.workers = g.workers;
    const CoocCounts counts = count_cooccurrences(ptrs, vocab, opt);
    const PpmiMatrix ppmi = compute_ppmi(counts);
    write_vocabulary(out_path(g, a.out_prefix + ".vocab"), vocab);
    write_ppmi(out_path(g, a.out_prefix + ".ppmi"), ppmi);
    std::cout << vocab.size() << " terms, " << counts.total_pairs << " pairs, "
              << ppmi.rows.size() << " positive entries -> " << a.out_prefix << ".ppmi\n";
}

// ---- train ----

struct TrainArgs {
    std::string tokens, out = "slice.emb", arch = "cbow";
    TrainOptions opt;
};

void run_train(const GlobalOpts& g, const TrainArgs& a) {
    const std::vector<TokenizedDocument> docs = read_token_file(a.tokens);
    TrainOptions opt = a.opt;
    opt.arch = a.arch == "sgns" ? TrainArchitecture::kSkipGram : TrainArchitecture::kCbow;
    opt.seed = g.seed;
    opt.workers = g.workers;
    uint64_t tokens = 0;
    for (const auto& d : docs)
        tokens += d.tokens.size();
    if (tokens < 100000)
        std::cerr << "warning: only " << tokens
                  << " tokens; embeddings may be unreliable below 100000\n";
    if (opt.workers > 1)
        std::cerr << "warning: training with " << opt.workers
                  << " workers is not run-to-run reproducible\n";
    const EmbeddingSpace space = train_embeddings(doc_pointers(docs), opt);
    write_embeddings(out_path(g, a.out), space);
    std::cout << space.vocab.size() << " vectors of dimension " << opt.dim << " -> " << a.out
              << '\n';
}

// ---- weat / ect / cbt ----

struct MeasureArgs {
    std::string spec, periods, period, view, csv;
    std::string space;  // weat, ect
    std::string graph;  // cbt prefix
    uint64_t perms = 100000;
    double tol = 1e-8;
    uint32_t cap = 50000;
    double min_coverage = 0.5;
};

SuiteOptions suite_options(const GlobalOpts& g, const MeasureArgs& a) {
    SuiteOptions opt;
    opt.min_coverage = a.min_coverage;
    opt.min_embed_tokens = 0; // single-measure commands run on explicit input
    opt.weat.max_permutations = a.perms;
    opt.weat.seed = g.seed;
    opt.weat.workers = g.workers;
    opt.cbt.vocab_cap = a.cap;
    opt.cbt.propagation.tol = a.tol;
    opt.cbt.propagation.workers = g.workers;
    return opt;
}

void emit_rows(const GlobalOpts& g, const std::string& csv_name,
               const std::vector<BiasReportRow>& rows, bool with_solver) {
    const std::string text = rows_to_csv(rows, with_solver);
    if (csv_name.empty()) {
        std::cout << text;
    } else {
        const std::string path = out_path(g, csv_name);
        write_text_file(path, text);
        std::cout << rows.size() << " rows -> " << path << '\n';
    }
}

void run_measure(const GlobalOpts& g, const MeasureArgs& a, Measure which) {
    const BiasSpec spec = spec_by_name_or_path(a.spec);
    const std::vector<PeriodConfig> periods = periods_from(a.periods);
    const PeriodConfig& period = period_by_label(periods, a.period);

    SliceArtifacts slice;
    slice.label = period.label;
    slice.start_year = period.start;

    EmbeddingSpace space;
    PpmiMatrix ppmi;
    Vocabulary graph_vocab;
    if (which == Measure::kCbt) {
        ppmi = read_ppmi(a.graph + ".ppmi");
        graph_vocab = read_vocabulary(a.graph + ".vocab");
        slice.ppmi = &ppmi;
        slice.graph_vocab = &graph_vocab;
    } else {
        space = read_embeddings(a.space);
        slice.space = &space;
    }
    slice.token_count = 0;

    SuiteOptions opt = suite_options(g, a);
    opt.run_weat = which == Measure::kWeat;
    opt.run_ect = which == Measure::kEct;
    opt.run_cbt = which == Measure::kCbt;

    BiasSpec filtered = spec;
    if (!a.view.empty()) {
        filtered.views.clear();
        for (const auto& v : spec.views)
            if (v.view_name == a.view)
                filtered.views.push_back(v);
        if (filtered.views.empty())
            throw UsageError("spec '" + spec.name + "' has no view named '" + a.view + "'");
    }
    const std::vector<BiasReportRow> rows = run_measure_suite({slice}, filtered, opt);
    emit_rows(g, a.csv, rows, which == Measure::kCbt);
}

// ---- report ----

struct ReportArgs {
    std::string in_dir = ".", spec, periods;
    uint64_t min_embed_tokens = 100000;
    uint64_t perms = 100000;
    double tol = 1e-8;
    uint32_t cap = 50000;
    double min_coverage = 0.5;
    bool svg = false;
};

void run_report(const GlobalOpts& g, const ReportArgs& a) {
    const BiasSpec spec = spec_by_name_or_path(a.spec);
    const std::vector<PeriodConfig> periods = periods_from(a.periods);

    // own the loaded artifacts; SliceArtifacts point into these
    std::vector<std::unique_ptr<EmbeddingSpace>> spaces;
    std::vector<std::unique_ptr<PpmiMatrix>> ppmis;
    std::vector<std::unique_ptr<Vocabulary>> vocabs;
    std::vector<SliceArtifacts> slices;

    for (const auto& p : periods) {
        SliceArtifacts s;
        s.label = p.label;
        s.start_year = p.start;
        const fs::path base = fs::path(a.in_dir);
        const fs::path slice_path = base / (p.label + ".slice");
        if (fs::exists(slice_path)) {
            for (const auto& d : read_token_file(slice_path.string()))
                s.token_count += d.tokens.size();
        }
        const fs::path emb_path = base / (p.label + ".emb");
        if (fs::exists(emb_path)) {
            spaces.push_back(std::make_unique<EmbeddingSpace>(
                read_embeddings(emb_path.string())));
            s.space = spaces.back().get();
            if (s.token_count == 0)
                s.token_count = a.min_embed_tokens; // no slice file: trust the space
        }
        const fs::path ppmi_path = base / (p.label + ".ppmi");
        const fs::path vocab_path = base / (p.label + ".vocab");
        if (fs::exists(ppmi_path) && fs::exists(vocab_path)) {
            ppmis.push_back(std::make_unique<PpmiMatrix>(read_ppmi(ppmi_path.string())));
            vocabs.push_back(
                std::make_unique<Vocabulary>(read_vocabulary(vocab_path.string())));
            s.ppmi = ppmis.back().get();
            s.graph_vocab = vocabs.back().get();
        }
        if (s.space || s.ppmi)
            slices.push_back(s);
    }
    if (slices.empty())
        throw DataError("no per-period artifacts (<label>.emb / <label>.ppmi) in " + a.in_dir);

    SuiteOptions opt;
    opt.min_coverage = a.min_coverage;
    opt.min_embed_tokens = a.min_embed_tokens;
    opt.weat.max_permutations = a.perms;
    opt.weat.seed = g.seed;
    opt.weat.workers = g.workers;
    opt.cbt.vocab_cap = a.cap;
    opt.cbt.propagation.tol = a.tol;
    opt.cbt.propagation.workers = g.workers;

    const std::vector<BiasReportRow> rows = run_measure_suite(slices, spec, opt);
    const std::vector<AggregateRow> aggregates = aggregate_views(rows);

    const std::string report_path = out_path(g, "report.csv");
    write_text_file(report_path, rows_to_csv(rows, true));
    const std::string agg_path = out_path(g, "aggregate.csv");
    write_text_file(agg_path, aggregates_to_csv(aggregates));
    std::cout << rows.size() << " rows -> " << report_path << '\n';
    std::cout << aggregates.size() << " aggregates -> " << agg_path << '\n';
    if (a.svg) {
        for (Measure m : {Measure::kWeat, Measure::kEct, Measure::kCbt}) {
            const std::string path = out_path(g, spec.name + "_" +
                                                     std::string(measure_name(m)) + ".svg");
            write_text_file(path, render_trend_svg(aggregates, spec.name, m));
            std::cout << "chart -> " << path << '\n';
        }
    }
}

// ---- freq ----

struct FreqArgs {
    std::string tokens, periods, csv, svg;
    std::vector<std::string> terms;
};

void run_freq(const GlobalOpts& g, const FreqArgs& a) {
    const std::vector<TokenizedDocument> docs = read_token_file(a.tokens);
    const std::vector<PeriodConfig> periods = periods_from(a.periods);
    const std::vector<CorpusSlice> slices = slice_corpus(docs, periods, nullptr);
    std::vector<FrequencyRow> rows;
    for (const auto& term : a.terms) {
        for (const auto& s : slices) {
            if (s.token_count == 0)
                continue;
            FrequencyRow r;
            r.term = term;
            r.slice = s.label;
            r.count = term_count(s, term);
            r.per_100k = term_frequency_per_100k(s, term);
            rows.push_back(std::move(r));
        }
    }
    const std::string text = frequencies_to_csv(rows);
    if (a.csv.empty())
        std::cout << text;
    else
        write_text_file(out_path(g, a.csv), text);
    if (!a.svg.empty())
        write_text_file(out_path(g, a.svg), render_frequency_svg(rows));
}

// ---- neighbors ----

struct NeighborArgs {
    std::string space, term;
    uint32_t k = 15;
};

void run_neighbors(const GlobalOpts& g, const NeighborArgs& a) {
    const EmbeddingSpace space = read_embeddings(a.space);
    for (const auto& n : nearest_neighbors(space, a.term, a.k, g.workers))
        std::cout << n.word << '\t' << csv_number(n.similarity) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diachronic bias measurement over time-sliced text corpora"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "random seed for all sampling")->capture_default_str();
    app.add_option("--workers", g.workers, "worker threads")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "directory for output files")
        ->capture_default_str();

    PreprocessArgs pre;
    auto* c_pre = app.add_subcommand("preprocess", "normalize raw documents to token files");
    c_pre->add_option("--manifest", pre.manifest, "TSV of 'path<TAB>date' rows")->required();
    c_pre->add_option("--lemmas", pre.lemmas, "TSV token->lemma table");
    c_pre->add_option("--out", pre.out, "output token file")->capture_default_str();
    c_pre->add_flag("--no-session-extract", pre.no_session,
                    "skip session open/close marker trimming");
    c_pre->add_option("--open", pre.open_patterns, "session open marker regex (repeatable)");
    c_pre->add_option("--close", pre.close_patterns,
                      "session close marker regex (repeatable)");

    SliceArgs sli;
    auto* c_sli = app.add_subcommand("slice", "split a token file into period slices");
    c_sli->add_option("--tokens", sli.tokens, "token file from preprocess")->required();
    c_sli->add_option("--periods", sli.periods, "TSV 'label start end' (default: built-in)");

    CoocArgs coo;
    auto* c_coo = app.add_subcommand("cooc", "count co-occurrences and write a PPMI graph");
    c_coo->add_option("--tokens", coo.tokens, "slice token file")->required();
    c_coo->add_option("--window", coo.window, "context window")->capture_default_str();
    c_coo->add_option("--min-count", coo.min_count, "vocabulary threshold")
        ->capture_default_str();
    c_coo->add_option("--out-prefix", coo.out_prefix, "writes <prefix>.ppmi and <prefix>.vocab")
        ->capture_default_str();

    TrainArgs tra;
    auto* c_tra = app.add_subcommand("train", "train word vectors over a slice");
    c_tra->add_option("--tokens", tra.tokens, "slice token file")->required();
    c_tra->add_option("--dim", tra.opt.dim, "vector dimension")->capture_default_str();
    c_tra->add_option("--window", tra.opt.window, "context window")->capture_default_str();
    c_tra->add_option("--min-count", tra.opt.min_count, "vocabulary threshold")
        ->capture_default_str();
    c_tra->add_option("--epochs", tra.opt.epochs, "training passes")->capture_default_str();
    c_tra->add_option("--negative", tra.opt.negative, "negative samples per position")
        ->capture_default_str();
    c_tra->add_option("--alpha", tra.opt.alpha, "initial learning rate")
        ->capture_default_str();
    c_tra->add_option("--arch", tra.arch, "cbow or sgns")->capture_default_str();
    c_tra->add_option("--out", tra.out, "output embedding file")->capture_default_str();

    MeasureArgs wea, ect_args, cbt_args;
    auto add_measure_common = [&](CLI::App* c, MeasureArgs& m) {
        c->add_option("--spec", m.spec, "built-in spec name or spec file path")->required();
        c->add_option("--periods", m.periods, "period TSV (default: built-in)");
        c->add_option("--period", m.period, "period label, e.g. WR")->required();
        c->add_option("--view", m.view, "restrict to one view (default: all)");
        c->add_option("--csv", m.csv, "output CSV (default: stdout)");
        c->add_option("--min-coverage", m.min_coverage, "per-list coverage floor")
            ->capture_default_str();
    };
    auto* c_wea = app.add_subcommand("weat", "association test over an embedding space");
    c_wea->add_option("--space", wea.space, "embedding file")->required();
    c_wea->add_option("--perms", wea.perms, "max partitions before sampling")
        ->capture_default_str();
    add_measure_common(c_wea, wea);

    auto* c_ect = app.add_subcommand("ect", "centroid coherence test over an embedding space");
    c_ect->add_option("--space", ect_args.space, "embedding file")->required();
    add_measure_common(c_ect, ect_args);

    auto* c_cbt = app.add_subcommand("cbt", "label propagation test over a PPMI graph");
    c_cbt->add_option("--graph", cbt_args.graph,
                      "graph prefix (expects <prefix>.ppmi, <prefix>.vocab)")
        ->required();
    c_cbt->add_option("--tol", cbt_args.tol, "solver tolerance")->capture_default_str();
    c_cbt->add_option("--cap", cbt_args.cap, "graph vocabulary cap")->capture_default_str();
    add_measure_common(c_cbt, cbt_args);

    ReportArgs rep;
    auto* c_rep = app.add_subcommand("report", "run all measures over per-period artifacts");
    c_rep->add_option("--in-dir", rep.in_dir, "directory with <label>.{slice,emb,ppmi,vocab}")
        ->capture_default_str();
    c_rep->add_option("--spec", rep.spec, "built-in spec name or spec file path")->required();
    c_rep->add_option("--periods", rep.periods, "period TSV (default: built-in)");
    c_rep->add_option("--min-embed-tokens", rep.min_embed_tokens,
                      "skip embedding measures below this many tokens")
        ->capture_default_str();
    c_rep->add_option("--perms", rep.perms, "max partitions before sampling")
        ->capture_default_str();
    c_rep->add_option("--tol", rep.tol, "solver tolerance")->capture_default_str();
    c_rep->add_option("--cap", rep.cap, "graph vocabulary cap")->capture_default_str();
    c_rep->add_option("--min-coverage", rep.min_coverage, "per-list coverage floor")
        ->capture_default_str();
    c_rep->add_flag("--svg", rep.svg, "also render trend charts");

    FreqArgs fre;
    auto* c_fre = app.add_subcommand("freq", "term frequency per 100k tokens by period");
    c_fre->add_option("--tokens", fre.tokens, "token file")->required();
    c_fre->add_option("--periods", fre.periods, "period TSV (default: built-in)");
    c_fre->add_option("--terms", fre.terms, "terms to track")->required()->delimiter(',');
    c_fre->add_option("--csv", fre.csv, "output CSV (default: stdout)");
    c_fre->add_option("--svg", fre.svg, "output chart");

    NeighborArgs nei;
    auto* c_nei = app.add_subcommand("neighbors", "nearest neighbors of a term");
    c_nei->add_option("--space", nei.space, "embedding file")->required();
    c_nei->add_option("--term", nei.term, "query term")->required();
    c_nei->add_option("-k,--k", nei.k, "neighbor count")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_pre->parsed())
            run_preprocess(g, pre);
        else if (c_sli->parsed())
            run_slice(g, sli);
        else if (c_coo->parsed())
            run_cooc(g, coo);
        else if (c_tra->parsed())
            run_train(g, tra);
        else if (c_wea->parsed())
            run_measure(g, wea, Measure::kWeat);
        else if (c_ect->parsed())
            run_measure(g, ect_args, Measure::kEct);
        else if (c_cbt->parsed())
            run_measure(g, cbt_args, Measure::kCbt);
        else if (c_rep->parsed())
            run_report(g, rep);
        else if (c_fre->parsed())
            run_freq(g, fre);
        else if (c_nei->parsed())
            run_neighbors(g, nei);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
