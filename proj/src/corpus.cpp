#include "biastrend/corpus.hpp"

#include "biastrend/errors.hpp"
#include "biastrend/textnorm.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace biastrend {

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw IoError("read failed on " + path);
    return std::move(buf).str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw IoError("write failed on " + path);
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            if (pos < text.size())
                lines.push_back(text.substr(pos));
            break;
        }
        std::string_view line = text.substr(pos, nl - pos);
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        lines.push_back(line);
        pos = nl + 1;
    }
    return lines;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

int parse_year(std::string_view date, std::string_view context) {
    int year = 0;
    std::string_view head = date.substr(0, date.find('-'));
    auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), year);
    if (ec != std::errc{} || p != head.data() + head.size() || year <= 0)
        throw FormatError("bad date '" + std::string(date) + "' in " + std::string(context));
    return year;
}

} // namespace

std::vector<DocumentRecord> load_manifest(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<DocumentRecord> docs;
    size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw ManifestError("manifest line " + std::to_string(lineno) +
                                ": expected 'path<TAB>date'");
        DocumentRecord d;
        d.path = std::string(trim(line.substr(0, tab)));
        d.date = std::string(trim(line.substr(tab + 1)));
        d.id = d.path;
        d.year = parse_year(d.date, "manifest line " + std::to_string(lineno));
        if (d.path.empty())
            throw ManifestError("manifest line " + std::to_string(lineno) + ": empty path");
        docs.push_back(std::move(d));
    }
    if (docs.empty())
        throw ManifestError("manifest " + path + " lists no documents");
    return docs;
}

std::vector<PeriodConfig> parse_periods(std::string_view tsv) {
    std::vector<PeriodConfig> periods;
    size_t lineno = 0;
    for (auto raw : split_lines(tsv)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        std::string label;
        int start = 0, end = 0;
        std::istringstream ss{std::string(line)};
        if (!(ss >> label >> start >> end) || start >= end)
            throw FormatError("periods line " + std::to_string(lineno) +
                              ": expected 'label start end' with start < end");
        periods.push_back({label, start, end});
    }
    if (periods.empty())
        throw FormatError("period table is empty");
    return periods;
}

std::vector<PeriodConfig> load_periods(const std::string& path) {
    return parse_periods(read_text_file(path));
}

LemmaTable LemmaTable::from_file(const std::string& path) {
    return parse(read_text_file(path));
}

LemmaTable LemmaTable::parse(std::string_view tsv) {
    LemmaTable t;
    size_t lineno = 0;
    for (auto raw : split_lines(tsv)) {
        ++lineno;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
            continue;
        size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw FormatError("lemma table line " + std::to_string(lineno) +
                              ": expected 'token<TAB>lemma'");
        t.add(std::string(trim(line.substr(0, tab))), std::string(trim(line.substr(tab + 1))));
    }
    return t;
}

void LemmaTable::add(std::string token, std::string lemma) {
    map_[std::move(token)] = std::move(lemma);
}

const std::string& LemmaTable::resolve(const std::string& token) const {
    auto it = map_.find(token);
    return it == map_.end() ? token : it->second;
}

std::vector<std::string> tokenize_normalize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = utf8::decode(text, i);
        if (utf8::is_letter(cp)) {
            utf8::encode(utf8::to_lower(cp), cur);
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty())
        tokens.push_back(std::move(cur));
    return tokens;
}

std::vector<std::string> preprocess_text(std::string_view raw_text,
                                         const PreprocessOptions& opt) {
    std::string body;
    if (opt.extract_session) {
        const auto& open = opt.open_patterns.empty() ? default_open_patterns()
                                                     : opt.open_patterns;
        const auto& close = opt.close_patterns.empty() ? default_close_patterns()
                                                       : opt.close_patterns;
        body = extract_session_body(raw_text, open, close);
    } else {
        body = std::string(raw_text);
    }
    body = normalize_line_breaks(body);
    body = expand_coordinated_compounds(body);
    std::vector<std::string> tokens = tokenize_normalize(body);
    if (opt.lemmas) {
        for (auto& t : tokens) {
            const std::string& lemma = opt.lemmas->resolve(t);
            if (&lemma != &t)
                t = lemma;
        }
    }
    return tokens;
}

std::vector<TokenizedDocument> preprocess_corpus(const std::vector<DocumentRecord>& docs,
                                                 const PreprocessOptions& opt, int workers,
                                                 std::vector<std::string>* warnings) {
    const int n = static_cast<int>(docs.size());
    std::vector<TokenizedDocument> out(docs.size());
    std::vector<std::string> warn(docs.size());
    std::exception_ptr failure = nullptr;

    if (workers < 1)
        workers = 1;
#pragma omp parallel for schedule(dynamic) num_threads(workers)
    for (int i = 0; i < n; ++i) {
        if (failure)
            continue;
        try {
            const DocumentRecord& d = docs[static_cast<size_t>(i)];
            TokenizedDocument td;
            td.id = d.id;
            td.year = d.year;
            td.date = d.date;
            const std::string raw = read_text_file(d.path);
            try {
                td.tokens = preprocess_text(raw, opt);
            } catch (const NoSessionMarkers&) {
                PreprocessOptions fallback = opt;
                fallback.extract_session = false;
                td.tokens = preprocess_text(raw, fallback);
                warn[static_cast<size_t>(i)] =
                    d.id + ": no session markers, kept whole document";
            }
            out[static_cast<size_t>(i)] = std::move(td);
        } catch (...) {
#pragma omp critical
            if (!failure)
                failure = std::current_exception();
        }
    }
    if (failure)
        std::rethrow_exception(failure);
    if (warnings) {
        for (auto& w : warn)
            if (!w.empty())
                warnings->push_back(std::move(w));
    }
    return out;
}

std::vector<CorpusSlice> slice_corpus(const std::vector<TokenizedDocument>& docs,
                                      const std::vector<PeriodConfig>& periods,
                                      std::vector<std::string>* unassigned) {
    std::vector<CorpusSlice> slices;
    slices.reserve(periods.size());
    for (const auto& p : periods)
        slices.push_back({p.label, p.start, p.end, {}, 0});
    for (const auto& d : docs) {
        bool placed = false;
        for (auto& s : slices) {
            if (d.year >= s.start && d.year < s.end) {
                s.docs.push_back(&d);
                s.token_count += d.tokens.size();
                placed = true;
                break;
            }
        }
        if (!placed && unassigned)
            unassigned->push_back(d.id + " (" + d.date + ")");
    }
    return slices;
}

uint64_t term_count(const CorpusSlice& slice, const std::string& term) {
    uint64_t c = 0;
    for (const auto* d : slice.docs)
        c += static_cast<uint64_t>(std::count(d->tokens.begin(), d->tokens.end(), term));
    return c;
}

double term_frequency_per_100k(const CorpusSlice& slice, const std::string& term) {
    if (slice.token_count == 0)
        throw EmptySlice("slice " + slice.label + " holds no tokens");
    return static_cast<double>(term_count(slice, term)) * 1e5 /
           static_cast<double>(slice.token_count);
}

void write_token_file(const std::string& path, const std::vector<TokenizedDocument>& docs) {
    std::ostringstream out;
    for (const auto& d : docs) {
        out << "#doc " << d.id << ' ' << d.date << '\n';
        bool first = true;
        for (const auto& t : d.tokens) {
            if (!first)
                out << ' ';
            out << t;
            first = false;
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

std::vector<TokenizedDocument> read_token_file(const std::string& path) {
    const std::string text = read_text_file(path);
    std::vector<TokenizedDocument> docs;
    for (auto line : split_lines(text)) {
        if (line.rfind("#doc ", 0) == 0) {
            std::string_view rest = line.substr(5);
            size_t sp = rest.rfind(' ');
            if (sp == std::string_view::npos)
                throw FormatError("token file " + path + ": bad #doc header");
            TokenizedDocument d;
            d.id = std::string(rest.substr(0, sp));
            d.date = std::string(rest.substr(sp + 1));
            d.year = parse_year(d.date, path);
            docs.push_back(std::move(d));
        } else {
            if (docs.empty())
                throw FormatError("token file " + path + ": tokens before #doc header");
            std::istringstream ss{std::string(line)};
            std::string tok;
            while (ss >> tok)
                docs.back().tokens.push_back(tok);
        }
    }
    if (docs.empty())
        throw FormatError("token file " + path + " is empty");
    return docs;
}

} // namespace biastrend
