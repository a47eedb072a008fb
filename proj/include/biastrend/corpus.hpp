#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace biastrend {

// One source document: a protocol file plus its session date.
struct DocumentRecord {
    std::string id;   // stable identifier, defaults to the manifest path
    std::string path; // file on disk, UTF-8 text
    int year = 0;
    std::string date; // as given in the manifest, "YYYY-MM-DD" or "YYYY"
};

// Manifest rows are "path<TAB>date", one per document, '#' comments allowed.
std::vector<DocumentRecord> load_manifest(const std::string& path);

// Time slice [start, end) in years.
struct PeriodConfig {
    std::string label;
    int start = 0;
    int end = 0;
};

std::vector<PeriodConfig> load_periods(const std::string& path);
std::vector<PeriodConfig> parse_periods(std::string_view tsv);

// Token -> lemma. Tokens without a row map to themselves.
class LemmaTable {
  public:
    LemmaTable() = default;
    static LemmaTable from_file(const std::string& path);
    static LemmaTable parse(std::string_view tsv);

    void add(std::string token, std::string lemma);
    const std::string& resolve(const std::string& token) const;
    size_t size() const { return map_.size(); }

  private:
    std::unordered_map<std::string, std::string> map_;
};

// Lowercased letter runs in input order; everything else is a separator.
std::vector<std::string> tokenize_normalize(std::string_view text);

// A preprocessed document: result of session extraction, line-break repair,
// coordination expansion, tokenization, and optional lemmatization.
struct TokenizedDocument {
    std::string id;
    int year = 0;
    std::string date;
    std::vector<std::string> tokens;
};

struct PreprocessOptions {
    bool extract_session = true; // skip for already-clean input
    const LemmaTable* lemmas = nullptr;
    std::vector<std::string> open_patterns;  // empty -> defaults
    std::vector<std::string> close_patterns; // empty -> defaults
};

// Runs the full normalization pipeline on one raw document body.
std::vector<std::string> preprocess_text(std::string_view raw_text,
                                         const PreprocessOptions& opt);

// Preprocesses every manifest document. Documents whose session markers are
// missing are kept with extraction skipped and reported in `warnings`.
// Parallel over documents; output order follows the manifest regardless of
// worker count.
std::vector<TokenizedDocument> preprocess_corpus(const std::vector<DocumentRecord>& docs,
                                                 const PreprocessOptions& opt, int workers,
                                                 std::vector<std::string>* warnings);

// One period's worth of documents, in manifest order.
struct CorpusSlice {
    std::string label;
    int start = 0;
    int end = 0;
    std::vector<const TokenizedDocument*> docs;
    uint64_t token_count = 0;
};

// Assigns documents to periods by year. Documents outside every period are
// listed in `unassigned` (may be null).
std::vector<CorpusSlice> slice_corpus(const std::vector<TokenizedDocument>& docs,
                                      const std::vector<PeriodConfig>& periods,
                                      std::vector<std::string>* unassigned);

// Occurrences of `term` per 100k running tokens; 0 for an absent term.
// Throws EmptySlice if the slice holds no tokens.
double term_frequency_per_100k(const CorpusSlice& slice, const std::string& term);

// Raw occurrence count.
uint64_t term_count(const CorpusSlice& slice, const std::string& term);

// Token-stream serialization: "#doc <id> <date>" then one line of
// space-separated tokens per document.
void write_token_file(const std::string& path, const std::vector<TokenizedDocument>& docs);
std::vector<TokenizedDocument> read_token_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

} // namespace biastrend
