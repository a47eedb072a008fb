#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace biastrend {

/// Minimal UTF-8 handling for German-language text. Letters are ASCII
/// [A-Za-z], the Latin-1 supplement letters (U+00C0..U+00FF minus the
/// multiplication/division signs) and Latin Extended-A (U+0100..U+017F),
/// plus U+1E9E (capital sharp s). Everything else separates tokens.
namespace utf8 {

// Decodes the codepoint starting at byte offset i; advances i past it.
// Malformed sequences decode as one byte (value of that byte).
uint32_t decode(std::string_view s, size_t& i);

void encode(uint32_t cp, std::string& out);

bool is_letter(uint32_t cp);
bool is_lower(uint32_t cp);
bool is_upper(uint32_t cp);
uint32_t to_lower(uint32_t cp);

// Lowercases letters, leaves all other codepoints untouched.
std::string lower(std::string_view s);

} // namespace utf8

// Merges words hyphenated across whitespace: a token ending in '-'
// followed by whitespace and a lowercase-initial continuation becomes one
// word ("Poli- tik" -> "Politik"). Coordinating conjunctions (und, oder,
// sowie, bzw, beziehungsweise) never count as continuations, so elliptic
// compounds like "Luft- und Raumfahrt" survive for expansion below.
// Idempotent: applying it twice equals applying it once.
std::string normalize_line_breaks(std::string_view raw_text);

// Rewrites elliptic compound coordinations "X- und Y" (Y a single
// capitalized token) into "X<head> und Y", e.g. "Luft- und Raumfahrt" ->
// "Luftfahrt und Raumfahrt". The head of Y is found by stripping Y's
// first constituent: the longest match from a fixed list of German
// prefixes, or a constituent as long as X when no prefix matches.
// Patterns that yield no plausible head are left unchanged.
std::string expand_coordinated_compounds(std::string_view text);

// Returns the text strictly between the first open-marker match and the
// last close-marker match. With only one side matched, truncates on that
// side alone. Throws NoSessionMarkers when nothing matches; callers
// normally fall back to the whole document.
std::string extract_session_body(std::string_view raw_text,
                                 const std::vector<std::string>& open_patterns,
                                 const std::vector<std::string>& close_patterns);

// Session boundary defaults: the opening formula of a sitting and the
// closing formula with a clock time, in both pre- and post-reform spelling.
const std::vector<std::string>& default_open_patterns();
const std::vector<std::string>& default_close_patterns();

std::string extract_session_body(std::string_view raw_text);

} // namespace biastrend
