#include "biastrend/textnorm.hpp"

#include "biastrend/errors.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

namespace biastrend {

namespace utf8 {

uint32_t decode(std::string_view s, size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    auto cont = [&](size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    auto tail = [&](size_t k) {
        return static_cast<uint32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
    };
    if ((b0 & 0xE0) == 0xC0 && cont(1)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x1F) << 6) | tail(1);
        i += 2;
        return cp;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x0F) << 12) | (tail(1) << 6) | tail(2);
        i += 3;
        return cp;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (static_cast<uint32_t>(b0 & 0x07) << 18) | (tail(1) << 12) |
                      (tail(2) << 6) | tail(3);
        i += 4;
        return cp;
    }
    ++i; // malformed byte, pass through as-is
    return b0;
}

void encode(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_letter(uint32_t cp) {
    if (cp < 0x80)
        return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
    if (cp >= 0xC0 && cp <= 0xFF)
        return cp != 0xD7 && cp != 0xF7;
    if (cp >= 0x100 && cp <= 0x17F)
        return true;
    return cp == 0x1E9E;
}

uint32_t to_lower(uint32_t cp) {
    if (cp >= 'A' && cp <= 'Z')
        return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7)
        return cp + 0x20;
    if (cp == 0x1E9E)
        return 0xDF; // capital sharp s
    if (cp == 0x178)
        return 0xFF; // Y with diaeresis
    if (cp >= 0x100 && cp <= 0x17E) {
        // Latin Extended-A pairs alternate; three lone lowercase letters
        // (0x131 dotless i is paired with 0x130, 0x138 kra, 0x149, 0x17F) break
        // the pattern and are already lowercase.
        if (cp == 0x131 || cp == 0x138 || cp == 0x149 || cp == 0x178)
            return cp;
        if (cp >= 0x139 && cp <= 0x148)
            return (cp % 2 == 1) ? cp + 1 : cp;
        if (cp >= 0x179)
            return (cp % 2 == 1) ? cp + 1 : cp;
        return (cp % 2 == 0) ? cp + 1 : cp;
    }
    return cp;
}

bool is_upper(uint32_t cp) {
    return is_letter(cp) && to_lower(cp) != cp;
}

bool is_lower(uint32_t cp) {
    return is_letter(cp) && to_lower(cp) == cp;
}

std::string lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size())
        encode(to_lower(decode(s, i)), out);
    return out;
}

} // namespace utf8

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Lowercased word at byte offset i (maximal letter run), or empty.
std::string word_at(std::string_view s, size_t i) {
    std::string w;
    while (i < s.size()) {
        size_t j = i;
        uint32_t cp = utf8::decode(s, j);
        if (!utf8::is_letter(cp))
            break;
        utf8::encode(utf8::to_lower(cp), w);
        i = j;
    }
    return w;
}

bool is_conjunction(const std::string& w) {
    static const std::array<std::string_view, 5> conj = {"und", "oder", "sowie", "bzw",
                                                         "beziehungsweise"};
    return std::find(conj.begin(), conj.end(), w) != conj.end();
}

// First constituents commonly elided in coordinations, longest match first.
const std::vector<std::string>& constituent_prefixes() {
    static const std::vector<std::string> p = {
        "zusammen", "zwischen", "wieder", "nieder", "hinter", "gegen",  "neben",
        "unter",    "außen",    "innen",  "durch",  "weiter", "wider",  "über",
        "rück",     "nach",     "voll",   "miss",   "fort",   "aus",    "auf",
        "ein",      "ent",      "emp",    "ver",    "vor",    "zer",    "her",
        "hin",      "mit",      "weg",    "dar",    "bei",    "los",    "ab",
        "an",       "be",       "er",     "ge",     "im",     "ex",     "um",
        "zu"};
    return p;
}

// Frequent compound heads; used to split off the shared head of the
// second conjunct ("Raumfahrt" -> "fahrt").
const std::vector<std::string>& compound_heads() {
    static const std::vector<std::string> h = {
        "entwicklung", "heilkunde",
        "wirtschaft", "bewegung", "leistung",  "ordnung", "bildung", "politik",
        "verkehr",    "ladung",   "schluss",   "schluß",  "stelle",  "steuer",
        "dienst",     "mittel",   "schutz",    "kosten",  "schaft",  "bereich",
        "grenze",     "fahrt",    "fuhr",      "sache",   "teile",   "teil",
        "reise",      "zeit",     "gang",      "bau",     "wesen",   "platz",
        "markt",      "recht",    "haus",      "land",    "stadt",   "werk",
        "kraft",      "bahn",     "wege",      "weg",     "kunde",   "lehre",
        "buch",       "jahr",     "punkt",     "raum",    "stand",   "halt",
        "satz",       "druck",    "zug",       "lauf",    "griff",   "sicht",
        "blick",      "wert",     "preis",     "lohn",    "geld",    "zahl",
        "menge",      "stufe",    "klasse",    "gruppe",  "nahme",   "gabe",
        "geber",      "nehmer",   "tag"};
    return h;
}

size_t letter_count(std::string_view s) {
    size_t i = 0, n = 0;
    while (i < s.size()) {
        utf8::decode(s, i);
        ++n;
    }
    return n;
}

// Byte offset of the suffix of `word` holding its last `n` codepoints.
size_t suffix_offset(std::string_view word, size_t n) {
    std::vector<size_t> starts;
    size_t i = 0;
    while (i < word.size()) {
        starts.push_back(i);
        utf8::decode(word, i);
    }
    if (n >= starts.size())
        return 0;
    return starts[starts.size() - n];
}

// Shared head of the second conjunct Y for coordination "X- und Y".
// Empty result means no plausible split was found.
std::string shared_head(std::string_view x, std::string_view y) {
    const std::string y_lower = utf8::lower(y);
    const size_t y_letters = letter_count(y_lower);

    // Longest known head that is a proper suffix with a real modifier left over.
    std::string_view best;
    for (const auto& h : compound_heads()) {
        if (h.size() >= best.size() && y_lower.size() > h.size() &&
            y_lower.ends_with(h) && letter_count(h) + 2 <= y_letters) {
            if (h.size() > best.size())
                best = h;
        }
    }
    if (!best.empty())
        return std::string(y.substr(y.size() - best.size()));

    // Longest known first constituent stripped off the front.
    for (const auto& p : constituent_prefixes()) {
        if (y_lower.size() > p.size() && y_lower.starts_with(p)) {
            std::string_view rest = y.substr(p.size());
            if (letter_count(rest) >= 3)
                return std::string(rest);
        }
    }

    // Fall back to assuming both modifiers have the same length.
    const size_t x_letters = letter_count(x);
    if (x_letters >= 1 && x_letters < y_letters && y_letters - x_letters >= 3) {
        return std::string(y.substr(suffix_offset(y, y_letters - x_letters)));
    }
    return {};
}

} // namespace

std::string normalize_line_breaks(std::string_view raw_text) {
    std::string out;
    out.reserve(raw_text.size());
    uint32_t last_cp = 0;
    size_t i = 0;
    while (i < raw_text.size()) {
        char c = raw_text[i];
        if (c == '-' && utf8::is_letter(last_cp)) {
            size_t j = i + 1;
            while (j < raw_text.size() && is_space(raw_text[j]))
                ++j;
            if (j > i + 1 && j < raw_text.size()) {
                size_t k = j;
                uint32_t next_cp = utf8::decode(raw_text, k);
                if (utf8::is_lower(next_cp) && !is_conjunction(word_at(raw_text, j))) {
                    i = j; // drop hyphen and whitespace, keep scanning
                    continue;
                }
            }
        }
        size_t j = i;
        uint32_t cp = utf8::decode(raw_text, j);
        out.append(raw_text.substr(i, j - i));
        last_cp = cp;
        i = j;
    }
    return out;
}

std::string expand_coordinated_compounds(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    size_t word_start = std::string::npos; // current letter-run start in input
    uint32_t prev_cp = 0;
    while (i < text.size()) {
        size_t j = i;
        uint32_t cp = utf8::decode(text, j);
        if (utf8::is_letter(cp)) {
            if (word_start == std::string::npos && !utf8::is_letter(prev_cp))
                word_start = i;
        } else if (cp == '-' && word_start != std::string::npos &&
                   utf8::is_letter(prev_cp)) {
            // candidate "X-"; look for " und Y"
            std::string_view x = text.substr(word_start, i - word_start);
            size_t p = j;
            size_t ws1 = p;
            while (p < text.size() && is_space(text[p]))
                ++p;
            if (p > ws1 && text.compare(p, 3, "und") == 0) {
                size_t q = p + 3;
                size_t ws2 = q;
                while (q < text.size() && is_space(text[q]))
                    ++q;
                size_t y_start = q;
                size_t y_end = y_start;
                uint32_t y_first = 0;
                while (y_end < text.size()) {
                    size_t r = y_end;
                    uint32_t ycp = utf8::decode(text, r);
                    if (!utf8::is_letter(ycp))
                        break;
                    if (y_end == y_start)
                        y_first = ycp;
                    y_end = r;
                }
                bool y_single = y_end < text.size() ? text[y_end] != '-' : true;
                if (q > ws2 && y_end > y_start && utf8::is_upper(y_first) && y_single &&
                    letter_count(x) >= 2) {
                    std::string_view y = text.substr(y_start, y_end - y_start);
                    std::string head = shared_head(x, y);
                    if (!head.empty()) {
                        out.append(head);
                        out.append(text.substr(i + 1, y_start - (i + 1))); // " und "
                        out.append(y);
                        prev_cp = 0;
                        word_start = std::string::npos;
                        i = y_end;
                        continue;
                    }
                }
            }
            word_start = std::string::npos;
        } else {
            word_start = std::string::npos;
        }
        out.append(text.substr(i, j - i));
        prev_cp = cp;
        i = j;
    }
    return out;
}

const std::vector<std::string>& default_open_patterns() {
    static const std::vector<std::string> p = {"Die Sitzung ist eröffnet"};
    return p;
}

const std::vector<std::string>& default_close_patterns() {
    static const std::vector<std::string> p = {
        "Schlu(ss|ß) der Sitzung[\\s:]+\\d{1,2}[.:]?\\d{0,2}\\s*Uhr"};
    return p;
}

std::string extract_session_body(std::string_view raw_text,
                                 const std::vector<std::string>& open_patterns,
                                 const std::vector<std::string>& close_patterns) {
    const std::string text(raw_text);
    size_t open_pos = std::string::npos;   // start of earliest open match
    size_t body_begin = std::string::npos; // end of that match
    size_t body_end = std::string::npos;   // start of last close match

    for (const auto& pat : open_patterns) {
        std::regex re(pat);
        std::smatch m;
        if (std::regex_search(text, m, re)) {
            size_t pos = static_cast<size_t>(m.position(0));
            if (open_pos == std::string::npos || pos < open_pos) {
                open_pos = pos;
                body_begin = pos + static_cast<size_t>(m.length(0));
            }
        }
    }
    for (const auto& pat : close_patterns) {
        std::regex re(pat);
        auto begin = std::sregex_iterator(text.begin(), text.end(), re);
        auto done = std::sregex_iterator();
        for (auto it = begin; it != done; ++it) {
            size_t pos = static_cast<size_t>(it->position(0));
            if (body_end == std::string::npos || pos > body_end)
                body_end = pos;
        }
    }

    if (body_begin == std::string::npos && body_end == std::string::npos)
        throw NoSessionMarkers("no session open/close markers matched");
    if (body_begin == std::string::npos)
        body_begin = 0;
    if (body_end == std::string::npos)
        body_end = text.size();
    if (body_end < body_begin)
        body_end = body_begin;
    return text.substr(body_begin, body_end - body_begin);
}

std::string extract_session_body(std::string_view raw_text) {
    return extract_session_body(raw_text, default_open_patterns(), default_close_patterns());
}

} // namespace biastrend
