#include "doctest.h"

#include "biastrend/errors.hpp"
#include "biastrend/textnorm.hpp"

#include <string>
#include <utility>
#include <vector>

using namespace biastrend;

TEST_CASE("utf8 round trip and classification for German letters") {
    const std::string text = "Grüße ÄÖÜ ßẞ südöstlich";
    size_t i = 0;
    std::string rebuilt;
    while (i < text.size())
        utf8::encode(utf8::decode(text, i), rebuilt);
    CHECK(rebuilt == text);

    CHECK(utf8::is_letter(0x00DF)); // sharp s
    CHECK(utf8::is_letter(0x1E9E)); // capital sharp s
    CHECK(utf8::is_letter(0x00FC)); // u umlaut
    CHECK_FALSE(utf8::is_letter(0x00D7)); // multiplication sign
    CHECK_FALSE(utf8::is_letter(0x00F7)); // division sign
    CHECK_FALSE(utf8::is_letter('1'));
    CHECK_FALSE(utf8::is_letter(' '));

    CHECK(utf8::lower("GRÜßE") == "grüße");
    CHECK(utf8::lower("ẞ") == "ß");
    CHECK(utf8::lower("ÄÖÜ") == "äöü");
    CHECK(utf8::lower("Œuvre") == "œuvre"); // Latin Extended-A pair
}

TEST_CASE("line-break repair merges hyphenated continuations") {
    CHECK(normalize_line_breaks("Wirt-\nschaft") == "Wirtschaft");
    CHECK(normalize_line_breaks("Wirt- schaft") == "Wirtschaft");
    CHECK(normalize_line_breaks("Ver-\r\n  fassung") == "Verfassung");
    // chained breaks resolve in one pass
    CHECK(normalize_line_breaks("Ge-\nwerk-\nschaft") == "Gewerkschaft");
}

TEST_CASE("line-break repair leaves real hyphens alone") {
    // uppercase continuation: likely a named coordination, keep it
    CHECK(normalize_line_breaks("Müller- Meier") == "Müller- Meier");
    // conjunctions mark elided compounds, not broken words
    for (const char* conj : {"und", "oder", "sowie", "bzw", "beziehungsweise"}) {
        const std::string text = std::string("Luft- ") + conj + " Raumfahrt";
        CHECK(normalize_line_breaks(text) == text);
    }
    CHECK(normalize_line_breaks("Links-rechts") == "Links-rechts"); // no whitespace
    CHECK(normalize_line_breaks("a -b") == "a -b");                 // hyphen starts token
    CHECK(normalize_line_breaks("1-\n2") == "1-\n2");               // digits
}

TEST_CASE("line-break repair is idempotent") {
    const std::vector<std::string> inputs = {
        "Wirt-\nschaft und Ver-\nkehr",
        "Luft- und Raumfahrt",
        "a- b- c",
        "Müller- Meier",
        "Schluß-\nstrich",
    };
    for (const auto& in : inputs) {
        const std::string once = normalize_line_breaks(in);
        CHECK(normalize_line_breaks(once) == once);
    }
}

TEST_CASE("coordination expansion: 20-case hand-built oracle") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        // shared heads recovered from the head lexicon or prefix list
        {"Luft- und Raumfahrt", "Luftfahrt und Raumfahrt"},
        {"Ein- und Ausfuhr", "Einfuhr und Ausfuhr"},
        {"Be- und Entladung", "Beladung und Entladung"},
        {"Hin- und Rückfahrt", "Hinfahrt und Rückfahrt"},
        {"An- und Abreise", "Anreise und Abreise"},
        {"Vor- und Nachteile", "Vorteile und Nachteile"},
        {"Auf- und Abbau", "Aufbau und Abbau"},
        {"Im- und Export", "Import und Export"},
        {"Zu- und Abgang", "Zugang und Abgang"},
        {"Über- und Untergang", "Übergang und Untergang"},
        {"Haupt- und Nebensache", "Hauptsache und Nebensache"},
        {"Sommer- und Winterzeit", "Sommerzeit und Winterzeit"},
        {"Geld- und Finanzpolitik", "Geldpolitik und Finanzpolitik"},
        {"Innen- und Außenpolitik", "Innenpolitik und Außenpolitik"},
        {"Arbeits- und Sozialordnung", "Arbeitsordnung und Sozialordnung"},
        {"Lohn- und Preisentwicklung", "Lohnentwicklung und Preisentwicklung"},
        // no rewrite: pattern absent or conjunct unsuitable
        {"Brot und Butter", "Brot und Butter"},
        {"Be- und entladen", "Be- und entladen"},
        {"Luft- oder Raumfahrt", "Luft- oder Raumfahrt"},
        {"x- und Raumfahrt", "x- und Raumfahrt"},
    };
    REQUIRE(cases.size() == 20);
    for (const auto& [input, expected] : cases) {
        CAPTURE(input);
        CHECK(expand_coordinated_compounds(input) == expected);
    }
}

TEST_CASE("coordination expansion embeds cleanly in running text") {
    CHECK(expand_coordinated_compounds("die Ein- und Ausfuhr von Waren") ==
          "die Einfuhr und Ausfuhr von Waren");
    // whitespace between the parts may span lines after break repair
    CHECK(expand_coordinated_compounds("Ein-\nund Ausfuhr") == "Einfuhr\nund Ausfuhr");
    // chains resolve pairwise right to left; the leftmost conjunct stays
    // dangling because its partner is itself elided
    CHECK(expand_coordinated_compounds("Hals- und Nasen- und Ohrenheilkunde") ==
          "Hals- und Nasenheilkunde und Ohrenheilkunde");
}

TEST_CASE("coordination expansion is idempotent on its own output") {
    const std::vector<std::string> inputs = {"Luft- und Raumfahrt", "die Ein- und Ausfuhr",
                                             "Brot und Butter"};
    for (const auto& in : inputs) {
        const std::string once = expand_coordinated_compounds(in);
        CHECK(expand_coordinated_compounds(once) == once);
    }
}

TEST_CASE("pipeline order: repair first, then expansion") {
    // the conjunction exception in break repair preserves the coordination
    // so expansion still sees it
    const std::string raw = "Luft- und Raum-\nfahrt";
    const std::string repaired = normalize_line_breaks(raw);
    CHECK(repaired == "Luft- und Raumfahrt");
    CHECK(expand_coordinated_compounds(repaired) == "Luftfahrt und Raumfahrt");
}

TEST_CASE("session body extraction") {
    const std::string doc = "Anwesend: Dr. Muster.\n"
                            "Die Sitzung ist eröffnet.\n"
                            "Erster Redner spricht.\n"
                            "Zweiter Redner spricht.\n"
                            "Schluß der Sitzung 17 Uhr 30 Minuten.\n"
                            "Anlagen folgen.";
    const std::string body = extract_session_body(doc);
    CHECK(body.find("Erster Redner") != std::string::npos);
    CHECK(body.find("Zweiter Redner") != std::string::npos);
    CHECK(body.find("Anwesend") == std::string::npos);
    CHECK(body.find("Anlagen") == std::string::npos);
    CHECK(body.find("Schluß der Sitzung") == std::string::npos);

    SUBCASE("last close marker wins") {
        const std::string two = "Die Sitzung ist eröffnet. A. Schluss der Sitzung: 12 Uhr. B. "
                                "Schluss der Sitzung: 18 Uhr.";
        const std::string b = extract_session_body(two);
        CHECK(b.find(" A. ") != std::string::npos);
        CHECK(b.find(" B. ") != std::string::npos);
    }
    SUBCASE("one-sided truncation") {
        const std::string only_open = "x Die Sitzung ist eröffnet y z";
        CHECK(extract_session_body(only_open) == " y z");
        const std::string only_close = "y z Schluss der Sitzung 9 Uhr w";
        CHECK(extract_session_body(only_close) == "y z ");
    }
    SUBCASE("markers adjacent leave an empty body") {
        const std::string adjacent = "Die Sitzung ist eröffnetSchluss der Sitzung 9 Uhr";
        CHECK(extract_session_body(adjacent).empty());
    }
    SUBCASE("no markers at all") {
        CHECK_THROWS_AS(extract_session_body("nichts dergleichen"), NoSessionMarkers);
    }
    SUBCASE("custom patterns") {
        const std::string text = "aa OPEN bb CLOSE cc";
        CHECK(extract_session_body(text, {"OPEN"}, {"CLOSE"}) == " bb ");
    }
}
