#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tradelab/action.hpp"

namespace tradelab {

/// Number of maximal non-whitespace runs.
inline int count_words(std::string_view text) {
    int words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

/// One evidence-bearing list item. Citation anatomy: `quotes` holds italic
/// spans (single-asterisk pairs), `sources` holds backtick spans, `opinion`
/// is the claim prefix before the first citation marker.
struct Bullet {
    std::string full_text;             // line content after the list marker
    std::string opinion;               // prefix of full_text, right-trimmed
    int opinion_words = 0;
    std::vector<std::string> quotes;
    std::vector<std::string> sources;
    int paren_pairs = 0;
    bool starts_with_quote = false;

    bool cited() const { return !quotes.empty() && !sources.empty(); }
};

/// One tagged block of a completion.
struct Section {
    std::string tag;
    std::string content;               // verbatim span between the tag pair
    bool is_conclusion = false;
    int word_count = 0;
    bool has_headers = false;
    bool has_bullets = false;
    bool has_bold = false;
    bool has_tables = false;
    std::vector<Bullet> bullets;
};

struct ThinkSection {
    std::string text;
    int word_count = 0;
    bool is_structured = false;
    int newline_count = 0;
};

/// Layout of a reasoning block after splitting on headers and `---` rules.
struct ThinkStructure {
    std::vector<ThinkSection> sections;
    bool title_present = false;        // first section is a short title (<= 32 words)
    bool has_rule = false;             // at least one horizontal rule seen
};

struct DecisionExtraction {
    TradeAction action;
    bool terminal = false;
};

/// Parsed completion. Sections never include the think block; at most one
/// decision is retained (the last extractable occurrence).
struct ThesisDocument {
    std::optional<std::string> think;
    std::vector<Section> sections;
    std::optional<TradeAction> decision;
    bool decision_terminal = false;
    std::vector<std::string> diagnostics;

    /// Sections scored as analysis content (everything but the conclusion).
    std::vector<const Section*> analysis_sections() const {
        std::vector<const Section*> out;
        for (const Section& s : sections)
            if (!s.is_conclusion) out.push_back(&s);
        return out;
    }
};

enum class ParseMode { r1, r0 };

namespace detail {

inline std::string_view ltrim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    return s;
}

inline std::string_view rtrim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

/// Marker offset of a list item (`-`, `*`, `+`, or `N.` followed by space),
/// or npos when the line is not a bullet. Returns the offset where the item
/// text begins.
inline std::size_t bullet_body_offset(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) return std::string_view::npos;
    const char c = line[i];
    if (c == '-' || c == '*' || c == '+') {
        if (i + 1 < line.size() && (line[i + 1] == ' ' || line[i + 1] == '\t')) return i + 2;
        return std::string_view::npos;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = i;
        while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        if (j < line.size() && line[j] == '.' && j + 1 < line.size() &&
            (line[j + 1] == ' ' || line[j + 1] == '\t'))
            return j + 2;
    }
    return std::string_view::npos;
}

inline bool is_header_line(std::string_view line) { return ltrim(line).starts_with('#'); }

/// A horizontal rule: three or more hyphens and nothing else.
inline bool is_rule_line(std::string_view line) {
    const std::string_view t = rtrim(ltrim(line));
    if (t.size() < 3) return false;
    for (char c : t)
        if (c != '-') return false;
    return true;
}

/// Italic spans: sequential pairing of single asterisks; `**` is a bold
/// marker, not an italic delimiter. A trailing unmatched opener yields no
/// span. Each hit reports (content, opening-asterisk offset).
inline std::vector<std::pair<std::string, std::size_t>> italic_spans(std::string_view text) {
    std::vector<std::pair<std::string, std::size_t>> spans;
    std::size_t open = std::string_view::npos;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '*') continue;
        if (i + 1 < text.size() && text[i + 1] == '*') {
            ++i;
            continue;
        }
        if (open == std::string_view::npos) {
            open = i;
        } else {
            spans.emplace_back(std::string(text.substr(open + 1, i - open - 1)), open);
            open = std::string_view::npos;
        }
    }
    return spans;
}

inline std::vector<std::pair<std::string, std::size_t>> backtick_spans(std::string_view text) {
    std::vector<std::pair<std::string, std::size_t>> spans;
    std::size_t open = std::string_view::npos;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '`') continue;
        if (open == std::string_view::npos) {
            open = i;
        } else {
            spans.emplace_back(std::string(text.substr(open + 1, i - open - 1)), open);
            open = std::string_view::npos;
        }
    }
    return spans;
}

inline int matched_paren_pairs(std::string_view text) {
    int depth = 0, pairs = 0;
    for (char c : text) {
        if (c == '(') ++depth;
        else if (c == ')' && depth > 0) { --depth; ++pairs; }
    }
    return pairs;
}

inline std::size_t first_url_offset(std::string_view text) {
    std::size_t best = std::string_view::npos;
    for (std::string_view marker : {"http://", "https://", "www."}) {
        const std::size_t p = text.find(marker);
        if (p < best) best = p;
    }
    return best;
}

}  // namespace detail

/// Dissects one bullet line body into its citation anatomy. The opinion is
/// the right-trimmed prefix before the first citation marker (italic span,
/// parenthesis, bracket, URL, or backtick).
inline Bullet analyze_bullet(std::string_view body) {
    Bullet b;
    b.full_text = std::string(body);

    const auto italics = detail::italic_spans(body);
    const auto ticks = detail::backtick_spans(body);
    for (const auto& [content, off] : italics) b.quotes.push_back(content);
    for (const auto& [content, off] : ticks) b.sources.push_back(content);
    b.paren_pairs = detail::matched_paren_pairs(body);
    b.starts_with_quote = !italics.empty() && italics.front().second == 0;

    std::size_t cut = body.size();
    if (!italics.empty()) cut = std::min(cut, italics.front().second);
    if (!ticks.empty()) cut = std::min(cut, ticks.front().second);
    for (char marker : {'(', '['}) {
        const std::size_t p = body.find(marker);
        if (p < cut) cut = p;
    }
    const std::size_t url = detail::first_url_offset(body);
    if (url < cut) cut = url;

    b.opinion = std::string(detail::rtrim(body.substr(0, cut)));
    b.opinion_words = count_words(b.opinion);
    return b;
}

/// List items of a block: one Bullet per line starting `-`, `*`, `+`, or a
/// number followed by a period.
inline std::vector<Bullet> extract_bullets(std::string_view content) {
    std::vector<Bullet> bullets;
    for (std::string_view line : detail::split_lines(content)) {
        const std::size_t off = detail::bullet_body_offset(line);
        if (off == std::string_view::npos) continue;
        bullets.push_back(analyze_bullet(line.substr(off)));
    }
    return bullets;
}

/// Splits a reasoning block into sections at header lines and `---` rules.
/// With at least one separator present every kept section counts as
/// structured; with none the whole block is a single unstructured section.
inline ThinkStructure split_think_sections(std::string_view think) {
    ThinkStructure out;
    const auto lines = detail::split_lines(think);

    bool any_separator = false;
    std::vector<std::string> chunks(1);
    for (std::string_view line : lines) {
        if (detail::is_rule_line(line)) {
            out.has_rule = true;
            any_separator = true;
            chunks.emplace_back();
            continue;
        }
        if (detail::is_header_line(line) && !detail::rtrim(chunks.back()).empty()) {
            any_separator = true;
            chunks.emplace_back();
        } else if (detail::is_header_line(line)) {
            any_separator = true;
        }
        std::string& chunk = chunks.back();
        if (!chunk.empty()) chunk.push_back('\n');
        chunk.append(line);
    }

    for (const std::string& chunk : chunks) {
        const std::string_view trimmed = detail::rtrim(detail::ltrim(chunk));
        if (trimmed.empty()) continue;
        ThinkSection s;
        s.text = std::string(trimmed);
        s.word_count = count_words(trimmed);
        s.is_structured = any_separator;
        for (char c : trimmed)
            if (c == '\n') ++s.newline_count;
        out.sections.push_back(std::move(s));
    }
    out.title_present = !out.sections.empty() && out.sections.front().word_count <= 32;
    return out;
}

namespace detail {

/// Last `[[[ X ]]]` pattern in `text` whose X names an action. Reports the
/// byte offset of its final `]`.
inline std::optional<std::pair<TradeAction, std::size_t>> last_bracket_decision(
    std::string_view text) {
    std::optional<std::pair<TradeAction, std::size_t>> found;
    std::size_t pos = 0;
    while ((pos = text.find("[[[", pos)) != std::string_view::npos) {
        const std::size_t close = text.find("]]]", pos + 3);
        if (close == std::string_view::npos) break;
        const auto action = parse_action(std::string(text.substr(pos + 3, close - pos - 3)));
        if (action) found = {*action, close + 3};
        pos += 3;
    }
    return found;
}

/// Offset one past the last XML closing tag (`</name>`), or 0 when none.
inline std::size_t after_last_closing_tag(std::string_view text) {
    std::size_t last = 0;
    std::size_t pos = 0;
    while ((pos = text.find("</", pos)) != std::string_view::npos) {
        std::size_t j = pos + 2;
        while (j < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                text[j] == '-'))
            ++j;
        if (j > pos + 2 && j < text.size() && text[j] == '>') {
            last = j + 1;
            pos = j + 1;
        } else {
            pos += 2;
        }
    }
    return last;
}

/// Case-insensitive `DECISION:` token ending at the next `[[[`; returns the
/// offset of each such pattern's `[[[`.
inline std::vector<std::size_t> r0_decision_tag_offsets(std::string_view text) {
    std::vector<std::size_t> offsets;
    for (std::size_t i = 0; i + 9 <= text.size(); ++i) {
        if (!iequals(text.substr(i, 9), "DECISION:")) continue;
        std::size_t j = i + 9;
        while (j < text.size() && (text[j] == ' ' || text[j] == '\t')) ++j;
        if (text.substr(j).starts_with("[[[") &&
            text.find("]]]", j) != std::string_view::npos)
            offsets.push_back(j);
    }
    return offsets;
}

}  // namespace detail

/// Presence/placement indicators for the terminal `DECISION: [[[...]]]`
/// convention, independent of whether the bracketed text names an action.
struct R0DecisionIndicators {
    bool exists = false;
    bool final_placement = false;      // last occurrence after the last closing tag
};

inline R0DecisionIndicators r0_decision_indicators(std::string_view text) {
    R0DecisionIndicators out;
    const auto offsets = detail::r0_decision_tag_offsets(text);
    if (offsets.empty()) return out;
    out.exists = true;
    out.final_placement = offsets.back() >= detail::after_last_closing_tag(text);
    return out;
}

/// Extracts the trade decision. Mode r1 accepts `[[[X]]]` within the last
/// three lines (terminal by construction). Mode r0 accepts
/// `DECISION: [[[X]]]` anywhere; terminal means the last such occurrence
/// sits after the last XML closing tag.
inline std::optional<DecisionExtraction> extract_decision(std::string_view text, ParseMode mode) {
    if (mode == ParseMode::r1) {
        const auto lines = detail::split_lines(text);
        const std::size_t first = lines.size() > 3 ? lines.size() - 3 : 0;
        std::optional<DecisionExtraction> found;
        for (std::size_t i = first; i < lines.size(); ++i) {
            const auto hit = detail::last_bracket_decision(lines[i]);
            if (hit) found = DecisionExtraction{hit->first, true};
        }
        return found;
    }

    const auto offsets = detail::r0_decision_tag_offsets(text);
    std::optional<std::pair<TradeAction, std::size_t>> last;
    for (std::size_t off : offsets) {
        const std::size_t close = text.find("]]]", off);
        const auto action = parse_action(std::string(text.substr(off + 3, close - off - 3)));
        if (action) last = {*action, off};
    }
    if (!last) return std::nullopt;
    return DecisionExtraction{last->first,
                              last->second >= detail::after_last_closing_tag(text)};
}

namespace detail {

inline void fill_section_stats(Section& s) {
    s.word_count = count_words(s.content);
    s.bullets = extract_bullets(s.content);
    s.has_bullets = !s.bullets.empty();

    const auto lines = split_lines(s.content);
    int piped_run = 0;
    for (std::string_view line : lines) {
        if (is_header_line(line)) s.has_headers = true;
        if (line.find('|') != std::string_view::npos) {
            if (++piped_run >= 2) s.has_tables = true;
        } else {
            piped_run = 0;
        }
    }
    const std::size_t first_bold = s.content.find("**");
    s.has_bold = first_bold != std::string::npos &&
                 s.content.find("**", first_bold + 2) != std::string::npos;
}

}  // namespace detail

/// Total parser for XML-scaffolded completions: the first `<think>` block,
/// then every well-formed `<tag>…</tag>` pair in order. Unclosed or
/// duplicate-think tags are skipped and recorded as diagnostics; nested
/// identical tags are not supported (the first closing tag wins).
inline ThesisDocument parse_completion(std::string_view text, ParseMode mode = ParseMode::r1) {
    ThesisDocument doc;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t lt = text.find('<', pos);
        if (lt == std::string_view::npos) break;
        std::size_t j = lt + 1;
        if (j < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[j])) || text[j] == '_')) {
            ++j;
            while (j < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_' ||
                    text[j] == '-'))
                ++j;
        }
        if (j == lt + 1 || j >= text.size() || text[j] != '>') {
            pos = lt + 1;
            continue;
        }
        const std::string tag(text.substr(lt + 1, j - lt - 1));
        const std::string closer = "</" + tag + ">";
        const std::size_t close = text.find(closer, j + 1);
        if (close == std::string_view::npos) {
            doc.diagnostics.push_back("unclosed tag <" + tag + "> at offset " +
                                      std::to_string(lt));
            pos = j + 1;
            continue;
        }
        const std::string content(text.substr(j + 1, close - j - 1));
        if (detail::iequals(tag, "think")) {
            if (doc.think) {
                doc.diagnostics.push_back("duplicate think block at offset " +
                                          std::to_string(lt) + " skipped");
            } else {
                doc.think = content;
            }
        } else {
            Section s;
            s.tag = tag;
            s.content = content;
            s.is_conclusion = detail::iequals(tag, "conclusion");
            detail::fill_section_stats(s);
            doc.sections.push_back(std::move(s));
        }
        pos = close + closer.size();
    }

    const auto decision = extract_decision(text, mode);
    if (decision) {
        doc.decision = decision->action;
        doc.decision_terminal = decision->terminal;
    }
    return doc;
}

}  // namespace tradelab
