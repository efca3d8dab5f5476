#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tradelab/common.hpp"
#include "tradelab/rng.hpp"

namespace tradelab {

struct NewsItem {
    std::string timestamp;   // ISO-8601 date, optionally followed by a time part
    std::string headline;
    std::string snippet;
    std::string source;
};

/// Publication-age buckets relative to an as-of date, each capped by a
/// seeded subsample and ordered newest-first.
struct BucketedNews {
    std::vector<NewsItem> recent;   // age 0-3 days, at most 10
    std::vector<NewsItem> mid;      // age 4-10 days, at most 20
    std::vector<NewsItem> old;      // age 11-30 days, at most 20
    std::vector<std::string> diagnostics;
};

namespace detail {

/// Date part of a timestamp: the leading `YYYY-MM-DD`, tolerating a time
/// suffix introduced by `T` or a space.
inline std::optional<Date> parse_timestamp_date(const std::string& ts) {
    if (ts.size() < 10) return std::nullopt;
    if (ts.size() > 10 && ts[10] != 'T' && ts[10] != ' ') return std::nullopt;
    try {
        return parse_date(ts.substr(0, 10));
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
}

/// Seeded without-replacement subsample of k indices out of n (partial
/// Fisher-Yates), returned in selection order.
inline std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, n);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.bounded(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace detail

/// Buckets news by age (asof minus publication date): 0-3 days recent,
/// 4-10 mid, 11-30 old; anything else is dropped. Over-full buckets are
/// randomly subsampled to their cap with the seeded generator, then each
/// bucket is ordered newest-first. Items with unparseable timestamps are
/// dropped with a diagnostic.
inline BucketedNews bucket_news(const std::vector<NewsItem>& items, const Date& asof,
                                std::uint64_t seed) {
    struct Dated {
        const NewsItem* item;
        Date date;
        std::size_t input_order;
    };
    std::vector<Dated> candidates[3];
    BucketedNews out;

    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto date = detail::parse_timestamp_date(items[i].timestamp);
        if (!date) {
            out.diagnostics.push_back("dropped item " + std::to_string(i) +
                                      ": unparseable timestamp '" + items[i].timestamp + "'");
            continue;
        }
        const std::int64_t age = days_between(*date, asof);
        int bucket = -1;
        if (age >= 0 && age <= 3)
            bucket = 0;
        else if (age >= 4 && age <= 10)
            bucket = 1;
        else if (age >= 11 && age <= 30)
            bucket = 2;
        if (bucket < 0) continue;
        candidates[bucket].push_back({&items[i], *date, i});
    }

    const std::size_t caps[3] = {10, 20, 20};
    std::vector<NewsItem>* outputs[3] = {&out.recent, &out.mid, &out.old};
    for (int b = 0; b < 3; ++b) {
        SplitMix64 rng(SplitMix64::derive(seed, static_cast<std::uint64_t>(b)));
        auto chosen = detail::sample_indices(candidates[b].size(), caps[b], rng);
        std::vector<Dated> kept;
        kept.reserve(chosen.size());
        for (std::size_t idx : chosen) kept.push_back(candidates[b][idx]);
        std::sort(kept.begin(), kept.end(), [](const Dated& a, const Dated& c) {
            if (a.date != c.date) return c.date < a.date;   // newest first
            return a.input_order < c.input_order;
        });
        for (const Dated& d : kept) outputs[b]->push_back(*d.item);
    }
    return out;
}

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

/// Rewrites one integer >= 1000 with a k/M/B/T suffix at three significant
/// digits, rounding halves to even. Exact integer arithmetic throughout, so
/// the result is platform-stable; values that round up to 1000 of a unit
/// roll over to the next one.
inline std::string abbreviate_value(unsigned long long value) {
    struct Unit {
        unsigned long long scale;
        char suffix;
    };
    static constexpr Unit units[] = {
        {1000ULL, 'k'}, {1000000ULL, 'M'}, {1000000000ULL, 'B'}, {1000000000000ULL, 'T'}};

    for (std::size_t ui = 0; ui < std::size(units); ++ui) {
        const bool last = ui + 1 == std::size(units);
        if (!last && value >= units[ui + 1].scale) continue;

        const unsigned long long den = units[ui].scale;
        // Integer digits of value/den decide the decimals kept (3 sig digits).
        unsigned long long whole = value / den;
        int int_digits = 1;
        for (unsigned long long w = whole; w >= 10; w /= 10) ++int_digits;
        const int decimals = std::max(0, 3 - int_digits);
        unsigned long long pow10 = 1;
        for (int i = 0; i < decimals; ++i) pow10 *= 10;

        const unsigned long long num = value * pow10;
        unsigned long long q = num / den;
        const unsigned long long rem = num % den;
        if (2 * rem > den || (2 * rem == den && q % 2 == 1)) ++q;

        // Rounded up past three digits: retry with the next unit.
        if (!last && q >= 1000 * pow10) continue;

        std::string digits = std::to_string(q);
        std::string text;
        if (decimals == 0) {
            text = digits;
        } else {
            while (static_cast<int>(digits.size()) <= decimals) digits.insert(digits.begin(), '0');
            text = digits.substr(0, digits.size() - decimals) + "." +
                   digits.substr(digits.size() - decimals);
            while (text.back() == '0') text.pop_back();
            if (text.back() == '.') text.pop_back();
        }
        return text + units[ui].suffix;
    }
    return std::to_string(value);   // unreachable for value >= 1000
}

}  // namespace detail

/// Rewrites standalone integers of 1000 or more with k/M/B/T suffixes at
/// three significant digits (halves round to even). Digit runs adjacent to
/// letters, digits-with-separators (., , - /), backtick spans, and
/// plausible years (1900-2099) are left verbatim so dates, identifiers,
/// and source citations survive. Idempotent: produced tokens end in a
/// letter and are never rewritten again.
inline std::string abbreviate_numbers(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool in_backticks = false;
    std::size_t i = 0;
    const auto is_joined = [&](std::size_t pos) {
        if (pos >= text.size()) return false;
        const char c = text[pos];
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == ',' || c == '-' ||
               c == '/';
    };
    while (i < text.size()) {
        const char c = text[i];
        if (c == '`') {
            in_backticks = !in_backticks;
            out.push_back(c);
            ++i;
            continue;
        }
        if (in_backticks || !detail::is_digit(c)) {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && detail::is_digit(text[j])) ++j;
        const std::string_view run(text.data() + i, j - i);
        const bool standalone = (i == 0 || !is_joined(i - 1)) && !is_joined(j);
        bool rewrite = standalone && run.size() >= 4 && run.size() <= 15 && run[0] != '0';
        if (rewrite && run.size() == 4) {
            const int year = std::stoi(std::string(run));
            if (year >= 1900 && year <= 2099) rewrite = false;
        }
        if (rewrite) {
            out += detail::abbreviate_value(std::stoull(std::string(run)));
        } else {
            out.append(run);
        }
        i = j;
    }
    return out;
}

/// Strips the markdown the corpus uses: header markers, emphasis asterisks,
/// backticks, and link syntax (anchor text kept). Idempotent.
inline std::string strip_markdown(const std::string& text) {
    // Links first, repeated to a fixed point so nested brackets cannot
    // leave a fresh [text](url) behind.
    std::string s = text;
    for (;;) {
        bool replaced = false;
        std::string next;
        next.reserve(s.size());
        std::size_t i = 0;
        while (i < s.size()) {
            if (s[i] == '[') {
                const std::size_t close = s.find(']', i + 1);
                if (close != std::string::npos && close + 1 < s.size() && s[close + 1] == '(') {
                    const std::size_t paren = s.find(')', close + 2);
                    if (paren != std::string::npos) {
                        next.append(s, i + 1, close - i - 1);
                        i = paren + 1;
                        replaced = true;
                        continue;
                    }
                }
            }
            next.push_back(s[i]);
            ++i;
        }
        s = std::move(next);
        if (!replaced) break;
    }

    std::string out;
    out.reserve(s.size());
    bool at_line_start = true;
    std::size_t i = 0;
    while (i < s.size()) {
        if (at_line_start) {
            std::size_t j = i;
            while (j < s.size() && (s[j] == ' ' || s[j] == '\t')) ++j;
            if (j < s.size() && s[j] == '#') {
                std::size_t k = j;
                while (k < s.size() && s[k] == '#') ++k;
                if (k < s.size() && s[k] == ' ') {
                    out.append(s, i, j - i);
                    i = k + 1;
                    at_line_start = false;
                    continue;
                }
            }
        }
        const char c = s[i];
        if (c == '*' || c == '`') {
            ++i;
            continue;
        }
        out.push_back(c);
        at_line_start = c == '\n';
        ++i;
    }
    return out;
}

/// First max_words words, with a fixed `...` marker appended when anything
/// was cut. Inter-word whitespace of the kept prefix is preserved.
inline std::string truncate_text(const std::string& text, int max_words) {
    if (max_words < 1) throw std::invalid_argument("truncate_text: max_words must be >= 1");
    int words = 0;
    bool in_word = false;
    std::size_t end = text.size();
    for (std::size_t i = 0; i < text.size(); ++i) {
        const bool space = std::isspace(static_cast<unsigned char>(text[i])) != 0;
        if (!space && !in_word) {
            if (words == max_words) {
                end = i;
                break;
            }
            ++words;
        }
        in_word = !space;
    }
    if (end == text.size()) return text;
    std::string out = text.substr(0, end);
    while (!out.empty() && std::isspace(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out + " ...";
}

/// Canonical modality order for prompt assembly.
inline const std::vector<std::string>& modality_names() {
    static const std::vector<std::string> names{"market", "news", "sentiment", "fundamentals",
                                                "macro"};
    return names;
}

struct AssemblyConfig {
    std::vector<std::string> enabled = modality_names();
    int variations = 20;
    std::uint64_t seed = 0;

    void validate() const {
        if (variations < 1) throw std::invalid_argument("variations must be >= 1");
        for (const std::string& name : enabled)
            if (std::find(modality_names().begin(), modality_names().end(), name) ==
                modality_names().end())
                throw std::invalid_argument("unknown modality: " + name);
    }
};

/// One text block per modality; empty text means the modality is absent.
struct ModalitySnapshot {
    std::string market;
    std::string news;
    std::string sentiment;
    std::string fundamentals;
    std::string macro;

    const std::string& block(std::string_view name) const {
        if (name == "market") return market;
        if (name == "news") return news;
        if (name == "sentiment") return sentiment;
        if (name == "fundamentals") return fundamentals;
        if (name == "macro") return macro;
        throw std::invalid_argument("unknown modality: " + std::string(name));
    }
};

/// Labeled fence around one modality block.
inline std::string modality_delimiter(std::string_view name) {
    std::string upper(name);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return "== " + upper + " ==";
}

/// Builds `variations` prompt variants. Each variant draws a random
/// non-empty subset of the available modalities, shuffles the block order,
/// and joins the blocks under labeled fences. Variant i depends only on
/// (snapshot, seed, i): streams are derived per index, so any one variant
/// is reproducible in isolation.
inline std::vector<std::string> assemble_prompt(const ModalitySnapshot& snapshot,
                                                const AssemblyConfig& config) {
    config.validate();
    std::vector<std::string> available;
    for (const std::string& name : modality_names()) {
        if (std::find(config.enabled.begin(), config.enabled.end(), name) == config.enabled.end())
            continue;
        if (!snapshot.block(name).empty()) available.push_back(name);
    }
    if (available.empty())
        throw std::invalid_argument("assemble_prompt: every enabled modality is empty");

    std::vector<std::string> variants;
    variants.reserve(config.variations);
    for (int v = 0; v < config.variations; ++v) {
        SplitMix64 rng(SplitMix64::derive(config.seed, static_cast<std::uint64_t>(v)));
        std::vector<std::string> subset;
        while (subset.empty()) {
            for (const std::string& name : available)
                if (rng.bounded(2) == 1) subset.push_back(name);
        }
        rng.shuffle(subset);
        std::string prompt;
        for (std::size_t i = 0; i < subset.size(); ++i) {
            if (i > 0) prompt += "\n";
            prompt += modality_delimiter(subset[i]) + "\n" + snapshot.block(subset[i]) + "\n";
        }
        variants.push_back(std::move(prompt));
    }
    return variants;
}

}  // namespace tradelab
