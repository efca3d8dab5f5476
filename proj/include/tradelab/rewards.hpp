#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tradelab/action.hpp"
#include "tradelab/thesis.hpp"

namespace tradelab {

// ---------------------------------------------------------------------------
// Stage I: section organization

/// Analysis-section count score, peaking on 5 to 7 sections.
inline double section_count_score(int count) {
    if (count < 0) throw std::invalid_argument("section count must be >= 0");
    if (count >= 5 && count <= 7) return 1.0;
    if (count < 5) return std::max(0.3, count / 5.0 * 0.7);
    return std::max(0.3, 1.0 - 0.15 * (count - 7));
}

/// Structural-element score of one section: indicator-weighted presence of
/// headers, bullets, bold text, and tables. Sections under 50 words score a
/// flat 0.2 regardless of elements.
inline double section_structure_score(const Section& s) {
    if (s.word_count < 50) return 0.2;
    return 0.3 * (s.has_headers ? 1 : 0) + 0.4 * (s.has_bullets ? 1 : 0) +
           0.2 * (s.has_bold ? 1 : 0) + 0.1 * (s.has_tables ? 1 : 0);
}

/// Document structure reward: 0.6 on the analysis-section count (conclusion
/// excluded) plus 0.4 on the mean structural score over every section
/// (conclusion included). A document with no sections scores 0.
inline double structure_reward(const ThesisDocument& doc) {
    if (doc.sections.empty()) return 0.0;
    int analysis = 0;
    double mean = 0.0;
    for (const Section& s : doc.sections) {
        if (!s.is_conclusion) ++analysis;
        mean += section_structure_score(s);
    }
    mean /= static_cast<double>(doc.sections.size());
    return 0.6 * section_count_score(analysis) + 0.4 * mean;
}

// ---------------------------------------------------------------------------
// Stage II: opinion-quote-source evidence

/// Opinion-length quality of a bullet. Cited bullets (quote and source both
/// present) peak on 15 to 90 opinion words; uncited bullets cap at 0.3.
inline double opinion_score(const Bullet& b) {
    const double w = b.opinion_words;
    if (!b.cited()) return std::min(0.3, w / 15.0 * 0.3);
    if (w >= 15 && w <= 90) return 1.0;
    if (w < 15) return w / 15.0;
    return std::max(0.5, 1.0 - 0.02 * (w - 90));
}

/// Bullet evidence score: 0.4 opinion quality, 0.35 quote presence, 0.25
/// source presence.
inline double bullet_evidence_score(const Bullet& b) {
    return 0.4 * opinion_score(b) + 0.35 * (b.quotes.empty() ? 0 : 1) +
           0.25 * (b.sources.empty() ? 0 : 1);
}

/// Bullet count score, peaking on 4 to 7 bullets; zero bullets score 0.
inline double bullet_count_score(int count) {
    if (count < 0) throw std::invalid_argument("bullet count must be >= 0");
    if (count >= 4 && count <= 7) return 1.0;
    if (count < 4) return count / 4.0;
    return std::max(0.3, 1.0 - 0.1 * (count - 7));
}

namespace detail {

/// Harmonic mean with each value floored at 0.01; 0 for an empty list.
inline double floored_harmonic_mean(const std::vector<double>& values) {
    if (values.empty()) return 0.0;
    double denom = 0.0;
    for (double v : values) denom += 1.0 / std::max(v, 0.01);
    return static_cast<double>(values.size()) / denom;
}

}  // namespace detail

/// Section evidence score: 0.3 on bullet count plus 0.7 on the harmonic
/// mean of bullet scores (floored at 0.01 so one weak bullet drags the mean
/// without zeroing it).
inline double section_evidence_score(const Section& s) {
    std::vector<double> scores;
    scores.reserve(s.bullets.size());
    for (const Bullet& b : s.bullets) scores.push_back(bullet_evidence_score(b));
    return 0.3 * bullet_count_score(static_cast<int>(s.bullets.size())) +
           0.7 * detail::floored_harmonic_mean(scores);
}

/// Document evidence reward: harmonic mean of section evidence scores over
/// analysis sections (conclusion excluded); no analysis sections scores 0.
inline double evidence_reward(const ThesisDocument& doc) {
    std::vector<double> scores;
    for (const Section& s : doc.sections)
        if (!s.is_conclusion) scores.push_back(section_evidence_score(s));
    return detail::floored_harmonic_mean(scores);
}

// ---------------------------------------------------------------------------
// Stage III: asymmetric decision scoring

/// Payoff for a missing or malformed decision; matches the severity of an
/// opposite-direction error.
inline constexpr double kMissingDecisionPenalty = -1.5;

/// Prediction-vs-truth payoff table (rows: prediction, columns: truth).
/// Exact matches pay 1.00, same-direction misses 0.75, and opposite-
/// direction errors penalize the bullish side harder; the HOLD row is
/// negative off-diagonal so sitting out a warranted move always costs.
struct DecisionMatrix {
    std::array<std::array<double, kNumActions>, kNumActions> values{};

    static DecisionMatrix standard() {
        DecisionMatrix m;
        m.values = {{
            //  truth:  SS      S      H      B      SB
            {{1.00, 0.75, -1.25, -2.00, -2.25}},   // prediction SS
            {{0.75, 1.00, -0.75, -1.50, -2.00}},   // prediction S
            {{-1.50, -1.00, 1.00, -1.00, -1.50}},  // prediction H
            {{-1.75, -1.25, -0.75, 1.00, 0.75}},   // prediction B
            {{-2.00, -1.50, -1.25, 0.75, 1.00}},   // prediction SB
        }};
        return m;
    }

    double at(TradeAction prediction, TradeAction truth) const {
        return values[ordinal(prediction)][ordinal(truth)];
    }

    /// Unit diagonal, off-diagonal capped at 0.75, nothing below -2.25.
    void validate() const {
        for (std::size_t p = 0; p < kNumActions; ++p) {
            for (std::size_t t = 0; t < kNumActions; ++t) {
                const double v = values[p][t];
                if (p == t && v != 1.0)
                    throw std::invalid_argument("decision matrix diagonal must be exactly 1.00");
                if (p != t && v > 0.75)
                    throw std::invalid_argument("off-diagonal decision entries must be <= 0.75");
                if (v < -2.25)
                    throw std::invalid_argument("decision entries must be >= -2.25");
            }
        }
    }
};

/// Raw decision payoff: matrix lookup, or the missing-decision penalty when
/// no prediction was extracted. Unscaled by design; the aggregation weight
/// is applied exactly once, in investment_reward.
inline double decision_reward(std::optional<TradeAction> prediction, TradeAction truth,
                              const DecisionMatrix& matrix = DecisionMatrix::standard()) {
    if (!prediction) return kMissingDecisionPenalty;
    return matrix.at(*prediction, truth);
}

// ---------------------------------------------------------------------------
// Aggregation

struct RewardWeights {
    double lambda_struct = 1.0;
    double lambda_evid = 1.0;
    double lambda_dec = 1.0;

    void validate() const {
        if (lambda_struct < 0 || lambda_evid < 0 || lambda_dec < 0)
            throw std::invalid_argument("reward weights must be non-negative");
    }
};

struct HeadScore {
    std::string name;
    double value = 0.0;
    double lo = 0.0;   // declared codomain
    double hi = 1.0;
};

struct RewardBreakdown {
    std::vector<HeadScore> heads;
    double aggregate = 0.0;

    const HeadScore* find(std::string_view name) const {
        for (const HeadScore& h : heads)
            if (h.name == name) return &h;
        return nullptr;
    }
};

/// Weighted three-head investment reward over a parsed document.
inline RewardBreakdown investment_reward(const ThesisDocument& doc, TradeAction truth,
                                         const RewardWeights& weights = {},
                                         const DecisionMatrix& matrix = DecisionMatrix::standard()) {
    weights.validate();
    matrix.validate();
    RewardBreakdown out;
    const double structure = structure_reward(doc);
    const double evidence = evidence_reward(doc);
    const double decision = decision_reward(doc.decision, truth, matrix);
    out.heads.push_back({"structure", structure, 0.0, 1.0});
    out.heads.push_back({"evidence", evidence, 0.0, 1.0});
    out.heads.push_back({"decision", decision, -2.25, 1.0});
    out.aggregate = weights.lambda_struct * structure + weights.lambda_evid * evidence +
                    weights.lambda_dec * decision;
    return out;
}

// ---------------------------------------------------------------------------
// Format heads (the R0 shaping family)

/// Content-presence head. The reasoning term is a saturating piecewise ramp
/// over the think word count: flat 0.05 under 100 words, rising to 0.5 at
/// 300, then a shallower climb that snaps back down to the 0.5 ceiling at
/// 800 words. The drop at 800 is deliberate, not a bug: length should stop
/// paying once a think block turns into padding. The category term pays
/// 1/16 per substantial category (>= 80 words; half credit at 40-79) up to
/// eight. Sum clipped to [0,1].
inline double content_presence_score(int think_words, const std::vector<int>& category_words) {
    constexpr double alpha0 = 0.05;
    constexpr double w0 = 100, l_min = 300, l_max = 800;
    constexpr double m_think = 0.5, m_cat = 0.5;

    double think = 0.0;
    const double w = think_words;
    if (w <= 0)
        think = 0.0;
    else if (w < w0)
        think = alpha0;
    else if (w < l_min)
        think = alpha0 + (w - w0) / (l_min - w0) * (0.5 - alpha0);
    else if (w < l_max)
        think = 0.5 + 0.5 * m_think * (w - l_min) / (l_max - l_min);
    else
        think = m_think;

    double substantial = 0.0;
    for (int cw : category_words) {
        if (cw >= 80)
            substantial += 1.0;
        else if (cw >= 40)
            substantial += 0.5;
    }
    const double cat = m_cat * std::min(substantial, 8.0) / 8.0;
    return std::clamp(think + cat, 0.0, 1.0);
}

/// Sectioned-reasoning head: structured think sections of at least 50 words
/// earn min(1, words/100) each; the first eight are summed and divided by
/// eight.
inline double sectioned_think_score(const ThinkStructure& think) {
    constexpr int w_min = 50, s_max = 8;
    constexpr double w_star = 100.0;
    double total = 0.0;
    int kept = 0;
    for (const ThinkSection& s : think.sections) {
        if (!s.is_structured || s.word_count < w_min) continue;
        total += std::min(1.0, s.word_count / w_star);
        if (++kept == s_max) break;
    }
    return total / s_max;
}

/// Citation-pattern score of one bullet: a base 0.5 (docked 10% when the
/// bullet opens with a quote instead of a claim), 0.3 for quote density
/// (saturating at two), 0.2 for at least one parenthetical.
inline double citation_pattern_score(const Bullet& b) {
    constexpr double w_s = 0.5, w_q = 0.3, w_p = 0.2, p_q = 0.1;
    constexpr double q_max = 2.0, p_max = 1.0;
    return w_s * (1.0 - (b.starts_with_quote ? p_q : 0.0)) +
           w_q * std::min(1.0, b.quotes.size() / q_max) +
           w_p * std::min(1.0, b.paren_pairs / p_max);
}

/// Citation-discipline head: per-category mean of bullet citation scores,
/// summed over the first seven categories and divided by seven. Categories
/// without bullets contribute nothing.
inline double citation_discipline_score(const std::vector<Section>& sections) {
    constexpr int c_max = 7;
    double total = 0.0;
    int seen = 0;
    for (const Section& s : sections) {
        if (seen == c_max) break;
        ++seen;
        if (s.bullets.empty()) continue;
        double mean = 0.0;
        for (const Bullet& b : s.bullets) mean += citation_pattern_score(b);
        total += mean / static_cast<double>(s.bullets.size());
    }
    return total / c_max;
}

enum class Strictness { strict, easy };

namespace detail {

struct CountShape {
    int lo, hi;
    double below_scale;   // below-range score = max(floor, below_scale * n / lo)
    double above_slope;   // above-range score = max(floor, 1 - above_slope * (n - hi))
    double floor;
};

inline double count_shape_score(int n, const CountShape& shape) {
    if (n >= shape.lo && n <= shape.hi) return 1.0;
    if (n < shape.lo) return std::max(shape.floor, shape.below_scale * n / shape.lo);
    return std::max(shape.floor, 1.0 - shape.above_slope * (n - shape.hi));
}

struct RangeShape {
    int lo, hi;
    int ramp_from;         // linear 0.3..1 ramp between ramp_from and lo
    double above_slope;    // per-word decay above hi
    double above_floor;
};

inline double range_shape_score(int w, const RangeShape& shape) {
    if (w >= shape.lo && w <= shape.hi) return 1.0;
    if (w < shape.ramp_from) return 0.3 * w / shape.ramp_from;
    if (w < shape.lo)
        return 0.3 + 0.7 * (w - shape.ramp_from) / static_cast<double>(shape.lo - shape.ramp_from);
    return std::max(shape.above_floor, 1.0 - shape.above_slope * (w - shape.hi));
}

// Piecewise constants per strictness. Every slope and breakpoint lives here
// rather than inline at the call sites, and the full table is reproduced in
// the README configuration reference.
inline const RangeShape& think_length_shape(Strictness mode) {
    static const RangeShape strict{160, 220, 50, 0.01, 0.1};
    static const RangeShape easy{80, 300, 50, 0.005, 0.1};
    return mode == Strictness::strict ? strict : easy;
}

inline double think_newline_slope(Strictness mode) {
    return mode == Strictness::strict ? 0.02 : 0.01;
}

inline const CountShape& think_count_shape(Strictness mode) {
    static const CountShape strict{5, 7, 0.7, 0.15, 0.3};
    static const CountShape easy{4, 8, 0.85, 0.075, 0.3};
    return mode == Strictness::strict ? strict : easy;
}

inline const CountShape& category_count_shape(Strictness mode) {
    static const CountShape strict{5, 7, 0.7, 0.15, 0.3};
    static const CountShape easy{4, 8, 0.85, 0.075, 0.3};
    return mode == Strictness::strict ? strict : easy;
}

inline const CountShape& category_bullet_shape(Strictness mode) {
    static const CountShape strict{3, 6, 1.0, 0.1, 0.0};
    static const CountShape easy{3, 7, 1.0, 0.05, 0.0};
    return mode == Strictness::strict ? strict : easy;
}

struct OpinionShape {
    int lo, hi;
    double above_slope;
};

inline const OpinionShape& opinion_conformity_shape(Strictness mode) {
    static const OpinionShape strict{16, 30, 0.02};
    static const OpinionShape easy{8, 50, 0.01};
    return mode == Strictness::strict ? strict : easy;
}

struct BulletLengthShape {
    int lo, hi;
    double above_slope;
};

inline const BulletLengthShape& bullet_length_shape(Strictness mode) {
    static const BulletLengthShape strict{45, 90, 0.01};
    static const BulletLengthShape easy{20, 150, 0.005};
    return mode == Strictness::strict ? strict : easy;
}

}  // namespace detail

/// Think-layout head. Strict mode requires at least one horizontal rule
/// (zero otherwise) and blends: 0.40 mean per-section length quality (sweet
/// spot 160-220 words, 1%/word decay above, a multiplicative penalty past
/// 24 newlines), 0.25 balance (1 - 2 CV of non-title lengths, floored at
/// 0.5), 0.25 section count (peak 5-7), 0.10 title presence (0.7 without a
/// short first section). Easy mode drops the rule gate, widens the sweet
/// spot to 80-300 words, accepts 4-8 sections, halves the decay slopes, and
/// reweights to 0.40 count / 0.30 length / 0.20 balance / 0.10 title.
inline double think_layout_score(const ThinkStructure& think, Strictness mode) {
    if (mode == Strictness::strict && !think.has_rule) return 0.0;
    if (think.sections.empty()) return 0.0;

    const auto& length_shape = detail::think_length_shape(mode);
    const double nl_slope = detail::think_newline_slope(mode);

    const std::size_t first_body = think.title_present ? 1 : 0;
    double length_mean = 0.0;
    std::vector<double> body_lengths;
    for (std::size_t i = first_body; i < think.sections.size(); ++i) {
        const ThinkSection& s = think.sections[i];
        double score = detail::range_shape_score(s.word_count, length_shape);
        if (s.newline_count > 24)
            score *= std::max(0.1, 1.0 - nl_slope * (s.newline_count - 24));
        length_mean += score;
        body_lengths.push_back(s.word_count);
    }
    if (!body_lengths.empty()) length_mean /= static_cast<double>(body_lengths.size());

    double balance = 1.0;
    if (body_lengths.size() >= 2) {
        double mean = 0.0;
        for (double w : body_lengths) mean += w;
        mean /= static_cast<double>(body_lengths.size());
        double var = 0.0;
        for (double w : body_lengths) var += (w - mean) * (w - mean);
        var /= static_cast<double>(body_lengths.size());
        balance = std::max(0.5, 1.0 - 2.0 * std::sqrt(var) / mean);
    }

    const double count = detail::count_shape_score(static_cast<int>(think.sections.size()),
                                                   detail::think_count_shape(mode));
    const double title = think.title_present ? 1.0 : 0.7;

    if (mode == Strictness::strict)
        return 0.40 * length_mean + 0.25 * balance + 0.25 * count + 0.10 * title;
    return 0.40 * count + 0.30 * length_mean + 0.20 * balance + 0.10 * title;
}

/// Thesis-style category head: 70% mean per-category quality plus a 30%
/// prior on the category count (peak 5-7 strict, 4-8 easy). Quality blends
/// opinion-citation conformity (16-30 opinion words strict, zero when the
/// bullet lacks a citation), bullet length (45-90 words strict), and bullet
/// count (3-6 strict) at relative weights 0.35/0.20/0.15 renormalized to
/// the 70% share. Easy mode widens every range and halves the decay slopes.
inline double category_thesis_score(const std::vector<Section>& sections, Strictness mode) {
    if (sections.empty()) return 0.0;
    const auto& op_shape = detail::opinion_conformity_shape(mode);
    const auto& len_shape = detail::bullet_length_shape(mode);
    const auto& bullet_shape = detail::category_bullet_shape(mode);

    double quality_sum = 0.0;
    for (const Section& s : sections) {
        if (s.bullets.empty()) continue;  // quality 0
        double opinion = 0.0, length = 0.0;
        for (const Bullet& b : s.bullets) {
            if (b.cited()) {
                const int w = b.opinion_words;
                if (w >= op_shape.lo && w <= op_shape.hi)
                    opinion += 1.0;
                else if (w < op_shape.lo)
                    opinion += static_cast<double>(w) / op_shape.lo;
                else
                    opinion += std::max(0.3, 1.0 - op_shape.above_slope * (w - op_shape.hi));
            }
            const int bw = count_words(b.full_text);
            if (bw >= len_shape.lo && bw <= len_shape.hi)
                length += 1.0;
            else if (bw < len_shape.lo)
                length += static_cast<double>(bw) / len_shape.lo;
            else
                length += std::max(0.3, 1.0 - len_shape.above_slope * (bw - len_shape.hi));
        }
        const double n = static_cast<double>(s.bullets.size());
        const double count =
            detail::count_shape_score(static_cast<int>(s.bullets.size()), bullet_shape);
        quality_sum += (0.35 * (opinion / n) + 0.20 * (length / n) + 0.15 * count) / 0.70;
    }
    const double quality = quality_sum / static_cast<double>(sections.size());
    const double prior = detail::count_shape_score(static_cast<int>(sections.size()),
                                                   detail::category_count_shape(mode));
    return 0.7 * quality + 0.3 * prior;
}

/// Terminal-decision head: half credit for a `DECISION: [[[...]]]` tag
/// anywhere, half for its last occurrence sitting after the final closing
/// tag. Returns the formula value in [0,1].
inline double decision_placement_score(std::string_view text) {
    const R0DecisionIndicators ind = r0_decision_indicators(text);
    return 0.5 * (ind.exists ? 1 : 0) + 0.5 * (ind.exists && ind.final_placement ? 1 : 0);
}

/// Convex combination of named format heads. Weights must be non-negative
/// and sum to at most 1; every weighted name must be present among the
/// scores. Result clipped to [0,1].
inline double format_aggregate(const std::map<std::string, double>& head_scores,
                               const std::map<std::string, double>& lambdas) {
    double sum = 0.0, total_weight = 0.0;
    for (const auto& [name, lambda] : lambdas) {
        if (lambda < 0) throw std::invalid_argument("format weight '" + name + "' is negative");
        total_weight += lambda;
        const auto it = head_scores.find(name);
        if (it == head_scores.end())
            throw std::invalid_argument("format weight names unknown head '" + name + "'");
        sum += lambda * it->second;
    }
    if (total_weight > 1.0 + 1e-12)
        throw std::invalid_argument("format weights must sum to at most 1");
    return std::clamp(sum, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Market-grounded outcome

/// Shaping parameters for scoring a decision against realized excess
/// return. Excess-return units throughout (log asset return minus log
/// benchmark return over the evaluation horizon).
struct OutcomeParams {
    double delta = 0.005;   // neutral band where HOLD is rewarded
    double u = 0.05;        // saturation scale for the move magnitude
    double kappa = 0.001;   // per-trade cost on any non-HOLD call
    double b = 1.0;         // base reward
    double gamma = 1.5;     // wrong-direction penalty multiplier
    double tau1 = 0.01;     // intensity threshold: |e| above this warrants action
    double tau2 = 0.03;     // intensity threshold: |e| above this warrants strong action

    void validate() const {
        if (delta < 0 || u <= delta) throw std::invalid_argument("need 0 <= delta < u");
        if (kappa < 0) throw std::invalid_argument("kappa must be >= 0");
        if (b <= 0) throw std::invalid_argument("b must be > 0");
        if (gamma <= 0) throw std::invalid_argument("gamma must be > 0");
        if (tau1 <= 0 || tau2 <= tau1) throw std::invalid_argument("need 0 < tau1 < tau2");
    }
};

/// Signed intensity of an action: -2 (strong sell) through +2 (strong buy).
inline int trade_intensity(TradeAction action) { return static_cast<int>(ordinal(action)) - 2; }

/// Outcome reward for one decision given realized excess return e. HOLD
/// earns the base reward decaying across the neutral band and a scaled
/// penalty outside it; directional calls earn a magnitude- and intensity-
/// calibrated fraction of b minus the trade cost when right, and a
/// gamma-scaled saturating penalty minus the cost when wrong. A directional
/// call on exactly zero excess return pays only the trade cost (the shared
/// limit of both branches). Result clipped to [-gamma b, b].
inline double market_outcome_reward(TradeAction action, double excess,
                                    const OutcomeParams& params = {}) {
    params.validate();
    const int s = trade_intensity(action);
    const double abs_e = std::abs(excess);
    const double m = std::min(1.0, abs_e / params.u);
    const int intensity = (abs_e > params.tau1 ? 1 : 0) + (abs_e > params.tau2 ? 1 : 0);

    double reward;
    if (s == 0) {
        if (abs_e <= params.delta)
            reward = params.delta == 0 ? params.b : params.b * (1.0 - abs_e / params.delta);
        else
            reward = -params.b * params.gamma * (abs_e - params.delta) / (params.u - params.delta);
    } else if (s * excess > 0) {
        reward = params.b * (1.0 - std::abs(std::abs(s) - intensity) / 2.0) * m - params.kappa;
    } else if (s * excess < 0) {
        reward = -params.b * params.gamma * m - params.kappa;
    } else {
        reward = -params.kappa;
    }
    return std::clamp(reward, -params.gamma * params.b, params.b);
}

}  // namespace tradelab
