// Acceptance gate: one check per release criterion, run as a plain binary so
// the pass/fail ledger reads top to bottom. Exit code is the failure count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "naive_labeler.hpp"
#include "tradelab/backtest.hpp"
#include "tradelab/labeling.hpp"
#include "tradelab/policy_math.hpp"
#include "tradelab/rewards.hpp"
#include "tradelab/thesis.hpp"

using namespace tradelab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

Date advance(Date d) {
    ++d.day;
    if (!is_valid_date(d)) {
        d.day = 1;
        ++d.month;
        if (d.month > 12) {
            d.month = 1;
            ++d.year;
        }
    }
    return d;
}

PriceSeries random_walk(std::uint64_t seed, std::size_t n, double drift = 0.0,
                        double vol = 0.02) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> step(drift, vol);
    PriceSeries series;
    series.symbol = "WALK";
    Date date{2020, 1, 1};
    double close = 100.0;
    for (std::size_t i = 0; i < n; ++i) {
        Bar bar;
        bar.date = date;
        bar.open = bar.high = bar.low = bar.close = close;
        bar.volume = 1'000'000;
        series.bars.push_back(bar);
        close *= std::exp(step(gen));
        date = advance(date);
    }
    return series;
}

// --- criterion 1 -----------------------------------------------------------

bool label_distribution_identity() {
    const auto start = std::chrono::steady_clock::now();
    const PriceSeries series = random_walk(9001, 500);
    const LabelResult result = generate_labels(series);
    const auto elapsed = std::chrono::duration<double>(
        std::chrono::steady_clock::now() - start).count();

    std::vector<double> defined;
    for (double v : result.signal)
        if (is_defined(v)) defined.push_back(v);
    if (defined.size() < 300) return false;

    std::sort(defined.begin(), defined.end());
    for (std::size_t i = 1; i < defined.size(); ++i)
        if (defined[i] == defined[i - 1]) return false;   // ties would break the identity

    const auto counts = result.counts();
    const double total = static_cast<double>(result.defined_count());
    const double target[] = {0.03, 0.12, 0.38, 0.32, 0.15};
    for (std::size_t i = 0; i < kNumActions; ++i)
        if (std::abs(counts[i] / total - target[i]) > 0.02) return false;
    return elapsed < 1.0;
}

// --- criterion 2 -----------------------------------------------------------

bool oracle_equivalence() {
    const SignalConfig config;
    for (int rep = 0; rep < 10; ++rep) {
        const std::uint64_t seed = 7000 + static_cast<std::uint64_t>(rep) * 131;
        const std::size_t n = 120 + static_cast<std::size_t>(rep) * 17;
        const PriceSeries series = random_walk(seed, n, rep % 3 == 0 ? 0.001 : 0.0);
        const LabelResult mine = generate_labels(series, config);
        const auto theirs = naive::label_series(
            series.closes(), config.horizons, config.weights, config.ema_span,
            config.vol_window,
            {config.quantiles[0], config.quantiles[1], config.quantiles[2],
             config.quantiles[3]});
        for (std::size_t t = 0; t < n; ++t) {
            const bool mine_def = is_defined(mine.signal[t]);
            const bool theirs_def = !std::isnan(theirs[t].signal);
            if (mine_def != theirs_def) return false;
            if (!mine_def) continue;
            if (std::abs(mine.signal[t] - theirs[t].signal) > 1e-9) return false;
            if (!mine.labels[t] || !theirs[t].cls) return false;
            if (ordinal(*mine.labels[t]) != *theirs[t].cls) return false;
        }
    }
    return true;
}

// --- criterion 3 -----------------------------------------------------------

bool matrix_exactness() {
    const double expected[5][5] = {
        {1.00, 0.75, -1.25, -2.00, -2.25},   // strong sell prediction
        {0.75, 1.00, -0.75, -1.50, -2.00},   // sell
        {-1.50, -1.00, 1.00, -1.00, -1.50},  // hold
        {-1.75, -1.25, -0.75, 1.00, 0.75},   // buy
        {-2.00, -1.50, -1.25, 0.75, 1.00},   // strong buy
    };
    const DecisionMatrix m = DecisionMatrix::standard();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j)
            if (m.values[i][j] != expected[i][j]) return false;
    return decision_reward(std::nullopt, TradeAction::Hold) == -1.5 &&
           decision_reward(std::nullopt, TradeAction::StrongBuy) == -1.5;
}

// --- criterion 4 -----------------------------------------------------------

bool reward_codomains() {
    std::mt19937_64 gen(81);
    auto rand_int = [&](int lo, int hi) {
        return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    };
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };

    for (int rep = 0; rep < 10'000; ++rep) {
        ThesisDocument doc;
        const int n_sections = rand_int(0, 9);
        for (int i = 0; i < n_sections; ++i) {
            Section s;
            s.tag = "analysis";
            s.is_conclusion = i == n_sections - 1 && gen() % 4 == 0;
            s.word_count = rand_int(0, 300);
            s.has_headers = gen() % 2 == 0;
            s.has_bold = gen() % 2 == 0;
            s.has_tables = gen() % 2 == 0;
            const int n_bullets = rand_int(0, 8);
            for (int k = 0; k < n_bullets; ++k) {
                Bullet b;
                b.opinion_words = rand_int(0, 160);
                if (gen() % 2 == 0) b.quotes.push_back("q");
                if (gen() % 2 == 0) b.sources.push_back("s");
                b.paren_pairs = rand_int(0, 3);
                b.starts_with_quote = gen() % 4 == 0;
                for (int w = rand_int(0, 180); w > 0; --w) b.full_text += "w ";
                s.bullets.push_back(std::move(b));
            }
            s.has_bullets = !s.bullets.empty();
            doc.sections.push_back(std::move(s));
        }

        ThinkStructure think;
        const bool structured = gen() % 2 == 0;
        const int n_think = rand_int(0, 9);
        for (int i = 0; i < n_think; ++i) {
            ThinkSection s;
            s.word_count = rand_int(0, 400);
            s.newline_count = rand_int(0, 50);
            s.is_structured = structured;
            think.sections.push_back(s);
        }
        think.has_rule = structured && gen() % 2 == 0;
        think.title_present =
            !think.sections.empty() && think.sections.front().word_count <= 32;

        if (!in_unit(structure_reward(doc))) return false;
        if (!in_unit(evidence_reward(doc))) return false;

        std::vector<int> cat_words;
        for (const Section& s : doc.sections) cat_words.push_back(s.word_count);
        if (!in_unit(content_presence_score(rand_int(0, 1200), cat_words))) return false;
        if (!in_unit(sectioned_think_score(think))) return false;
        if (!in_unit(citation_discipline_score(doc.sections))) return false;
        if (!in_unit(think_layout_score(think, Strictness::strict))) return false;
        if (!in_unit(think_layout_score(think, Strictness::easy))) return false;
        if (!in_unit(category_thesis_score(doc.sections, Strictness::strict))) return false;
        if (!in_unit(category_thesis_score(doc.sections, Strictness::easy))) return false;
        for (const Section& s : doc.sections)
            for (const Bullet& b : s.bullets)
                if (!in_unit(citation_pattern_score(b))) return false;

        // Harmonic component never exceeds the arithmetic mean of the same
        // floored bullet scores.
        for (const Section& s : doc.sections) {
            if (s.bullets.empty()) continue;
            double arith = 0.0, inv = 0.0;
            for (const Bullet& b : s.bullets) {
                const double v = std::max(bullet_evidence_score(b), 0.01);
                arith += v;
                inv += 1.0 / v;
            }
            const double k = static_cast<double>(s.bullets.size());
            if (k / inv > arith / k + 1e-12) return false;
        }
    }

    // Continuity at the opinion-length joints: both branch expressions meet
    // the plateau value.
    const double below_at_15 = 15.0 / 15.0;
    const double above_at_90 = std::max(0.5, 1.0 - 0.02 * (90.0 - 90.0));
    if (std::abs(below_at_15 - 1.0) >= 1e-12) return false;
    if (std::abs(above_at_90 - 1.0) >= 1e-12) return false;
    Bullet joint;
    joint.quotes.push_back("q");
    joint.sources.push_back("s");
    joint.opinion_words = 15;
    if (std::abs(opinion_score(joint) - 1.0) >= 1e-12) return false;
    joint.opinion_words = 90;
    if (std::abs(opinion_score(joint) - 1.0) >= 1e-12) return false;
    return true;
}

// --- criterion 5 -----------------------------------------------------------

bool outcome_boundaries() {
    const OutcomeParams p;
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
    if (market_outcome_reward(TradeAction::Hold, 0.0, p) != p.b) return false;
    if (!near(market_outcome_reward(TradeAction::Hold, p.delta, p), 0.0)) return false;
    if (!near(market_outcome_reward(TradeAction::Hold, -p.delta, p), 0.0)) return false;
    for (double e : {p.u, 0.08, 0.2})
        if (!near(market_outcome_reward(TradeAction::Buy, -e, p), -p.gamma * p.b) ||
            !near(market_outcome_reward(TradeAction::StrongSell, e, p), -p.gamma * p.b))
            return false;
    for (double e : {p.u, 0.09, 0.5})
        if (!near(market_outcome_reward(TradeAction::StrongBuy, e, p), p.b - p.kappa) ||
            !near(market_outcome_reward(TradeAction::StrongSell, -e, p), p.b - p.kappa))
            return false;
    return true;
}

// --- criterion 6 -----------------------------------------------------------

bool normalization_identity() {
    std::mt19937_64 gen(5150);
    std::uniform_real_distribution<double> r_dist(-2.0, 2.0);
    std::uniform_real_distribution<double> ratio_dist(0.05, 3.0);
    int groups_checked = 0;
    while (groups_checked < 1000) {
        const std::size_t n = 2 + gen() % 14;
        std::vector<double> rewards(n);
        for (double& r : rewards) r = r_dist(gen);
        double mean = 0.0;
        for (double r : rewards) mean += r;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double r : rewards) var += (r - mean) * (r - mean);
        if (std::sqrt(var / static_cast<double>(n)) <= 0.0) continue;
        ++groups_checked;

        const auto a = group_advantages(rewards);
        double a_mean = 0.0;
        for (double v : a) a_mean += v;
        a_mean /= static_cast<double>(n);
        if (std::abs(a_mean) >= 1e-9) return false;
        double a_var = 0.0;
        for (double v : a) a_var += (v - a_mean) * (v - a_mean);
        if (std::abs(std::sqrt(a_var / static_cast<double>(n)) - 1.0) >= 1e-9) return false;

        std::vector<double> shifted = rewards, scaled = rewards;
        for (double& v : shifted) v += 7.25;
        for (double& v : scaled) v *= 3.5;
        const auto a_shift = group_advantages(shifted);
        const auto a_scale = group_advantages(scaled);
        for (std::size_t i = 0; i < n; ++i) {
            if (std::abs(a_shift[i] - a[i]) >= 1e-9) return false;
            if (std::abs(a_scale[i] - a[i]) >= 1e-9) return false;
        }

        const double rho = ratio_dist(gen);
        for (double adv : a)
            if (clipped_surrogate(rho, adv, 0.2) > rho * adv + 1e-12) return false;
    }
    return true;
}

// --- criterion 7 -----------------------------------------------------------

bool metrics_formulas() {
    auto near = [](double a, double b, double tol) { return std::abs(a - b) < tol; };
    if (!near(cumulative_return({0.1, 0.1}), 0.21, 1e-12)) return false;
    if (!near(max_drawdown({100.0, 50.0, 75.0}), 0.5, 1e-12)) return false;

    Series alternating;
    for (int i = 0; i < 30; ++i) alternating.push_back(i % 2 == 0 ? 0.01 : -0.01);
    const auto flat = sharpe(alternating, 0.0);
    if (!flat || !near(*flat, 0.0, 1e-12)) return false;

    std::mt19937_64 gen(4321);
    std::uniform_real_distribution<double> r_dist(-0.03, 0.035);
    for (int rep = 0; rep < 50; ++rep) {
        Series rets(40);
        for (double& r : rets) r = r_dist(gen);
        Series scaled = rets;
        for (double& r : scaled) r *= 1.75;
        const auto a = sharpe(rets, 0.0);
        const auto b = sharpe(scaled, 0.0);
        if (!a || !b || !near(*a, *b, 1e-9)) return false;

        double equity = 1.0;
        for (double r : rets) equity *= 1.0 + r;
        if (!near(cumulative_return(rets), equity - 1.0, 1e-12)) return false;
    }
    return true;
}

// --- criterion 8 -----------------------------------------------------------

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool trace_fidelity_one(const fs::path& path, std::size_t expected_analysis) {
    const std::string text = slurp(path);
    if (text.empty()) return false;
    const ThesisDocument doc = parse_completion(text, ParseMode::r1);
    if (doc.analysis_sections().size() != expected_analysis) return false;
    std::size_t conclusions = 0;
    for (const Section& s : doc.sections)
        if (s.is_conclusion) ++conclusions;
    if (conclusions != 1) return false;
    if (!doc.decision || *doc.decision != TradeAction::Buy) return false;
    if (!doc.decision_terminal) return false;
    if (!doc.think || doc.think->empty()) return false;
    for (const Section* s : doc.analysis_sections()) {
        if (s->bullets.empty()) return false;
        for (const Bullet& b : s->bullets)
            if (b.quotes.empty() || b.sources.empty()) return false;
    }
    return true;
}

bool trace_fidelity() {
    const fs::path dir = TRADELAB_FIXTURES;
    return trace_fidelity_one(dir / "msft_trace.txt", 7) &&
           trace_fidelity_one(dir / "avgo_trace.txt", 8);
}

// --- criterion 9 -----------------------------------------------------------

bool causality_mutation() {
    std::mt19937_64 gen(606);
    std::uniform_real_distribution<double> step(-0.025, 0.027);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 30 + gen() % 40;
        PriceSeries base = random_walk(1000 + rep, n);

        DecisionStream decisions;
        std::size_t idx = 1 + gen() % 5;
        while (idx < n - 2) {
            decisions.push_back({base.bars[idx].date, kAllActions[gen() % kNumActions]});
            idx += 1 + gen() % 8;
        }
        if (decisions.empty()) continue;

        SimulationOptions options;
        options.max_hold = 1 + static_cast<int>(gen() % 8);
        const SimulationResult before = simulate(base, decisions, options);

        // Perturb every price strictly after a random pivot.
        const std::size_t pivot = 1 + gen() % (n - 2);
        PriceSeries bumped = base;
        for (std::size_t t = pivot + 1; t < n; ++t) {
            const double f = 1.0 + step(gen);
            bumped.bars[t].open *= f;
            bumped.bars[t].high *= f;
            bumped.bars[t].low *= f;
            bumped.bars[t].close *= f;
        }
        const SimulationResult after = simulate(bumped, decisions, options);
        for (std::size_t t = 0; t <= pivot; ++t) {
            if (after.positions[t] != before.positions[t]) return false;
            if (after.returns[t] != before.returns[t]) return false;
            if (after.equity.values[t] != before.equity.values[t]) return false;
        }
    }
    return true;
}

// --- criterion 10 ----------------------------------------------------------

bool pipeline_determinism() {
    const fs::path dir = fs::temp_directory_path() / "tradelab_acceptance";
    fs::create_directories(dir);

    const PriceSeries series = random_walk(31337, 80);
    const fs::path prices = dir / "prices.csv";
    {
        std::ofstream out(prices);
        out << "date,open,high,low,close,volume\n";
        for (const Bar& b : series.bars) {
            char row[160];
            std::snprintf(row, sizeof row, "%s,%.6f,%.6f,%.6f,%.6f,%.0f\n",
                          format_date(b.date).c_str(), b.open, b.high * 1.01, b.low * 0.99,
                          b.close, b.volume);
            out << row;
        }
    }

    const fs::path theses = dir / "theses.jsonl";
    {
        const char* const decisions[] = {"[[[BUY]]]", "[[[SELL]]]", "[[[STRONG_BUY]]]",
                                         "[[[HOLD]]]"};
        std::ofstream out(theses);
        for (int i = 0; i < 4; ++i) {
            const Bar& bar = series.bars[static_cast<std::size_t>(30 + i * 9)];
            json record;
            record["date"] = format_date(bar.date);
            record["completion"] =
                std::string("<think>weighing the tape</think>\n<analysis>\n- Trend holds "
                            "*\"steady bid\"* (`desk note`)\n</analysis>\n<conclusion>act "
                            "accordingly</conclusion>\nDECISION: ") +
                decisions[i];
            out << record.dump() << "\n";
        }
    }

    auto run_once = [&](const fs::path& out) {
        const std::string cmd = std::string(TRADELAB_CLI) + " pipeline --prices " +
                                prices.string() + " --theses " + theses.string() +
                                " --seed 7 --out " + out.string() + " > " +
                                (out.string() + ".log") + " 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    const fs::path r1 = dir / "report_a.json";
    const fs::path r2 = dir / "report_b.json";
    const fs::path r3 = dir / "report_c.json";
    if (!run_once(r1) || !run_once(r2) || !run_once(r3)) return false;
    const std::string a = slurp(r1);
    if (a.empty() || a.find("\"backtest\"") == std::string::npos) return false;
    return a == slurp(r2) && a == slurp(r3);
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    int failures = 0;
    auto criterion = [&](int n, const char* what, bool pass) {
        std::printf("criterion %2d [%s]: %s\n", n, pass ? "PASS" : "FAIL", what);
        std::fflush(stdout);
        if (!pass) ++failures;
    };

    criterion(1, "label distribution identity on a seeded walk", label_distribution_identity());
    criterion(2, "naive labeler oracle equivalence", oracle_equivalence());
    criterion(3, "decision matrix exactness", matrix_exactness());
    criterion(4, "reward head codomains and joint continuity", reward_codomains());
    criterion(5, "outcome reward boundary suite", outcome_boundaries());
    criterion(6, "advantage normalization identity", normalization_identity());
    criterion(7, "metrics formula suite", metrics_formulas());
    criterion(8, "parser fidelity on transcribed traces", trace_fidelity());
    criterion(9, "causality under future-price mutation", causality_mutation());

    bool deterministic = pipeline_determinism();
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    deterministic = deterministic && elapsed < 60.0;
    criterion(10, "end-to-end pipeline determinism", deterministic);

    std::printf("%d/10 criteria passed (%.2fs)\n", 10 - failures, elapsed);
    return failures;
}
