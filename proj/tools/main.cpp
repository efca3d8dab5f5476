// Command-line surface: file-based, seeded, reproducible runs over the
// library. Exit codes: 0 success, 1 finished with per-record errors,
// 2 invalid invocation or input.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tradelab/backtest.hpp"
#include "tradelab/corpus.hpp"
#include "tradelab/labeling.hpp"
#include "tradelab/market_data.hpp"
#include "tradelab/policy_math.hpp"
#include "tradelab/rewards.hpp"
#include "tradelab/thesis.hpp"

using nlohmann::json;
namespace tl = tradelab;

namespace {

constexpr int kSchemaVersion = 1;
constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kBadInput = 2;

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

/// Resolved-config echo; goes to stderr so data outputs stay clean.
void echo_config(const std::string& command, const json& config) {
    json meta{{"schema_version", kSchemaVersion}, {"command", command}, {"config", config}};
    std::cerr << meta.dump() << "\n";
}

/// Output sink: a file when a path is given, stdout otherwise.
class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw std::runtime_error("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

std::map<std::string, double> parse_kv_doubles(const std::vector<std::string>& pairs) {
    std::map<std::string, double> out;
    for (const std::string& p : pairs) {
        const std::size_t eq = p.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::invalid_argument("expected key=value, got '" + p + "'");
        out[p.substr(0, eq)] = std::stod(p.substr(eq + 1));
    }
    return out;
}

tl::OutcomeParams outcome_params_from(const std::vector<std::string>& pairs) {
    tl::OutcomeParams params;
    for (const auto& [key, value] : parse_kv_doubles(pairs)) {
        if (key == "delta") params.delta = value;
        else if (key == "u") params.u = value;
        else if (key == "kappa") params.kappa = value;
        else if (key == "b") params.b = value;
        else if (key == "gamma") params.gamma = value;
        else if (key == "tau1") params.tau1 = value;
        else if (key == "tau2") params.tau2 = value;
        else throw std::invalid_argument("unknown outcome parameter: " + key);
    }
    params.validate();
    return params;
}

json outcome_params_json(const tl::OutcomeParams& p) {
    return json{{"delta", p.delta}, {"u", p.u},       {"kappa", p.kappa}, {"b", p.b},
                {"gamma", p.gamma}, {"tau1", p.tau1}, {"tau2", p.tau2}};
}

tl::DecisionMatrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    tl::DecisionMatrix matrix;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        if (row >= tl::kNumActions) throw std::runtime_error(path + ": more than 5 matrix rows");
        std::stringstream ss(line);
        std::string cell;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            if (col >= tl::kNumActions)
                throw std::runtime_error(path + ": more than 5 columns in row " +
                                         std::to_string(row + 1));
            matrix.values[row][col] = std::stod(cell);
            ++col;
        }
        if (col != tl::kNumActions)
            throw std::runtime_error(path + ": row " + std::to_string(row + 1) +
                                     " has " + std::to_string(col) + " columns, want 5");
        ++row;
    }
    if (row != tl::kNumActions) throw std::runtime_error(path + ": want 5 matrix rows");
    matrix.validate();
    return matrix;
}

tl::DecisionStream load_decisions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open decisions CSV: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": no rows");
    tl::DecisionStream decisions;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": expected date,action");
        tl::Decision d;
        d.date = tl::parse_date(line.substr(0, comma));
        const auto action = tl::parse_action(line.substr(comma + 1));
        if (!action)
            throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                                     ": unknown action '" + line.substr(comma + 1) + "'");
        d.action = *action;
        decisions.push_back(d);
    }
    return decisions;
}

/// One line per record; blank lines skipped. The callback may throw; the
/// error is emitted as a JSON object on the same output and the run
/// continues. Returns true when every line succeeded.
template <typename Fn>
bool for_each_jsonl(const std::string& path, std::ostream& out, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input: " + path);
    std::string line;
    std::size_t lineno = 0;
    bool clean = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        try {
            fn(json::parse(line), lineno);
        } catch (const std::exception& e) {
            out << json{{"line", lineno}, {"error", e.what()}}.dump() << "\n";
            clean = false;
        }
    }
    return clean;
}

// -----------------------------------------------------------------------
// label

struct LabelArgs {
    std::string prices, out;
    tl::SignalConfig config;
};

json signal_config_json(const tl::SignalConfig& c) {
    return json{{"ema_span", c.ema_span},     {"horizons", c.horizons},
                {"weights", c.weights},       {"vol_window", c.vol_window},
                {"quantiles", c.quantiles},   {"trailing", c.trailing}};
}

int run_label(const LabelArgs& args) {
    echo_config("label", json{{"prices", args.prices},
                              {"out", args.out},
                              {"signal", signal_config_json(args.config)}});
    try {
        const tl::PriceSeries series = tl::load_price_csv(args.prices);
        const tl::LabelResult result = tl::generate_labels(series, args.config);
        Output output(args.out);
        std::ostream& os = output.stream();
        os << "date,weighted_signal,label\n";
        for (std::size_t t = 0; t < series.bars.size(); ++t) {
            os << tl::format_date(series.bars[t].date) << ",";
            if (result.labels[t]) {
                os << fmt_double(result.signal[t]) << ","
                   << tl::action_name(*result.labels[t]);
            } else {
                os << ",";
            }
            os << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "label: " << e.what() << "\n";
        return kBadInput;
    }
    return kOk;
}

// -----------------------------------------------------------------------
// indicators

struct IndicatorArgs {
    std::string prices, out;
    std::vector<std::string> kinds;
    std::vector<std::string> params;
};

int run_indicators(const IndicatorArgs& args) {
    echo_config("indicators",
                json{{"prices", args.prices}, {"out", args.out}, {"kinds", args.kinds},
                     {"params", args.params}});
    try {
        const tl::PriceSeries series = tl::load_price_csv(args.prices);
        tl::IndicatorParams params;
        for (const auto& [k, v] : parse_kv_doubles(args.params)) params[k] = v;
        std::vector<tl::IndicatorSeries> columns;
        for (const std::string& kind : args.kinds)
            columns.push_back(tl::compute_indicator(series, kind, params));
        Output output(args.out);
        std::ostream& os = output.stream();
        os << "date";
        for (const auto& c : columns) os << "," << c.kind;
        os << "\n";
        for (std::size_t t = 0; t < series.bars.size(); ++t) {
            os << tl::format_date(series.bars[t].date);
            for (const auto& c : columns) {
                os << ",";
                if (tl::is_defined(c.values[t])) os << fmt_double(c.values[t]);
            }
            os << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "indicators: " << e.what() << "\n";
        return kBadInput;
    }
    return kOk;
}

// -----------------------------------------------------------------------
// score

struct ScoreArgs {
    std::string theses, out, mode = "r1", matrix_path;
    std::vector<double> weights{1.0, 1.0, 1.0};
    std::vector<std::string> format_weights;
    std::vector<std::string> outcome_params;
};

std::map<std::string, double> resolve_format_weights(const std::vector<std::string>& overrides) {
    std::map<std::string, double> weights{
        {"content_presence", 0.125},      {"sectioned_think", 0.125},
        {"citation_discipline", 0.125},   {"think_layout_strict", 0.125},
        {"think_layout_easy", 0.125},     {"category_thesis_strict", 0.125},
        {"category_thesis_easy", 0.125},  {"decision_placement", 0.125}};
    for (const auto& [k, v] : parse_kv_doubles(overrides)) {
        if (!weights.count(k)) throw std::invalid_argument("unknown format head: " + k);
        weights[k] = v;
    }
    return weights;
}

json score_record_r1(const tl::ThesisDocument& doc, const json& record,
                     const tl::RewardWeights& weights, const tl::DecisionMatrix& matrix) {
    json heads{{"structure", tl::structure_reward(doc)},
               {"evidence", tl::evidence_reward(doc)}};
    double aggregate = weights.lambda_struct * heads["structure"].get<double>() +
                       weights.lambda_evid * heads["evidence"].get<double>();
    if (record.contains("truth_label")) {
        const auto truth = tl::parse_action(record.at("truth_label").get<std::string>());
        if (!truth)
            throw std::invalid_argument("unknown truth_label '" +
                                        record.at("truth_label").get<std::string>() + "'");
        heads["decision"] = tl::decision_reward(doc.decision, *truth, matrix);
        aggregate += weights.lambda_dec * heads["decision"].get<double>();
    }
    return json{{"heads", heads}, {"aggregate", aggregate}};
}

json score_record_r0(const tl::ThesisDocument& doc, const std::string& completion,
                     const std::map<std::string, double>& head_weights) {
    const tl::ThinkStructure think =
        doc.think ? tl::split_think_sections(*doc.think) : tl::ThinkStructure{};
    std::vector<int> category_words;
    for (const tl::Section& s : doc.sections) category_words.push_back(s.word_count);

    std::map<std::string, double> heads{
        {"content_presence",
         tl::content_presence_score(doc.think ? tl::count_words(*doc.think) : 0, category_words)},
        {"sectioned_think", tl::sectioned_think_score(think)},
        {"citation_discipline", tl::citation_discipline_score(doc.sections)},
        {"think_layout_strict", tl::think_layout_score(think, tl::Strictness::strict)},
        {"think_layout_easy", tl::think_layout_score(think, tl::Strictness::easy)},
        {"category_thesis_strict", tl::category_thesis_score(doc.sections, tl::Strictness::strict)},
        {"category_thesis_easy", tl::category_thesis_score(doc.sections, tl::Strictness::easy)},
        {"decision_placement", tl::decision_placement_score(completion)}};
    return json{{"heads", heads}, {"aggregate", tl::format_aggregate(heads, head_weights)}};
}

int run_score(const ScoreArgs& args) {
    try {
        if (args.weights.size() != 3)
            throw std::invalid_argument("--weights wants three values: struct,evid,dec");
        tl::RewardWeights weights{args.weights[0], args.weights[1], args.weights[2]};
        weights.validate();
        const tl::DecisionMatrix matrix = args.matrix_path.empty()
                                              ? tl::DecisionMatrix::standard()
                                              : load_matrix_csv(args.matrix_path);
        matrix.validate();
        const auto format_weights = resolve_format_weights(args.format_weights);
        const tl::OutcomeParams outcome = outcome_params_from(args.outcome_params);
        const tl::ParseMode mode = args.mode == "r0" ? tl::ParseMode::r0 : tl::ParseMode::r1;

        echo_config("score", json{{"theses", args.theses},
                                  {"out", args.out},
                                  {"mode", args.mode},
                                  {"weights", args.weights},
                                  {"format_weights", format_weights},
                                  {"matrix", args.matrix_path},
                                  {"outcome", outcome_params_json(outcome)}});

        Output output(args.out);
        std::ostream& os = output.stream();
        const bool clean = for_each_jsonl(args.theses, os, [&](const json& record, std::size_t) {
            const std::string completion = record.at("completion").get<std::string>();
            const tl::ThesisDocument doc = tl::parse_completion(completion, mode);
            json result = mode == tl::ParseMode::r0
                              ? score_record_r0(doc, completion, format_weights)
                              : score_record_r1(doc, record, weights, matrix);
            if (record.contains("id")) result["id"] = record.at("id");
            result["decision"] =
                doc.decision ? json(std::string(tl::action_name(*doc.decision))) : json();
            result["decision_terminal"] = doc.decision_terminal;
            if (record.contains("excess_return") && doc.decision) {
                result["outcome"] = tl::market_outcome_reward(
                    *doc.decision, record.at("excess_return").get<double>(), outcome);
            }
            os << result.dump() << "\n";
        });
        return clean ? kOk : kPartial;
    } catch (const std::exception& e) {
        std::cerr << "score: " << e.what() << "\n";
        return kBadInput;
    }
}

// -----------------------------------------------------------------------
// advantages

struct AdvantageArgs {
    std::string groups, out;
    double epsilon = 0.2;
    double beta = 0.0;
};

int run_advantages(const AdvantageArgs& args) {
    echo_config("advantages", json{{"groups", args.groups},
                                   {"out", args.out},
                                   {"epsilon", args.epsilon},
                                   {"beta", args.beta}});
    try {
        Output output(args.out);
        std::ostream& os = output.stream();
        const bool clean = for_each_jsonl(args.groups, os, [&](const json& record, std::size_t) {
            const auto rewards = record.at("rewards").get<std::vector<double>>();
            json result{{"advantages", tl::group_advantages(rewards)}};
            if (record.contains("token_ratios")) {
                tl::RolloutGroup group;
                group.rewards = rewards;
                group.token_ratios =
                    record.at("token_ratios").get<std::vector<std::vector<double>>>();
                if (record.contains("kl_estimate"))
                    group.kl_estimate = record.at("kl_estimate").get<double>();
                result["objective"] = tl::grpo_objective(group, args.epsilon, args.beta);
            }
            if (record.contains("id")) result["id"] = record.at("id");
            os << result.dump() << "\n";
        });
        return clean ? kOk : kPartial;
    } catch (const std::exception& e) {
        std::cerr << "advantages: " << e.what() << "\n";
        return kBadInput;
    }
}

// -----------------------------------------------------------------------
// backtest

struct BacktestArgs {
    std::string prices, decisions, out, equity_out;
    std::vector<double> weight_map{-1.0, -0.5, 0.0, 0.5, 1.0};
    int max_hold = 5;
    double cost_bps = 0.0;
    double rf_annual = 0.04;
    int periods_per_year = 252;
};

json metrics_json(const tl::MetricsReport& m) {
    return json{{"cumulative_return", m.cumulative},
                {"sharpe_annual", m.sharpe_annual ? json(*m.sharpe_annual) : json()},
                {"hit_rate", m.hit ? json(*m.hit) : json()},
                {"max_drawdown", m.mdd},
                {"n_decisions", m.n_decisions},
                {"n_directional", m.n_directional}};
}

int run_backtest(const BacktestArgs& args) {
    try {
        if (args.weight_map.size() != tl::kNumActions)
            throw std::invalid_argument("--weight-map wants five values");
        tl::SimulationOptions options;
        std::copy(args.weight_map.begin(), args.weight_map.end(), options.map.weights.begin());
        options.max_hold = args.max_hold;
        options.cost_bps = args.cost_bps;

        const json config{{"prices", args.prices},
                          {"decisions", args.decisions},
                          {"weight_map", args.weight_map},
                          {"max_hold", args.max_hold},
                          {"cost_bps", args.cost_bps},
                          {"rf_annual", args.rf_annual},
                          {"periods_per_year", args.periods_per_year}};
        echo_config("backtest", config);

        const tl::PriceSeries series = tl::load_price_csv(args.prices);
        const tl::DecisionStream decisions = load_decisions_csv(args.decisions);
        const tl::SimulationResult sim = tl::simulate(series, decisions, options);
        const tl::MetricsReport metrics =
            tl::compute_metrics(sim, args.rf_annual, args.periods_per_year);

        if (!args.equity_out.empty()) {
            std::ofstream eq(args.equity_out);
            if (!eq) throw std::runtime_error("cannot open equity output: " + args.equity_out);
            eq << "date,equity\n";
            for (std::size_t t = 0; t < sim.equity.values.size(); ++t)
                eq << tl::format_date(sim.equity.dates[t]) << ","
                   << fmt_double(sim.equity.values[t]) << "\n";
        }

        json report{{"schema_version", kSchemaVersion},
                    {"config", config},
                    {"metrics", metrics_json(metrics)}};
        Output output(args.out);
        output.stream() << report.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "backtest: " << e.what() << "\n";
        return kBadInput;
    }
    return kOk;
}

// -----------------------------------------------------------------------
// bucket-news

struct BucketArgs {
    std::string news, out, asof;
    std::uint64_t seed = 0;
};

json news_item_json(const tl::NewsItem& item) {
    return json{{"timestamp", item.timestamp},
                {"headline", item.headline},
                {"snippet", item.snippet},
                {"source", item.source}};
}

int run_bucket_news(const BucketArgs& args) {
    echo_config("bucket-news", json{{"news", args.news},
                                    {"out", args.out},
                                    {"asof", args.asof},
                                    {"seed", args.seed}});
    try {
        const tl::Date asof = tl::parse_date(args.asof);
        std::vector<tl::NewsItem> items;
        std::vector<std::string> record_errors;
        {
            std::ifstream in(args.news);
            if (!in) throw std::runtime_error("cannot open news file: " + args.news);
            std::string line;
            std::size_t lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.empty() || line == "\r") continue;
                try {
                    const json j = json::parse(line);
                    tl::NewsItem item;
                    item.timestamp = j.at("timestamp").get<std::string>();
                    item.headline = j.at("headline").get<std::string>();
                    item.snippet = j.value("snippet", "");
                    item.source = j.value("source", "");
                    if (item.headline.empty()) throw std::invalid_argument("empty headline");
                    items.push_back(std::move(item));
                } catch (const std::exception& e) {
                    record_errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
                }
            }
        }
        tl::BucketedNews buckets = tl::bucket_news(items, asof, args.seed);
        json out_json{{"asof", args.asof},
                      {"recent", json::array()},
                      {"mid", json::array()},
                      {"old", json::array()},
                      {"diagnostics", buckets.diagnostics},
                      {"record_errors", record_errors}};
        for (const auto& i : buckets.recent) out_json["recent"].push_back(news_item_json(i));
        for (const auto& i : buckets.mid) out_json["mid"].push_back(news_item_json(i));
        for (const auto& i : buckets.old) out_json["old"].push_back(news_item_json(i));
        Output output(args.out);
        output.stream() << out_json.dump(2) << "\n";
        return record_errors.empty() ? kOk : kPartial;
    } catch (const std::exception& e) {
        std::cerr << "bucket-news: " << e.what() << "\n";
        return kBadInput;
    }
}

// -----------------------------------------------------------------------
// assemble

struct AssembleArgs {
    std::string out;
    std::map<std::string, std::string> block_paths;   // modality -> file
    int variations = 20;
    std::uint64_t seed = 0;
};

int run_assemble(const AssembleArgs& args) {
    echo_config("assemble", json{{"out", args.out},
                                 {"blocks", args.block_paths},
                                 {"variations", args.variations},
                                 {"seed", args.seed}});
    try {
        tl::ModalitySnapshot snapshot;
        tl::AssemblyConfig config;
        config.enabled.clear();
        config.variations = args.variations;
        config.seed = args.seed;
        for (const auto& [name, path] : args.block_paths) {
            if (path.empty()) continue;
            std::ifstream in(path);
            if (!in) throw std::runtime_error("cannot open block file: " + path);
            std::stringstream ss;
            ss << in.rdbuf();
            std::string text = ss.str();
            while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
            if (name == "market") snapshot.market = text;
            else if (name == "news") snapshot.news = text;
            else if (name == "sentiment") snapshot.sentiment = text;
            else if (name == "fundamentals") snapshot.fundamentals = text;
            else if (name == "macro") snapshot.macro = text;
            config.enabled.push_back(name);
        }
        const std::vector<std::string> variants = tl::assemble_prompt(snapshot, config);
        Output output(args.out);
        std::ostream& os = output.stream();
        for (std::size_t i = 0; i < variants.size(); ++i)
            os << json{{"index", i}, {"prompt", variants[i]}}.dump() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "assemble: " << e.what() << "\n";
        return kBadInput;
    }
    return kOk;
}

// -----------------------------------------------------------------------
// pipeline

struct PipelineArgs {
    std::string prices, theses, out, mode = "r1";
    std::uint64_t seed = 0;
    tl::SignalConfig signal;
    std::vector<double> weight_map{-1.0, -0.5, 0.0, 0.5, 1.0};
    int max_hold = 5;
    double rf_annual = 0.04;
    int periods_per_year = 252;
};

int run_pipeline(const PipelineArgs& args) {
    try {
        const json config{{"prices", args.prices},
                          {"theses", args.theses},
                          {"mode", args.mode},
                          {"seed", args.seed},
                          {"signal", signal_config_json(args.signal)},
                          {"weight_map", args.weight_map},
                          {"max_hold", args.max_hold},
                          {"rf_annual", args.rf_annual},
                          {"periods_per_year", args.periods_per_year}};
        echo_config("pipeline", config);

        const tl::PriceSeries series = tl::load_price_csv(args.prices);
        const tl::LabelResult labels = tl::generate_labels(series, args.signal);
        const tl::ParseMode mode = args.mode == "r0" ? tl::ParseMode::r0 : tl::ParseMode::r1;

        // Labeling summary.
        json label_section;
        {
            const auto counts = labels.counts();
            const double total = static_cast<double>(labels.defined_count());
            json dist;
            for (tl::TradeAction a : tl::kAllActions) {
                const std::size_t c = counts[tl::ordinal(a)];
                dist[std::string(tl::action_name(a))] =
                    json{{"count", c}, {"fraction", total > 0 ? c / total : 0.0}};
            }
            label_section = json{{"defined_dates", labels.defined_count()},
                                 {"distribution", dist}};
            if (labels.has_signal) label_section["thresholds"] = labels.thresholds;
        }

        // Score every thesis against the generated label at its date.
        std::ifstream in(args.theses);
        if (!in) throw std::runtime_error("cannot open theses: " + args.theses);
        std::string line;
        std::size_t lineno = 0;
        int n_scored = 0, n_truth = 0;
        double sum_structure = 0, sum_evidence = 0, sum_decision = 0;
        tl::DecisionStream decisions;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line == "\r") continue;
            json record;
            try {
                record = json::parse(line);
            } catch (const std::exception& e) {
                throw std::runtime_error("theses line " + std::to_string(lineno) + ": " +
                                         e.what());
            }
            if (!record.contains("date"))
                throw std::runtime_error("theses line " + std::to_string(lineno) +
                                         ": missing date");
            const tl::Date date = tl::parse_date(record.at("date").get<std::string>());
            const std::ptrdiff_t idx = series.index_of(date);
            if (idx < 0)
                throw std::runtime_error("theses line " + std::to_string(lineno) + ": date " +
                                         tl::format_date(date) +
                                         " not present in the price series");
            const std::string completion = record.at("completion").get<std::string>();
            const tl::ThesisDocument doc = tl::parse_completion(completion, mode);
            ++n_scored;
            sum_structure += tl::structure_reward(doc);
            sum_evidence += tl::evidence_reward(doc);
            if (labels.labels[static_cast<std::size_t>(idx)]) {
                ++n_truth;
                sum_decision += tl::decision_reward(
                    doc.decision, *labels.labels[static_cast<std::size_t>(idx)]);
            }
            if (doc.decision) decisions.push_back({date, *doc.decision});
        }

        json reward_section{
            {"n_scored", n_scored},
            {"n_with_truth", n_truth},
            {"mean_structure", n_scored ? json(sum_structure / n_scored) : json()},
            {"mean_evidence", n_scored ? json(sum_evidence / n_scored) : json()},
            {"mean_decision", n_truth ? json(sum_decision / n_truth) : json()}};

        std::sort(decisions.begin(), decisions.end(),
                  [](const tl::Decision& a, const tl::Decision& b) { return a.date < b.date; });
        json backtest_section;
        if (!decisions.empty()) {
            tl::SimulationOptions options;
            std::copy(args.weight_map.begin(), args.weight_map.end(),
                      options.map.weights.begin());
            options.max_hold = args.max_hold;
            const tl::SimulationResult sim = tl::simulate(series, decisions, options);
            backtest_section =
                metrics_json(tl::compute_metrics(sim, args.rf_annual, args.periods_per_year));
        }

        json report{{"schema_version", kSchemaVersion},
                    {"config", config},
                    {"labeling", label_section},
                    {"rewards", reward_section},
                    {"backtest", backtest_section}};
        Output output(args.out);
        output.stream() << report.dump(2) << "\n";
    } catch (const std::exception& e) {
        std::cerr << "pipeline: " << e.what() << "\n";
        return kBadInput;
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trading-signal labeling, thesis scoring, and backtesting toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value configuration file (flags take precedence)");

    LabelArgs label_args;
    auto* label = app.add_subcommand("label", "Generate five-class labels from a price CSV");
    label->add_option("--prices", label_args.prices, "price CSV (date,open,high,low,close,volume)")
        ->required();
    label->add_option("--out", label_args.out, "output CSV path (default stdout)");
    label->add_option("--ema-span", label_args.config.ema_span, "smoothing span");
    label->add_option("--horizons", label_args.config.horizons, "return horizons")
        ->delimiter(',');
    label->add_option("--weights", label_args.config.weights, "horizon weights (sum 1)")
        ->delimiter(',');
    label->add_option("--vol-window", label_args.config.vol_window, "volatility window");
    label->add_flag("--trailing", label_args.config.trailing,
                    "use trailing instead of forward returns");

    IndicatorArgs ind_args;
    auto* indicators = app.add_subcommand("indicators", "Compute technical indicators");
    indicators->add_option("--prices", ind_args.prices, "price CSV")->required();
    indicators->add_option("--out", ind_args.out, "output CSV path (default stdout)");
    indicators
        ->add_option("--kind", ind_args.kinds,
                     "indicator kind(s): sma ema macd macd_signal macd_hist rsi boll boll_ub "
                     "boll_lb atr adx roc vwma")
        ->required();
    indicators->add_option("--param", ind_args.params, "indicator parameter key=value");

    ScoreArgs score_args;
    auto* score = app.add_subcommand("score", "Score thesis completions from JSONL");
    score->add_option("--theses", score_args.theses, "thesis JSONL")->required();
    score->add_option("--out", score_args.out, "output JSONL path (default stdout)");
    score->add_option("--mode", score_args.mode, "r1 (investment heads) or r0 (format heads)")
        ->check(CLI::IsMember({"r1", "r0"}));
    score->add_option("--weights", score_args.weights, "structure,evidence,decision weights")
        ->delimiter(',');
    score->add_option("--format-weight", score_args.format_weights,
                      "format head weight override name=value");
    score->add_option("--matrix", score_args.matrix_path, "decision matrix CSV (5x5, row=prediction)");
    score->add_option("--outcome-params", score_args.outcome_params,
                      "outcome parameter key=value (delta,u,kappa,b,gamma,tau1,tau2)");

    AdvantageArgs adv_args;
    auto* advantages = app.add_subcommand("advantages", "Group-normalize reward JSONL");
    advantages->add_option("--groups", adv_args.groups, "JSONL with a rewards array per line")
        ->required();
    advantages->add_option("--out", adv_args.out, "output JSONL path (default stdout)");
    advantages->add_option("--epsilon", adv_args.epsilon, "clip width for the objective");
    advantages->add_option("--beta", adv_args.beta, "KL penalty weight");

    BacktestArgs bt_args;
    auto* backtest = app.add_subcommand("backtest", "Simulate decisions against prices");
    backtest->add_option("--prices", bt_args.prices, "price CSV")->required();
    backtest->add_option("--decisions", bt_args.decisions, "decisions CSV (date,action)")
        ->required();
    backtest->add_option("--out", bt_args.out, "metrics JSON path (default stdout)");
    backtest->add_option("--equity-out", bt_args.equity_out, "equity curve CSV path");
    backtest->add_option("--weight-map", bt_args.weight_map,
                         "five weights for SS,S,H,B,SB")
        ->delimiter(',');
    backtest->add_option("--max-hold", bt_args.max_hold, "trading days before a position expires");
    backtest->add_option("--cost-bps", bt_args.cost_bps, "per-rebalance cost in basis points");
    backtest->add_option("--rf", bt_args.rf_annual, "annual risk-free rate");
    backtest->add_option("--periods-per-year", bt_args.periods_per_year, "annualization factor");

    BucketArgs bucket_args;
    auto* bucket = app.add_subcommand("bucket-news", "Bucket news JSONL by age with sampling caps");
    bucket->add_option("--news", bucket_args.news, "news JSONL")->required();
    bucket->add_option("--out", bucket_args.out, "output JSON path (default stdout)");
    bucket->add_option("--asof", bucket_args.asof, "as-of date (YYYY-MM-DD)")->required();
    bucket->add_option("--seed", bucket_args.seed, "subsampling seed");

    AssembleArgs asm_args;
    auto* assemble = app.add_subcommand("assemble", "Assemble randomized prompt variants");
    assemble->add_option("--out", asm_args.out, "output JSONL path (default stdout)");
    assemble->add_option("--variations", asm_args.variations, "number of variants");
    assemble->add_option("--seed", asm_args.seed, "assembly seed")->required();
    for (const std::string& name : tl::modality_names())
        assemble->add_option("--" + name, asm_args.block_paths[name],
                             name + " block text file");

    PipelineArgs pipe_args;
    auto* pipeline = app.add_subcommand("pipeline", "Label, score, and backtest in one run");
    pipeline->add_option("--prices", pipe_args.prices, "price CSV")->required();
    pipeline->add_option("--theses", pipe_args.theses, "thesis JSONL with dates")->required();
    pipeline->add_option("--out", pipe_args.out, "report JSON path (default stdout)");
    pipeline->add_option("--mode", pipe_args.mode, "completion format: r1 or r0")
        ->check(CLI::IsMember({"r1", "r0"}));
    pipeline->add_option("--seed", pipe_args.seed, "run seed (echoed; reserved for sampling)");
    pipeline->add_option("--max-hold", pipe_args.max_hold, "backtest holding limit");
    pipeline->add_option("--weight-map", pipe_args.weight_map, "five weights for SS,S,H,B,SB")
        ->delimiter(',');
    pipeline->add_option("--rf", pipe_args.rf_annual, "annual risk-free rate");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadInput;
    }

    if (label->parsed()) return run_label(label_args);
    if (indicators->parsed()) return run_indicators(ind_args);
    if (score->parsed()) return run_score(score_args);
    if (advantages->parsed()) return run_advantages(adv_args);
    if (backtest->parsed()) return run_backtest(bt_args);
    if (bucket->parsed()) return run_bucket_news(bucket_args);
    if (assemble->parsed()) return run_assemble(asm_args);
    if (pipeline->parsed()) return run_pipeline(pipe_args);
    return kBadInput;
}
