#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradelab/action.hpp"
#include "tradelab/common.hpp"
#include "tradelab/market_data.hpp"

namespace tradelab {

/// Target portfolio weight per action. Weights must be monotone in action
/// ordinal, inside [-1, 1], with HOLD exactly flat.
struct WeightMap {
    std::array<double, kNumActions> weights{-1.0, -0.5, 0.0, 0.5, 1.0};

    static WeightMap standard() { return {}; }

    double at(TradeAction action) const { return weights[ordinal(action)]; }

    void validate() const {
        if (weights[ordinal(TradeAction::Hold)] != 0.0)
            throw std::invalid_argument("weight map must keep HOLD at 0");
        for (std::size_t i = 0; i < kNumActions; ++i) {
            if (weights[i] < -1.0 || weights[i] > 1.0)
                throw std::invalid_argument("weights must lie in [-1, 1]");
            if (i > 0 && weights[i] < weights[i - 1])
                throw std::invalid_argument("weights must be monotone in action order");
        }
    }
};

inline double action_to_weight(TradeAction action, const WeightMap& map = WeightMap::standard()) {
    return map.at(action);
}

struct Decision {
    Date date;
    TradeAction action;
};

using DecisionStream = std::vector<Decision>;

struct EquityCurve {
    std::vector<Date> dates;
    Series values;   // strictly positive, starts at 1.0
};

/// One decision with the return realized while its position was on.
struct DecisionOutcome {
    Date date;
    TradeAction action;
    double weight = 0.0;
    double realized_return = 0.0;   // close at entry to close at position close
};

struct SimulationOptions {
    WeightMap map;
    int max_hold = 5;       // trading days a position survives without a fresh decision
    double cost_bps = 0.0;  // per-rebalance cost on traded weight, in basis points
};

struct SimulationResult {
    EquityCurve equity;
    Series returns;                  // portfolio return accruing on bars 1..n-1
    Series positions;                // weight applied to the return ending at bar t (0 at bar 0)
    std::vector<DecisionOutcome> outcomes;
};

/// Replays a decision stream against daily closes. The weight set on
/// decision day d earns close-to-close returns from d+1 through the next
/// decision day inclusive, but never more than max_hold days: a stale
/// position flattens to zero until the next decision. Costs accrue on
/// traded weight whenever the position changes. Strictly causal: nothing
/// before or on day d depends on any later price.
inline SimulationResult simulate(const PriceSeries& prices, const DecisionStream& decisions,
                                 const SimulationOptions& options = {}) {
    options.map.validate();
    if (options.max_hold < 1) throw std::invalid_argument("max_hold must be >= 1");
    if (options.cost_bps < 0) throw std::invalid_argument("cost_bps must be >= 0");
    if (prices.bars.empty()) throw std::invalid_argument("simulate: empty price series");

    // Decision dates must be strictly increasing and present in the series.
    std::vector<std::size_t> decision_idx(decisions.size());
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        if (i > 0 && !(decisions[i - 1].date < decisions[i].date))
            throw std::invalid_argument("decision dates must be strictly increasing at " +
                                        format_date(decisions[i].date));
        const std::ptrdiff_t idx = prices.index_of(decisions[i].date);
        if (idx < 0)
            throw std::invalid_argument("decision date " + format_date(decisions[i].date) +
                                        " not present in the price series");
        decision_idx[i] = static_cast<std::size_t>(idx);
    }

    const std::size_t n = prices.bars.size();
    SimulationResult result;
    result.positions.assign(n, 0.0);
    result.returns.assign(n, 0.0);
    result.equity.dates.reserve(n);
    result.equity.values.reserve(n);

    // Position per return period: decision i covers (d_i, min(d_{i+1}, d_i + max_hold)].
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const std::size_t d = decision_idx[i];
        const std::size_t horizon = d + static_cast<std::size_t>(options.max_hold);
        std::size_t end = i + 1 < decisions.size() ? decision_idx[i + 1] : n - 1;
        end = std::min({end, horizon, n - 1});
        const double w = options.map.at(decisions[i].action);
        for (std::size_t t = d + 1; t <= end; ++t) result.positions[t] = w;

        DecisionOutcome outcome;
        outcome.date = decisions[i].date;
        outcome.action = decisions[i].action;
        outcome.weight = w;
        outcome.realized_return =
            end > d ? prices.bars[end].close / prices.bars[d].close - 1.0 : 0.0;
        result.outcomes.push_back(outcome);
    }

    double equity = 1.0;
    result.equity.dates.push_back(prices.bars[0].date);
    result.equity.values.push_back(equity);
    const double cost_rate = options.cost_bps / 1e4;
    for (std::size_t t = 1; t < n; ++t) {
        const double asset_ret = prices.bars[t].close / prices.bars[t - 1].close - 1.0;
        const double traded = std::abs(result.positions[t] - result.positions[t - 1]);
        const double r = result.positions[t] * asset_ret - cost_rate * traded;
        result.returns[t] = r;
        equity *= 1.0 + r;
        result.equity.dates.push_back(prices.bars[t].date);
        result.equity.values.push_back(equity);
    }
    return result;
}

/// Compounded growth of the return stream: the product of (1 + r) minus 1.
inline double cumulative_return(const Series& returns) {
    double acc = 1.0;
    for (double r : returns) {
        if (r <= -1.0) throw std::domain_error("cumulative_return: return <= -100%");
        acc *= 1.0 + r;
    }
    return acc - 1.0;
}

/// Annualized Sharpe ratio of per-period returns against a constant annual
/// risk-free rate: sqrt(K) * mean(x) / sample std(x) with x = r - rf/K.
/// Absent (nullopt) when fewer than two returns or zero dispersion.
inline std::optional<double> sharpe(const Series& returns, double rf_annual = 0.04,
                                    int periods_per_year = 252) {
    if (periods_per_year < 1) throw std::invalid_argument("periods_per_year must be >= 1");
    if (returns.size() < 2) return std::nullopt;
    const double rf = rf_annual / periods_per_year;
    double mean = 0.0;
    for (double r : returns) mean += r - rf;
    mean /= static_cast<double>(returns.size());
    double ss = 0.0;
    for (double r : returns) {
        const double d = (r - rf) - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(returns.size() - 1));
    if (sd == 0.0) return std::nullopt;
    return std::sqrt(static_cast<double>(periods_per_year)) * mean / sd;
}

/// Fraction of directional calls whose realized return has the called sign.
/// HOLD rows are skipped (no callable sign) and a zero realized return is a
/// miss. Absent when nothing directional was decided.
inline std::optional<double> hit_rate(const std::vector<std::pair<TradeAction, double>>& realized) {
    int directional = 0, hits = 0;
    for (const auto& [action, ret] : realized) {
        const int side = static_cast<int>(ordinal(action)) - 2;
        if (side == 0) continue;
        ++directional;
        if ((side > 0 && ret > 0) || (side < 0 && ret < 0)) ++hits;
    }
    if (directional == 0) return std::nullopt;
    return static_cast<double>(hits) / directional;
}

/// Largest fractional decline from a running peak, in [0,1].
inline double max_drawdown(const Series& equity) {
    if (equity.empty()) throw std::invalid_argument("max_drawdown: empty curve");
    double peak = equity.front();
    double worst = 0.0;
    for (double v : equity) {
        peak = std::max(peak, v);
        worst = std::max(worst, 1.0 - v / peak);
    }
    return worst;
}

struct MetricsReport {
    double cumulative = 0.0;
    std::optional<double> sharpe_annual;
    std::optional<double> hit;
    double mdd = 0.0;
    int n_decisions = 0;
    int n_directional = 0;
    double rf_annual = 0.04;
    int periods_per_year = 252;
};

/// Full metric sweep over one simulation.
inline MetricsReport compute_metrics(const SimulationResult& sim, double rf_annual = 0.04,
                                     int periods_per_year = 252) {
    MetricsReport report;
    report.rf_annual = rf_annual;
    report.periods_per_year = periods_per_year;
    // Skip the placeholder return slot of bar 0.
    Series rets(sim.returns.begin() + (sim.returns.empty() ? 0 : 1), sim.returns.end());
    report.cumulative = cumulative_return(rets);
    report.sharpe_annual = sharpe(rets, rf_annual, periods_per_year);
    report.mdd = max_drawdown(sim.equity.values);
    std::vector<std::pair<TradeAction, double>> realized;
    for (const DecisionOutcome& o : sim.outcomes) {
        realized.emplace_back(o.action, o.realized_return);
        ++report.n_decisions;
        if (o.action != TradeAction::Hold) ++report.n_directional;
    }
    report.hit = hit_rate(realized);
    return report;
}

}  // namespace tradelab
