#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tradelab/action.hpp"
#include "tradelab/common.hpp"
#include "tradelab/market_data.hpp"

namespace tradelab {

/// Parameters of the volatility-adjusted composite signal. Defaults give a
/// smoothed multi-horizon score whose quantile cuts target a 3/12/38/32/15
/// percent split from strong sell up to strong buy.
struct SignalConfig {
    int ema_span = 3;
    std::vector<int> horizons{3, 7, 15};
    std::vector<double> weights{0.3, 0.5, 0.2};
    int vol_window = 20;
    std::array<double, 4> quantiles{0.03, 0.15, 0.53, 0.85};
    /// When set, horizon returns look backward from t instead of forward to
    /// t + horizon. Kept for pipelines that shift labels themselves.
    bool trailing = false;

    void validate() const {
        if (ema_span < 1) throw std::invalid_argument("ema_span must be >= 1");
        if (vol_window < 2) throw std::invalid_argument("vol_window must be >= 2");
        if (horizons.empty() || horizons.size() != weights.size())
            throw std::invalid_argument("horizons and weights must be non-empty and equal-length");
        for (int h : horizons)
            if (h < 1) throw std::invalid_argument("horizons must be >= 1");
        double wsum = 0;
        for (double w : weights) {
            if (w <= 0) throw std::invalid_argument("weights must be positive");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
        double prev = 0.0;
        for (double q : quantiles) {
            if (q <= prev || q >= 1.0)
                throw std::invalid_argument("quantiles must be strictly increasing in (0,1)");
            prev = q;
        }
    }
};

/// Linear-interpolation quantile of an ascending-sorted sample: the rank
/// h = (n-1)p splits into integer part i and fraction g, and the result is
/// x[i] + g (x[i+1] - x[i]). E.g. the 0.03 quantile of 1..100 is 3.97.
inline double quantile_sorted(const Series& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile level outside [0,1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double g = h - static_cast<double>(i);
    return sorted[i] + g * (sorted[i + 1] - sorted[i]);
}

/// Volatility-adjusted composite: smooth closes with an adjusted EMA, take
/// the percentage change over each horizon, divide by that change series'
/// rolling sample deviation, and blend the per-horizon scores with the
/// configured weights. Positions lacking any component (warm-up, horizon
/// tail, zero deviation) are undefined.
inline Series composite_signal(const Series& closes, const SignalConfig& config = {}) {
    config.validate();
    if (closes.empty()) throw std::invalid_argument("composite_signal: empty input");
    const Series smoothed = ema(closes, config.ema_span);
    Series composite(closes.size(), 0.0);
    std::vector<bool> defined(closes.size(), true);
    for (std::size_t k = 0; k < config.horizons.size(); ++k) {
        const Series change = config.trailing ? trailing_return(smoothed, config.horizons[k])
                                              : forward_return(smoothed, config.horizons[k]);
        const Series vol = rolling_std(change, config.vol_window);
        for (std::size_t t = 0; t < closes.size(); ++t) {
            if (!is_defined(change[t]) || !is_defined(vol[t]) || vol[t] == 0.0) {
                defined[t] = false;
                continue;
            }
            composite[t] += config.weights[k] * (change[t] / vol[t]);
        }
    }
    for (std::size_t t = 0; t < closes.size(); ++t)
        if (!defined[t]) composite[t] = undefined();
    return composite;
}

inline Series composite_signal(const PriceSeries& prices, const SignalConfig& config = {}) {
    return composite_signal(prices.closes(), config);
}

/// Four ascending signal thresholds taken at the given quantile levels of
/// the defined signal values. Callers own the no-defined-values path (the
/// labeling pipeline maps it to an all-undefined label series).
inline std::array<double, 4> compute_thresholds(
    const Series& signal, const std::array<double, 4>& levels = {0.03, 0.15, 0.53, 0.85}) {
    Series defined;
    defined.reserve(signal.size());
    for (double v : signal)
        if (is_defined(v)) defined.push_back(v);
    if (defined.empty()) throw std::invalid_argument("compute_thresholds: no defined signal values");
    std::sort(defined.begin(), defined.end());
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) out[i] = quantile_sorted(defined, levels[i]);
    return out;
}

/// Maps one signal value to an action by descending threshold, inclusive at
/// each cut: >= t4 strong buy, >= t3 buy, >= t2 hold, >= t1 sell, else
/// strong sell.
inline TradeAction classify_signal(double value, const std::array<double, 4>& thresholds) {
    if (value >= thresholds[3]) return TradeAction::StrongBuy;
    if (value >= thresholds[2]) return TradeAction::Buy;
    if (value >= thresholds[1]) return TradeAction::Hold;
    if (value >= thresholds[0]) return TradeAction::Sell;
    return TradeAction::StrongSell;
}

using LabelSeries = std::vector<std::optional<TradeAction>>;

/// Per-position classification; undefined signal positions get no label.
inline LabelSeries assign_labels(const Series& signal, const std::array<double, 4>& thresholds) {
    LabelSeries labels(signal.size());
    for (std::size_t t = 0; t < signal.size(); ++t)
        if (is_defined(signal[t])) labels[t] = classify_signal(signal[t], thresholds);
    return labels;
}

/// Full-length labeling output, aligned index-for-index with the input bars.
struct LabelResult {
    Series signal;                       // composite, undefined where unlabeled
    LabelSeries labels;                  // engaged exactly where signal is defined
    std::array<double, 4> thresholds{};  // undefined() in all slots when no signal
    bool has_signal = false;

    std::array<std::size_t, kNumActions> counts() const {
        std::array<std::size_t, kNumActions> c{};
        for (const auto& l : labels)
            if (l) ++c[ordinal(*l)];
        return c;
    }

    std::size_t defined_count() const {
        std::size_t n = 0;
        for (const auto& l : labels)
            if (l) ++n;
        return n;
    }
};

/// Full labeling pass over one price series: composite signal, in-sample
/// quantile thresholds, per-day classification. A series with no defined
/// signal (e.g. constant prices) yields all-undefined labels, not an error.
inline LabelResult generate_labels(const PriceSeries& series, const SignalConfig& config = {}) {
    LabelResult result;
    result.signal = composite_signal(series.closes(), config);
    result.labels.resize(result.signal.size());
    result.thresholds.fill(undefined());
    result.has_signal = count_defined(result.signal) > 0;
    if (!result.has_signal) return result;
    result.thresholds = compute_thresholds(result.signal, config.quantiles);
    result.labels = assign_labels(result.signal, result.thresholds);
    return result;
}

}  // namespace tradelab
