#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tradelab/common.hpp"

namespace tradelab {

/// One daily OHLCV bar. Input data is assumed corporate-action adjusted.
struct Bar {
    Date date;
    double open = 0;
    double high = 0;
    double low = 0;
    double close = 0;
    double volume = 0;
};

/// Ordered daily bars for one asset; dates strictly increasing, never empty
/// after a successful load.
struct PriceSeries {
    std::string symbol;
    std::vector<Bar> bars;

    Series closes() const {
        Series out(bars.size());
        for (std::size_t i = 0; i < bars.size(); ++i) out[i] = bars[i].close;
        return out;
    }

    /// Index of the bar at `d`, or -1 when the date is not in the series.
    std::ptrdiff_t index_of(const Date& d) const {
        auto it = std::lower_bound(bars.begin(), bars.end(), d,
                                   [](const Bar& b, const Date& x) { return b.date < x; });
        if (it == bars.end() || it->date != d) return -1;
        return it - bars.begin();
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    for (auto& f : fields) {
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.erase(f.begin());
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
    }
    return fields;
}

inline double parse_number(const std::string& text) {
    std::size_t pos = 0;
    double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument("trailing characters in number");
    return v;
}

}  // namespace detail

/// Loads a price CSV with header `date,open,high,low,close,volume` (ISO-8601
/// dates, plain decimal numbers). Rows are re-sorted by ascending date;
/// duplicate dates, non-positive prices, and OHLC violations are rejected
/// with the offending 1-based file line in the message.
inline PriceSeries load_price_csv(const std::string& path, std::string symbol = "") {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open price CSV: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": no rows");
    {
        auto header = detail::split_csv_line(line);
        for (auto& h : header)
            for (auto& c : h) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        const std::vector<std::string> expected{"date", "open", "high", "low", "close", "volume"};
        if (header != expected)
            throw std::runtime_error(path +
                                     ": line 1: header must be date,open,high,low,close,volume");
    }

    PriceSeries series;
    series.symbol = std::move(symbol);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto fields = detail::split_csv_line(line);
        auto fail = [&](const std::string& why) {
            throw std::runtime_error(path + ": line " + std::to_string(lineno) + ": " + why);
        };
        if (fields.size() != 6) fail("expected 6 fields, got " + std::to_string(fields.size()));
        Bar bar;
        try {
            bar.date = parse_date(fields[0]);
            bar.open = detail::parse_number(fields[1]);
            bar.high = detail::parse_number(fields[2]);
            bar.low = detail::parse_number(fields[3]);
            bar.close = detail::parse_number(fields[4]);
            bar.volume = detail::parse_number(fields[5]);
        } catch (const std::exception& e) {
            fail(std::string("malformed row (") + e.what() + ")");
        }
        if (bar.open <= 0 || bar.high <= 0 || bar.low <= 0 || bar.close <= 0)
            fail("non-positive price");
        if (bar.volume < 0) fail("negative volume");
        if (bar.low > std::min(bar.open, bar.close) || bar.high < std::max(bar.open, bar.close))
            fail("OHLC bounds violated");
        series.bars.push_back(bar);
    }
    if (series.bars.empty()) throw std::runtime_error(path + ": no rows");

    std::stable_sort(series.bars.begin(), series.bars.end(),
                     [](const Bar& a, const Bar& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < series.bars.size(); ++i)
        if (series.bars[i].date == series.bars[i - 1].date)
            throw std::runtime_error(path + ": duplicate date " + format_date(series.bars[i].date));
    return series;
}

// ---------------------------------------------------------------------------
// Smoothing primitives

/// Adjusted exponentially weighted mean with alpha = 2/(span+1):
///   out[t] = sum_k (1-a)^k x[t-k] / sum_k (1-a)^k,  k = 0..t.
/// Every finite-prefix output is a convex combination of its inputs, so the
/// series stays inside [min(x), max(x)] and a constant input is a fixed
/// point. Computed in the update form y += (x - y)/den rather than as a
/// num/den quotient: the quotient form leaks rounding noise on a constant
/// input, which downstream turns zero volatility into spurious signal.
inline Series ema(const Series& values, int span) {
    if (span < 1) throw std::invalid_argument("ema: span must be >= 1");
    if (values.empty()) throw std::invalid_argument("ema: empty input");
    const double decay = 1.0 - 2.0 / (span + 1.0);
    Series out(values.size());
    double den = 1.0;
    double level = values[0];
    out[0] = level;
    for (std::size_t t = 1; t < values.size(); ++t) {
        den = 1.0 + decay * den;
        level += (values[t] - level) / den;
        out[t] = level;
    }
    return out;
}

/// Sample standard deviation (n-1 divisor) of the window ending at t.
/// Undefined while the lookback is short and wherever the window contains an
/// undefined input.
inline Series rolling_std(const Series& values, int window) {
    if (window < 2) throw std::invalid_argument("rolling_std: window must be >= 2");
    Series out(values.size(), undefined());
    const std::size_t w = static_cast<std::size_t>(window);
    for (std::size_t t = 0; t < values.size(); ++t) {
        if (t + 1 < w) continue;
        const std::size_t begin = t + 1 - w;
        double mean = 0.0;
        bool ok = true;
        for (std::size_t i = begin; i <= t; ++i) {
            if (!is_defined(values[i])) { ok = false; break; }
            mean += values[i];
        }
        if (!ok) continue;
        mean /= static_cast<double>(w);
        double ss = 0.0;
        for (std::size_t i = begin; i <= t; ++i) {
            const double d = values[i] - mean;
            ss += d * d;
        }
        out[t] = std::sqrt(ss / static_cast<double>(w - 1));
    }
    return out;
}

/// Forward percentage change over `horizon` steps:
///   out[t] = (x[t+horizon] - x[t]) / x[t].
/// The last `horizon` positions are undefined; the signal at t references the
/// future so downstream labels encode outcomes, not history.
inline Series forward_return(const Series& smoothed, int horizon) {
    if (horizon < 1) throw std::invalid_argument("forward_return: horizon must be >= 1");
    Series out(smoothed.size(), undefined());
    const std::size_t h = static_cast<std::size_t>(horizon);
    for (std::size_t t = 0; t + h < smoothed.size(); ++t) {
        if (!is_defined(smoothed[t]) || !is_defined(smoothed[t + h])) continue;
        out[t] = (smoothed[t + h] - smoothed[t]) / smoothed[t];
    }
    return out;
}

/// Trailing variant: out[t] = (x[t] - x[t-horizon]) / x[t-horizon], undefined
/// for the first `horizon` positions. Compatibility mode for pipelines that
/// want the shift written as a lookback.
inline Series trailing_return(const Series& smoothed, int horizon) {
    if (horizon < 1) throw std::invalid_argument("trailing_return: horizon must be >= 1");
    Series out(smoothed.size(), undefined());
    const std::size_t h = static_cast<std::size_t>(horizon);
    for (std::size_t t = h; t < smoothed.size(); ++t) {
        if (!is_defined(smoothed[t]) || !is_defined(smoothed[t - h])) continue;
        out[t] = (smoothed[t] - smoothed[t - h]) / smoothed[t - h];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Technical indicators

/// Per-date indicator values; undefined over the warm-up prefix.
struct IndicatorSeries {
    std::string kind;
    Series values;
};

using IndicatorParams = std::map<std::string, double>;

namespace detail {

inline double param(const IndicatorParams& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

inline int int_param(const IndicatorParams& p, const std::string& key, int fallback) {
    const double v = param(p, key, fallback);
    const int i = static_cast<int>(v);
    if (i != v || i < 1)
        throw std::invalid_argument("indicator parameter '" + key + "' must be a positive integer");
    return i;
}

inline Series simple_ma(const Series& x, int window) {
    Series out(x.size(), undefined());
    const std::size_t w = static_cast<std::size_t>(window);
    double sum = 0.0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        sum += x[t];
        if (t >= w) sum -= x[t - w];
        if (t + 1 >= w) out[t] = sum / static_cast<double>(w);
    }
    return out;
}

/// Wilder smoothing: seeds with the mean of the first `period` values and
/// then recurses s = (s*(period-1) + x)/period. Input starts at `first`.
inline Series wilder_smooth(const Series& x, std::size_t first, int period) {
    Series out(x.size(), undefined());
    const std::size_t p = static_cast<std::size_t>(period);
    if (first + p > x.size()) return out;
    double s = 0.0;
    for (std::size_t i = first; i < first + p; ++i) s += x[i];
    s /= static_cast<double>(p);
    out[first + p - 1] = s;
    for (std::size_t i = first + p; i < x.size(); ++i) {
        s = (s * (p - 1) + x[i]) / static_cast<double>(p);
        out[i] = s;
    }
    return out;
}

inline Series true_range(const PriceSeries& series) {
    Series tr(series.bars.size());
    for (std::size_t t = 0; t < series.bars.size(); ++t) {
        const Bar& b = series.bars[t];
        if (t == 0) {
            tr[t] = b.high - b.low;
        } else {
            const double prev_close = series.bars[t - 1].close;
            tr[t] = std::max({b.high - b.low, std::abs(b.high - prev_close),
                              std::abs(b.low - prev_close)});
        }
    }
    return tr;
}

inline Series rsi(const Series& close, int period) {
    Series out(close.size(), undefined());
    if (close.size() < 2) return out;
    Series gain(close.size(), 0.0), loss(close.size(), 0.0);
    for (std::size_t t = 1; t < close.size(); ++t) {
        const double d = close[t] - close[t - 1];
        gain[t] = d > 0 ? d : 0.0;
        loss[t] = d < 0 ? -d : 0.0;
    }
    const Series avg_gain = wilder_smooth(gain, 1, period);
    const Series avg_loss = wilder_smooth(loss, 1, period);
    for (std::size_t t = 0; t < close.size(); ++t) {
        if (!is_defined(avg_gain[t]) || !is_defined(avg_loss[t])) continue;
        if (avg_loss[t] == 0.0 && avg_gain[t] == 0.0)
            out[t] = 50.0;
        else if (avg_loss[t] == 0.0)
            out[t] = 100.0;
        else
            out[t] = 100.0 - 100.0 / (1.0 + avg_gain[t] / avg_loss[t]);
    }
    return out;
}

inline Series adx(const PriceSeries& series, int period) {
    const std::size_t n = series.bars.size();
    Series out(n, undefined());
    if (n < 2) return out;
    Series plus_dm(n, 0.0), minus_dm(n, 0.0);
    for (std::size_t t = 1; t < n; ++t) {
        const double up = series.bars[t].high - series.bars[t - 1].high;
        const double down = series.bars[t - 1].low - series.bars[t].low;
        plus_dm[t] = (up > down && up > 0) ? up : 0.0;
        minus_dm[t] = (down > up && down > 0) ? down : 0.0;
    }
    const Series tr = true_range(series);
    const Series s_plus = wilder_smooth(plus_dm, 1, period);
    const Series s_minus = wilder_smooth(minus_dm, 1, period);
    const Series s_tr = wilder_smooth(tr, 1, period);
    Series dx(n, 0.0);
    std::size_t first_dx = n;
    for (std::size_t t = 0; t < n; ++t) {
        if (!is_defined(s_tr[t]) || s_tr[t] == 0.0 || !is_defined(s_plus[t])) continue;
        const double pdi = 100.0 * s_plus[t] / s_tr[t];
        const double mdi = 100.0 * s_minus[t] / s_tr[t];
        dx[t] = (pdi + mdi) == 0.0 ? 0.0 : 100.0 * std::abs(pdi - mdi) / (pdi + mdi);
        if (first_dx == n) first_dx = t;
    }
    if (first_dx == n) return out;
    return wilder_smooth(dx, first_dx, period);
}

}  // namespace detail

/// Computes one indicator series by identifier. Close-based unless noted:
///   sma(window=50)          simple moving average
///   ema(span=10)            adjusted exponential moving average
///   macd / macd_signal / macd_hist(fast=12, slow=26, signal=9)
///   rsi(period=14)          Wilder RSI in [0, 100]
///   boll / boll_ub / boll_lb(window=20, k=2)   middle/upper/lower band
///   atr(period=14)          Wilder-smoothed true range (high/low/close)
///   adx(period=14)          Wilder ADX (high/low/close)
///   roc(period=10)          percentage rate of change
///   vwma(window=20)         volume-weighted moving average
inline IndicatorSeries compute_indicator(const PriceSeries& series, const std::string& kind,
                                         const IndicatorParams& params = {}) {
    const Series close = series.closes();
    const std::size_t n = close.size();
    IndicatorSeries out{kind, Series(n, undefined())};

    if (kind == "sma") {
        out.values = detail::simple_ma(close, detail::int_param(params, "window", 50));
    } else if (kind == "ema") {
        out.values = ema(close, detail::int_param(params, "span", 10));
    } else if (kind == "macd" || kind == "macd_signal" || kind == "macd_hist") {
        const int fast = detail::int_param(params, "fast", 12);
        const int slow = detail::int_param(params, "slow", 26);
        const int sig = detail::int_param(params, "signal", 9);
        const Series fast_ema = ema(close, fast);
        const Series slow_ema = ema(close, slow);
        Series macd(n);
        for (std::size_t t = 0; t < n; ++t) macd[t] = fast_ema[t] - slow_ema[t];
        if (kind == "macd") {
            out.values = macd;
        } else {
            const Series signal = ema(macd, sig);
            if (kind == "macd_signal") {
                out.values = signal;
            } else {
                for (std::size_t t = 0; t < n; ++t) out.values[t] = macd[t] - signal[t];
            }
        }
    } else if (kind == "rsi") {
        out.values = detail::rsi(close, detail::int_param(params, "period", 14));
    } else if (kind == "boll" || kind == "boll_ub" || kind == "boll_lb") {
        const int window = detail::int_param(params, "window", 20);
        const double k = detail::param(params, "k", 2.0);
        if (k < 0) throw std::invalid_argument("bollinger k must be >= 0");
        const Series mid = detail::simple_ma(close, window);
        if (kind == "boll") {
            out.values = mid;
        } else {
            const Series sd = rolling_std(close, window);
            const double sign = kind == "boll_ub" ? 1.0 : -1.0;
            for (std::size_t t = 0; t < n; ++t) {
                if (is_defined(mid[t]) && is_defined(sd[t]))
                    out.values[t] = mid[t] + sign * k * sd[t];
            }
        }
    } else if (kind == "atr") {
        out.values = detail::wilder_smooth(detail::true_range(series), 0,
                                           detail::int_param(params, "period", 14));
    } else if (kind == "adx") {
        out.values = detail::adx(series, detail::int_param(params, "period", 14));
    } else if (kind == "roc") {
        const int period = detail::int_param(params, "period", 10);
        const std::size_t p = static_cast<std::size_t>(period);
        for (std::size_t t = p; t < n; ++t)
            out.values[t] = 100.0 * (close[t] - close[t - p]) / close[t - p];
    } else if (kind == "vwma") {
        const int window = detail::int_param(params, "window", 20);
        const std::size_t w = static_cast<std::size_t>(window);
        double pv = 0.0, vol = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            pv += close[t] * series.bars[t].volume;
            vol += series.bars[t].volume;
            if (t >= w) {
                pv -= close[t - w] * series.bars[t - w].volume;
                vol -= series.bars[t - w].volume;
            }
            if (t + 1 >= w && vol > 0) out.values[t] = pv / vol;
        }
    } else {
        throw std::invalid_argument("unknown indicator kind: " + kind);
    }
    return out;
}

}  // namespace tradelab
