#pragma once

#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace tradelab {

/// Five-class trade action, ordered by bullishness. SELL-side actions denote
/// short positions in a long-short strategy, not merely closing longs.
enum class TradeAction : int {
    StrongSell = 0,
    Sell = 1,
    Hold = 2,
    Buy = 3,
    StrongBuy = 4,
};

inline constexpr std::array<TradeAction, 5> kAllActions{
    TradeAction::StrongSell, TradeAction::Sell, TradeAction::Hold,
    TradeAction::Buy, TradeAction::StrongBuy};

inline constexpr std::size_t kNumActions = kAllActions.size();

inline constexpr int ordinal(TradeAction a) { return static_cast<int>(a); }

/// Canonical spelling: upper case, space-separated ("STRONG BUY").
inline std::string_view action_name(TradeAction a) {
    switch (a) {
        case TradeAction::StrongSell: return "STRONG SELL";
        case TradeAction::Sell: return "SELL";
        case TradeAction::Hold: return "HOLD";
        case TradeAction::Buy: return "BUY";
        case TradeAction::StrongBuy: return "STRONG BUY";
    }
    return "";
}

/// Accepts any casing and either spaces or underscores between words, with
/// arbitrary surrounding/interior whitespace ("strong_buy", " Strong  Buy ").
inline std::optional<TradeAction> parse_action(std::string_view text) {
    std::string folded;
    folded.reserve(text.size());
    for (char c : text) {
        if (c == '_') c = ' ';
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!folded.empty() && folded.back() != ' ') folded.push_back(' ');
        } else {
            folded.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
    }
    while (!folded.empty() && folded.back() == ' ') folded.pop_back();
    for (TradeAction a : kAllActions)
        if (folded == action_name(a)) return a;
    return std::nullopt;
}

}  // namespace tradelab
