#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tradelab/common.hpp"

namespace tradelab {

/// One group of sampled outputs for the same prompt: a reward per output,
/// optional per-token probability ratios, and an optional externally
/// estimated KL penalty.
struct RolloutGroup {
    std::vector<double> rewards;
    std::vector<std::vector<double>> token_ratios;  // one sequence per output
    std::optional<double> kl_estimate;
};

/// Peer-normalized advantages: (r - mean) / population std (divisor G).
/// A zero-variance group carries no preference signal and returns all
/// zeros instead of dividing by zero.
inline std::vector<double> group_advantages(const std::vector<double>& rewards) {
    if (rewards.empty()) throw std::invalid_argument("group_advantages: empty group");
    const double n = static_cast<double>(rewards.size());
    double mean = 0.0;
    for (double r : rewards) mean += r;
    mean /= n;
    double var = 0.0;
    for (double r : rewards) var += (r - mean) * (r - mean);
    var /= n;
    const double std_dev = std::sqrt(var);
    std::vector<double> out(rewards.size(), 0.0);
    if (std_dev == 0.0) return out;
    for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / std_dev;
    return out;
}

/// Pessimistic policy-gradient term: min of the unclipped and ratio-clipped
/// advantage products. Never exceeds ratio * advantage.
inline double clipped_surrogate(double ratio, double advantage, double epsilon) {
    if (ratio <= 0) throw std::invalid_argument("clipped_surrogate: ratio must be > 0");
    if (epsilon <= 0 || epsilon >= 1)
        throw std::invalid_argument("clipped_surrogate: epsilon must be in (0,1)");
    const double clipped = std::clamp(ratio, 1.0 - epsilon, 1.0 + epsilon);
    return std::min(ratio * advantage, clipped * advantage);
}

/// Group objective: mean over outputs of the token-mean clipped surrogate
/// (per-output advantages broadcast over tokens), minus beta times the KL
/// estimate (0 when absent).
inline double grpo_objective(const RolloutGroup& group, double epsilon, double beta) {
    if (beta < 0) throw std::invalid_argument("grpo_objective: beta must be >= 0");
    if (group.token_ratios.size() != group.rewards.size())
        throw std::invalid_argument("grpo_objective: one ratio sequence per output required");
    for (const auto& seq : group.token_ratios)
        if (seq.empty())
            throw std::invalid_argument("grpo_objective: empty token ratio sequence");

    const std::vector<double> advantages = group_advantages(group.rewards);
    double total = 0.0;
    for (std::size_t i = 0; i < group.rewards.size(); ++i) {
        double inner = 0.0;
        for (double ratio : group.token_ratios[i])
            inner += clipped_surrogate(ratio, advantages[i], epsilon);
        total += inner / static_cast<double>(group.token_ratios[i].size());
    }
    total /= static_cast<double>(group.rewards.size());
    return total - beta * group.kl_estimate.value_or(0.0);
}

}  // namespace tradelab
