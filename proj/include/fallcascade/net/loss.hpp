#pragma once

#include <array>
#include <span>

#include "fallcascade/net/network.hpp"

namespace fallcascade::net {

// Probabilities are clamped to [kProbabilityClamp, 1 - kProbabilityClamp]
// before taking logs.
inline constexpr double kProbabilityClamp = 1e-7;

using HeadOutputs = std::array<Matrix, kHeadCount>;

// Mean over the batch of a single head's cross-entropy.
double head_loss(LossKind kind, const Matrix& head, std::span<const int> targets);

// Weighted binary cross-entropy over the three sigmoid heads:
//   -sum_i w_i * mean_b[y log p_i + (1 - y) log(1 - p_i)]
double loss_bfc(const HeadOutputs& heads, std::span<const int> targets, const HeadWeights& weights);

// Weighted sparse categorical cross-entropy over the three softmax heads:
//   -sum_i w_i * mean_b[log p_i[y]]
double loss_mfec(const HeadOutputs& heads, std::span<const int> targets, const HeadWeights& weights);

double weighted_loss(LossKind kind, const HeadOutputs& heads, std::span<const int> targets,
                     const HeadWeights& weights);

}  // namespace fallcascade::net
