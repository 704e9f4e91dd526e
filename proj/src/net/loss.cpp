#include "fallcascade/net/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fallcascade/error.hpp"

namespace fallcascade::net {

namespace {

double clamped_log(double p) {
  return std::log(std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp));
}

void check_rows(const Matrix& head, std::span<const int> targets) {
  if (static_cast<std::size_t>(head.rows()) != targets.size()) {
    throw DataError("loss: " + std::to_string(targets.size()) + " targets for a batch of " +
                    std::to_string(head.rows()));
  }
  if (head.rows() == 0) throw DataError("loss: empty batch");
}

}  // namespace

double head_loss(LossKind kind, const Matrix& head, std::span<const int> targets) {
  check_rows(head, targets);
  double sum = 0.0;
  if (kind == LossKind::binary) {
    if (head.cols() != 1) throw DataError("binary loss expects a single-column head");
    for (Eigen::Index b = 0; b < head.rows(); ++b) {
      const int y = targets[static_cast<std::size_t>(b)];
      if (y != 0 && y != 1) throw DataError("binary target " + std::to_string(y) + " is not 0 or 1");
      const double p = head(b, 0);
      sum += y == 1 ? clamped_log(p) : clamped_log(1.0 - p);
    }
  } else {
    for (Eigen::Index b = 0; b < head.rows(); ++b) {
      const int y = targets[static_cast<std::size_t>(b)];
      if (y < 0 || y >= head.cols()) {
        throw DataError("class target " + std::to_string(y) + " outside [0, " + std::to_string(head.cols()) + ")");
      }
      sum += clamped_log(head(b, y));
    }
  }
  return -sum / static_cast<double>(head.rows());
}

double weighted_loss(LossKind kind, const HeadOutputs& heads, std::span<const int> targets,
                     const HeadWeights& weights) {
  double total = 0.0;
  for (int i = 0; i < kHeadCount; ++i) total += weights[i] * head_loss(kind, heads[i], targets);
  return total;
}

double loss_bfc(const HeadOutputs& heads, std::span<const int> targets, const HeadWeights& weights) {
  return weighted_loss(LossKind::binary, heads, targets, weights);
}

double loss_mfec(const HeadOutputs& heads, std::span<const int> targets, const HeadWeights& weights) {
  return weighted_loss(LossKind::sparse_categorical, heads, targets, weights);
}

}  // namespace fallcascade::net
