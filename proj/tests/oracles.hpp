#pragma once

// Test-only reference computations. Nothing here calls Network::backward or
// the report/cleaning code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fallcascade/net/loss.hpp"
#include "fallcascade/net/network.hpp"

namespace oracle {

using fallcascade::net::HeadWeights;
using fallcascade::net::LayerSpec;
using fallcascade::net::LossKind;
using fallcascade::net::Matrix;
using fallcascade::net::Network;

// Train-mode loss of the network on one batch.
inline double batch_loss(const Network& net, const Matrix& x, const std::vector<int>& y, LossKind kind,
                         const HeadWeights& w) {
  const auto cache = net.forward(x);
  return fallcascade::net::weighted_loss(kind, cache.heads, y, w);
}

// Central differences over every trainable parameter.
inline std::vector<std::vector<double>> finite_difference_gradients(Network net, const Matrix& x,
                                                                    const std::vector<int>& y, LossKind kind,
                                                                    const HeadWeights& w, double step = 1e-4) {
  std::vector<std::vector<double>> out;
  auto params = net.parameters();
  for (auto tensor : params) {
    std::vector<double> g(tensor.size());
    for (std::size_t k = 0; k < tensor.size(); ++k) {
      const double saved = tensor[k];
      tensor[k] = saved + step;
      const double up = batch_loss(net, x, y, kind, w);
      tensor[k] = saved - step;
      const double down = batch_loss(net, x, y, kind, w);
      tensor[k] = saved;
      g[k] = (up - down) / (2.0 * step);
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Random architecture with 1-3 dense layers of width <= 8 and three heads.
inline std::vector<LayerSpec> random_small_architecture(std::mt19937_64& rng, int classes, bool allow_batchnorm) {
  const auto act = fallcascade::net::activation_for(classes);
  std::uniform_int_distribution<int> dense_count(1, 3);
  std::uniform_int_distribution<int> width(2, 8);
  std::bernoulli_distribution coin(0.5);
  const int d = dense_count(rng);

  // Heads per block, the last block always carrying at least one.
  std::vector<int> heads(static_cast<std::size_t>(d), 0);
  heads.back() = 1;
  for (int h = 1; h < 3; ++h) heads[std::uniform_int_distribution<int>(0, d - 1)(rng)]++;

  std::vector<LayerSpec> arch;
  for (int b = 0; b < d; ++b) {
    if (b > 0 && coin(rng)) arch.push_back(LayerSpec::concat_input());
    arch.push_back(LayerSpec::dense(width(rng)));
    if (allow_batchnorm && coin(rng)) arch.push_back(LayerSpec::batchnorm());
    arch.push_back(LayerSpec::relu());
    for (int h = 0; h < heads[static_cast<std::size_t>(b)]; ++h) arch.push_back(LayerSpec::head(act));
  }
  return arch;
}

// Perturbs batchnorm gamma/beta away from their 1/0 initialization so the
// check covers general parameter values.
inline void jitter_parameters(Network& net, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> noise(0.0, scale);
  for (auto tensor : net.parameters()) {
    for (auto& v : tensor) v += noise(rng);
  }
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double sigma = 1.0) {
  std::normal_distribution<double> dist(0.0, sigma);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

}  // namespace oracle
