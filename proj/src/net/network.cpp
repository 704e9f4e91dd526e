#include "fallcascade/net/network.hpp"

#include <cmath>
#include <random>
#include <string>

#include "fallcascade/error.hpp"

namespace fallcascade::net {

namespace {

Matrix sigmoid(const Matrix& logits) {
  return logits.unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double peak = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - peak).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

std::string layer_name(std::size_t index, const LayerSpec& spec) {
  return "layer " + std::to_string(index) + " (" + std::string(to_string(spec.kind)) + ")";
}

// Walks the architecture, fixing trunk widths and rejecting inconsistent specs.
std::vector<Layer> plan_layers(int input_width, int class_count, const std::vector<LayerSpec>& arch) {
  if (input_width < 1) throw ConfigError("input width must be at least 1");
  if (class_count < 1) throw ConfigError("class count must be at least 1");

  std::vector<Layer> layers;
  layers.reserve(arch.size());
  int width = input_width;
  int heads = 0;
  int dense = 0;
  std::size_t last_head = 0;
  HeadActivation activation = activation_for(class_count);
  bool activation_seen = false;

  for (std::size_t i = 0; i < arch.size(); ++i) {
    const LayerSpec& spec = arch[i];
    Layer layer;
    layer.spec = spec;
    layer.in_width = width;
    switch (spec.kind) {
      case LayerKind::dense:
        if (spec.width < 1) throw ConfigError(layer_name(i, spec) + ": width must be at least 1");
        width = spec.width;
        ++dense;
        break;
      case LayerKind::relu:
      case LayerKind::batchnorm:
        break;
      case LayerKind::concat_input:
        width += input_width;
        break;
      case LayerKind::head:
        if (activation_seen && spec.head_activation != activation) {
          throw ConfigError(layer_name(i, spec) + ": all heads must share one activation");
        }
        activation = spec.head_activation;
        activation_seen = true;
        if (!spec.projection && width != class_count) {
          throw ConfigError(layer_name(i, spec) + ": head without projection needs incoming width " +
                            std::to_string(class_count) + ", got " + std::to_string(width));
        }
        ++heads;
        last_head = i;
        break;
    }
    layer.out_width = width;
    layers.push_back(std::move(layer));
  }

  if (heads != kHeadCount) {
    throw ConfigError("architecture must contain exactly 3 heads, found " + std::to_string(heads));
  }
  if (dense < 1) throw ConfigError("architecture must contain at least one dense layer");
  if (last_head + 1 != arch.size()) throw ConfigError("architecture ends with layers that feed no head");
  if (activation == HeadActivation::sigmoid && class_count != 1) {
    throw ConfigError("sigmoid heads are single-output; class count must be 1");
  }
  if (activation == HeadActivation::softmax && class_count < 2) {
    throw ConfigError("softmax heads need at least 2 classes");
  }
  return layers;
}

}  // namespace

HeadWeights normalize_head_weights(const HeadWeights& raw) {
  double sum = 0.0;
  for (double w : raw) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("head weights must be positive and finite");
    sum += w;
  }
  HeadWeights out{};
  for (int i = 0; i < kHeadCount; ++i) out[i] = raw[i] / sum;
  return out;
}

void Network::set_head_weights(const HeadWeights& weights) {
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("head weights must be non-negative and finite");
  }
  head_weights_ = weights;
}

bool Network::has_batchnorm() const {
  for (const auto& layer : layers_) {
    if (layer.spec.kind == LayerKind::batchnorm) return true;
  }
  return false;
}

std::vector<std::span<double>> Network::parameters() {
  std::vector<std::span<double>> out;
  for (auto& layer : layers_) {
    for (auto* tensor : {&layer.weights}) {
      if (tensor->size() > 0) out.emplace_back(tensor->data(), static_cast<std::size_t>(tensor->size()));
    }
    for (auto* tensor : {&layer.bias, &layer.gamma, &layer.beta}) {
      if (tensor->size() > 0) out.emplace_back(tensor->data(), static_cast<std::size_t>(tensor->size()));
    }
  }
  return out;
}

std::vector<std::span<const double>> Network::parameters() const {
  std::vector<std::span<const double>> out;
  for (auto span : const_cast<Network*>(this)->parameters()) out.emplace_back(span.data(), span.size());
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (auto span : parameters()) n += span.size();
  return n;
}

std::vector<std::span<const double>> Gradients::tensors() const {
  std::vector<std::span<const double>> out;
  for (const auto& layer : layers) {
    if (layer.weights.size() > 0) out.emplace_back(layer.weights.data(), static_cast<std::size_t>(layer.weights.size()));
    for (const auto* tensor : {&layer.bias, &layer.gamma, &layer.beta}) {
      if (tensor->size() > 0) out.emplace_back(tensor->data(), static_cast<std::size_t>(tensor->size()));
    }
  }
  return out;
}

ForwardCache Network::forward(const Matrix& batch) const {
  if (layers_.empty()) throw InternalError("forward on an unbuilt network");
  if (batch.cols() != input_width_) {
    throw DataError("batch width " + std::to_string(batch.cols()) + " does not match network input width " +
                    std::to_string(input_width_));
  }
  if (batch.rows() == 0) throw DataError("empty batch");
  if (!batch.allFinite()) throw DataError("batch contains non-finite values");
  if (mode_ == Mode::train && batch.rows() < 2 && has_batchnorm()) {
    throw DataError("train-mode batchnorm needs at least 2 rows");
  }

  const Eigen::Index rows = batch.rows();
  ForwardCache cache;
  cache.owner = this;
  cache.mode = mode_;
  cache.input = batch;
  cache.layer_inputs.resize(layers_.size());
  cache.normalized.resize(layers_.size());
  cache.inv_std.resize(layers_.size());
  cache.batch_mean.resize(layers_.size());
  cache.batch_var.resize(layers_.size());

  Matrix x = batch;
  int head = 0;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& layer = layers_[i];
    switch (layer.spec.kind) {
      case LayerKind::dense: {
        Matrix out = x * layer.weights;
        out.rowwise() += layer.bias.transpose();
        cache.layer_inputs[i] = std::move(x);
        x = std::move(out);
        break;
      }
      case LayerKind::relu: {
        Matrix out = x.cwiseMax(0.0);
        cache.layer_inputs[i] = std::move(x);
        x = std::move(out);
        break;
      }
      case LayerKind::batchnorm: {
        if (mode_ == Mode::infer) {
          x = batchnorm_infer(layer, x);
          break;
        }
        const RowVector mean = x.colwise().mean();
        x.rowwise() -= mean;
        const RowVector var = x.array().square().colwise().mean();
        const RowVector inv = (var.array() + kBatchnormEpsilon).rsqrt();
        x.array().rowwise() *= inv.array();
        cache.normalized[i] = x;
        x.array().rowwise() *= layer.gamma.transpose().array();
        x.rowwise() += layer.beta.transpose();
        cache.inv_std[i] = inv;
        cache.batch_mean[i] = mean;
        cache.batch_var[i] = var;
        break;
      }
      case LayerKind::concat_input: {
        Matrix out(rows, x.cols() + batch.cols());
        out << x, batch;
        x = std::move(out);
        break;
      }
      case LayerKind::head: {
        Matrix logits;
        if (layer.spec.projection) {
          logits = x * layer.weights;
          logits.rowwise() += layer.bias.transpose();
          cache.layer_inputs[i] = x;
        } else {
          logits = x;
        }
        cache.heads[head++] =
            layer.spec.head_activation == HeadActivation::sigmoid ? sigmoid(logits) : softmax(logits);
        break;
      }
    }
  }
  return cache;
}

ForwardResult Network::predict(const Matrix& batch) const {
  ForwardCache cache = forward(batch);
  return ForwardResult{std::move(cache.heads)};
}

Gradients Network::backward(const ForwardCache& cache, std::span<const int> targets, LossKind kind,
                            const HeadWeights& weights) const {
  if (cache.owner != this || cache.layer_inputs.size() != layers_.size()) {
    throw InternalError("backward called with a cache from a different network");
  }
  if (cache.mode != Mode::train) throw InternalError("backward needs a train-mode forward cache");
  const bool binary = kind == LossKind::binary;
  if (binary != (activation_ == HeadActivation::sigmoid)) {
    throw InternalError("loss kind does not match the head activation");
  }
  const Eigen::Index rows = cache.input.rows();
  if (static_cast<std::size_t>(rows) != targets.size()) {
    throw DataError("backward: " + std::to_string(targets.size()) + " targets for a batch of " +
                    std::to_string(rows));
  }

  // Target matrix shared by all heads; for the sigmoid+BCE and softmax+CE
  // pairs the gradient w.r.t. the logits is (p - target).
  Matrix target = Matrix::Zero(rows, class_count_);
  for (Eigen::Index b = 0; b < rows; ++b) {
    const int y = targets[static_cast<std::size_t>(b)];
    if (binary) {
      if (y != 0 && y != 1) throw DataError("binary target " + std::to_string(y) + " is not 0 or 1");
      target(b, 0) = y;
    } else {
      if (y < 0 || y >= class_count_) throw DataError("class target " + std::to_string(y) + " out of range");
      target(b, y) = 1.0;
    }
  }

  Gradients grads;
  grads.layers.resize(layers_.size());
  Matrix g = Matrix::Zero(rows, layers_.back().out_width);
  int head = kHeadCount;
  const double inv_rows = 1.0 / static_cast<double>(rows);

  for (std::size_t idx = layers_.size(); idx-- > 0;) {
    const Layer& layer = layers_[idx];
    LayerGradients& lg = grads.layers[idx];
    switch (layer.spec.kind) {
      case LayerKind::head: {
        --head;
        const Matrix dlogits = (cache.heads[head] - target) * (weights[head] * inv_rows);
        if (layer.spec.projection) {
          lg.weights = cache.layer_inputs[idx].transpose() * dlogits;
          lg.bias = dlogits.colwise().sum().transpose();
          g.noalias() += dlogits * layer.weights.transpose();
        } else {
          g += dlogits;
        }
        break;
      }
      case LayerKind::relu:
        g = (cache.layer_inputs[idx].array() > 0.0).select(g, 0.0);
        break;
      case LayerKind::batchnorm: {
        const Matrix& xhat = cache.normalized[idx];
        lg.gamma = (g.array() * xhat.array()).colwise().sum().transpose();
        lg.beta = g.colwise().sum().transpose();
        Matrix dxhat = g.array().rowwise() * layer.gamma.transpose().array();
        const RowVector sum_dxhat = dxhat.colwise().sum();
        const RowVector sum_dxhat_xhat = (dxhat.array() * xhat.array()).colwise().sum();
        dxhat *= static_cast<double>(rows);
        dxhat.rowwise() -= sum_dxhat;
        dxhat.array() -= xhat.array().rowwise() * sum_dxhat_xhat.array();
        dxhat.array().rowwise() *= (cache.inv_std[idx].array() * inv_rows);
        g = std::move(dxhat);
        break;
      }
      case LayerKind::concat_input:
        g = g.leftCols(layer.in_width).eval();
        break;
      case LayerKind::dense: {
        const Matrix& input = cache.layer_inputs[idx];
        lg.weights = input.transpose() * g;
        lg.bias = g.colwise().sum().transpose();
        if (idx > 0) g = g * layer.weights.transpose();
        break;
      }
    }
  }
  return grads;
}

void Network::commit_batch_statistics(const ForwardCache& cache) {
  if (cache.owner != this || cache.layer_inputs.size() != layers_.size()) {
    throw InternalError("batch statistics from a different network");
  }
  if (cache.mode != Mode::train) return;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    Layer& layer = layers_[i];
    if (layer.spec.kind != LayerKind::batchnorm) continue;
    layer.running_mean = kBatchnormMomentum * layer.running_mean +
                         (1.0 - kBatchnormMomentum) * cache.batch_mean[i].transpose();
    layer.running_var = kBatchnormMomentum * layer.running_var +
                        (1.0 - kBatchnormMomentum) * cache.batch_var[i].transpose();
  }
}

Network build_network(int input_width, int class_count, const std::vector<LayerSpec>& arch, std::uint64_t seed) {
  std::vector<Layer> layers = plan_layers(input_width, class_count, arch);
  std::mt19937_64 rng(seed);

  const auto he_uniform = [&rng](int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix w(fan_in, fan_out);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    return w;
  };

  for (auto& layer : layers) {
    switch (layer.spec.kind) {
      case LayerKind::dense:
        layer.weights = he_uniform(layer.in_width, layer.out_width);
        layer.bias = Vector::Zero(layer.out_width);
        break;
      case LayerKind::head:
        if (layer.spec.projection) {
          layer.weights = he_uniform(layer.in_width, class_count);
          layer.bias = Vector::Zero(class_count);
        }
        break;
      case LayerKind::batchnorm:
        layer.gamma = Vector::Ones(layer.in_width);
        layer.beta = Vector::Zero(layer.in_width);
        layer.running_mean = Vector::Zero(layer.in_width);
        layer.running_var = Vector::Ones(layer.in_width);
        break;
      default:
        break;
    }
  }

  Network net;
  net.input_width_ = input_width;
  net.class_count_ = class_count;
  net.activation_ = activation_for(class_count);
  net.layers_ = std::move(layers);
  return net;
}

Network assemble_network(int input_width, int class_count, HeadWeights head_weights, std::vector<Layer> layers) {
  std::vector<LayerSpec> arch;
  arch.reserve(layers.size());
  for (const auto& layer : layers) arch.push_back(layer.spec);
  std::vector<Layer> planned = plan_layers(input_width, class_count, arch);

  const auto expect = [](bool ok, std::size_t i, const char* what) {
    if (!ok) throw LoadError("layers[" + std::to_string(i) + "]." + what + ": shape mismatch");
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Layer& layer = layers[i];
    layer.in_width = planned[i].in_width;
    layer.out_width = planned[i].out_width;
    switch (layer.spec.kind) {
      case LayerKind::dense:
        expect(layer.weights.rows() == layer.in_width && layer.weights.cols() == layer.out_width, i, "weights");
        expect(layer.bias.size() == layer.out_width, i, "bias");
        break;
      case LayerKind::head:
        if (layer.spec.projection) {
          expect(layer.weights.rows() == layer.in_width && layer.weights.cols() == class_count, i, "weights");
          expect(layer.bias.size() == class_count, i, "bias");
        }
        break;
      case LayerKind::batchnorm:
        expect(layer.gamma.size() == layer.in_width, i, "gamma");
        expect(layer.beta.size() == layer.in_width, i, "beta");
        expect(layer.running_mean.size() == layer.in_width, i, "running_mean");
        expect(layer.running_var.size() == layer.in_width, i, "running_var");
        expect(layer.running_mean.allFinite() && layer.running_var.allFinite(), i, "running statistics");
        break;
      default:
        break;
    }
  }

  Network net;
  net.input_width_ = input_width;
  net.class_count_ = class_count;
  net.activation_ = activation_for(class_count);
  net.set_head_weights(head_weights);
  net.layers_ = std::move(layers);
  return net;
}

}  // namespace fallcascade::net
