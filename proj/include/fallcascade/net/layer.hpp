#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace fallcascade::net {

// Batches are row-major: one sample per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

enum class LayerKind { dense, relu, batchnorm, concat_input, head };
enum class HeadActivation { sigmoid, softmax };

std::string_view to_string(LayerKind kind);
std::string_view to_string(HeadActivation activation);
LayerKind layer_kind_from_string(std::string_view name);
HeadActivation head_activation_from_string(std::string_view name);

// Architecture element. A head branches off the trunk: it reads the current
// trunk features and leaves them unchanged. With `projection` the head owns a
// dense map to the class width; without it the incoming features are the logits.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  int width = 0;  // dense units; ignored for other kinds
  HeadActivation head_activation = HeadActivation::sigmoid;
  bool projection = true;

  static LayerSpec dense(int width) { return {LayerKind::dense, width, HeadActivation::sigmoid, true}; }
  static LayerSpec relu() { return {LayerKind::relu, 0, HeadActivation::sigmoid, true}; }
  static LayerSpec batchnorm() { return {LayerKind::batchnorm, 0, HeadActivation::sigmoid, true}; }
  static LayerSpec concat_input() { return {LayerKind::concat_input, 0, HeadActivation::sigmoid, true}; }
  static LayerSpec head(HeadActivation activation, bool projection = true) {
    return {LayerKind::head, 0, activation, projection};
  }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

// Nine dense layers tapering 256-256-128-128-64-64-32-32-classes, batchnorm and
// ReLU after the first eight, the raw input concatenated in front of dense
// layers 4 and 7, and heads after dense layers 3, 6 and 9.
std::vector<LayerSpec> default_architecture(int class_count);

// Sigmoid for a single output, softmax otherwise.
HeadActivation activation_for(int class_count);

// A layer with its parameters. `in_width`/`out_width` describe the trunk; for a
// head both equal the incoming trunk width.
struct Layer {
  LayerSpec spec;
  int in_width = 0;
  int out_width = 0;

  Matrix weights;  // [in x out] for dense and projecting heads
  Vector bias;
  Vector gamma, beta, running_mean, running_var;  // batchnorm
};

inline constexpr double kBatchnormEpsilon = 1e-5;
inline constexpr double kBatchnormMomentum = 0.9;

// Inference-mode batchnorm using the frozen running statistics.
Matrix batchnorm_infer(const Layer& layer, const Matrix& input);

}  // namespace fallcascade::net
