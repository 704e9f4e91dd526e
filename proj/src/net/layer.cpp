#include "fallcascade/net/layer.hpp"

#include "fallcascade/error.hpp"

namespace fallcascade::net {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::relu: return "relu";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::concat_input: return "concat_input";
    case LayerKind::head: return "head";
  }
  return "unknown";
}

std::string_view to_string(HeadActivation activation) {
  return activation == HeadActivation::sigmoid ? "sigmoid" : "softmax";
}

LayerKind layer_kind_from_string(std::string_view name) {
  for (auto kind : {LayerKind::dense, LayerKind::relu, LayerKind::batchnorm, LayerKind::concat_input, LayerKind::head}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown layer kind '" + std::string(name) + "'");
}

HeadActivation head_activation_from_string(std::string_view name) {
  if (name == "sigmoid") return HeadActivation::sigmoid;
  if (name == "softmax") return HeadActivation::softmax;
  throw ConfigError("unknown head activation '" + std::string(name) + "'");
}

HeadActivation activation_for(int class_count) {
  return class_count == 1 ? HeadActivation::sigmoid : HeadActivation::softmax;
}

std::vector<LayerSpec> default_architecture(int class_count) {
  const auto act = activation_for(class_count);
  const auto block = [](std::vector<LayerSpec>& arch, int width) {
    arch.push_back(LayerSpec::dense(width));
    arch.push_back(LayerSpec::batchnorm());
    arch.push_back(LayerSpec::relu());
  };
  std::vector<LayerSpec> arch;
  block(arch, 256);
  block(arch, 256);
  block(arch, 128);
  arch.push_back(LayerSpec::head(act));
  arch.push_back(LayerSpec::concat_input());
  block(arch, 128);
  block(arch, 64);
  block(arch, 64);
  arch.push_back(LayerSpec::head(act));
  arch.push_back(LayerSpec::concat_input());
  block(arch, 32);
  block(arch, 32);
  arch.push_back(LayerSpec::dense(class_count));
  arch.push_back(LayerSpec::head(act, /*projection=*/false));
  return arch;
}

Matrix batchnorm_infer(const Layer& layer, const Matrix& input) {
  const RowVector scale =
      (layer.gamma.array() / (layer.running_var.array() + kBatchnormEpsilon).sqrt()).transpose();
  const RowVector shift = layer.beta.transpose() - (layer.running_mean.transpose().array() * scale.array()).matrix();
  Matrix out = input.array().rowwise() * scale.array();
  out.rowwise() += shift;
  return out;
}

}  // namespace fallcascade::net
