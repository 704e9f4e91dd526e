#include "fallcascade/net/model_io.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "fallcascade/error.hpp"

namespace fallcascade::net {

using nlohmann::json;

namespace {

json to_array(const double* data, Eigen::Index size) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < size; ++i) arr.push_back(data[i]);
  return arr;
}

const json& field(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object()) throw LoadError(where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw LoadError(where + "." + key + ": missing");
  return *it;
}

long long int_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_number_integer()) throw LoadError(where + "." + key + ": expected an integer");
  return v.get<long long>();
}

std::string string_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = field(obj, key, where);
  if (!v.is_string()) throw LoadError(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const std::string& key, const std::string& where,
                            std::size_t expected) {
  const json& v = field(obj, key, where);
  if (!v.is_array()) throw LoadError(where + "." + key + ": expected an array");
  if (v.size() != expected) {
    throw LoadError(where + "." + key + ": expected " + std::to_string(expected) + " values, got " +
                    std::to_string(v.size()));
  }
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw LoadError(where + "." + key + ": non-numeric entry");
    out.push_back(x.get<double>());
  }
  return out;
}

Vector vector_field(const json& obj, const std::string& key, const std::string& where, int size) {
  const auto values = numbers(obj, key, where, static_cast<std::size_t>(size));
  return Eigen::Map<const Vector>(values.data(), size);
}

Matrix matrix_field(const json& obj, const std::string& key, const std::string& where, int rows, int cols) {
  const auto values = numbers(obj, key, where, static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  return Eigen::Map<const Matrix>(values.data(), rows, cols);
}

}  // namespace

json model_to_json(const Network& net) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["input_width"] = net.input_width();
  doc["class_count"] = net.class_count();
  doc["head_weights"] = json::array({net.head_weights()[0], net.head_weights()[1], net.head_weights()[2]});
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    json l;
    l["kind"] = std::string(to_string(layer.spec.kind));
    switch (layer.spec.kind) {
      case LayerKind::dense:
        l["width"] = layer.out_width;
        l["weights"] = to_array(layer.weights.data(), layer.weights.size());
        l["bias"] = to_array(layer.bias.data(), layer.bias.size());
        break;
      case LayerKind::batchnorm:
        l["width"] = layer.out_width;
        l["gamma"] = to_array(layer.gamma.data(), layer.gamma.size());
        l["beta"] = to_array(layer.beta.data(), layer.beta.size());
        l["running_mean"] = to_array(layer.running_mean.data(), layer.running_mean.size());
        l["running_var"] = to_array(layer.running_var.data(), layer.running_var.size());
        break;
      case LayerKind::head:
        l["width"] = net.class_count();
        l["activation"] = std::string(to_string(layer.spec.head_activation));
        l["projection"] = layer.spec.projection;
        if (layer.spec.projection) {
          l["weights"] = to_array(layer.weights.data(), layer.weights.size());
          l["bias"] = to_array(layer.bias.data(), layer.bias.size());
        }
        break;
      default:
        l["width"] = layer.out_width;
        break;
    }
    layers.push_back(std::move(l));
  }
  doc["layers"] = std::move(layers);
  return doc;
}

Network model_from_json(const json& doc) {
  const std::string root = "model";
  const long long version = int_field(doc, "format_version", root);
  if (version != kModelFormatVersion) {
    throw UnsupportedVersionError("model.format_version: unsupported version " + std::to_string(version) +
                                  " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const int input_width = static_cast<int>(int_field(doc, "input_width", root));
  const int class_count = static_cast<int>(int_field(doc, "class_count", root));
  if (input_width < 1) throw LoadError("model.input_width: must be at least 1");
  if (class_count < 1) throw LoadError("model.class_count: must be at least 1");
  const auto hw = numbers(doc, "head_weights", root, kHeadCount);

  const json& layer_docs = field(doc, "layers", root);
  if (!layer_docs.is_array()) throw LoadError("model.layers: expected an array");

  std::vector<Layer> layers;
  int width = input_width;
  for (std::size_t i = 0; i < layer_docs.size(); ++i) {
    const std::string where = "layers[" + std::to_string(i) + "]";
    const json& l = layer_docs[i];
    Layer layer;
    try {
      layer.spec.kind = layer_kind_from_string(string_field(l, "kind", where));
    } catch (const ConfigError& e) {
      throw LoadError(where + ".kind: " + e.message());
    }
    const int stored_width = static_cast<int>(int_field(l, "width", where));
    switch (layer.spec.kind) {
      case LayerKind::dense:
        layer.spec.width = stored_width;
        if (stored_width < 1) throw LoadError(where + ".width: must be at least 1");
        layer.weights = matrix_field(l, "weights", where, width, stored_width);
        layer.bias = vector_field(l, "bias", where, stored_width);
        width = stored_width;
        break;
      case LayerKind::batchnorm:
        if (stored_width != width) throw LoadError(where + ".width: expected " + std::to_string(width));
        layer.gamma = vector_field(l, "gamma", where, width);
        layer.beta = vector_field(l, "beta", where, width);
        layer.running_mean = vector_field(l, "running_mean", where, width);
        layer.running_var = vector_field(l, "running_var", where, width);
        break;
      case LayerKind::relu:
        if (stored_width != width) throw LoadError(where + ".width: expected " + std::to_string(width));
        break;
      case LayerKind::concat_input:
        width += input_width;
        if (stored_width != width) throw LoadError(where + ".width: expected " + std::to_string(width));
        break;
      case LayerKind::head: {
        if (stored_width != class_count) throw LoadError(where + ".width: expected " + std::to_string(class_count));
        try {
          layer.spec.head_activation = head_activation_from_string(string_field(l, "activation", where));
        } catch (const ConfigError& e) {
          throw LoadError(where + ".activation: " + e.message());
        }
        const json& projection = field(l, "projection", where);
        if (!projection.is_boolean()) throw LoadError(where + ".projection: expected a boolean");
        layer.spec.projection = projection.get<bool>();
        if (layer.spec.projection) {
          layer.weights = matrix_field(l, "weights", where, width, class_count);
          layer.bias = vector_field(l, "bias", where, class_count);
        }
        break;
      }
    }
    layers.push_back(std::move(layer));
  }

  try {
    Network net = assemble_network(input_width, class_count, HeadWeights{hw[0], hw[1], hw[2]}, std::move(layers));
    net.set_mode(Mode::infer);
    return net;
  } catch (const ConfigError& e) {
    throw LoadError("model.layers: " + e.message());
  }
}

void save_model(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out << model_to_json(net).dump() << '\n';
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError("model file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace fallcascade::net
