#include "semdrive/checkpoint.hpp"

#include <cmath>

#include "json.hpp"
#include "semdrive/file_util.hpp"

namespace semdrive {

using nlohmann::json;

std::string checkpoint_to_json(const NetworkParams& params) {
  json layers = json::array();
  for (const Layer& l : params.layers) {
    json data = json::array();
    for (float v : l.data) data.push_back(static_cast<double>(v));
    layers.push_back({{"name", l.name}, {"shape", l.shape}, {"data", std::move(data)}});
  }
  const json doc = {{"version", kCheckpointVersion}, {"arch", params.arch.id()}, {"layers", layers}};
  return doc.dump() + "\n";
}

NetworkParams checkpoint_from_json(std::string_view text, const std::optional<NetArch>& expected) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw std::invalid_argument("checkpoint: top level must be an object");
  if (!doc.contains("version") || doc["version"] != kCheckpointVersion) {
    throw std::invalid_argument("checkpoint.version: expected 1");
  }
  if (!doc.contains("arch") || !doc["arch"].is_string()) {
    throw std::invalid_argument("checkpoint.arch: missing architecture id");
  }
  const NetArch arch = NetArch::from_id(doc["arch"].get<std::string>());
  if (expected && arch != *expected) {
    throw std::invalid_argument("checkpoint.arch: " + arch.id() + " is incompatible with " +
                                expected->id());
  }

  NetworkParams params = zero_params(arch);
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw std::invalid_argument("checkpoint.layers: expected an array");
  }
  const json& layers = doc["layers"];
  if (layers.size() != params.layers.size()) {
    throw std::invalid_argument("checkpoint.layers: expected " +
                                std::to_string(params.layers.size()) + " layers, found " +
                                std::to_string(layers.size()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    Layer& dst = params.layers[i];
    const json& src = layers[i];
    const std::string where = "checkpoint layer " + dst.name;
    if (!src.is_object() || !src.contains("name") || src["name"] != dst.name) {
      throw std::invalid_argument("checkpoint.layers[" + std::to_string(i) + "]: expected layer " +
                                  dst.name);
    }
    if (!src.contains("shape") || !src["shape"].is_array() ||
        src["shape"].get<std::vector<int>>() != dst.shape) {
      throw std::invalid_argument(where + ": shape mismatch");
    }
    if (!src.contains("data") || !src["data"].is_array() || src["data"].size() != dst.data.size()) {
      throw std::invalid_argument(where + ": expected " + std::to_string(dst.data.size()) +
                                  " values");
    }
    for (std::size_t k = 0; k < dst.data.size(); ++k) {
      const json& v = src["data"][k];
      if (!v.is_number()) throw std::invalid_argument(where + ": non-numeric value");
      const auto f = static_cast<float>(v.get<double>());
      if (!std::isfinite(f)) throw std::invalid_argument(where + ": non-finite value");
      dst.data[k] = f;
    }
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params) {
  write_file_atomic(path, checkpoint_to_json(params));
}

NetworkParams load_checkpoint(const std::filesystem::path& path,
                              const std::optional<NetArch>& expected) {
  return checkpoint_from_json(read_file(path), expected);
}

}  // namespace semdrive
