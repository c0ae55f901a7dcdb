#include "preimage/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "preimage/errors.hpp"

namespace preimage {

namespace {

using nlohmann::json;

constexpr char kMagic[8] = {'M', 'C', 'N', 'N', '0', '0', '0', '1'};

json layer_to_json(const LayerSpec& s) {
  json j;
  j["kind"] = std::string(to_string(s.kind));
  switch (s.kind) {
    case LayerKind::conv:
      j["out_channels"] = s.out_channels;
      j["kernel_side"] = s.kernel_side;
      j["stride"] = s.stride;
      break;
    case LayerKind::dense:
      j["out_features"] = s.out_features;
      break;
    default:
      break;
  }
  return j;
}

LayerSpec layer_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "conv")
    return LayerSpec::conv(j.at("out_channels").get<std::size_t>(), j.at("kernel_side").get<std::size_t>(),
                           j.at("stride").get<std::size_t>());
  if (kind == "relu") return LayerSpec::relu();
  if (kind == "maxpool") return LayerSpec::maxpool();
  if (kind == "avgpool_global") return LayerSpec::avgpool_global();
  if (kind == "dense") return LayerSpec::dense(j.at("out_features").get<std::size_t>());
  if (kind == "affine_norm") return LayerSpec::affine_norm();
  throw FormatError("model: unknown layer kind '" + kind + "'");
}

struct TensorRef {
  std::string name;
  std::vector<std::size_t> shape;
  const std::vector<double>* values;
};

std::vector<TensorRef> tensor_list(const Network& net) {
  std::vector<TensorRef> out;
  Shape in = net.input_shape();
  for (std::size_t i = 0; i < net.num_layers(); ++i) {
    const auto& s = net.layers()[i];
    const auto& p = net.params()[i];
    const std::string prefix = "layer" + std::to_string(i) + ".";
    switch (s.kind) {
      case LayerKind::conv:
        out.push_back({prefix + "weight", {s.out_channels, in.channels, s.kernel_side, s.kernel_side}, &p.weight});
        out.push_back({prefix + "bias", {s.out_channels}, &p.bias});
        break;
      case LayerKind::dense:
        out.push_back({prefix + "weight", {s.out_features, in.size()}, &p.weight});
        out.push_back({prefix + "bias", {s.out_features}, &p.bias});
        break;
      case LayerKind::affine_norm:
        out.push_back({prefix + "scale", {in.channels}, &p.weight});
        out.push_back({prefix + "shift", {in.channels}, &p.bias});
        break;
      default:
        break;
    }
    in = net.output_shape(i);
  }
  return out;
}

json manifest_json(const Network& net) {
  json m;
  const Shape& s = net.input_shape();
  m["input_shape"] = {s.height, s.width, s.channels};
  m["layers"] = json::array();
  for (const auto& l : net.layers()) m["layers"].push_back(layer_to_json(l));
  m["seed"] = net.seed();
  m["tensors"] = json::array();
  for (const auto& t : tensor_list(net)) m["tensors"].push_back({{"name", t.name}, {"shape", t.shape}});
  return m;
}

void put_u64_le(std::string& out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

std::uint64_t get_u64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
  return v;
}

}  // namespace

std::string model_manifest(const Network& net) { return manifest_json(net).dump(); }

std::string serialize_model(const Network& net) {
  const std::string manifest = model_manifest(net);
  std::string out(kMagic, sizeof kMagic);
  const auto len = static_cast<std::uint32_t>(manifest.size());
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((len >> (8 * b)) & 0xff));
  out += manifest;
  for (const auto& t : tensor_list(net))
    for (double v : *t.values) put_u64_le(out, std::bit_cast<std::uint64_t>(v));
  return out;
}

Network deserialize_model(const std::string& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
    throw FormatError("model: bad magic");
  }
  const auto* u = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t len = u[8] | (u[9] << 8) | (u[10] << 16) | (static_cast<std::uint32_t>(u[11]) << 24);
  if (bytes.size() < 12 + static_cast<std::size_t>(len)) throw FormatError("model: truncated manifest");

  json m;
  try {
    m = json::parse(bytes.substr(12, len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: manifest is not valid JSON: ") + e.what());
  }

  try {
    const auto shape = m.at("input_shape").get<std::vector<std::size_t>>();
    if (shape.size() != 3) throw FormatError("model: input_shape must have 3 entries");
    std::vector<LayerSpec> layers;
    for (const auto& l : m.at("layers")) layers.push_back(layer_from_json(l));
    const auto seed = m.at("seed").get<std::uint64_t>();

    // Build a skeleton to learn the expected tensor list, then fill it from the payload.
    const Network skeleton(Shape{shape[0], shape[1], shape[2]}, layers, seed);
    const auto expected = tensor_list(skeleton);
    const auto& listed = m.at("tensors");
    if (listed.size() != expected.size()) throw FormatError("model: tensor count mismatch");

    std::vector<LayerParams> params = zero_like(skeleton.params());
    std::size_t pos = 12 + len;
    std::size_t t = 0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      for (auto* vec : {&params[i].weight, &params[i].bias}) {
        if (vec->empty()) continue;
        const auto& entry = listed[t];
        if (entry.at("name").get<std::string>() != expected[t].name ||
            entry.at("shape").get<std::vector<std::size_t>>() != expected[t].shape) {
          throw FormatError("model: tensor '" + expected[t].name + "' does not match manifest");
        }
        if (bytes.size() < pos + 8 * vec->size()) throw FormatError("model: truncated payload");
        for (double& v : *vec) {
          v = std::bit_cast<double>(get_u64_le(u + pos));
          pos += 8;
        }
        ++t;
      }
    }
    if (pos != bytes.size()) throw FormatError("model: trailing bytes after payload");
    return Network(Shape{shape[0], shape[1], shape[2]}, std::move(layers), seed, std::move(params));
  } catch (const json::exception& e) {
    throw FormatError(std::string("model: malformed manifest: ") + e.what());
  } catch (const DimensionError& e) {
    throw FormatError(std::string("model: inconsistent architecture: ") + e.what());
  } catch (const DataError& e) {
    throw FormatError(std::string("model: ") + e.what());
  }
}

void save_model(const Network& net, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(net);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("save_model: cannot open " + path.string());
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw FormatError("save_model: write failed for " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("load_model: cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace preimage
