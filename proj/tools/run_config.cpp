#include "run_config.hpp"

#include <fstream>
#include <set>

#include "preimage/errors.hpp"
#include "preimage/kernel.hpp"
#include "preimage/model_io.hpp"
#include "preimage/ppm.hpp"

namespace preimage::cli {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

KernelChoice parse_kernel(const Json& j, const std::string& where) {
  reject_unknown(j, {"kind", "side", "parameter", "threshold"}, where);
  KernelChoice k;
  read(j, "kind", k.kind, where);
  read(j, "side", k.side, where);
  read(j, "parameter", k.parameter, where);
  read(j, "threshold", k.threshold, where);
  if (k.kind != "none" && k.kind != "dirac" && k.kind != "gaussian" && k.kind != "sobolev")
    throw ConfigError(where + ".kind: expected none, dirac, gaussian or sobolev");
  if (k.kind != "none" && (k.side == 0 || k.side % 2 == 0)) throw ConfigError(where + ".side: must be odd");
  if (k.parameter < 0.0) throw ConfigError(where + ".parameter: must be nonnegative");
  if (k.kind != "none" && k.kind != "dirac" && k.parameter == 0.0 && !(k.threshold > 0.0 && k.threshold < 1.0))
    throw ConfigError(where + ".threshold: must lie in (0, 1)");
  return k;
}

Json kernel_json(const KernelChoice& k) {
  return Json{{"kind", k.kind}, {"side", k.side}, {"parameter", k.parameter}, {"threshold", k.threshold}};
}

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + ": path is empty");
  if (!fs::is_regular_file(path)) throw ConfigError(what + ": file not found: " + path);
}

void require_output_dir(const std::string& path, const std::string& what) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) throw ConfigError(what + ": directory does not exist: " + parent.string());
}

}  // namespace

RunConfig parse_run_config(const Json& doc) {
  reject_unknown(doc, {"model", "objective", "regularizer", "demons", "schedule", "output"}, "config");
  RunConfig c;
  if (doc.contains("model")) {
    const auto& j = doc["model"];
    reject_unknown(j, {"path", "builtin", "init_seed"}, "model");
    read(j, "path", c.model.path, "model");
    read(j, "builtin", c.model.builtin, "model");
    read(j, "init_seed", c.model.init_seed, "model");
  }
  if (c.model.path.empty() == c.model.builtin.empty())
    throw ConfigError("model: exactly one of 'path' or 'builtin' must be given");
  if (!c.model.builtin.empty() && !is_builtin_architecture(c.model.builtin))
    throw ConfigError("model.builtin: unknown architecture '" + c.model.builtin + "'");

  if (doc.contains("objective")) {
    const auto& j = doc["objective"];
    reject_unknown(j, {"kind", "layer", "target_image", "unit", "p", "z_mode", "z"}, "objective");
    read(j, "kind", c.objective.kind, "objective");
    read(j, "layer", c.objective.layer, "objective");
    read(j, "target_image", c.objective.target_image, "objective");
    read(j, "unit", c.objective.unit, "objective");
    read(j, "p", c.objective.p, "objective");
    read(j, "z_mode", c.objective.z_mode, "objective");
    read(j, "z", c.objective.z, "objective");
  }
  if (c.objective.kind != "inversion" && c.objective.kind != "activation_max")
    throw ConfigError("objective.kind: expected inversion or activation_max");
  if (c.objective.p != 1 && c.objective.p != 2) throw ConfigError("objective.p: must be 1 or 2");
  if (c.objective.z_mode != "unit" && c.objective.z_mode != "auto")
    throw ConfigError("objective.z_mode: expected unit or auto");
  if (!(c.objective.z > 0.0)) throw ConfigError("objective.z: must be positive");
  if (c.objective.layer < -1) throw ConfigError("objective.layer: must be -1 or a layer index");

  if (doc.contains("regularizer")) {
    const auto& j = doc["regularizer"];
    reject_unknown(j, {"kind", "lambda", "epsilon"}, "regularizer");
    read(j, "kind", c.regularizer.kind, "regularizer");
    read(j, "lambda", c.regularizer.lambda, "regularizer");
    read(j, "epsilon", c.regularizer.epsilon, "regularizer");
  }
  if (c.regularizer.kind != "none" && c.regularizer.kind != "tv" && c.regularizer.kind != "dirichlet")
    throw ConfigError("regularizer.kind: expected none, tv or dirichlet");
  if (!(c.regularizer.lambda >= 0.0)) throw ConfigError("regularizer.lambda: must be nonnegative");
  if (!(c.regularizer.epsilon > 0.0)) throw ConfigError("regularizer.epsilon: must be positive");

  if (doc.contains("demons")) {
    const auto& j = doc["demons"];
    reject_unknown(j, {"elastic", "fluid", "tau", "steps", "clamp", "seed", "init_image"}, "demons");
    if (j.contains("elastic")) c.demons.elastic = parse_kernel(j["elastic"], "demons.elastic");
    if (j.contains("fluid")) c.demons.fluid = parse_kernel(j["fluid"], "demons.fluid");
    read(j, "tau", c.demons.tau, "demons");
    read(j, "steps", c.demons.steps, "demons");
    read(j, "clamp", c.demons.clamp, "demons");
    read(j, "seed", c.demons.seed, "demons");
    read(j, "init_image", c.demons.init_image, "demons");
  }
  if (!(c.demons.tau > 0.0)) throw ConfigError("demons.tau: must be positive");
  if (c.demons.steps == 0) throw ConfigError("demons.steps: must be positive");

  if (doc.contains("schedule")) {
    const auto& j = doc["schedule"];
    reject_unknown(j, {"octaves", "jitter_fraction"}, "schedule");
    read(j, "jitter_fraction", c.schedule.jitter_fraction, "schedule");
    if (j.contains("octaves")) {
      if (!j["octaves"].is_array()) throw ConfigError("schedule.octaves: expected an array");
      for (const auto& o : j["octaves"]) {
        reject_unknown(o, {"scale", "steps", "step_size"}, "schedule.octaves[]");
        Octave oc;
        read(o, "scale", oc.scale, "schedule.octaves[]");
        read(o, "steps", oc.steps, "schedule.octaves[]");
        read(o, "step_size", oc.step_size, "schedule.octaves[]");
        if (!(oc.scale > 0.0) || oc.steps == 0 || !(oc.step_size > 0.0))
          throw ConfigError("schedule.octaves[]: scale, steps and step_size must be positive");
        if (!c.schedule.octaves.empty() && oc.scale < c.schedule.octaves.back().scale)
          throw ConfigError("schedule.octaves: scales must be nondecreasing");
        c.schedule.octaves.push_back(oc);
      }
    }
  }
  if (!(c.schedule.jitter_fraction >= 0.0 && c.schedule.jitter_fraction <= 0.3))
    throw ConfigError("schedule.jitter_fraction: must lie in [0, 0.3]");

  if (doc.contains("output")) {
    const auto& j = doc["output"];
    reject_unknown(j, {"image", "metrics"}, "output");
    read(j, "image", c.output.image, "output");
    read(j, "metrics", c.output.metrics, "output");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path.string());
  Json doc;
  try {
    doc = Json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_run_config(doc);
}

Json to_json(const RunConfig& c) {
  Json octaves = Json::array();
  for (const auto& o : c.schedule.octaves)
    octaves.push_back(Json{{"scale", o.scale}, {"steps", o.steps}, {"step_size", o.step_size}});
  Json model = Json::object();
  if (!c.model.path.empty()) model["path"] = c.model.path;
  if (!c.model.builtin.empty()) model["builtin"] = c.model.builtin;
  model["init_seed"] = c.model.init_seed;
  return Json{
      {"model", model},
      {"objective",
       {{"kind", c.objective.kind},
        {"layer", c.objective.layer},
        {"target_image", c.objective.target_image},
        {"unit", c.objective.unit},
        {"p", c.objective.p},
        {"z_mode", c.objective.z_mode},
        {"z", c.objective.z}}},
      {"regularizer",
       {{"kind", c.regularizer.kind}, {"lambda", c.regularizer.lambda}, {"epsilon", c.regularizer.epsilon}}},
      {"demons",
       {{"elastic", kernel_json(c.demons.elastic)},
        {"fluid", kernel_json(c.demons.fluid)},
        {"tau", c.demons.tau},
        {"steps", c.demons.steps},
        {"clamp", c.demons.clamp},
        {"seed", c.demons.seed},
        {"init_image", c.demons.init_image}}},
      {"schedule", {{"octaves", octaves}, {"jitter_fraction", c.schedule.jitter_fraction}}},
      {"output", {{"image", c.output.image}, {"metrics", c.output.metrics}}},
  };
}

std::optional<Kernel> build_kernel(const KernelChoice& choice) {
  if (choice.kind == "none") return std::nullopt;
  if (choice.kind == "dirac") return dirac(choice.side);
  const KernelKind kind = kernel_kind_from_string(choice.kind);
  const double p = choice.parameter > 0.0 ? choice.parameter : fit_kernel_parameter(kind, choice.side, choice.threshold);
  return make_kernel(kind, choice.side, p);
}

PreparedRun prepare_run(const RunConfig& config, const std::string& expected_kind) {
  RunConfig r = config;
  if (r.objective.kind != expected_kind) {
    throw ConfigError("objective.kind is '" + r.objective.kind + "' but this command expects '" + expected_kind + "'");
  }

  // Every referenced path is checked before anything expensive happens.
  if (!r.model.path.empty()) require_file(r.model.path, "model.path");
  if (r.objective.kind == "inversion") require_file(r.objective.target_image, "objective.target_image");
  if (!r.demons.init_image.empty()) require_file(r.demons.init_image, "demons.init_image");
  require_output_dir(r.output.image, "output.image");
  require_output_dir(r.output.metrics, "output.metrics");

  Network net = r.model.path.empty() ? make_builtin(r.model.builtin, r.model.init_seed) : load_model(r.model.path);

  if (r.objective.layer == -1) {
    r.objective.layer = static_cast<long>(r.objective.kind == "inversion" ? net.deepest_pre_dense_layer()
                                                                          : net.num_layers() - 1);
  }
  if (static_cast<std::size_t>(r.objective.layer) >= net.num_layers())
    throw ConfigError("objective.layer: index " + std::to_string(r.objective.layer) + " out of range");
  const auto layer = static_cast<std::size_t>(r.objective.layer);

  ObjectiveSpec obj;
  obj.layer = layer;
  obj.p = r.objective.p;
  obj.normalization = r.objective.z;
  obj.z_mode = r.objective.z_mode == "auto" ? ZMode::automatic : ZMode::unit;
  if (r.objective.kind == "inversion") {
    obj.kind = ObjectiveKind::inversion;
    const Image target = read_ppm(r.objective.target_image);
    obj.target = forward(net, target, layer);
  } else {
    obj.kind = ObjectiveKind::activation_max;
    if (r.objective.unit >= net.output_shape(layer).size())
      throw ConfigError("objective.unit: index out of range for layer " + std::to_string(layer));
    obj.unit = r.objective.unit;
  }

  for (KernelChoice* k : {&r.demons.elastic, &r.demons.fluid}) {
    if ((k->kind == "gaussian" || k->kind == "sobolev") && k->parameter == 0.0)
      k->parameter = fit_kernel_parameter(kernel_kind_from_string(k->kind), k->side, k->threshold);
  }

  DemonsConfig demons;
  demons.elastic_kernel = build_kernel(r.demons.elastic);
  demons.fluid_kernel = build_kernel(r.demons.fluid);
  demons.step_size = r.demons.tau;
  demons.steps = r.demons.steps;
  demons.clamp = r.demons.clamp;
  demons.seed = r.demons.seed;
  demons.regularizer = {regularizer_kind_from_string(r.regularizer.kind), r.regularizer.lambda, r.regularizer.epsilon};

  if (r.schedule.octaves.empty()) r.schedule.octaves.push_back({1.0, r.demons.steps, r.demons.tau});
  OctaveSchedule schedule{r.schedule.octaves, r.schedule.jitter_fraction};

  std::optional<Image> init;
  if (!r.demons.init_image.empty()) init = read_ppm(r.demons.init_image);

  return PreparedRun{std::move(r), std::move(net), std::move(obj), std::move(demons), std::move(schedule),
                     std::move(init)};
}

}  // namespace preimage::cli
