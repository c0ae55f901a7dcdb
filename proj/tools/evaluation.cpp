#include "evaluation.hpp"

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include "preimage/dataset.hpp"
#include "preimage/errors.hpp"
#include "preimage/kernel.hpp"
#include "preimage/training.hpp"

namespace preimage::cli {

namespace {

constexpr double kSupportThreshold = 1e-4;
constexpr std::size_t kFluidSide = 9;
constexpr std::size_t kElasticSide = 5;
constexpr double kStepSize = 10.0;
constexpr double kTvLambda = 1e-3;
constexpr double kTvEpsilon = 1e-2;

const Kernel& fitted_sobolev(std::size_t side) {
  static std::mutex mu;
  static std::vector<std::pair<std::size_t, Kernel>> cache;
  std::lock_guard lock(mu);
  for (const auto& [s, k] : cache)
    if (s == side) return k;
  cache.emplace_back(side, sobolev_kernel(side, fit_kernel_parameter(KernelKind::sobolev, side, kSupportThreshold)));
  return cache.back().second;
}

}  // namespace

std::string preset_name(Preset preset) {
  switch (preset) {
    case Preset::tv:
      return "tv";
    case Preset::fluid_sobolev:
      return "fluid-sobolev";
    case Preset::fluid_elastic_sobolev:
      return "fluid-elastic-sobolev";
    case Preset::identity:
      return "identity";
  }
  return "?";
}

Preset preset_from_string(const std::string& name) {
  for (Preset p : {Preset::tv, Preset::fluid_sobolev, Preset::fluid_elastic_sobolev, Preset::identity})
    if (preset_name(p) == name) return p;
  throw ConfigError("unknown preset '" + name + "'");
}

std::size_t worker_count(std::size_t requested) {
  std::size_t n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("PREIMAGE_FORGE_THREADS")) n = std::strtoul(env, nullptr, 10);
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

DemonsConfig preset_config(Preset preset, std::size_t steps, std::uint64_t seed) {
  DemonsConfig cfg;
  cfg.step_size = kStepSize;
  cfg.steps = steps;
  cfg.seed = seed;
  cfg.clamp = true;
  switch (preset) {
    case Preset::tv:
      cfg.regularizer = {RegularizerKind::tv, kTvLambda, kTvEpsilon};
      break;
    case Preset::fluid_sobolev:
      cfg.fluid_kernel = fitted_sobolev(kFluidSide);
      break;
    case Preset::fluid_elastic_sobolev:
      cfg.fluid_kernel = fitted_sobolev(kFluidSide);
      cfg.elastic_kernel = fitted_sobolev(kElasticSide);
      break;
    case Preset::identity:
      break;
  }
  return cfg;
}

Image reconstruct(const Network& net, std::size_t layer, const Image& image, Preset preset, std::size_t steps,
                  std::uint64_t seed) {
  if (preset == Preset::identity) return image;
  ObjectiveSpec obj;
  obj.kind = ObjectiveKind::inversion;
  obj.layer = layer;
  obj.target = forward(net, image, layer);
  obj.p = 2;
  obj.z_mode = ZMode::automatic;
  return run(net, obj, preset_config(preset, steps, seed), OctaveSchedule{}).final;
}

EvaluationReport evaluate_cross(const Network& model_a, const Network& model_b, const EvaluationOptions& options) {
  if (!(model_a.input_shape() == model_b.input_shape()))
    throw DimensionError("evaluate: models have different input shapes");
  if (options.n_images == 0) throw ParameterError("evaluate: n_images must be positive");

  const std::size_t n_gen = (options.n_images + kNumClasses - 1) / kNumClasses * kNumClasses;
  const Dataset data = synth_dataset(options.seed, n_gen);
  const std::vector<Image> images(data.images.begin(), data.images.begin() + static_cast<long>(options.n_images));
  const std::vector<int> labels(data.labels.begin(), data.labels.begin() + static_cast<long>(options.n_images));

  EvaluationReport report;
  report.n_images = options.n_images;
  report.seed = options.seed;
  report.steps = options.steps;
  report.layer_a = options.layer_a ? model_a.resolve_layer(*options.layer_a) : model_a.deepest_pre_dense_layer();
  report.layer_b = options.layer_b ? model_b.resolve_layer(*options.layer_b) : model_b.deepest_pre_dense_layer();
  report.accuracy_a = accuracy(model_a, images, labels);
  report.accuracy_b = accuracy(model_b, images, labels);

  struct Item {
    bool a_to_b;
    Preset preset;
    std::size_t image;
  };
  std::vector<Item> items;
  for (bool a_to_b : {true, false})
    for (Preset p : options.presets)
      for (std::size_t i = 0; i < images.size(); ++i) items.push_back({a_to_b, p, i});

  std::vector<int> hit(items.size(), 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < items.size(); k = next++) {
      try {
        const Item& it = items[k];
        const Network& src = it.a_to_b ? model_a : model_b;
        const Network& dst = it.a_to_b ? model_b : model_a;
        const std::size_t layer = it.a_to_b ? report.layer_a : report.layer_b;
        // Each image gets its own noise seed so items are independent.
        const Image rec = reconstruct(src, layer, images[it.image], it.preset, options.steps, options.seed + it.image);
        hit[k] = predict(dst, rec) == labels[it.image] ? 1 : 0;
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::min(worker_count(options.threads), items.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);

  std::size_t k = 0;
  for (bool a_to_b : {true, false}) {
    for (Preset p : options.presets) {
      EvaluationEntry e{a_to_b ? "a_to_b" : "b_to_a", preset_name(p), 0, images.size(), 0.0};
      for (std::size_t i = 0; i < images.size(); ++i, ++k) e.correct += static_cast<std::size_t>(hit[k]);
      e.top1 = static_cast<double>(e.correct) / static_cast<double>(e.total);
      report.entries.push_back(e);
    }
  }
  return report;
}

nlohmann::ordered_json to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["n_images"] = r.n_images;
  j["seed"] = r.seed;
  j["steps"] = r.steps;
  j["layer_a"] = r.layer_a;
  j["layer_b"] = r.layer_b;
  j["accuracy_a"] = r.accuracy_a;
  j["accuracy_b"] = r.accuracy_b;
  j["results"] = nlohmann::ordered_json::array();
  for (const auto& e : r.entries) {
    j["results"].push_back(
        {{"direction", e.direction}, {"preset", e.preset}, {"correct", e.correct}, {"total", e.total}, {"top1", e.top1}});
  }
  return j;
}

}  // namespace preimage::cli
