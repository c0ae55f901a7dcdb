#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "evaluation.hpp"
#include "preimage/dataset.hpp"
#include "preimage/demons.hpp"
#include "preimage/errors.hpp"
#include "preimage/kernel.hpp"
#include "preimage/model_io.hpp"
#include "preimage/ppm.hpp"
#include "preimage/training.hpp"
#include "run_config.hpp"

namespace preimage::cli {

namespace fs = std::filesystem;

namespace {

struct KernelArgs {
  std::string kind;
  std::size_t side = 0;
  std::optional<double> sigma;
  std::optional<double> gamma;
  std::optional<double> threshold;
  std::string out;
};

struct TrainArgs {
  std::string arch;
  std::uint64_t dataset_seed = 0;
  std::size_t n_examples = 600;
  std::string out;
  std::string report;
  std::string dump_dataset;
  TrainOptions options;
};

struct RunArgs {
  std::string config;
  bool dry_run = false;
};

struct EvaluateArgs {
  std::string model_a;
  std::string model_b;
  std::string out;
  std::vector<std::string> presets{"tv", "fluid-sobolev", "fluid-elastic-sobolev"};
  long layer_a = -1;
  long layer_b = -1;
  EvaluationOptions options;
};

std::string kernel_csv(const Kernel& k) {
  std::string s = std::to_string(k.side()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < k.side(); ++i) {
    for (std::size_t j = 0; j < k.side(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", k.at(i, j));
      if (j > 0) s += ',';
      s += buf;
    }
    s += '\n';
  }
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
  if (!f) throw ConfigError("write failed for " + path.string());
}

int cmd_kernel(const KernelArgs& a, std::ostream& out) {
  const KernelKind kind = kernel_kind_from_string(a.kind);
  if (kind == KernelKind::custom) throw ConfigError("kernel: --kind must be dirac, gaussian or sobolev");
  Kernel k = dirac(a.side);
  if (kind == KernelKind::gaussian || kind == KernelKind::sobolev) {
    std::optional<double> param = kind == KernelKind::gaussian ? a.sigma : a.gamma;
    if (kind == KernelKind::gaussian && a.gamma) throw ConfigError("kernel: --gamma applies to sobolev kernels");
    if (kind == KernelKind::sobolev && a.sigma) throw ConfigError("kernel: --sigma applies to gaussian kernels");
    if (param && a.threshold) throw ConfigError("kernel: give either a parameter or --threshold, not both");
    const double p = param ? *param : fit_kernel_parameter(kind, a.side, a.threshold.value_or(1e-4));
    k = make_kernel(kind, a.side, p);
  }
  const std::string csv = kernel_csv(k);
  if (a.out.empty()) {
    out << csv;
    return kOk;
  }
  write_text(a.out, csv);
  fs::path pgm = a.out;
  pgm.replace_extension(".pgm");
  write_ppm(normalize_for_display(Image(k.side(), k.side(), 1, k.weights())), pgm);
  out << "kernel " << to_string(k.kind()) << " side " << k.side() << " parameter " << k.parameter() << " -> "
      << a.out << ", " << pgm.string() << "\n";
  return kOk;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
  if (!is_builtin_architecture(a.arch)) throw ConfigError("train: unknown --arch '" + a.arch + "'");
  const Dataset data = synth_dataset(a.dataset_seed, a.n_examples);
  if (!a.dump_dataset.empty()) save_dataset(data, a.dump_dataset);
  const Network init = make_builtin(a.arch, a.options.seed);
  const TrainResult result = train(init, data, a.options);
  save_model(result.network, a.out);

  Json report;
  report["arch"] = a.arch;
  report["dataset_seed"] = a.dataset_seed;
  report["n_examples"] = a.n_examples;
  report["seed"] = a.options.seed;
  report["epochs"] = a.options.epochs;
  report["learning_rate"] = a.options.learning_rate;
  report["batch_size"] = a.options.batch_size;
  report["initial_train_acc"] = result.initial_train_accuracy;
  Json loss = Json::array(), train_acc = Json::array(), val_acc = Json::array();
  for (const auto& e : result.epochs) {
    loss.push_back(e.loss);
    train_acc.push_back(e.train_accuracy);
    val_acc.push_back(e.validation_accuracy ? Json(*e.validation_accuracy) : Json(nullptr));
  }
  report["loss"] = loss;
  report["train_acc"] = train_acc;
  report["val_acc"] = val_acc;
  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  write_text(report_path, report.dump(2) + "\n");

  out << "trained " << a.arch << ": ";
  if (!result.epochs.empty()) {
    const auto& last = result.epochs.back();
    out << "train_acc " << last.train_accuracy;
    if (last.validation_accuracy) out << " val_acc " << *last.validation_accuracy;
  }
  out << " -> " << a.out << ", " << report_path << "\n";
  return kOk;
}

int cmd_run(const RunArgs& a, const std::string& kind, std::ostream& out) {
  const RunConfig config = load_run_config(a.config);
  PreparedRun prep = prepare_run(config, kind);
  if (a.dry_run) {
    out << to_json(prep.resolved).dump(2) << "\n";
    return kOk;
  }
  const RunResult result = run(prep.network, prep.objective, prep.demons, prep.schedule, prep.init);
  if (!prep.resolved.output.image.empty()) write_ppm(result.final, prep.resolved.output.image);
  if (!prep.resolved.output.metrics.empty()) {
    std::ofstream f(prep.resolved.output.metrics, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + prep.resolved.output.metrics);
    write_metrics_csv(result.metrics, f);
  }
  const auto& first = result.metrics.front();
  const auto& last = result.metrics.back();
  out << kind << ": " << result.metrics.size() << " steps, data term " << first.data_term << " -> " << last.data_term
      << "\n";
  return kOk;
}

int cmd_evaluate(EvaluateArgs a, std::ostream& out) {
  const Network model_a = load_model(a.model_a);
  const Network model_b = load_model(a.model_b);
  a.options.presets.clear();
  for (const auto& p : a.presets) a.options.presets.push_back(preset_from_string(p));
  if (a.layer_a >= 0) a.options.layer_a = static_cast<std::size_t>(a.layer_a);
  if (a.layer_b >= 0) a.options.layer_b = static_cast<std::size_t>(a.layer_b);
  const EvaluationReport report = evaluate_cross(model_a, model_b, a.options);
  const std::string text = to_json(report).dump(2) + "\n";
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    for (const auto& e : report.entries) out << e.direction << " " << e.preset << " top1 " << e.top1 << "\n";
  }
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Natural pre-images of small CNNs via fluid-elastic demons schemes", "preimage-forge"};
  app.require_subcommand(1);

  KernelArgs ka;
  auto* kernel = app.add_subcommand("kernel", "Build a Dirac, Gaussian or Sobolev kernel and write it as CSV");
  kernel->add_option("--kind", ka.kind, "dirac, gaussian or sobolev")->required();
  kernel->add_option("--side", ka.side, "Odd side length")->required();
  kernel->add_option("--sigma", ka.sigma, "Gaussian standard deviation");
  kernel->add_option("--gamma", ka.gamma, "Sobolev weight gamma");
  kernel->add_option("--threshold", ka.threshold, "Fit the parameter so the outer ring peaks at this value (default 1e-4)");
  kernel->add_option("--out", ka.out, "CSV path; a PGM rendering is written next to it. Stdout if omitted");

  TrainArgs ta;
  auto* trainc = app.add_subcommand("train", "Train a built-in architecture on the synthetic dataset");
  trainc->add_option("--arch", ta.arch, "vggish or densish")->required();
  trainc->add_option("--dataset-seed", ta.dataset_seed, "Dataset seed");
  trainc->add_option("--n-examples", ta.n_examples, "Dataset size (multiple of 3)");
  trainc->add_option("--out", ta.out, "Model container path")->required();
  trainc->add_option("--report", ta.report, "JSON report path (default <out>.report.json)");
  trainc->add_option("--dump-dataset", ta.dump_dataset, "Also write the dataset as PGM files + labels.json");
  trainc->add_option("--epochs", ta.options.epochs, "Training epochs");
  trainc->add_option("--lr", ta.options.learning_rate, "SGD learning rate");
  trainc->add_option("--batch-size", ta.options.batch_size, "Minibatch size");
  trainc->add_option("--seed", ta.options.seed, "Initialization and shuffling seed");

  RunArgs ma, ia;
  auto* maximize = app.add_subcommand("maximize", "Activation maximization from a JSON run config");
  maximize->add_option("--config", ma.config, "Run config")->required();
  maximize->add_flag("--dry-run", ma.dry_run, "Print the resolved config and exit");
  auto* invert = app.add_subcommand("invert", "Feature inversion from a JSON run config");
  invert->add_option("--config", ia.config, "Run config")->required();
  invert->add_flag("--dry-run", ia.dry_run, "Print the resolved config and exit");

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Cross-architecture reconstruction/classification report");
  evaluate->add_option("--model-a", ea.model_a, "First model")->required();
  evaluate->add_option("--model-b", ea.model_b, "Second model")->required();
  evaluate->add_option("--n-images", ea.options.n_images, "Images drawn from the synthetic dataset");
  evaluate->add_option("--seed", ea.options.seed, "Dataset and noise seed");
  evaluate->add_option("--steps", ea.options.steps, "Steps per reconstruction");
  evaluate->add_option("--presets", ea.presets, "Presets: tv, fluid-sobolev, fluid-elastic-sobolev, identity")
      ->delimiter(',');
  evaluate->add_option("--layer-a", ea.layer_a, "Reconstruction layer of model A (default: deepest pre-dense)");
  evaluate->add_option("--layer-b", ea.layer_b, "Reconstruction layer of model B (default: deepest pre-dense)");
  evaluate->add_option("--out", ea.out, "Report path (stdout if omitted)");

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    if (*kernel) return cmd_kernel(ka, out);
    if (*trainc) return cmd_train(ta, out);
    if (*maximize) return cmd_run(ma, "activation_max", out);
    if (*invert) return cmd_run(ia, "inversion", out);
    if (*evaluate) return cmd_evaluate(ea, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const FitError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const DataError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace preimage::cli
