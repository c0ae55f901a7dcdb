#include "preimage/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "preimage/errors.hpp"
#include "preimage/rng.hpp"

namespace preimage {

namespace {

// Cross-entropy of one example; writes softmax - onehot into `cot`.
double softmax_xent(const std::vector<double>& logits, int label, std::vector<double>& cot) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  cot.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    cot[i] = std::exp(logits[i] - m);
    z += cot[i];
  }
  for (double& v : cot) v /= z;
  const double loss = -(logits[static_cast<std::size_t>(label)] - m - std::log(z));
  cot[static_cast<std::size_t>(label)] -= 1.0;
  return loss;
}

}  // namespace

int predict(const Network& net, const Image& image) {
  const FeatureCode logits = forward(net, image);
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i)
    if (logits.values[i] > logits.values[best]) best = i;
  return static_cast<int>(best);
}

double accuracy(const Network& net, const std::vector<Image>& images, const std::vector<int>& labels) {
  if (images.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < images.size(); ++i) hits += predict(net, images[i]) == labels[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(images.size());
}

double loss_and_gradient(const Network& net, const std::vector<Image>& images, const std::vector<int>& labels,
                         std::vector<LayerParams>* grads) {
  if (grads) *grads = zero_like(net.params());
  double total = 0.0;
  std::vector<double> cot;
  const double inv = 1.0 / static_cast<double>(images.size());
  for (std::size_t b = 0; b < images.size(); ++b) {
    const ForwardTrace trace = forward_trace(net, images[b]);
    total += softmax_xent(trace.acts.back().values(), labels[b], cot);
    if (grads) {
      for (double& v : cot) v *= inv;
      backward(net, trace, kLastLayer, cot, grads);
    }
  }
  return total * inv;
}

TrainResult train(const Network& net, const Dataset& data, const TrainOptions& options) {
  if (data.size() == 0) throw ParameterError("train: empty dataset");
  if (options.batch_size == 0) throw ParameterError("train: batch_size must be positive");
  if (!(options.learning_rate >= 0.0)) throw ParameterError("train: learning_rate must be nonnegative");
  if (!(options.validation_fraction >= 0.0 && options.validation_fraction < 1.0))
    throw ParameterError("train: validation_fraction must lie in [0, 1)");

  const std::size_t n_val =
      static_cast<std::size_t>(std::floor(options.validation_fraction * static_cast<double>(data.size())));
  const std::size_t n_train = data.size() - n_val;
  const std::vector<Image> train_x(data.images.begin(), data.images.begin() + static_cast<long>(n_train));
  const std::vector<int> train_y(data.labels.begin(), data.labels.begin() + static_cast<long>(n_train));
  const std::vector<Image> val_x(data.images.begin() + static_cast<long>(n_train), data.images.end());
  const std::vector<int> val_y(data.labels.begin() + static_cast<long>(n_train), data.labels.end());

  TrainResult result{net, accuracy(net, train_x, train_y), {}};
  Network& model = result.network;
  Rng rng(options.seed);
  std::vector<std::size_t> order(n_train);

  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = n_train; i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i - 1)));
      std::swap(order[i - 1], order[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n_train; start += options.batch_size) {
      const std::size_t end = std::min(n_train, start + options.batch_size);
      std::vector<Image> bx;
      std::vector<int> by;
      for (std::size_t k = start; k < end; ++k) {
        bx.push_back(train_x[order[k]]);
        by.push_back(train_y[order[k]]);
      }
      std::vector<LayerParams> grads;
      const double loss = loss_and_gradient(model, bx, by, &grads);
      if (!std::isfinite(loss)) throw NumericalError("train: loss diverged in epoch " + std::to_string(epoch + 1));
      epoch_loss += loss * static_cast<double>(end - start);

      auto& params = model.mutable_params();
      for (std::size_t l = 0; l < params.size(); ++l) {
        for (std::size_t i = 0; i < params[l].weight.size(); ++i)
          params[l].weight[i] -= options.learning_rate * grads[l].weight[i];
        for (std::size_t i = 0; i < params[l].bias.size(); ++i)
          params[l].bias[i] -= options.learning_rate * grads[l].bias[i];
      }
    }

    EpochMetrics m;
    m.epoch = epoch + 1;
    m.loss = epoch_loss / static_cast<double>(n_train);
    if (!std::isfinite(m.loss)) throw NumericalError("train: loss diverged in epoch " + std::to_string(epoch + 1));
    m.train_accuracy = accuracy(model, train_x, train_y);
    if (n_val > 0) m.validation_accuracy = accuracy(model, val_x, val_y);
    result.epochs.push_back(m);
  }
  return result;
}

}  // namespace preimage
