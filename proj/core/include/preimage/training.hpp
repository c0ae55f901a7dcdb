#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "preimage/dataset.hpp"
#include "preimage/network.hpp"

namespace preimage {

struct TrainOptions {
  std::size_t epochs = 30;
  double learning_rate = 0.1;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  /// Trailing fraction of the dataset held out for validation.
  double validation_fraction = 0.2;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;
  std::optional<double> validation_accuracy;
};

struct TrainResult {
  Network network;
  double initial_train_accuracy = 0.0;
  std::vector<EpochMetrics> epochs;
};

/// Index of the largest logit (first wins on ties).
int predict(const Network& net, const Image& image);

double accuracy(const Network& net, const std::vector<Image>& images, const std::vector<int>& labels);

/// Mean softmax cross-entropy of the logits and its gradient w.r.t. the parameters.
double loss_and_gradient(const Network& net, const std::vector<Image>& images, const std::vector<int>& labels,
                         std::vector<LayerParams>* grads);

/// Minibatch SGD on softmax cross-entropy over a private copy of `net`.
///
/// The dataset is split into a training prefix and a validation suffix; the
/// training indices are reshuffled every epoch from `options.seed`. Gradients
/// are summed in batch-index order so results are bit-reproducible. Throws
/// NumericalError naming the epoch if the loss becomes non-finite.
TrainResult train(const Network& net, const Dataset& data, const TrainOptions& options);

}  // namespace preimage
