#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "survey/corpus.h"
#include "survey/encoder.h"
#include "survey/tokenizer.h"

namespace survey::train {

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 16;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 17;
  bool shuffle_each_epoch = true;

  void validate() const;  // ConfigError
  bool operator==(const TrainConfig&) const = default;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct Example {
  text::TokenizedSequence seq;
  std::optional<Polarity> label;
};

std::vector<Example> encode_records(std::span<const SurveyRecord> records,
                                    const text::Vocabulary& vocab, std::size_t max_len);

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// One bias-corrected Adam update at step t >= 1:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   param -= lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
// DimensionError when grad or state sizes disagree with the parameter.
void adam_step(nn::Tensor& param, std::span<const double> grad, AdamState& state,
               std::size_t t, const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double train_accuracy = 0.0;  // from the train-mode logits seen during the epoch
  std::optional<double> heldout_accuracy;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch training of every parameter: per epoch an optional seeded
// shuffle, batches of batch_size (the last may be short), mean cross-entropy,
// backward and one Adam step per batch. Padding is trimmed before the
// forward pass. ContractError if any example lacks a label or data is empty;
// NumericError naming epoch and batch if the loss stops being finite.
TrainHistory train(model::EncoderParams& params, const model::ModelConfig& config,
                   std::span<const Example> data, const TrainConfig& tcfg,
                   std::span<const Example> heldout = {},
                   const EpochCallback& on_epoch = {});

using ConfusionMatrix = std::array<std::array<std::size_t, kNumPolarities>, kNumPolarities>;

struct Metrics {
  double accuracy = 0.0;
  ConfusionMatrix confusion{};  // rows gold, columns predicted
  std::array<double, kNumPolarities> precision{};
  std::array<double, kNumPolarities> recall{};
  std::array<double, kNumPolarities> f1{};
  std::size_t n_examples = 0;

  // Precision (recall) of a class with no predicted (gold) examples is 0.
  static Metrics from_confusion(const ConfusionMatrix& confusion);
};

Metrics score_predictions(std::span<const Polarity> gold, std::span<const Polarity> predicted);

// Inference-mode predictions over labeled data. DatasetError when empty,
// ContractError on an unlabeled example.
Metrics evaluate(const model::EncoderParams& params, const model::ModelConfig& config,
                 std::span<const Example> data);

struct ProtocolRow {
  corpus::SplitRatio ratio;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double test_accuracy = 0.0;
  Metrics metrics;
  TrainHistory history;
};

struct ProtocolOptions {
  std::uint64_t split_seed = 42;
  bool stratified = false;
  bool track_heldout = false;  // record per-epoch test accuracy in the history
};

// For every ratio: split, fresh init_params(config), train, evaluate on the
// held-out part.
std::vector<ProtocolRow> run_protocol(std::span<const Example> dataset,
                                      std::span<const corpus::SplitRatio> ratios,
                                      const model::ModelConfig& config,
                                      const TrainConfig& tcfg,
                                      const ProtocolOptions& options = {},
                                      const std::function<void(const corpus::SplitRatio&,
                                                               const EpochRecord&)>& on_epoch = {});

nlohmann::json history_to_json(const TrainHistory& history);
nlohmann::json metrics_to_json(const Metrics& metrics);
nlohmann::json protocol_to_json(std::span<const ProtocolRow> rows);
std::string protocol_table(std::span<const ProtocolRow> rows);

}  // namespace survey::train
