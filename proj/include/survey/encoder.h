#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "survey/corpus.h"
#include "survey/rng.h"
#include "survey/tensor.h"
#include "survey/tokenizer.h"

namespace survey::model {

inline constexpr std::size_t kNumClasses = kNumPolarities;
inline constexpr double kMaskBias = -1e9;
inline constexpr double kInitStddev = 0.02;
inline constexpr double kLayerNormEps = 1e-12;

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t embed_dim = 64;  // width of every token vector
  std::size_t num_layers = 2;
  std::size_t num_heads = 4;
  std::size_t ffn_dim = 256;
  double dropout_rate = 0.1;
  std::uint64_t seed = 13;

  std::size_t head_dim() const { return embed_dim / num_heads; }

  // ConfigError unless embed_dim % num_heads == 0, max_len >= 3,
  // vocab_size >= 7, every size positive and dropout_rate in [0, 1).
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct LayerParams {
  nn::Tensor query_w, query_b;
  nn::Tensor key_w, key_b;
  nn::Tensor value_w, value_b;
  nn::Tensor output_w, output_b;
  nn::Tensor attention_norm_gamma, attention_norm_beta;
  nn::Tensor ffn_in_w, ffn_in_b;
  nn::Tensor ffn_out_w, ffn_out_b;
  nn::Tensor ffn_norm_gamma, ffn_norm_beta;
};

struct EncoderParams {
  nn::Tensor token_embedding;     // [vocab_size x embed_dim]
  nn::Tensor position_embedding;  // [max_len x embed_dim]
  nn::Tensor embedding_norm_gamma, embedding_norm_beta;
  std::vector<LayerParams> layers;
  nn::Tensor pooler_w, pooler_b;          // [embed_dim x embed_dim]
  nn::Tensor classifier_w, classifier_b;  // [embed_dim x 3]

  // Handles to every tensor in a fixed order with stable dotted names
  // ("layers.1.attention.key.weight", ...).
  std::vector<nn::NamedTensor> named() const;

  // Deep copy with its own storage.
  EncoderParams clone() const;
};

// Weights ~ Normal(0, 0.02) truncated at 2 sigma, drawn in named() order from
// Rng(config.seed); biases and layer-norm betas 0, gammas 1.
EncoderParams init_params(const ModelConfig& config);

// Optional hooks for a forward pass. Dropout is active only when `training`
// is set, and then draws from `rng`.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;
  // When set, receives every attention weight matrix [L x L] (per layer,
  // per head) before dropout.
  std::vector<nn::Tensor>* attention_probe = nullptr;
};

// token_embedding[id] + position_embedding[pos] for each position, then
// layer norm and dropout -> [L x embed_dim] with L = seq.ids.size(). PAD
// positions get vectors too. IndexError for an id outside the vocabulary.
nn::Tensor embed(const text::TokenizedSequence& seq, const EncoderParams& params,
                 const ModelConfig& config, ForwardContext& ctx);

// One encoder block: bidirectional multi-head scaled dot-product attention
// with a -1e9 score bias on keys whose mask is 0, output projection,
// residual and layer norm, then a GELU feed-forward with residual and layer
// norm.
nn::Tensor attention_block(const nn::Tensor& x, std::span<const std::uint8_t> mask,
                           const LayerParams& layer, const ModelConfig& config,
                           ForwardContext& ctx);

// Embedding, every block, CLS row, tanh pooler and the classifier -> [1 x 3].
nn::Tensor logits(const text::TokenizedSequence& seq, const EncoderParams& params,
                  const ModelConfig& config, ForwardContext& ctx);

// Inference-mode logits: no dropout, nothing recorded for backward.
std::array<double, kNumClasses> classify(const text::TokenizedSequence& seq,
                                         const EncoderParams& params,
                                         const ModelConfig& config);

// Argmax, ties resolved toward the lower class index.
Polarity argmax_polarity(std::span<const double> logits);
Polarity predict(const text::TokenizedSequence& seq, const EncoderParams& params,
                 const ModelConfig& config);

// Drops the padded tail: ids/mask cut to true_len. Masked keys receive
// exactly zero attention weight and padded rows never feed the CLS row, so
// logits and gradients of the trimmed sequence equal those of the padded
// one; the training loop relies on this to skip work on padding.
text::TokenizedSequence trim_padding(const text::TokenizedSequence& seq);

// A checkpoint is a parameter file whose metadata holds the model config and
// the fingerprint and path of the vocabulary it was trained with.
struct Checkpoint {
  ModelConfig config;
  EncoderParams params;
  std::string vocab_fingerprint;
  std::string vocab_path;  // relative to the checkpoint directory when written by the CLI
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// IoError on a malformed file; ConfigError if any tensor is missing, extra,
// or shaped differently from what the stored config implies.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace survey::model
