#include "survey/encoder.h"

#include <cmath>

#include "survey/errors.h"
#include "survey/ops.h"
#include "survey/param_file.h"

namespace survey::model {
namespace {

using nn::Tensor;

constexpr std::string_view kCheckpointFormat = "survey-sentiment-checkpoint";
constexpr int kCheckpointVersion = 1;

Tensor weight(std::size_t rows, std::size_t cols) {
  return Tensor::zeros({rows, cols}, true);
}
Tensor bias(std::size_t n) { return Tensor::zeros({n}, true); }
Tensor ones(std::size_t n) { return Tensor::filled({n}, 1.0, true); }

// Shape skeleton for a config, zero/one filled.
EncoderParams allocate(const ModelConfig& c) {
  EncoderParams p;
  p.token_embedding = weight(c.vocab_size, c.embed_dim);
  p.position_embedding = weight(c.max_len, c.embed_dim);
  p.embedding_norm_gamma = ones(c.embed_dim);
  p.embedding_norm_beta = bias(c.embed_dim);
  for (std::size_t l = 0; l < c.num_layers; ++l) {
    p.layers.push_back(LayerParams{
        .query_w = weight(c.embed_dim, c.embed_dim), .query_b = bias(c.embed_dim),
        .key_w = weight(c.embed_dim, c.embed_dim), .key_b = bias(c.embed_dim),
        .value_w = weight(c.embed_dim, c.embed_dim), .value_b = bias(c.embed_dim),
        .output_w = weight(c.embed_dim, c.embed_dim), .output_b = bias(c.embed_dim),
        .attention_norm_gamma = ones(c.embed_dim),
        .attention_norm_beta = bias(c.embed_dim),
        .ffn_in_w = weight(c.embed_dim, c.ffn_dim), .ffn_in_b = bias(c.ffn_dim),
        .ffn_out_w = weight(c.ffn_dim, c.embed_dim), .ffn_out_b = bias(c.embed_dim),
        .ffn_norm_gamma = ones(c.embed_dim),
        .ffn_norm_beta = bias(c.embed_dim),
    });
  }
  p.pooler_w = weight(c.embed_dim, c.embed_dim);
  p.pooler_b = bias(c.embed_dim);
  p.classifier_w = weight(c.embed_dim, kNumClasses);
  p.classifier_b = bias(kNumClasses);
  return p;
}

bool is_weight_matrix(const std::string& name) {
  return name.ends_with(".weight") || name.starts_with("embeddings.token") ||
         name.starts_with("embeddings.position");
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  return nn::add(nn::matmul(x, w), b);
}

Tensor maybe_dropout(const Tensor& x, const ModelConfig& config, ForwardContext& ctx) {
  if (!ctx.training || config.dropout_rate <= 0.0) return x;
  if (ctx.rng == nullptr) throw ContractError("training forward pass needs an Rng");
  return nn::dropout(x, config.dropout_rate, *ctx.rng);
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("model config: " + msg); };
  if (vocab_size < 7) fail("vocab_size must be at least 7");
  if (max_len < 3) fail("max_len must be at least 3");
  if (embed_dim == 0 || num_layers == 0 || num_heads == 0 || ffn_dim == 0) {
    fail("embed_dim, num_layers, num_heads and ffn_dim must be positive");
  }
  if (embed_dim % num_heads != 0) {
    fail("embed_dim " + std::to_string(embed_dim) + " is not divisible by num_heads " +
         std::to_string(num_heads));
  }
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) fail("dropout_rate must lie in [0, 1)");
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"vocab_size", c.vocab_size}, {"max_len", c.max_len},
                     {"embed_dim", c.embed_dim},   {"num_layers", c.num_layers},
                     {"num_heads", c.num_heads},   {"ffn_dim", c.ffn_dim},
                     {"num_classes", kNumClasses}, {"dropout_rate", c.dropout_rate},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  const ModelConfig defaults;
  c.vocab_size = j.value("vocab_size", defaults.vocab_size);
  c.max_len = j.value("max_len", defaults.max_len);
  c.embed_dim = j.value("embed_dim", defaults.embed_dim);
  c.num_layers = j.value("num_layers", defaults.num_layers);
  c.num_heads = j.value("num_heads", defaults.num_heads);
  c.ffn_dim = j.value("ffn_dim", defaults.ffn_dim);
  c.dropout_rate = j.value("dropout_rate", defaults.dropout_rate);
  c.seed = j.value("seed", defaults.seed);
  if (j.contains("num_classes") && j.at("num_classes").get<std::size_t>() != kNumClasses) {
    throw ConfigError("model config: num_classes is fixed at 3");
  }
}

std::vector<nn::NamedTensor> EncoderParams::named() const {
  std::vector<nn::NamedTensor> out{
      {"embeddings.token", token_embedding},
      {"embeddings.position", position_embedding},
      {"embeddings.norm.gamma", embedding_norm_gamma},
      {"embeddings.norm.beta", embedding_norm_beta},
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParams& p = layers[l];
    const std::string prefix = "layers." + std::to_string(l) + ".";
    out.insert(out.end(), {
        {prefix + "attention.query.weight", p.query_w},
        {prefix + "attention.query.bias", p.query_b},
        {prefix + "attention.key.weight", p.key_w},
        {prefix + "attention.key.bias", p.key_b},
        {prefix + "attention.value.weight", p.value_w},
        {prefix + "attention.value.bias", p.value_b},
        {prefix + "attention.output.weight", p.output_w},
        {prefix + "attention.output.bias", p.output_b},
        {prefix + "attention.norm.gamma", p.attention_norm_gamma},
        {prefix + "attention.norm.beta", p.attention_norm_beta},
        {prefix + "ffn.in.weight", p.ffn_in_w},
        {prefix + "ffn.in.bias", p.ffn_in_b},
        {prefix + "ffn.out.weight", p.ffn_out_w},
        {prefix + "ffn.out.bias", p.ffn_out_b},
        {prefix + "ffn.norm.gamma", p.ffn_norm_gamma},
        {prefix + "ffn.norm.beta", p.ffn_norm_beta},
    });
  }
  out.insert(out.end(), {
      {"pooler.weight", pooler_w},
      {"pooler.bias", pooler_b},
      {"classifier.weight", classifier_w},
      {"classifier.bias", classifier_b},
  });
  return out;
}

EncoderParams EncoderParams::clone() const {
  auto fresh = [](const Tensor& t) {
    Tensor copy = t.detach();
    copy.set_requires_grad(true);
    return copy;
  };
  EncoderParams p;
  p.token_embedding = fresh(token_embedding);
  p.position_embedding = fresh(position_embedding);
  p.embedding_norm_gamma = fresh(embedding_norm_gamma);
  p.embedding_norm_beta = fresh(embedding_norm_beta);
  for (const LayerParams& l : layers) {
    p.layers.push_back(LayerParams{
        fresh(l.query_w), fresh(l.query_b), fresh(l.key_w), fresh(l.key_b),
        fresh(l.value_w), fresh(l.value_b), fresh(l.output_w), fresh(l.output_b),
        fresh(l.attention_norm_gamma), fresh(l.attention_norm_beta),
        fresh(l.ffn_in_w), fresh(l.ffn_in_b), fresh(l.ffn_out_w), fresh(l.ffn_out_b),
        fresh(l.ffn_norm_gamma), fresh(l.ffn_norm_beta)});
  }
  p.pooler_w = fresh(pooler_w);
  p.pooler_b = fresh(pooler_b);
  p.classifier_w = fresh(classifier_w);
  p.classifier_b = fresh(classifier_b);
  return p;
}

EncoderParams init_params(const ModelConfig& config) {
  config.validate();
  EncoderParams params = allocate(config);
  Rng rng(config.seed);
  for (auto& [name, tensor] : params.named()) {
    if (!is_weight_matrix(name)) continue;
    for (double& v : tensor.mutable_values()) v = rng.truncated_normal(kInitStddev);
  }
  return params;
}

Tensor embed(const text::TokenizedSequence& seq, const EncoderParams& params,
             const ModelConfig& config, ForwardContext& ctx) {
  const std::size_t len = seq.ids.size();
  if (len == 0 || len > config.max_len) {
    throw DimensionError("sequence length " + std::to_string(len) + " outside [1, " +
                         std::to_string(config.max_len) + "]");
  }
  Tensor tokens = nn::embedding(params.token_embedding, seq.ids);
  Tensor positions = nn::slice(params.position_embedding, 0, 0, len);
  Tensor x = nn::layer_norm(nn::add(tokens, positions), params.embedding_norm_gamma,
                            params.embedding_norm_beta, kLayerNormEps);
  return maybe_dropout(x, config, ctx);
}

Tensor attention_block(const Tensor& x, std::span<const std::uint8_t> mask,
                       const LayerParams& layer, const ModelConfig& config,
                       ForwardContext& ctx) {
  if (x.rank() != 2 || x.dim(1) != config.embed_dim) {
    throw DimensionError("attention_block: input " + nn::shape_string(x.shape()) +
                         " does not have width " + std::to_string(config.embed_dim));
  }
  const std::size_t len = x.dim(0);
  if (mask.size() != len) {
    throw DimensionError("attention_block: mask of length " + std::to_string(mask.size()) +
                         " for input " + nn::shape_string(x.shape()));
  }
  const std::size_t head_dim = config.head_dim();
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));

  std::vector<double> key_bias(len);
  for (std::size_t j = 0; j < len; ++j) key_bias[j] = mask[j] ? 0.0 : kMaskBias;
  const Tensor bias_row({len}, std::move(key_bias));

  const Tensor q = linear(x, layer.query_w, layer.query_b);
  const Tensor k = linear(x, layer.key_w, layer.key_b);
  const Tensor v = linear(x, layer.value_w, layer.value_b);

  std::vector<Tensor> heads;
  heads.reserve(config.num_heads);
  for (std::size_t h = 0; h < config.num_heads; ++h) {
    const std::size_t lo = h * head_dim, hi = lo + head_dim;
    const Tensor qh = nn::slice(q, 1, lo, hi);
    const Tensor kh = nn::slice(k, 1, lo, hi);
    const Tensor vh = nn::slice(v, 1, lo, hi);
    Tensor scores = nn::scale(nn::matmul(qh, nn::transpose(kh)), inv_sqrt);
    Tensor weights = nn::softmax(nn::add(scores, bias_row), 1);
    if (ctx.attention_probe) ctx.attention_probe->push_back(weights);
    weights = maybe_dropout(weights, config, ctx);
    heads.push_back(nn::matmul(weights, vh));
  }
  const Tensor context = nn::concat(heads, 1);
  const Tensor attended = maybe_dropout(linear(context, layer.output_w, layer.output_b), config, ctx);
  const Tensor h1 = nn::layer_norm(nn::add(x, attended), layer.attention_norm_gamma,
                                   layer.attention_norm_beta, kLayerNormEps);

  const Tensor inner = nn::gelu(linear(h1, layer.ffn_in_w, layer.ffn_in_b));
  const Tensor ffn = maybe_dropout(linear(inner, layer.ffn_out_w, layer.ffn_out_b), config, ctx);
  return nn::layer_norm(nn::add(h1, ffn), layer.ffn_norm_gamma, layer.ffn_norm_beta,
                        kLayerNormEps);
}

Tensor logits(const text::TokenizedSequence& seq, const EncoderParams& params,
              const ModelConfig& config, ForwardContext& ctx) {
  if (seq.mask.size() != seq.ids.size()) {
    throw DimensionError("sequence ids and mask differ in length");
  }
  Tensor x = embed(seq, params, config, ctx);
  for (const LayerParams& layer : params.layers) {
    x = attention_block(x, seq.mask, layer, config, ctx);
  }
  const Tensor cls = nn::slice(x, 0, 0, 1);
  const Tensor pooled = nn::tanh(linear(cls, params.pooler_w, params.pooler_b));
  return linear(pooled, params.classifier_w, params.classifier_b);
}

std::array<double, kNumClasses> classify(const text::TokenizedSequence& seq,
                                         const EncoderParams& params,
                                         const ModelConfig& config) {
  nn::NoGradScope no_grad;
  ForwardContext ctx;
  const Tensor out = logits(seq, params, config, ctx);
  std::array<double, kNumClasses> result{};
  for (std::size_t c = 0; c < kNumClasses; ++c) result[c] = out.values()[c];
  return result;
}

Polarity argmax_polarity(std::span<const double> logits) {
  if (logits.size() != kNumClasses) {
    throw DimensionError("expected 3 logits, got " + std::to_string(logits.size()));
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.size(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return polarity_from_index(static_cast<int>(best));
}

Polarity predict(const text::TokenizedSequence& seq, const EncoderParams& params,
                 const ModelConfig& config) {
  return argmax_polarity(classify(seq, params, config));
}

text::TokenizedSequence trim_padding(const text::TokenizedSequence& seq) {
  text::TokenizedSequence out;
  out.true_len = seq.true_len;
  out.ids.assign(seq.ids.begin(), seq.ids.begin() + static_cast<std::ptrdiff_t>(seq.true_len));
  out.mask.assign(seq.true_len, 1);
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const nlohmann::json meta = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"model", checkpoint.config},
      {"vocab", {{"fingerprint", checkpoint.vocab_fingerprint}, {"path", checkpoint.vocab_path}}},
  };
  nn::save_params(path, checkpoint.params.named(), meta.dump());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  nn::ParamFile file = nn::load_params(path);
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(file.metadata);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": unreadable checkpoint metadata: " + e.what());
  }
  if (meta.value("format", "") != kCheckpointFormat) {
    throw IoError(path.string() + " is not a model checkpoint");
  }
  Checkpoint ck;
  try {
    ck.config = meta.at("model").get<ModelConfig>();
    ck.vocab_fingerprint = meta.at("vocab").value("fingerprint", "");
    ck.vocab_path = meta.at("vocab").value("path", "");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": malformed checkpoint metadata: " + e.what());
  }
  ck.config.validate();
  ck.params = allocate(ck.config);
  auto expected = ck.params.named();
  if (file.tensors.size() != expected.size()) {
    throw ConfigError(path.string() + ": checkpoint has " + std::to_string(file.tensors.size()) +
                      " tensors, config implies " + std::to_string(expected.size()));
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& stored = file.tensors[i];
    auto& target = expected[i];
    if (stored.name != target.name || stored.tensor.shape() != target.tensor.shape()) {
      throw ConfigError(path.string() + ": expected " + target.name + " " +
                        nn::shape_string(target.tensor.shape()) + ", found " + stored.name + " " +
                        nn::shape_string(stored.tensor.shape()));
    }
    const auto src = stored.tensor.values();
    std::copy(src.begin(), src.end(), target.tensor.mutable_values().begin());
  }
  return ck;
}

}  // namespace survey::model
