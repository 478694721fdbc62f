#include "survey/training.h"

#include <cmath>
#include <cstdio>
#include <numeric>

#include "survey/errors.h"
#include "survey/ops.h"

namespace survey::train {
namespace {

constexpr std::uint64_t kDropoutStream = 0x9E3779B97F4A7C15ull;

std::vector<int> gold_labels(std::span<const Example> data) {
  std::vector<int> labels;
  labels.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].label) {
      throw ContractError("example " + std::to_string(i) + " has no gold label");
    }
    labels.push_back(index_of(*data[i].label));
  }
  return labels;
}

std::string format_fixed(double value, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train config: epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("train config: batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ConfigError("train config: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train config: adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw ConfigError("train config: eps must be positive");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"epochs", c.epochs},
                     {"batch_size", c.batch_size},
                     {"learning_rate", c.learning_rate},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"eps", c.eps},
                     {"seed", c.seed},
                     {"shuffle_each_epoch", c.shuffle_each_epoch}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  const TrainConfig d;
  c.epochs = j.value("epochs", d.epochs);
  c.batch_size = j.value("batch_size", d.batch_size);
  c.learning_rate = j.value("learning_rate", d.learning_rate);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.eps = j.value("eps", d.eps);
  c.seed = j.value("seed", d.seed);
  c.shuffle_each_epoch = j.value("shuffle_each_epoch", d.shuffle_each_epoch);
}

std::vector<Example> encode_records(std::span<const SurveyRecord> records,
                                    const text::Vocabulary& vocab, std::size_t max_len) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({text::encode(r.text, vocab, max_len), r.label});
  return out;
}

void adam_step(nn::Tensor& param, std::span<const double> grad, AdamState& state,
               std::size_t t, const TrainConfig& config) {
  const std::size_t n = param.size();
  if (grad.size() != n) {
    throw DimensionError("adam_step: gradient of size " + std::to_string(grad.size()) +
                         " for parameter " + nn::shape_string(param.shape()));
  }
  if (t < 1) throw ContractError("adam_step: step counter starts at 1");
  if (state.m.empty()) state.m.assign(n, 0.0);
  if (state.v.empty()) state.v.assign(n, 0.0);
  if (state.m.size() != n || state.v.size() != n) {
    throw DimensionError("adam_step: optimizer state does not match parameter " +
                         nn::shape_string(param.shape()));
  }
  const double b1 = config.beta1, b2 = config.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t));
  std::span<double> values = param.mutable_values();
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

TrainHistory train(model::EncoderParams& params, const model::ModelConfig& config,
                   std::span<const Example> data, const TrainConfig& tcfg,
                   std::span<const Example> heldout, const EpochCallback& on_epoch) {
  config.validate();
  tcfg.validate();
  if (data.empty()) throw ContractError("train: no training examples");
  const std::vector<int> labels = gold_labels(data);
  if (!heldout.empty()) gold_labels(heldout);

  std::vector<text::TokenizedSequence> trimmed;
  trimmed.reserve(data.size());
  for (const auto& ex : data) trimmed.push_back(model::trim_padding(ex.seq));

  std::vector<nn::NamedTensor> named = params.named();
  std::vector<AdamState> states(named.size());
  Rng order_rng(tcfg.seed);
  Rng dropout_rng(tcfg.seed ^ kDropoutStream);
  model::ForwardContext ctx{.training = true, .rng = &dropout_rng, .attention_probe = nullptr};

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t step = 0;
  TrainHistory history;

  for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    if (tcfg.shuffle_each_epoch) order_rng.shuffle(std::span(order));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
      std::vector<nn::Tensor> rows;
      std::vector<int> batch_labels;
      rows.reserve(end - start);
      for (std::size_t k = start; k < end; ++k) {
        rows.push_back(model::logits(trimmed[order[k]], params, config, ctx));
        batch_labels.push_back(labels[order[k]]);
      }
      const nn::Tensor batch_logits = nn::concat(rows, 0);
      const nn::Tensor loss = nn::cross_entropy(batch_logits, batch_labels);
      const double loss_value = loss.item();
      if (!std::isfinite(loss_value)) {
        throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index + 1));
      }
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto v = batch_logits.values().subspan(r * model::kNumClasses, model::kNumClasses);
        if (index_of(model::argmax_polarity(v)) == batch_labels[r]) ++correct;
      }
      loss_sum += loss_value * static_cast<double>(end - start);

      nn::backward(loss);
      ++step;
      for (std::size_t p = 0; p < named.size(); ++p) {
        nn::Tensor& t = named[p].tensor;
        const std::vector<double> g = t.grad();
        adam_step(t, g, states[p], step, tcfg);
        t.zero_grad();
      }
    }
    EpochRecord record{.epoch = epoch,
                       .mean_loss = loss_sum / static_cast<double>(data.size()),
                       .train_accuracy = static_cast<double>(correct) /
                                         static_cast<double>(data.size()),
                       .heldout_accuracy = std::nullopt};
    if (!heldout.empty()) record.heldout_accuracy = evaluate(params, config, heldout).accuracy;
    history.epochs.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return history;
}

Metrics Metrics::from_confusion(const ConfusionMatrix& confusion) {
  Metrics m;
  m.confusion = confusion;
  std::size_t trace = 0;
  for (std::size_t g = 0; g < kNumPolarities; ++g) {
    trace += confusion[g][g];
    for (std::size_t p = 0; p < kNumPolarities; ++p) m.n_examples += confusion[g][p];
  }
  m.accuracy = m.n_examples == 0 ? 0.0
                                 : static_cast<double>(trace) / static_cast<double>(m.n_examples);
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    std::size_t row = 0, col = 0;
    for (std::size_t k = 0; k < kNumPolarities; ++k) {
      row += confusion[c][k];
      col += confusion[k][c];
    }
    const double tp = static_cast<double>(confusion[c][c]);
    m.precision[c] = col == 0 ? 0.0 : tp / static_cast<double>(col);
    m.recall[c] = row == 0 ? 0.0 : tp / static_cast<double>(row);
    const double pr = m.precision[c] + m.recall[c];
    m.f1[c] = pr == 0.0 ? 0.0 : 2.0 * m.precision[c] * m.recall[c] / pr;
  }
  return m;
}

Metrics score_predictions(std::span<const Polarity> gold, std::span<const Polarity> predicted) {
  if (gold.size() != predicted.size()) {
    throw ContractError("score_predictions: " + std::to_string(gold.size()) + " labels but " +
                        std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix confusion{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++confusion[index_of(gold[i])][index_of(predicted[i])];
  }
  return Metrics::from_confusion(confusion);
}

Metrics evaluate(const model::EncoderParams& params, const model::ModelConfig& config,
                 std::span<const Example> data) {
  if (data.empty()) throw DatasetError("evaluate: no examples");
  gold_labels(data);
  std::vector<Polarity> gold, predicted;
  gold.reserve(data.size());
  predicted.reserve(data.size());
  for (const auto& ex : data) {
    gold.push_back(*ex.label);
    predicted.push_back(model::predict(model::trim_padding(ex.seq), params, config));
  }
  return score_predictions(gold, predicted);
}

std::vector<ProtocolRow> run_protocol(
    std::span<const Example> dataset, std::span<const corpus::SplitRatio> ratios,
    const model::ModelConfig& config, const TrainConfig& tcfg, const ProtocolOptions& options,
    const std::function<void(const corpus::SplitRatio&, const EpochRecord&)>& on_epoch) {
  for (const auto& r : ratios) corpus::validate_ratio(r);
  const std::vector<int> labels = gold_labels(dataset);
  std::vector<ProtocolRow> rows;
  for (const auto& ratio : ratios) {
    const corpus::IndexSplit idx =
        corpus::split_indices(dataset.size(), ratio, options.split_seed,
                              options.stratified ? std::span<const int>(labels)
                                                 : std::span<const int>());
    std::vector<Example> train_set, test_set;
    for (const std::size_t i : idx.train) train_set.push_back(dataset[i]);
    for (const std::size_t i : idx.test) test_set.push_back(dataset[i]);

    model::EncoderParams params = model::init_params(config);
    EpochCallback cb;
    if (on_epoch) cb = [&](const EpochRecord& rec) { on_epoch(ratio, rec); };
    ProtocolRow row;
    row.ratio = ratio;
    row.n_train = train_set.size();
    row.n_test = test_set.size();
    row.history = train(params, config, train_set, tcfg,
                        options.track_heldout ? std::span<const Example>(test_set)
                                              : std::span<const Example>(),
                        cb);
    row.metrics = evaluate(params, config, test_set);
    row.test_accuracy = row.metrics.accuracy;
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json history_to_json(const TrainHistory& history) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : history.epochs) {
    nlohmann::json j = {{"epoch", e.epoch},
                        {"mean_loss", e.mean_loss},
                        {"train_accuracy", e.train_accuracy}};
    j["heldout_accuracy"] = e.heldout_accuracy ? nlohmann::json(*e.heldout_accuracy)
                                               : nlohmann::json(nullptr);
    epochs.push_back(std::move(j));
  }
  return {{"epochs", epochs}};
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json per_class = nlohmann::json::object();
  for (const Polarity p : kAllPolarities) {
    const int c = index_of(p);
    per_class[std::string(polarity_name(p))] = {
        {"precision", m.precision[c]}, {"recall", m.recall[c]}, {"f1", m.f1[c]}};
  }
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : m.confusion) confusion.push_back(row);
  return {{"accuracy", m.accuracy},
          {"n_examples", m.n_examples},
          {"confusion", confusion},
          {"confusion_axes", "rows=gold, columns=predicted, order=negative,neutral,positive"},
          {"per_class", per_class}};
}

nlohmann::json protocol_to_json(std::span<const ProtocolRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"ratio", std::to_string(r.ratio.train) + ":" + std::to_string(r.ratio.test)},
                   {"n_train", r.n_train},
                   {"n_test", r.n_test},
                   {"test_accuracy", r.test_accuracy},
                   {"metrics", metrics_to_json(r.metrics)},
                   {"history", history_to_json(r.history)}});
  }
  return {{"rows", out}};
}

std::string protocol_table(std::span<const ProtocolRow> rows) {
  std::string out = "ratio  epochs  n_train  n_test  test_accuracy\n";
  for (const auto& r : rows) {
    char line[96];
    std::snprintf(line, sizeof line, "%2d:%-2d  %6zu  %7zu  %6zu  %12s%%\n", r.ratio.train,
                  r.ratio.test, r.history.epochs.size(), r.n_train, r.n_test,
                  format_fixed(100.0 * r.test_accuracy, 1).c_str());
    out += line;
  }
  return out;
}

}  // namespace survey::train
