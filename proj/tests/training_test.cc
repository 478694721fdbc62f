#include "survey/training.h"

#include <numeric>

#include <gtest/gtest.h>

#include "survey/errors.h"
#include "survey/rng.h"
#include "survey/synthetic.h"

namespace survey::train {
namespace {

using model::ModelConfig;

ModelConfig small_config(std::size_t vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.max_len = 16;
  c.embed_dim = 16;
  c.num_layers = 1;
  c.num_heads = 2;
  c.ffn_dim = 32;
  c.dropout_rate = 0.0;
  return c;
}

struct SmallCorpus {
  text::Vocabulary vocab;
  std::vector<Example> examples;
};

SmallCorpus small_corpus(std::size_t n, std::uint64_t seed) {
  corpus::LexiconGrammar g;
  g.num_sentences = n;
  g.seed = seed;
  const auto records = corpus::generate_lexicon_corpus(g);
  std::vector<std::string> texts;
  for (const auto& r : records) texts.push_back(r.text);
  text::Vocabulary vocab = text::build_vocab(texts, 500);
  auto examples = encode_records(records, vocab, 16);
  return {std::move(vocab), std::move(examples)};
}

TEST(TrainConfigTest, DefaultsAndValidation) {
  const TrainConfig c;
  EXPECT_EQ(c.epochs, 10u);
  EXPECT_DOUBLE_EQ(c.learning_rate, 2e-4);
  EXPECT_DOUBLE_EQ(c.beta1, 0.9);
  EXPECT_DOUBLE_EQ(c.beta2, 0.999);
  EXPECT_DOUBLE_EQ(c.eps, 1e-8);
  EXPECT_TRUE(c.shuffle_each_epoch);
  TrainConfig bad;
  bad.epochs = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = TrainConfig{};
  bad.batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = TrainConfig{};
  bad.learning_rate = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  const nlohmann::json j = c;
  EXPECT_EQ(j.get<TrainConfig>(), c);
}

TEST(AdamTest, FirstStepIsLearningRate) {
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  nn::Tensor p = nn::Tensor::scalar(1.0);
  AdamState state;
  const std::vector<double> g = {1.0};
  adam_step(p, g, state, 1, cfg);
  // m_hat = 1, v_hat = 1 -> step lr / (1 + eps).
  EXPECT_NEAR(p.item(), 1.0 - 0.1 / (1.0 + 1e-8), 1e-15);
}

TEST(AdamTest, MatchesHandComputedSequence) {
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  nn::Tensor p = nn::Tensor({2}, {0.5, -0.5});
  AdamState state;
  const std::vector<std::vector<double>> grads = {{0.2, -1.0}, {-0.4, 0.5}, {0.1, 0.0}};
  std::vector<double> want = {0.5, -0.5}, m(2, 0.0), v(2, 0.0);
  for (std::size_t t = 1; t <= grads.size(); ++t) {
    adam_step(p, grads[t - 1], state, t, cfg);
    for (int i = 0; i < 2; ++i) {
      const double g = grads[t - 1][i];
      m[i] = 0.9 * m[i] + 0.1 * g;
      v[i] = 0.999 * v[i] + 0.001 * g * g;
      const double mh = m[i] / (1 - std::pow(0.9, t));
      const double vh = v[i] / (1 - std::pow(0.999, t));
      want[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      EXPECT_NEAR(p.at(i), want[i], 1e-15);
    }
  }
}

TEST(AdamTest, ZeroGradZeroLrAndSymmetry) {
  TrainConfig cfg;
  nn::Tensor p = nn::Tensor({3}, {1, 2, 3});
  AdamState state;
  for (std::size_t t = 1; t <= 5; ++t) adam_step(p, std::vector<double>(3, 0.0), state, t, cfg);
  EXPECT_EQ(p.at(0), 1.0);
  EXPECT_EQ(p.at(2), 3.0);

  cfg.learning_rate = 0.0;
  Rng rng(1);
  for (std::size_t t = 1; t <= 5; ++t) {
    std::vector<double> g = {rng.normal(), rng.normal(), rng.normal()};
    adam_step(p, g, state, t, cfg);
  }
  EXPECT_EQ(p.at(1), 2.0);

  TrainConfig c2;
  nn::Tensor a = nn::Tensor({2}, {0.3, 0.3}), b = nn::Tensor({2}, {0.3, 0.3});
  AdamState sa, sb;
  for (std::size_t t = 1; t <= 4; ++t) {
    const std::vector<double> g = {0.1 * t, -0.2};
    adam_step(a, g, sa, t, c2);
    adam_step(b, g, sb, t, c2);
  }
  EXPECT_EQ(a.at(0), b.at(0));
  EXPECT_EQ(a.at(1), b.at(1));
  EXPECT_THROW(adam_step(a, std::vector<double>(3, 0.0), sa, 5, c2), DimensionError);
}

TEST(MetricsTest, AllCorrect) {
  const std::vector<Polarity> gold = {Polarity::kNegative, Polarity::kNeutral, Polarity::kPositive,
                                      Polarity::kPositive};
  const Metrics m = score_predictions(gold, gold);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (i != j) {
        EXPECT_EQ(m.confusion[i][j], 0u);
      }
    }
  }
}

TEST(MetricsTest, AlwaysNegative) {
  std::vector<Polarity> gold(4, Polarity::kNegative);
  gold.insert(gold.end(), 6, Polarity::kPositive);
  const std::vector<Polarity> pred(10, Polarity::kNegative);
  const Metrics m = score_predictions(gold, pred);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.4);
  EXPECT_DOUBLE_EQ(m.precision[0], 0.4);
  EXPECT_DOUBLE_EQ(m.recall[0], 1.0);
  EXPECT_DOUBLE_EQ(m.precision[2], 0.0);
  EXPECT_DOUBLE_EQ(m.recall[2], 0.0);
}

TEST(MetricsTest, HandCountedTenExampleFixture) {
  using P = Polarity;
  // gold:      N N N U U U P P P P
  // predicted: N N U U P U P P N P
  const std::vector<P> gold = {P::kNegative, P::kNegative, P::kNegative, P::kNeutral,
                               P::kNeutral,  P::kNeutral,  P::kPositive, P::kPositive,
                               P::kPositive, P::kPositive};
  const std::vector<P> pred = {P::kNegative, P::kNegative, P::kNeutral,  P::kNeutral,
                               P::kPositive, P::kNeutral,  P::kPositive, P::kPositive,
                               P::kNegative, P::kPositive};
  const Metrics m = score_predictions(gold, pred);
  const ConfusionMatrix want = {{{2, 1, 0}, {0, 2, 1}, {1, 0, 3}}};
  EXPECT_EQ(m.confusion, want);
  EXPECT_EQ(m.n_examples, 10u);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.7);
  EXPECT_DOUBLE_EQ(m.recall[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall[2], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(m.precision[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.precision[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.precision[2], 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(m.f1[2], 0.75);
  EXPECT_THROW(score_predictions(gold, std::span<const P>(pred).first(9)), ContractError);
}

TEST(MetricsTest, IdentitiesOnRandomConfusions) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    ConfusionMatrix c{};
    for (auto& row : c) {
      for (auto& x : row) x = rng.uniform_index(20);
    }
    c[0][0] += 1;
    const Metrics m = Metrics::from_confusion(c);
    std::size_t total = 0, trace = 0;
    for (int i = 0; i < 3; ++i) {
      trace += c[i][i];
      std::size_t row = 0, col = 0;
      for (int j = 0; j < 3; ++j) {
        total += c[i][j];
        row += c[i][j];
        col += c[j][i];
      }
      EXPECT_DOUBLE_EQ(m.recall[i], row ? static_cast<double>(c[i][i]) / row : 0.0);
      EXPECT_DOUBLE_EQ(m.precision[i], col ? static_cast<double>(c[i][i]) / col : 0.0);
    }
    EXPECT_EQ(m.n_examples, total);
    EXPECT_DOUBLE_EQ(m.accuracy, static_cast<double>(trace) / total);
  }
}

TEST(TrainTest, MemorizesSingleExample) {
  const auto corpus = small_corpus(3, 2);
  const std::vector<Example> one = {corpus.examples[0]};
  const ModelConfig c = small_config(corpus.vocab.size());
  auto params = model::init_params(c);
  TrainConfig tcfg;
  tcfg.epochs = 40;
  tcfg.learning_rate = 1e-3;
  const TrainHistory h = train(params, c, one, tcfg);
  ASSERT_EQ(h.epochs.size(), 40u);
  EXPECT_LT(h.epochs.back().mean_loss, h.epochs.front().mean_loss);
  EXPECT_DOUBLE_EQ(h.epochs.back().train_accuracy, 1.0);
  EXPECT_DOUBLE_EQ(evaluate(params, c, one).accuracy, 1.0);
}

TEST(TrainTest, BitIdenticalForSameSeeds) {
  const auto corpus = small_corpus(60, 3);
  ModelConfig c = small_config(corpus.vocab.size());
  c.dropout_rate = 0.1;
  TrainConfig tcfg;
  tcfg.epochs = 3;
  tcfg.batch_size = 7;
  auto p1 = model::init_params(c);
  auto p2 = model::init_params(c);
  const auto h1 = train(p1, c, corpus.examples, tcfg, corpus.examples);
  const auto h2 = train(p2, c, corpus.examples, tcfg, corpus.examples);
  EXPECT_EQ(history_to_json(h1).dump(), history_to_json(h2).dump());
  const auto n1 = p1.named(), n2 = p2.named();
  for (std::size_t i = 0; i < n1.size(); ++i) {
    for (std::size_t j = 0; j < n1[i].tensor.size(); ++j) {
      ASSERT_EQ(n1[i].tensor.at(j), n2[i].tensor.at(j)) << n1[i].name;
    }
  }
  EXPECT_TRUE(h1.epochs[0].heldout_accuracy.has_value());
}

TEST(TrainTest, LossDecreasesAcrossSeeds) {
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const auto corpus = small_corpus(90, seed);
    ModelConfig c = small_config(corpus.vocab.size());
    c.seed = seed;
    TrainConfig tcfg;
    tcfg.seed = seed;
    tcfg.learning_rate = 1e-3;
    auto params = model::init_params(c);
    const auto h = train(params, c, corpus.examples, tcfg);
    ASSERT_EQ(h.epochs.size(), 10u);
    EXPECT_LT(h.epochs[9].mean_loss, h.epochs[0].mean_loss) << seed;
  }
}

TEST(TrainTest, Errors) {
  const auto corpus = small_corpus(6, 1);
  const ModelConfig c = small_config(corpus.vocab.size());
  auto params = model::init_params(c);
  std::vector<Example> data = corpus.examples;
  data[3].label.reset();
  EXPECT_THROW(train(params, c, data, TrainConfig{}), ContractError);
  EXPECT_THROW(train(params, c, {}, TrainConfig{}), ContractError);
  EXPECT_THROW(evaluate(params, c, {}), DatasetError);
}

TEST(TrainTest, NonFiniteLossNamesEpochAndBatch) {
  const auto corpus = small_corpus(6, 1);
  const ModelConfig c = small_config(corpus.vocab.size());
  auto params = model::init_params(c);
  params.classifier_b.mutable_values()[0] = std::numeric_limits<double>::quiet_NaN();
  try {
    train(params, c, corpus.examples, TrainConfig{});
    FAIL();
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("epoch 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("batch 1"), std::string::npos) << msg;
  }
}

TEST(ProtocolTest, OneRowPerRatio) {
  const auto corpus = small_corpus(60, 4);
  const ModelConfig c = small_config(corpus.vocab.size());
  TrainConfig tcfg;
  tcfg.epochs = 1;
  const auto rows = run_protocol(corpus.examples, corpus::kProtocolRatios, c, tcfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].n_train, 42u);
  EXPECT_EQ(rows[1].n_train, 48u);
  EXPECT_EQ(rows[2].n_train, 54u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.n_train + r.n_test, 60u);
    EXPECT_EQ(r.metrics.n_examples, r.n_test);
    EXPECT_EQ(r.history.epochs.size(), 1u);
  }
  const std::string table = protocol_table(rows);
  EXPECT_NE(table.find("70:30"), std::string::npos);
  EXPECT_NE(table.find("90:10"), std::string::npos);
  EXPECT_EQ(protocol_to_json(rows).at("rows").size(), 3u);
}

}  // namespace
}  // namespace survey::train
