// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "oracles.h"
#include "survey/analysis.h"
#include "survey/cli.h"
#include "survey/corpus.h"
#include "survey/csv.h"
#include "survey/encoder.h"
#include "survey/gradcheck.h"
#include "survey/io.h"
#include "survey/ops.h"
#include "survey/rng.h"
#include "survey/synthetic.h"
#include "survey/tokenizer.h"
#include "survey/training.h"

namespace fs = std::filesystem;
using namespace survey;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("survey_acceptance_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

// ---- AC1 -----------------------------------------------------------------

Outcome protocol_shape() {
  const fs::path dir = scratch("protocol");
  if (run_cli({"synth", "--count", "3000", "--output", (dir / "corpus.csv").string()}) != 0) {
    return {false, "synth failed"};
  }
  std::string table;
  const auto t0 = std::chrono::steady_clock::now();
  if (run_cli({"protocol", "--train-csv", (dir / "corpus.csv").string(), "--out", dir.string()},
              &table) != 0) {
    return {false, "protocol command failed"};
  }
  const json j = json::parse(io::read_file(dir / "protocol.json"));
  const auto& rows = j.at("rows");
  const std::vector<std::string> want = {"70:30", "80:20", "90:10"};
  bool ok = rows.size() == 3 && j.at("train").at("epochs") == 10;
  std::string detail;
  for (std::size_t i = 0; i < rows.size() && i < 3; ++i) {
    const double acc = rows[i].at("test_accuracy").get<double>();
    ok = ok && rows[i].at("ratio") == want[i] && acc >= 0.90;
    ok = ok && table.find(want[i]) != std::string::npos;
    detail += want[i] + "=" + fmt("%.4f", acc) + " ";
  }
  fs::remove_all(dir);
  return {ok, "3 rows, 10 epochs: " + detail + fmt("(%.0f s)", seconds_since(t0))};
}

// ---- AC2 -----------------------------------------------------------------

Outcome synthetic_learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  const corpus::LexiconGrammar grammar;
  const auto records = corpus::generate_lexicon_corpus(grammar);
  const auto split = corpus::split(records, {80, 20}, 42);
  std::vector<std::string> texts;
  for (const auto& r : split.train) texts.push_back(r.text);
  const text::Vocabulary vocab = text::build_vocab(texts, 8000);
  model::ModelConfig config;  // default mini config
  config.vocab_size = vocab.size();
  const train::TrainConfig tcfg;  // 10 epochs
  auto params = model::init_params(config);
  const auto train_set = train::encode_records(split.train, vocab, config.max_len);
  const auto test_set = train::encode_records(split.test, vocab, config.max_len);
  train::train(params, config, train_set, tcfg);
  const auto m = train::evaluate(params, config, test_set);
  const double secs = seconds_since(t0);
  return {m.accuracy >= 0.95 && secs < 600.0 && tcfg.epochs == 10,
          "3000 sentences, 80:20, 10 epochs: test accuracy " + fmt("%.4f", m.accuracy) +
              ", runtime " + fmt("%.1f s", secs)};
}

// ---- AC3 -----------------------------------------------------------------

model::ModelConfig gradcheck_config(std::uint64_t seed) {
  model::ModelConfig c;
  c.vocab_size = 30;
  c.max_len = 8;
  c.embed_dim = 8;
  c.num_layers = 2;
  c.num_heads = 2;
  c.ffn_dim = 16;
  c.dropout_rate = 0.0;
  c.seed = seed;
  return c;
}

text::TokenizedSequence random_sequence(Rng& rng, std::size_t vocab, std::size_t max_len,
                                        std::size_t min_len = 2) {
  text::TokenizedSequence s;
  s.true_len = min_len + rng.uniform_index(max_len - min_len + 1);
  s.ids.assign(max_len, text::Vocabulary::kPad);
  s.mask.assign(max_len, 0);
  s.ids[0] = text::Vocabulary::kCls;
  for (std::size_t i = 1; i + 1 < s.true_len; ++i) {
    s.ids[i] = 5 + static_cast<int>(rng.uniform_index(vocab - 5));
  }
  s.ids[s.true_len - 1] = text::Vocabulary::kSep;
  for (std::size_t i = 0; i < s.true_len; ++i) s.mask[i] = 1;
  return s;
}

Outcome gradient_correctness() {
  double worst = 0.0;
  std::string worst_name;
  bool ok = true;
  int checks = 0;
  // Default init, plus weights scaled up so attention and GELU leave their
  // near-linear regime.
  for (std::uint64_t seed : {1, 2}) {
    for (double amplify : {1.0, 10.0}) {
      const auto config = gradcheck_config(seed);
      auto params = model::init_params(config);
      auto named = params.named();
      if (amplify != 1.0) {
        for (auto& n : named) {
          if (n.name.ends_with("gamma") || n.name.ends_with("beta") || n.name.ends_with("bias")) {
            continue;
          }
          for (double& v : n.tensor.mutable_values()) v *= amplify;
        }
      }
      for (auto& n : named) n.tensor.set_requires_grad(true);
      Rng rng(seed + 100);
      std::vector<text::TokenizedSequence> batch;
      std::vector<int> labels;
      for (int i = 0; i < 3; ++i) {
        batch.push_back(random_sequence(rng, config.vocab_size, config.max_len, 3));
        labels.push_back(static_cast<int>(rng.uniform_index(3)));
      }
      auto loss = [&] {
        model::ForwardContext ctx;
        std::vector<nn::Tensor> rows;
        for (const auto& s : batch) rows.push_back(model::logits(s, params, config, ctx));
        return nn::cross_entropy(nn::concat(rows, 0), labels);
      };
      nn::GradCheckOptions opts;  // h = 1e-4, tolerance 1e-4
      const auto report = nn::check_gradients(loss, named, opts);
      ok = ok && report.passed && report.entries.size() == named.size();
      ++checks;
      for (const auto& e : report.entries) {
        if (e.max_relative_error > worst) {
          worst = e.max_relative_error;
          worst_name = e.name;
        }
      }
    }
  }
  return {ok && worst < 1e-4, std::to_string(checks) +
                                  " models, every parameter; max relative error " +
                                  fmt("%.2e", worst) + " (" + worst_name + ")"};
}

// ---- AC4 -----------------------------------------------------------------

Outcome masking_invariance() {
  Rng rng(404);
  double worst_permute = 0.0, worst_extend = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    model::ModelConfig c;
    c.num_heads = 1 + rng.uniform_index(2);
    c.embed_dim = c.num_heads * (2 + rng.uniform_index(4));
    c.num_layers = 1 + rng.uniform_index(2);
    c.ffn_dim = 4 + rng.uniform_index(12);
    c.vocab_size = 12 + rng.uniform_index(30);
    c.max_len = 32;
    c.dropout_rate = 0.1;  // off in inference mode
    c.seed = rng.next_u64();
    const auto params32 = model::init_params(c);
    const std::size_t short_len = 8 + rng.uniform_index(17);  // 8..24
    model::ModelConfig cs = c;
    cs.max_len = short_len;
    model::EncoderParams params_short = params32.clone();
    params_short.position_embedding = nn::slice(params32.position_embedding, 0, 0, short_len).detach();

    auto seq = random_sequence(rng, c.vocab_size, short_len);
    const auto base = model::classify(seq, params_short, cs);

    auto permuted = seq;
    for (std::size_t i = seq.true_len; i < short_len; ++i) {
      permuted.ids[i] = static_cast<int>(rng.uniform_index(c.vocab_size));
    }
    rng.shuffle(std::span<int>(permuted.ids).subspan(seq.true_len));
    const auto p = model::classify(permuted, params_short, cs);

    auto extended = seq;
    extended.ids.resize(32, text::Vocabulary::kPad);
    extended.mask.resize(32, 0);
    const auto e = model::classify(extended, params32, c);
    for (int k = 0; k < 3; ++k) {
      worst_permute = std::max(worst_permute, std::abs(p[k] - base[k]));
      worst_extend = std::max(worst_extend, std::abs(e[k] - base[k]));
    }
  }
  return {worst_permute < 1e-6 && worst_extend < 1e-6,
          "100 pairs: max |dlogit| permuted PAD " + fmt("%.1e", worst_permute) +
              ", extended padding " + fmt("%.1e", worst_extend)};
}

// ---- AC5 -----------------------------------------------------------------

Outcome tokenizer_oracle() {
  Rng rng(505);
  std::size_t words = 0, mismatches = 0, round_trip_failures = 0, unk = 0;
  while (words < 10000) {
    const auto pieces = oracle::random_vocab(rng, 5, 5 + rng.uniform_index(40));
    std::vector<std::string> tokens(text::Vocabulary::kSpecialTokens.begin(),
                                    text::Vocabulary::kSpecialTokens.end());
    tokens.insert(tokens.end(), pieces.begin(), pieces.end());
    const text::Vocabulary vocab(tokens);
    for (int i = 0; i < 100; ++i, ++words) {
      const std::string w = oracle::random_word(rng, 5, 15);
      const auto got = text::wordpiece(w, vocab);
      if (got != oracle::wordpiece(w, pieces)) ++mismatches;
      if (got == std::vector<std::string>{"[UNK]"}) {
        ++unk;
        continue;
      }
      std::string joined;
      for (const auto& p : got) joined += p.starts_with("##") ? p.substr(2) : p;
      if (joined != w) ++round_trip_failures;
    }
  }
  return {mismatches == 0 && round_trip_failures == 0,
          std::to_string(words) + " words: " + std::to_string(mismatches) +
              " oracle mismatches, " + std::to_string(round_trip_failures) +
              " round-trip failures (" + std::to_string(unk) + " UNK)"};
}

// ---- AC6 -----------------------------------------------------------------

Outcome normalization() {
  Rng rng(606);
  double worst = 0.0;
  std::size_t rows = 0;
  for (int trial = 0; trial < 60; ++trial) {
    model::ModelConfig c;
    c.num_heads = 1 + rng.uniform_index(4);
    c.embed_dim = c.num_heads * (2 + rng.uniform_index(3));
    c.num_layers = 1 + rng.uniform_index(2);
    c.ffn_dim = 8;
    c.vocab_size = 20;
    c.max_len = 4 + rng.uniform_index(12);
    c.seed = rng.next_u64();
    auto params = model::init_params(c);
    // Half the models get weights of magnitude ~1e3 so attention scores and
    // logits reach the 1e3 range and beyond.
    if (trial % 2) {
      for (auto& n : params.named()) {
        for (double& v : n.tensor.mutable_values()) v *= 5e4;
      }
    }
    const auto seq = random_sequence(rng, c.vocab_size, c.max_len);
    std::vector<nn::Tensor> probe;
    model::ForwardContext ctx;
    ctx.attention_probe = &probe;
    const nn::Tensor logits = model::logits(seq, params, c, ctx);
    for (const auto& w : probe) {
      for (std::size_t i = 0; i < w.dim(0); ++i, ++rows) {
        double s = 0.0;
        for (std::size_t j = 0; j < w.dim(1); ++j) s += w.at(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
      }
    }
    const nn::Tensor probs = nn::softmax(logits, 1);
    worst = std::max(worst, std::abs(probs.at(0) + probs.at(1) + probs.at(2) - 1.0));
    ++rows;
  }
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 1 + rng.uniform_index(8), cols = 1 + rng.uniform_index(8);
    std::vector<double> v(r * cols);
    for (double& x : v) x = (trial % 2 ? 1e3 : 1.0) * (2 * rng.uniform() - 1);
    const nn::Tensor s = nn::softmax(nn::Tensor({r, cols}, v), 1);
    for (std::size_t i = 0; i < r; ++i, ++rows) {
      double sum = 0.0;
      for (std::size_t j = 0; j < cols; ++j) sum += s.at(i, j);
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return {worst < 1e-9,
          std::to_string(rows) + " attention/classifier/softmax rows: max |sum - 1| " +
              fmt("%.1e", worst)};
}

// ---- AC7 -----------------------------------------------------------------

Outcome split_exactness() {
  bool ok = true;
  std::string detail;
  for (std::size_t n : {10, 506, 1000}) {
    std::vector<SurveyRecord> data;
    for (std::size_t i = 0; i < n; ++i) data.push_back({i, "t", {}, Polarity::kNeutral});
    for (const auto& ratio : corpus::kProtocolRatios) {
      for (std::uint64_t seed : {1, 2, 3}) {
        const auto s = corpus::split(data, ratio, seed);
        const std::size_t want = n * ratio.train / 100;  // floor
        std::set<std::size_t> ids;
        for (const auto& r : s.train) ids.insert(r.id);
        for (const auto& r : s.test) ids.insert(r.id);
        ok = ok && s.train.size() == want && s.test.size() == n - want && ids.size() == n &&
             *ids.rbegin() == n - 1;
      }
    }
  }
  std::vector<SurveyRecord> d506(506);
  for (std::size_t i = 0; i < 506; ++i) d506[i] = {i, "t", {}, {}};
  const auto s = corpus::split(d506, {70, 30}, 9);
  ok = ok && s.train.size() == 354 && s.test.size() == 152;
  detail = "N in {10, 506, 1000} x 3 ratios x 3 seeds; 506 @ 70:30 -> " +
           std::to_string(s.train.size()) + "/" + std::to_string(s.test.size());
  return {ok, detail};
}

// ---- AC8 -----------------------------------------------------------------

Outcome report_integrity() {
  Rng rng(808);
  bool ok = true;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(trial < 150 ? 60 : 5000);
    std::vector<SurveyRecord> records;
    std::vector<analysis::Prediction> preds;
    for (std::size_t i = 0; i < n; ++i) {
      records.push_back({i, "texto numero " + std::to_string(i % 17) + ", fin", {}, {}});
      preds.push_back({i, polarity_from_index(static_cast<int>(rng.uniform_index(3)))});
    }
    const auto report = analysis::build_report(records, preds, analysis::spanish_stopwords(), {});
    const json j = analysis::report_to_json(report);
    // Independent recount from the CSV text.
    const auto table = csv::parse(analysis::predictions_csv(records, preds));
    std::map<std::string, std::size_t> counts;
    for (const auto& row : table.rows) ++counts[row.fields.at(2)];
    double pct_sum = 0.0;
    std::size_t count_sum = 0;
    for (auto name : {"negative", "neutral", "positive"}) {
      const std::size_t c = counts[name];
      const double pct = std::round(1000.0 * static_cast<double>(c) / n) / 10.0;
      ok = ok && j.at("counts").at(name).get<std::size_t>() == c &&
           j.at("percentages").at(name).get<double>() == pct;
      pct_sum += j.at("percentages").at(name).get<double>();
      count_sum += j.at("counts").at(name).get<std::size_t>();
    }
    ok = ok && table.rows.size() == n && count_sum == n && j.at("n") == n &&
         std::abs(pct_sum - 100.0) <= 0.1 + 1e-9;
  }
  const auto fixture = analysis::distribution(std::vector<Polarity>{
      Polarity::kNegative, Polarity::kNegative, Polarity::kNegative, Polarity::kPositive});
  ok = ok && fixture.percentages == std::array<double, 3>{75.0, 0.0, 25.0};
  return {ok, "200 random prediction sets recounted from CSV; fixture -> " +
                  fmt("%.1f", fixture.percentages[0]) + "/" + fmt("%.1f", fixture.percentages[1]) +
                  "/" + fmt("%.1f", fixture.percentages[2])};
}

// ---- AC9 -----------------------------------------------------------------

Outcome determinism() {
  const fs::path dir = scratch("determinism");
  if (run_cli({"synth", "--count", "600", "--output", (dir / "corpus.csv").string()}) != 0) {
    return {false, "synth failed"};
  }
  const json config = {{"version", 1},
                       {"paths",
                        {{"train_csv", (dir / "corpus.csv").string()},
                         {"predict_csv", (dir / "corpus.csv").string()}}},
                       {"train", {{"epochs", 2}}},
                       {"seed", 2024}};
  io::write_file_atomic(dir / "config.json", config.dump(2));
  const std::vector<std::string> files = {"vocab.txt", "history.json", "report.json",
                                          "predictions.csv", "model.ckpt"};
  std::map<std::string, std::string> first;
  for (const char* run : {"a", "b"}) {
    const std::string out = (dir / run).string();
    for (const char* cmd : {"build-vocab", "train", "predict", "report"}) {
      if (run_cli({cmd, "--config", (dir / "config.json").string(), "--out", out}) != 0) {
        return {false, std::string(cmd) + " failed"};
      }
    }
    for (const auto& f : files) {
      const std::string bytes = io::read_file(dir / run / f);
      if (first.count(f) == 0) {
        first[f] = bytes;
      } else if (first[f] != bytes) {
        return {false, f + " differs between runs"};
      }
    }
  }
  fs::remove_all(dir);
  return {true, "build-vocab -> train -> predict -> report twice: vocab, history, report, "
                "predictions and checkpoint byte-identical"};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "protocol shape", protocol_shape},
      {"AC2", "synthetic learnability", synthetic_learnability},
      {"AC3", "gradient correctness", gradient_correctness},
      {"AC4", "masking invariance", masking_invariance},
      {"AC5", "tokenizer oracle", tokenizer_oracle},
      {"AC6", "softmax/attention normalization", normalization},
      {"AC7", "split exactness", split_exactness},
      {"AC8", "report integrity", report_integrity},
      {"AC9", "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures ? "FAILED " : "ALL PASS ") << criteria.size() - failures << "/"
            << criteria.size() << std::endl;
  return failures ? 1 : 0;
}
