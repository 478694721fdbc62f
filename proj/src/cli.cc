#include "survey/cli.h"

#include <chrono>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "survey/errors.h"
#include "survey/io.h"
#include "survey/synthetic.h"
#include "survey/tokenizer.h"

namespace survey::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Error categories that map to exit code 2 besides ConfigError.
class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void check_keys(const json& j, std::string_view section,
                std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError("config: '" + std::string(section) + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "' in " + std::string(section));
    }
  }
}

Polarity polarity_or_throw(const std::string& text, std::string_view what) {
  auto p = parse_polarity(text);
  if (!p) throw ConfigError(std::string(what) + ": unknown polarity '" + text + "'");
  return *p;
}

corpus::CsvSchema parse_schema(const json& j, corpus::CsvSchema schema, std::string_view section) {
  check_keys(j, section, {"text_col", "label_col", "meta_col", "label_kind", "delimiter"});
  if (j.contains("text_col")) schema.text_col = j.at("text_col").get<std::string>();
  if (j.contains("label_col")) {
    schema.label_col = j.at("label_col").is_null()
                           ? std::nullopt
                           : std::optional(j.at("label_col").get<std::string>());
  }
  if (j.contains("meta_col")) {
    schema.meta_col = j.at("meta_col").is_null()
                          ? std::nullopt
                          : std::optional(j.at("meta_col").get<std::string>());
  }
  if (j.contains("label_kind")) {
    const auto kind = j.at("label_kind").get<std::string>();
    if (kind == "polarity") {
      schema.label_kind = corpus::LabelKind::kPolarity;
    } else if (kind == "satisfaction") {
      schema.label_kind = corpus::LabelKind::kSatisfaction;
    } else {
      throw ConfigError("config: label_kind must be 'polarity' or 'satisfaction', got '" + kind +
                        "'");
    }
  }
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d.size() != 1 || d == "\"" || d == "\n" || d == "\r") {
      throw ConfigError("config: delimiter must be a single character other than quote or newline");
    }
    schema.delimiter = d[0];
  }
  return schema;
}

std::optional<Polarity> parse_collapse(const json& v) {
  if (v.is_null()) return std::nullopt;
  const auto p = polarity_or_throw(v.get<std::string>(), "report.collapse_neutral");
  if (p == Polarity::kNeutral) throw ConfigError("report.collapse_neutral cannot be 'neutral'");
  return p;
}

void set_all_seeds(RunConfig& c, std::uint64_t seed) {
  c.model.seed = seed;
  c.train.seed = seed;
  c.split_seed = seed;
}

// ---- logging -------------------------------------------------------------

class Log {
 public:
  explicit Log(std::ostream& err) : err_(err) {}
  template <typename... Args>
  void operator()(const Args&... args) {
    err_ << "[survey] ";
    (err_ << ... << args);
    err_ << '\n';
  }

 private:
  std::ostream& err_;
};

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

// ---- data loading --------------------------------------------------------

fs::path require_input(const std::optional<fs::path>& p, std::string_view what) {
  if (!p) throw UsageError(std::string(what) + " is not set (use the config or a flag)");
  if (!fs::exists(*p)) throw UsageError(std::string(what) + " not found: " + p->string());
  return *p;
}

std::vector<SurveyRecord> load_records(const fs::path& path, const corpus::CsvSchema& schema,
                                       const corpus::SatisfactionMap& levels, Log& log) {
  corpus::LoadResult r = corpus::load_csv(path, schema, levels);
  for (const auto& e : r.row_errors) {
    log(path.string(), ":", e.line, ": skipped row: ", e.message);
  }
  log("loaded ", r.records.size(), " records from ", path.string(), " (", r.dropped_empty,
      " empty, ", r.row_errors.size(), " rejected)");
  return std::move(r.records);
}

std::vector<SurveyRecord> load_labeled(const fs::path& path, const RunConfig& c, Log& log) {
  if (!c.csv.label_col) throw ConfigError("csv.label_col is required for labeled data");
  auto records = load_records(path, c.csv, c.satisfaction, log);
  if (records.empty()) throw UsageError(path.string() + ": no records");
  return records;
}

std::vector<std::string> texts_of(std::span<const SurveyRecord> records) {
  std::vector<std::string> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.text);
  return out;
}

text::Vocabulary load_vocab(const RunConfig& c) {
  const fs::path path = c.vocab_path();
  if (!fs::exists(path)) throw UsageError("vocabulary not found: " + path.string());
  return text::Vocabulary::load(path);
}

analysis::SentimentModel load_model(const RunConfig& c, Log& log) {
  text::Vocabulary vocab = load_vocab(c);
  const fs::path ckpt_path = c.checkpoint_path();
  if (!fs::exists(ckpt_path)) throw UsageError("checkpoint not found: " + ckpt_path.string());
  model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
  const std::string fp = vocab.fingerprint();
  if (ckpt.vocab_fingerprint != fp) {
    throw ConfigError("vocabulary " + c.vocab_path().string() + " (fingerprint " + fp +
                      ") does not match checkpoint " + ckpt_path.string() + " (fingerprint " +
                      ckpt.vocab_fingerprint + ")");
  }
  if (ckpt.config.vocab_size != vocab.size()) {
    throw ConfigError("checkpoint expects " + std::to_string(ckpt.config.vocab_size) +
                      " vocabulary entries, vocabulary has " + std::to_string(vocab.size()));
  }
  log("loaded checkpoint ", ckpt_path.string(), " (vocab ", fp, ")");
  return {std::move(vocab), ckpt.config, std::move(ckpt.params)};
}

void write_json(const fs::path& path, const json& j) { io::write_file_atomic(path, j.dump(2) + "\n"); }

json config_summary(const RunConfig& c, const model::ModelConfig& mc) {
  return {{"model", mc},
          {"train", c.train},
          {"split",
           {{"ratio", std::to_string(c.ratio.train) + ":" + std::to_string(c.ratio.test)},
            {"seed", c.split_seed},
            {"stratified", c.stratified}}}};
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> train_csv, eval_csv, predict_csv, vocab, checkpoint, stopwords,
      predictions, report_out;
  std::optional<std::size_t> epochs;
  std::optional<std::string> ratio;
  std::optional<std::string> collapse;
  std::optional<std::size_t> top_k;
  std::size_t count = 3000;
  std::optional<std::string> output;
};

// ---- commands ------------------------------------------------------------

int cmd_synth(const RunConfig& c, const Flags& f, std::ostream& out, Log& log) {
  corpus::LexiconGrammar g;
  g.num_sentences = f.count;
  if (f.seed) g.seed = *f.seed;
  const std::optional<fs::path> output =
      f.output ? std::optional<fs::path>(*f.output) : std::nullopt;
  const auto records = corpus::generate_lexicon_corpus(g);
  const fs::path path = output.value_or(c.out_dir / "synthetic.csv");
  corpus::CsvSchema schema;
  schema.label_col = "label";
  corpus::write_csv(path, records, schema);
  log("wrote ", records.size(), " sentences to ", path.string());
  out << "synthetic: " << records.size() << " records -> " << path.string() << "\n";
  return kExitOk;
}

corpus::DatasetSplit split_train_csv(const RunConfig& c, Log& log) {
  const auto records = load_labeled(require_input(c.paths.train_csv, "train_csv"), c, log);
  corpus::DatasetSplit s = corpus::split(records, c.ratio, c.split_seed, c.stratified);
  log("split ", c.ratio.train, ":", c.ratio.test, " seed ", c.split_seed, " -> ", s.train.size(),
      " train / ", s.test.size(), " test");
  return s;
}

text::Vocabulary build_and_save_vocab(const RunConfig& c, std::span<const SurveyRecord> records,
                                      Log& log) {
  const auto texts = texts_of(records);
  text::Vocabulary vocab = text::build_vocab(texts, c.vocab_max_size, c.vocab_min_freq);
  vocab.save(c.vocab_path());
  log("vocabulary of ", vocab.size(), " entries (", vocab.fingerprint(), ") -> ",
      c.vocab_path().string(), ", word coverage ", fixed(text::word_coverage(texts, vocab)));
  return vocab;
}

int cmd_build_vocab(const RunConfig& c, std::ostream& out, Log& log) {
  const auto s = split_train_csv(c, log);
  const auto vocab = build_and_save_vocab(c, s.train, log);
  out << "vocab: " << vocab.size() << " entries, fingerprint " << vocab.fingerprint() << " -> "
      << c.vocab_path().string() << "\n";
  return kExitOk;
}

int cmd_train(const RunConfig& c, std::ostream& out, Log& log) {
  const auto s = split_train_csv(c, log);
  // An explicitly configured vocabulary must already exist; otherwise one is
  // built from the training part and written to the output directory.
  text::Vocabulary vocab = c.paths.vocab ? load_vocab(c) : build_and_save_vocab(c, s.train, log);

  model::ModelConfig mc = c.model;
  mc.vocab_size = vocab.size();
  mc.validate();
  c.train.validate();

  const auto train_set = train::encode_records(s.train, vocab, mc.max_len);
  const auto test_set = train::encode_records(s.test, vocab, mc.max_len);
  model::EncoderParams params = model::init_params(mc);

  const auto start = std::chrono::steady_clock::now();
  const train::TrainHistory history =
      train::train(params, mc, train_set, c.train, test_set, [&](const train::EpochRecord& e) {
        log("epoch ", e.epoch, "/", c.train.epochs, " loss ", fixed(e.mean_loss), " train acc ",
            fixed(e.train_accuracy), " held-out acc ", fixed(e.heldout_accuracy.value_or(0.0)));
      });
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  log("training took ", fixed(seconds, 1), " s");

  const train::Metrics metrics = train::evaluate(params, mc, test_set);
  // The vocabulary path is stored relative to the checkpoint so that a run
  // directory can be moved without changing its bytes.
  const fs::path vocab_rel = fs::absolute(c.vocab_path())
                                 .lexically_normal()
                                 .lexically_relative(fs::absolute(c.checkpoint_path())
                                                         .lexically_normal()
                                                         .parent_path());
  model::save_checkpoint(c.checkpoint_path(),
                         {mc, params, vocab.fingerprint(), vocab_rel.generic_string()});
  json hist = config_summary(c, mc);
  hist["history"] = train::history_to_json(history).at("epochs");
  write_json(c.out_dir / "history.json", hist);
  write_json(c.out_dir / "metrics.json", train::metrics_to_json(metrics));

  out << "train: " << s.train.size() << " examples, " << c.train.epochs << " epochs\n"
      << "test accuracy: " << fixed(metrics.accuracy) << " on " << metrics.n_examples
      << " held-out examples\n"
      << "checkpoint: " << c.checkpoint_path().string() << "\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& c, std::ostream& out, Log& log) {
  const auto m = load_model(c, log);
  std::vector<SurveyRecord> records;
  if (c.paths.eval_csv) {
    records = load_labeled(require_input(c.paths.eval_csv, "eval_csv"), c, log);
  } else {
    records = split_train_csv(c, log).test;
  }
  const auto data = train::encode_records(records, m.vocab, m.config.max_len);
  const train::Metrics metrics = train::evaluate(m.params, m.config, data);
  write_json(c.out_dir / "metrics.json", train::metrics_to_json(metrics));
  out << "accuracy: " << fixed(metrics.accuracy) << " on " << metrics.n_examples
      << " examples\n";
  for (Polarity p : kAllPolarities) {
    const int i = index_of(p);
    out << "  " << polarity_name(p) << ": precision " << fixed(metrics.precision[i])
        << " recall " << fixed(metrics.recall[i]) << " f1 " << fixed(metrics.f1[i]) << "\n";
  }
  return kExitOk;
}

int cmd_protocol(const RunConfig& c, std::ostream& out, Log& log) {
  const auto records = load_labeled(require_input(c.paths.train_csv, "train_csv"), c, log);
  // One vocabulary over the whole corpus so every ratio sees the same ids.
  const auto texts = texts_of(records);
  const text::Vocabulary vocab = text::build_vocab(texts, c.vocab_max_size, c.vocab_min_freq);
  log("protocol vocabulary: ", vocab.size(), " entries");
  model::ModelConfig mc = c.model;
  mc.vocab_size = vocab.size();
  mc.validate();
  c.train.validate();
  for (const auto& r : c.protocol_ratios) corpus::validate_ratio(r);

  const auto data = train::encode_records(records, vocab, mc.max_len);
  train::ProtocolOptions opts;
  opts.split_seed = c.split_seed;
  opts.stratified = c.stratified;
  const auto rows = train::run_protocol(
      data, c.protocol_ratios, mc, c.train, opts,
      [&](const corpus::SplitRatio& r, const train::EpochRecord& e) {
        log(r.train, ":", r.test, " epoch ", e.epoch, "/", c.train.epochs, " loss ",
            fixed(e.mean_loss), " train acc ", fixed(e.train_accuracy));
      });
  json j = config_summary(c, mc);
  j.erase("split");
  j["split_seed"] = c.split_seed;
  j["stratified"] = c.stratified;
  j["rows"] = train::protocol_to_json(rows).at("rows");
  write_json(c.out_dir / "protocol.json", j);
  const std::string table = train::protocol_table(rows);
  io::write_file_atomic(c.out_dir / "protocol.txt", table);
  out << table;
  return kExitOk;
}

analysis::StopwordSet stopwords_for(const RunConfig& c) {
  if (!c.paths.stopwords) return analysis::spanish_stopwords();
  return analysis::load_stopwords(require_input(c.paths.stopwords, "stopwords"));
}

void print_report(const analysis::SentimentReport& r, std::ostream& out) {
  out << "n: " << r.n << "\n";
  for (Polarity p : kAllPolarities) {
    const int i = index_of(p);
    out << "  " << polarity_name(p) << ": " << r.counts[i] << " (" << fixed(r.percentages[i], 1)
        << "%)\n";
  }
  out << "top words:";
  for (std::size_t i = 0; i < r.top_words.size() && i < 10; ++i) {
    out << " " << r.top_words[i].word << "(" << r.top_words[i].count << ")";
  }
  out << "\n";
}

int cmd_predict(const RunConfig& c, std::ostream& out, Log& log) {
  const fs::path path = require_input(c.paths.predict_csv, "predict_csv");
  const auto stopwords = stopwords_for(c);
  const auto m = load_model(c, log);
  const auto records = load_records(path, c.predict_schema(), c.satisfaction, log);
  if (records.empty()) throw UsageError(path.string() + ": no records");
  const auto predictions = analysis::predict_corpus(records, m);
  io::write_file_atomic(c.predictions_path(), analysis::predictions_csv(records, predictions));
  const auto report = analysis::build_report(records, predictions, stopwords, c.report);
  write_json(c.report_path(), analysis::report_to_json(report));
  log("wrote ", c.predictions_path().string(), " and ", c.report_path().string());
  print_report(report, out);
  return kExitOk;
}

int cmd_report(const RunConfig& c, std::ostream& out, Log& log) {
  const fs::path path = c.predictions_path();
  if (!fs::exists(path)) throw UsageError("predictions not found: " + path.string());
  const auto stopwords = stopwords_for(c);
  corpus::CsvSchema schema;
  schema.label_col = "polarity";
  const auto loaded = corpus::load_csv(path, schema);
  for (const auto& e : loaded.row_errors) {
    log(path.string(), ":", e.line, ": skipped row: ", e.message);
  }
  if (loaded.records.empty()) throw UsageError(path.string() + ": no records");
  std::vector<SurveyRecord> records;
  std::vector<analysis::Prediction> predictions;
  for (const auto& r : loaded.records) {
    if (!r.label) throw DatasetError(path.string() + ": record without polarity");
    predictions.push_back({records.size(), *r.label});
    records.push_back(r);
    records.back().id = predictions.back().id;
  }
  const auto report = analysis::build_report(records, predictions, stopwords, c.report);
  write_json(c.report_path(), analysis::report_to_json(report));
  log("wrote ", c.report_path().string());
  print_report(report, out);
  return kExitOk;
}


RunConfig assemble(const Flags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    const fs::path path(f.config);
    if (!fs::exists(path)) throw UsageError("config not found: " + path.string());
    json j;
    try {
      j = json::parse(io::read_file(path));
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    c = parse_run_config(j, path.parent_path());
  }
  if (f.seed) set_all_seeds(c, *f.seed);
  if (f.out_dir) c.out_dir = *f.out_dir;
  auto set = [](std::optional<fs::path>& dst, const std::optional<std::string>& src) {
    if (src) dst = fs::path(*src);
  };
  set(c.paths.train_csv, f.train_csv);
  set(c.paths.eval_csv, f.eval_csv);
  set(c.paths.predict_csv, f.predict_csv);
  set(c.paths.vocab, f.vocab);
  set(c.paths.checkpoint, f.checkpoint);
  set(c.paths.stopwords, f.stopwords);
  set(c.paths.predictions_csv, f.predictions);
  set(c.paths.report_out, f.report_out);
  if (f.epochs) c.train.epochs = *f.epochs;
  if (f.ratio) c.ratio = parse_ratio(*f.ratio);
  if (f.collapse) c.report.collapse_neutral_into = parse_collapse(json(*f.collapse));
  if (f.top_k) c.report.top_k = *f.top_k;
  if (c.report.top_k == 0) throw ConfigError("report.top_k must be positive");
  return c;
}

}  // namespace

fs::path RunConfig::vocab_path() const { return paths.vocab.value_or(out_dir / "vocab.txt"); }
fs::path RunConfig::checkpoint_path() const {
  return paths.checkpoint.value_or(out_dir / "model.ckpt");
}
fs::path RunConfig::predictions_path() const {
  return paths.predictions_csv.value_or(out_dir / "predictions.csv");
}
fs::path RunConfig::report_path() const { return paths.report_out.value_or(out_dir / "report.json"); }

corpus::CsvSchema RunConfig::predict_schema() const {
  if (predict_csv_schema) return *predict_csv_schema;
  corpus::CsvSchema s = csv;
  s.label_col.reset();
  return s;
}

corpus::SplitRatio parse_ratio(std::string_view text) {
  const auto colon = text.find(':');
  corpus::SplitRatio r{0, 0};
  bool ok = colon != std::string_view::npos;
  if (ok) {
    const std::string a(text.substr(0, colon)), b(text.substr(colon + 1));
    char* end = nullptr;
    r.train = static_cast<int>(std::strtol(a.c_str(), &end, 10));
    ok = !a.empty() && *end == '\0';
    r.test = static_cast<int>(std::strtol(b.c_str(), &end, 10));
    ok = ok && !b.empty() && *end == '\0';
  }
  if (!ok) throw ConfigError("split ratio must look like 80:20, got '" + std::string(text) + "'");
  corpus::validate_ratio(r);
  return r;
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir) {
  RunConfig c;
  try {
    check_keys(j, "config",
               {"version", "seed", "out_dir", "paths", "csv", "predict_csv", "satisfaction_map",
                "vocab", "model", "train", "split", "report"});
    if (!j.contains("version") || j.at("version") != kConfigVersion) {
      throw ConfigError("config: unsupported version " +
                        (j.contains("version") ? j.at("version").dump() : "(missing)") +
                        ", expected " + std::to_string(kConfigVersion));
    }
    if (j.contains("out_dir")) c.out_dir = resolve(base_dir, j.at("out_dir").get<std::string>());
    if (j.contains("paths")) {
      const json& p = j.at("paths");
      check_keys(p, "paths",
                 {"train_csv", "eval_csv", "predict_csv", "vocab", "checkpoint", "stopwords",
                  "predictions_csv", "report"});
      auto get = [&](const char* key, std::optional<fs::path>& dst) {
        if (p.contains(key) && !p.at(key).is_null()) {
          dst = resolve(base_dir, p.at(key).get<std::string>());
        }
      };
      get("train_csv", c.paths.train_csv);
      get("eval_csv", c.paths.eval_csv);
      get("predict_csv", c.paths.predict_csv);
      get("vocab", c.paths.vocab);
      get("checkpoint", c.paths.checkpoint);
      get("stopwords", c.paths.stopwords);
      get("predictions_csv", c.paths.predictions_csv);
      get("report", c.paths.report_out);
    }
    if (j.contains("csv")) c.csv = parse_schema(j.at("csv"), c.csv, "csv");
    if (j.contains("predict_csv")) {
      corpus::CsvSchema base = c.csv;
      base.label_col.reset();
      c.predict_csv_schema = parse_schema(j.at("predict_csv"), base, "predict_csv");
    }
    if (j.contains("satisfaction_map")) {
      const json& m = j.at("satisfaction_map");
      if (!m.is_object()) throw ConfigError("config: satisfaction_map must be an object");
      std::map<std::string, Polarity> entries;
      for (const auto& [level, pol] : m.items()) {
        entries[level] = polarity_or_throw(pol.get<std::string>(), "satisfaction_map");
      }
      c.satisfaction = corpus::SatisfactionMap(entries);
    }
    if (j.contains("vocab")) {
      const json& v = j.at("vocab");
      check_keys(v, "vocab", {"max_size", "min_freq"});
      c.vocab_max_size = v.value("max_size", c.vocab_max_size);
      c.vocab_min_freq = v.value("min_freq", c.vocab_min_freq);
    }
    if (j.contains("model")) {
      check_keys(j.at("model"), "model",
                 {"vocab_size", "max_len", "embed_dim", "num_layers", "num_heads", "ffn_dim",
                  "num_classes", "dropout_rate", "seed"});
      c.model = j.at("model").get<model::ModelConfig>();
    }
    if (j.contains("train")) {
      check_keys(j.at("train"), "train",
                 {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "eps", "seed",
                  "shuffle_each_epoch"});
      c.train = j.at("train").get<train::TrainConfig>();
      c.train.validate();
    }
    if (j.contains("split")) {
      const json& s = j.at("split");
      check_keys(s, "split", {"ratio", "ratios", "seed", "stratified"});
      if (s.contains("ratio")) c.ratio = parse_ratio(s.at("ratio").get<std::string>());
      if (s.contains("ratios")) {
        c.protocol_ratios.clear();
        for (const auto& r : s.at("ratios")) c.protocol_ratios.push_back(parse_ratio(r.get<std::string>()));
        if (c.protocol_ratios.empty()) throw ConfigError("config: split.ratios is empty");
      }
      c.split_seed = s.value("seed", c.split_seed);
      c.stratified = s.value("stratified", c.stratified);
    }
    if (j.contains("report")) {
      const json& r = j.at("report");
      check_keys(r, "report", {"top_k", "collapse_neutral"});
      c.report.top_k = r.value("top_k", c.report.top_k);
      if (r.contains("collapse_neutral")) {
        c.report.collapse_neutral_into = parse_collapse(r.at("collapse_neutral"));
      }
    }
    // A top-level seed wins over the per-section ones.
    if (j.contains("seed")) set_all_seeds(c, j.at("seed").get<std::uint64_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentiment analysis for satisfaction-survey comments", "survey-sentiment"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", f.config, "JSON run configuration");
    sub->add_option("--seed", f.seed, "Seed for model init, training and splitting");
    sub->add_option("-o,--out", f.out_dir, "Output directory");
  };
  auto data_flags = [&](CLI::App* sub) {
    sub->add_option("--train-csv", f.train_csv, "Labeled survey CSV");
    sub->add_option("--vocab", f.vocab, "vocab.txt location");
    sub->add_option("--ratio", f.ratio, "Train:test split, e.g. 80:20");
  };

  CLI::App* synth = app.add_subcommand("synth", "Write a seeded synthetic labeled corpus");
  common(synth);
  synth->add_option("--count", f.count, "Number of sentences")->check(CLI::PositiveNumber);
  synth->add_option("--output", f.output, "CSV path (default <out>/synthetic.csv)");

  CLI::App* build = app.add_subcommand("build-vocab", "Build vocab.txt from the training part");
  common(build);
  data_flags(build);

  CLI::App* trn = app.add_subcommand("train", "Train and save a checkpoint");
  common(trn);
  data_flags(trn);
  trn->add_option("--checkpoint", f.checkpoint, "Checkpoint location");
  trn->add_option("--epochs", f.epochs, "Number of epochs");

  CLI::App* evl = app.add_subcommand("eval", "Score a checkpoint on labeled data");
  common(evl);
  data_flags(evl);
  evl->add_option("--eval-csv", f.eval_csv, "Labeled CSV to score (default: test part)");
  evl->add_option("--checkpoint", f.checkpoint, "Checkpoint location");

  CLI::App* proto = app.add_subcommand("protocol", "Train and test at every split ratio");
  common(proto);
  proto->add_option("--train-csv", f.train_csv, "Labeled survey CSV");
  proto->add_option("--epochs", f.epochs, "Number of epochs");

  CLI::App* pred = app.add_subcommand("predict", "Label a survey CSV and write a report");
  common(pred);
  pred->add_option("--predict-csv", f.predict_csv, "Survey CSV to label");
  pred->add_option("--vocab", f.vocab, "vocab.txt location");
  pred->add_option("--checkpoint", f.checkpoint, "Checkpoint location");
  pred->add_option("--stopwords", f.stopwords, "Stopword list, one per line");
  pred->add_option("--predictions", f.predictions, "predictions.csv location");
  pred->add_option("--report-out", f.report_out, "report.json location");
  pred->add_option("--collapse-neutral", f.collapse, "Fold neutral into positive or negative");
  pred->add_option("--top-k", f.top_k, "Number of frequent words");

  CLI::App* rep = app.add_subcommand("report", "Summarize an existing predictions.csv");
  common(rep);
  rep->add_option("--predictions", f.predictions, "predictions.csv location");
  rep->add_option("--stopwords", f.stopwords, "Stopword list, one per line");
  rep->add_option("--report-out", f.report_out, "report.json location");
  rep->add_option("--collapse-neutral", f.collapse, "Fold neutral into positive or negative");
  rep->add_option("--top-k", f.top_k, "Number of frequent words");

  std::vector<std::string> owned{"survey-sentiment"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : owned) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  Log log(err);
  try {
    const RunConfig c = assemble(f);
    fs::create_directories(c.out_dir);
    if (synth->parsed()) return cmd_synth(c, f, out, log);
    if (build->parsed()) return cmd_build_vocab(c, out, log);
    if (trn->parsed()) return cmd_train(c, out, log);
    if (evl->parsed()) return cmd_eval(c, out, log);
    if (proto->parsed()) return cmd_protocol(c, out, log);
    if (pred->parsed()) return cmd_predict(c, out, log);
    if (rep->parsed()) return cmd_report(c, out, log);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace survey::cli
