#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "survey/corpus.h"
#include "survey/encoder.h"
#include "survey/tokenizer.h"

namespace survey::analysis {

struct SentimentModel {
  text::Vocabulary vocab;
  model::ModelConfig config;
  model::EncoderParams params;
};

struct Prediction {
  std::size_t id = 0;
  Polarity polarity = Polarity::kNeutral;

  bool operator==(const Prediction&) const = default;
};

// One inference-mode prediction per record, in input order. DatasetError on
// empty input.
std::vector<Prediction> predict_corpus(std::span<const SurveyRecord> records,
                                       const SentimentModel& model);

struct WordCount {
  std::string word;
  std::size_t count = 0;

  bool operator==(const WordCount&) const = default;
};

struct SentimentReport {
  std::size_t n = 0;
  std::array<std::size_t, kNumPolarities> counts{};
  std::array<double, kNumPolarities> percentages{};  // one decimal
  std::vector<WordCount> top_words;
  std::array<std::vector<WordCount>, kNumPolarities> per_polarity_top_words;
};

// Counts and percentages (rounded to one decimal) for all three classes.
// DatasetError on empty input.
SentimentReport distribution(std::span<const Polarity> predictions);

using StopwordSet = std::unordered_set<std::string>;

// Bundled Spanish function words, stored normalized (no accents).
const StopwordSet& spanish_stopwords();
// One word per line, '#' starts a comment; entries are normalized.
StopwordSet load_stopwords(const std::filesystem::path& path);

inline constexpr std::size_t kMinWordChars = 2;

// Normalizes each text, splits on whitespace and drops stopwords,
// punctuation-only tokens and tokens shorter than min_chars code points.
// Returns the top k by count desc, then word asc. ConfigError when k == 0.
std::vector<WordCount> word_frequencies(std::span<const std::string> texts,
                                        const StopwordSet& stopwords, std::size_t k,
                                        std::size_t min_chars = kMinWordChars);

// Records whose prediction equals `polarity`, order preserved.
// ContractError when the lists differ in length or ids do not line up.
std::vector<SurveyRecord> filter_by_polarity(std::span<const SurveyRecord> records,
                                             std::span<const Prediction> predictions,
                                             Polarity polarity);

// Two-class summaries: every Neutral becomes `into`.
std::vector<Polarity> collapse_neutral(std::span<const Polarity> predictions, Polarity into);

struct ReportOptions {
  std::size_t top_k = 30;
  std::optional<Polarity> collapse_neutral_into;
};

// Distribution plus overall and per-polarity word frequencies.
SentimentReport build_report(std::span<const SurveyRecord> records,
                             std::span<const Prediction> predictions,
                             const StopwordSet& stopwords, const ReportOptions& options);

// {n, counts, percentages, top_words, per_polarity_top_words, word_cloud}.
// word_cloud is a plain layout stub: each top word with weight count/max
// and a size bucket 1-5.
nlohmann::json report_to_json(const SentimentReport& report);

// id,text,polarity rows with a header.
std::string predictions_csv(std::span<const SurveyRecord> records,
                            std::span<const Prediction> predictions);

}  // namespace survey::analysis
