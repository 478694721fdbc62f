#include "survey/analysis.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "survey/csv.h"
#include "survey/errors.h"
#include "survey/io.h"
#include "survey/utf8.h"

namespace survey::analysis {
namespace {

double round1(double value) { return std::round(value * 10.0) / 10.0; }

nlohmann::json words_json(const std::vector<WordCount>& words) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& w : words) out.push_back({{"word", w.word}, {"count", w.count}});
  return out;
}

}  // namespace

std::vector<Prediction> predict_corpus(std::span<const SurveyRecord> records,
                                       const SentimentModel& model) {
  if (records.empty()) throw DatasetError("no records to predict");
  std::vector<Prediction> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    const auto seq = text::encode(r.text, model.vocab, model.config.max_len);
    out.push_back({r.id, model::predict(model::trim_padding(seq), model.params, model.config)});
  }
  return out;
}

SentimentReport distribution(std::span<const Polarity> predictions) {
  if (predictions.empty()) throw DatasetError("distribution of an empty prediction set");
  SentimentReport report;
  report.n = predictions.size();
  for (const Polarity p : predictions) ++report.counts[index_of(p)];
  for (std::size_t c = 0; c < kNumPolarities; ++c) {
    report.percentages[c] =
        round1(100.0 * static_cast<double>(report.counts[c]) / static_cast<double>(report.n));
  }
  return report;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  StopwordSet words;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string::npos) end = content.size();
    std::string line = content.substr(start, end - start);
    start = end + 1;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto& w : text::split_words(text::normalize(line))) words.insert(std::move(w));
  }
  return words;
}

std::vector<WordCount> word_frequencies(std::span<const std::string> texts,
                                        const StopwordSet& stopwords, std::size_t k,
                                        std::size_t min_chars) {
  if (k == 0) throw ConfigError("word_frequencies: k must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& w : text::split_words(text::normalize(t))) {
      if (stopwords.contains(w) || text::is_punctuation_token(w) ||
          utf8::length(w) < min_chars) {
        continue;
      }
      ++counts[std::move(w)];
    }
  }
  std::vector<WordCount> out;
  out.reserve(counts.size());
  for (auto& [word, count] : counts) out.push_back({word, count});
  // counts is ordered by word, so a stable sort on count keeps ties lexicographic.
  std::stable_sort(out.begin(), out.end(),
                   [](const WordCount& a, const WordCount& b) { return a.count > b.count; });
  if (out.size() > k) out.resize(k);
  return out;
}

std::vector<SurveyRecord> filter_by_polarity(std::span<const SurveyRecord> records,
                                             std::span<const Prediction> predictions,
                                             Polarity polarity) {
  if (records.size() != predictions.size()) {
    throw ContractError("filter_by_polarity: " + std::to_string(records.size()) +
                        " records but " + std::to_string(predictions.size()) + " predictions");
  }
  std::vector<SurveyRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].id != predictions[i].id) {
      throw ContractError("filter_by_polarity: record id " + std::to_string(records[i].id) +
                          " paired with prediction id " + std::to_string(predictions[i].id));
    }
    if (predictions[i].polarity == polarity) out.push_back(records[i]);
  }
  return out;
}

std::vector<Polarity> collapse_neutral(std::span<const Polarity> predictions, Polarity into) {
  std::vector<Polarity> out(predictions.begin(), predictions.end());
  for (Polarity& p : out) {
    if (p == Polarity::kNeutral) p = into;
  }
  return out;
}

SentimentReport build_report(std::span<const SurveyRecord> records,
                             std::span<const Prediction> predictions,
                             const StopwordSet& stopwords, const ReportOptions& options) {
  std::vector<Prediction> effective(predictions.begin(), predictions.end());
  if (options.collapse_neutral_into) {
    for (auto& p : effective) {
      if (p.polarity == Polarity::kNeutral) p.polarity = *options.collapse_neutral_into;
    }
  }
  std::vector<Polarity> labels;
  labels.reserve(effective.size());
  for (const auto& p : effective) labels.push_back(p.polarity);
  SentimentReport report = distribution(labels);

  std::vector<std::string> all_texts;
  all_texts.reserve(records.size());
  for (const auto& r : records) all_texts.push_back(r.text);
  report.top_words = word_frequencies(all_texts, stopwords, options.top_k);
  for (const Polarity p : kAllPolarities) {
    std::vector<std::string> texts;
    for (const auto& r : filter_by_polarity(records, effective, p)) texts.push_back(r.text);
    report.per_polarity_top_words[index_of(p)] = word_frequencies(texts, stopwords, options.top_k);
  }
  return report;
}

nlohmann::json report_to_json(const SentimentReport& report) {
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json percentages = nlohmann::json::object();
  nlohmann::json per_polarity = nlohmann::json::object();
  for (const Polarity p : kAllPolarities) {
    const std::string name(polarity_name(p));
    counts[name] = report.counts[index_of(p)];
    percentages[name] = report.percentages[index_of(p)];
    per_polarity[name] = words_json(report.per_polarity_top_words[index_of(p)]);
  }
  nlohmann::json cloud = nlohmann::json::array();
  const std::size_t max_count = report.top_words.empty() ? 1 : report.top_words.front().count;
  for (const auto& w : report.top_words) {
    const double weight = static_cast<double>(w.count) / static_cast<double>(max_count);
    cloud.push_back({{"word", w.word},
                     {"weight", weight},
                     {"size", 1 + static_cast<int>(std::lround(4.0 * weight))}});
  }
  return {{"n", report.n},
          {"counts", counts},
          {"percentages", percentages},
          {"top_words", words_json(report.top_words)},
          {"per_polarity_top_words", per_polarity},
          {"word_cloud", cloud}};
}

std::string predictions_csv(std::span<const SurveyRecord> records,
                            std::span<const Prediction> predictions) {
  if (records.size() != predictions.size()) {
    throw ContractError("predictions_csv: record and prediction counts differ");
  }
  std::string out = "id,text,polarity\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::vector<std::string> row{std::to_string(predictions[i].id), records[i].text,
                                       std::string(polarity_name(predictions[i].polarity))};
    out += csv::format_row(row);
    out.push_back('\n');
  }
  return out;
}

}  // namespace survey::analysis
