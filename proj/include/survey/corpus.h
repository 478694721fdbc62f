#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "survey/csv.h"
#include "survey/errors.h"

namespace survey {

// Integer codes double as class indices in the classifier head.
enum class Polarity : int { kNegative = 0, kNeutral = 1, kPositive = 2 };

inline constexpr std::size_t kNumPolarities = 3;
inline constexpr std::array<Polarity, kNumPolarities> kAllPolarities = {
    Polarity::kNegative, Polarity::kNeutral, Polarity::kPositive};

constexpr int index_of(Polarity p) { return static_cast<int>(p); }
Polarity polarity_from_index(int index);  // IndexError outside [0, 3)

// "negative" / "neutral" / "positive".
std::string_view polarity_name(Polarity p);

// Accepts English and Spanish names in any case, and the codes "0"-"2".
std::optional<Polarity> parse_polarity(std::string_view text);

struct SurveyRecord {
  std::size_t id = 0;
  std::string text;
  std::optional<std::string> meta;
  std::optional<Polarity> label;

  bool operator==(const SurveyRecord&) const = default;
};

namespace corpus {

class UnmappedLevelError : public Error {
 public:
  explicit UnmappedLevelError(std::string level);
  const std::string& level() const { return level_; }

 private:
  std::string level_;
};

// Lookup table from satisfaction-survey levels to polarity. Keys are matched
// after trimming, ASCII lowercasing and collapsing inner whitespace.
class SatisfactionMap {
 public:
  // Bilingual default: very satisfied / satisfied -> positive, little
  // satisfied / unsatisfied -> negative, neutral / regular -> neutral.
  SatisfactionMap();
  explicit SatisfactionMap(const std::map<std::string, Polarity>& entries);

  Polarity lookup(std::string_view level) const;
  const std::map<std::string, Polarity>& entries() const { return entries_; }

  static std::string normalize_key(std::string_view level);

 private:
  std::map<std::string, Polarity> entries_;
};

// Uses the default SatisfactionMap.
Polarity map_satisfaction_to_polarity(std::string_view level);

enum class LabelKind {
  kPolarity,      // label column holds polarity names or codes
  kSatisfaction,  // label column holds satisfaction levels
};

struct CsvSchema {
  std::string text_col = "text";
  std::optional<std::string> label_col;
  std::optional<std::string> meta_col;
  LabelKind label_kind = LabelKind::kPolarity;
  char delimiter = ',';
};

struct LoadResult {
  std::vector<SurveyRecord> records;
  std::size_t dropped_empty = 0;
  std::vector<csv::RowError> row_errors;
};

// Missing file -> IoError; missing header column -> SchemaError naming the
// column. Row-level problems (bad CSV syntax, invalid UTF-8, unmappable
// label) are collected in LoadResult::row_errors. Record ids follow file
// order from 0 over the admitted rows.
LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                    const SatisfactionMap& levels = SatisfactionMap());
LoadResult parse_csv(std::string_view content, const CsvSchema& schema,
                     const SatisfactionMap& levels = SatisfactionMap());

// Writes text, and meta/label columns when the schema names them. Labels are
// written as polarity names.
void write_csv(const std::filesystem::path& path,
               std::span<const SurveyRecord> records, const CsvSchema& schema);

struct SplitRatio {
  int train = 80;
  int test = 20;

  bool operator==(const SplitRatio&) const = default;
};

inline constexpr std::array<SplitRatio, 3> kProtocolRatios = {
    SplitRatio{70, 30}, SplitRatio{80, 20}, SplitRatio{90, 10}};

// ConfigError unless both parts are positive and sum to 100.
void validate_ratio(SplitRatio ratio);
std::size_t train_size(std::size_t n, SplitRatio ratio);  // floor(n * train / 100)

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffles 0..n-1 with Rng(seed) and cuts at train_size(n, ratio). With
// strata (one small non-negative integer per item) each stratum is shuffled
// and cut on its own; leftover train slots go to the strata with the largest
// fractional share, so the total train size still equals train_size(n, ratio).
IndexSplit split_indices(std::size_t n, SplitRatio ratio, std::uint64_t seed,
                         std::span<const int> strata = {});

struct DatasetSplit {
  std::vector<SurveyRecord> train;
  std::vector<SurveyRecord> test;
  SplitRatio ratio;
  std::uint64_t seed = 0;
};

// DatasetError when fewer than two records; stratification uses the gold
// label (unlabeled records form their own stratum).
DatasetSplit split(std::span<const SurveyRecord> dataset, SplitRatio ratio,
                   std::uint64_t seed, bool stratified = false);

}  // namespace corpus
}  // namespace survey
