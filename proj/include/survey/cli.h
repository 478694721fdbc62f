#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "survey/analysis.h"
#include "survey/corpus.h"
#include "survey/encoder.h"
#include "survey/training.h"

namespace survey::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kConfigVersion = 1;

struct Paths {
  std::optional<std::filesystem::path> train_csv;
  std::optional<std::filesystem::path> eval_csv;
  std::optional<std::filesystem::path> predict_csv;
  std::optional<std::filesystem::path> vocab;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> stopwords;
  std::optional<std::filesystem::path> predictions_csv;
  std::optional<std::filesystem::path> report_out;
};

inline corpus::CsvSchema labeled_schema() {
  corpus::CsvSchema s;
  s.label_col = "label";
  return s;
}

struct RunConfig {
  std::filesystem::path out_dir = ".";
  Paths paths;
  corpus::CsvSchema csv = labeled_schema();
  std::optional<corpus::CsvSchema> predict_csv_schema;  // defaults to csv without its label
  corpus::SatisfactionMap satisfaction;
  std::size_t vocab_max_size = 8000;
  std::size_t vocab_min_freq = 1;
  model::ModelConfig model;
  train::TrainConfig train;
  corpus::SplitRatio ratio{80, 20};
  std::vector<corpus::SplitRatio> protocol_ratios{corpus::kProtocolRatios.begin(),
                                                  corpus::kProtocolRatios.end()};
  std::uint64_t split_seed = 42;
  bool stratified = false;
  analysis::ReportOptions report;

  // Resolved artifact locations: explicit path when configured, otherwise a
  // fixed file name under out_dir.
  std::filesystem::path vocab_path() const;
  std::filesystem::path checkpoint_path() const;
  std::filesystem::path predictions_path() const;
  std::filesystem::path report_path() const;
  corpus::CsvSchema predict_schema() const;
};

// Parses the versioned JSON schema documented in README.md. Relative paths
// are resolved against `base_dir`. ConfigError on unknown versions, bad
// types or invalid values.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

corpus::SplitRatio parse_ratio(std::string_view text);  // "80:20"

// Entry point behind the survey-sentiment binary. `args` excludes the
// program name. Artifacts go to files, summaries to `out`, logs and errors
// to `err`. Returns 0 on success, 1 on runtime failure, 2 on usage or
// configuration errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace survey::cli
