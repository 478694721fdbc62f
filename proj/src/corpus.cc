#include "survey/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>

#include "survey/io.h"
#include "survey/rng.h"
#include "survey/utf8.h"

namespace survey {
namespace {

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::size_t find_column(const std::vector<std::string>& header,
                        const std::string& name) {
  const auto it = std::find_if(header.begin(), header.end(), [&](const auto& h) {
    return trim(h) == trim(name);
  });
  if (it == header.end()) {
    throw SchemaError("missing column \"" + name + "\"");
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

Polarity polarity_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kNumPolarities)) {
    throw IndexError("polarity index " + std::to_string(index) +
                     " outside [0, 3)");
  }
  return static_cast<Polarity>(index);
}

std::string_view polarity_name(Polarity p) {
  switch (p) {
    case Polarity::kNegative:
      return "negative";
    case Polarity::kNeutral:
      return "neutral";
    case Polarity::kPositive:
      return "positive";
  }
  return "unknown";
}

std::optional<Polarity> parse_polarity(std::string_view text) {
  const std::string key = ascii_lower(trim(text));
  if (key == "negative" || key == "negativo" || key == "neg" || key == "0") {
    return Polarity::kNegative;
  }
  if (key == "neutral" || key == "neutro" || key == "neu" || key == "1") {
    return Polarity::kNeutral;
  }
  if (key == "positive" || key == "positivo" || key == "pos" || key == "2") {
    return Polarity::kPositive;
  }
  return std::nullopt;
}

namespace corpus {

UnmappedLevelError::UnmappedLevelError(std::string level)
    : Error("unmapped satisfaction level \"" + level + "\""),
      level_(std::move(level)) {}

SatisfactionMap::SatisfactionMap()
    : SatisfactionMap({{"muy satisfecho", Polarity::kPositive},
                       {"very satisfied", Polarity::kPositive},
                       {"satisfecho", Polarity::kPositive},
                       {"satisfied", Polarity::kPositive},
                       {"poco satisfecho", Polarity::kNegative},
                       {"little satisfied", Polarity::kNegative},
                       {"insatisfecho", Polarity::kNegative},
                       {"unsatisfied", Polarity::kNegative},
                       {"neutral", Polarity::kNeutral},
                       {"regular", Polarity::kNeutral}}) {}

SatisfactionMap::SatisfactionMap(const std::map<std::string, Polarity>& entries) {
  for (const auto& [key, polarity] : entries) {
    entries_[normalize_key(key)] = polarity;
  }
}

std::string SatisfactionMap::normalize_key(std::string_view level) {
  std::string out;
  bool pending_space = false;
  for (const char c : trim(level)) {
    if (is_space(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

Polarity SatisfactionMap::lookup(std::string_view level) const {
  const auto it = entries_.find(normalize_key(level));
  if (it == entries_.end()) throw UnmappedLevelError(std::string(level));
  return it->second;
}

Polarity map_satisfaction_to_polarity(std::string_view level) {
  static const SatisfactionMap kDefault;
  return kDefault.lookup(level);
}

LoadResult parse_csv(std::string_view content, const CsvSchema& schema,
                     const SatisfactionMap& levels) {
  csv::Table table = csv::parse(content, schema.delimiter);
  LoadResult result;
  result.row_errors = std::move(table.errors);
  if (table.header.empty()) {
    throw SchemaError("missing header row");
  }
  const std::size_t text_idx = find_column(table.header, schema.text_col);
  std::optional<std::size_t> label_idx;
  std::optional<std::size_t> meta_idx;
  if (schema.label_col) label_idx = find_column(table.header, *schema.label_col);
  if (schema.meta_col) meta_idx = find_column(table.header, *schema.meta_col);

  for (auto& row : table.rows) {
    if (!utf8::is_valid(row.fields[text_idx]) ||
        (meta_idx && !utf8::is_valid(row.fields[*meta_idx]))) {
      result.row_errors.push_back({row.line, "invalid UTF-8"});
      continue;
    }
    if (trim(row.fields[text_idx]).empty()) {
      ++result.dropped_empty;
      continue;
    }
    SurveyRecord record;
    record.text = std::move(row.fields[text_idx]);
    if (meta_idx) record.meta = row.fields[*meta_idx];
    if (label_idx && !trim(row.fields[*label_idx]).empty()) {
      const std::string& cell = row.fields[*label_idx];
      if (schema.label_kind == LabelKind::kSatisfaction) {
        try {
          record.label = levels.lookup(cell);
        } catch (const UnmappedLevelError& e) {
          result.row_errors.push_back({row.line, e.what()});
          continue;
        }
      } else {
        record.label = parse_polarity(cell);
        if (!record.label) {
          result.row_errors.push_back(
              {row.line, "unrecognized polarity label \"" + cell + "\""});
          continue;
        }
      }
    }
    record.id = result.records.size();
    result.records.push_back(std::move(record));
  }
  std::sort(result.row_errors.begin(), result.row_errors.end(),
            [](const auto& a, const auto& b) { return a.line < b.line; });
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, const CsvSchema& schema,
                    const SatisfactionMap& levels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return parse_csv(content, schema, levels);
}

void write_csv(const std::filesystem::path& path,
               std::span<const SurveyRecord> records, const CsvSchema& schema) {
  std::vector<std::string> fields{schema.text_col};
  if (schema.meta_col) fields.push_back(*schema.meta_col);
  if (schema.label_col) fields.push_back(*schema.label_col);
  std::string out = csv::format_row(fields, schema.delimiter) + '\n';
  for (const auto& r : records) {
    fields.assign({r.text});
    if (schema.meta_col) fields.push_back(r.meta.value_or(""));
    if (schema.label_col) {
      fields.emplace_back(r.label ? polarity_name(*r.label) : "");
    }
    out += csv::format_row(fields, schema.delimiter);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void validate_ratio(SplitRatio ratio) {
  if (ratio.train <= 0 || ratio.test <= 0 || ratio.train + ratio.test != 100) {
    throw ConfigError("split ratio " + std::to_string(ratio.train) + ":" +
                      std::to_string(ratio.test) +
                      " must have positive parts summing to 100");
  }
}

std::size_t train_size(std::size_t n, SplitRatio ratio) {
  return n * static_cast<std::size_t>(ratio.train) / 100;
}

IndexSplit split_indices(std::size_t n, SplitRatio ratio, std::uint64_t seed,
                         std::span<const int> strata) {
  validate_ratio(ratio);
  if (n < 2) {
    throw DatasetError("dataset too small to split: " + std::to_string(n) +
                       " record(s)");
  }
  if (!strata.empty() && strata.size() != n) {
    throw ContractError("strata size does not match dataset size");
  }
  Rng rng(seed);
  IndexSplit out;
  const std::size_t target = train_size(n, ratio);

  if (strata.empty()) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    out.train.assign(order.begin(), order.begin() + target);
    out.test.assign(order.begin() + target, order.end());
    return out;
  }

  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[strata[i]].push_back(i);

  struct Share {
    int stratum;
    std::size_t take;
    std::size_t remainder;  // numerator of the fractional part, over 100
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (auto& [stratum, members] : groups) {
    const std::size_t scaled = members.size() * static_cast<std::size_t>(ratio.train);
    shares.push_back({stratum, scaled / 100, scaled % 100});
    assigned += scaled / 100;
  }
  std::vector<std::size_t> by_remainder(shares.size());
  std::iota(by_remainder.begin(), by_remainder.end(), std::size_t{0});
  std::stable_sort(by_remainder.begin(), by_remainder.end(),
                   [&](std::size_t a, std::size_t b) {
                     return shares[a].remainder > shares[b].remainder;
                   });
  for (std::size_t k = 0; assigned < target; ++k) {
    ++shares[by_remainder[k % by_remainder.size()]].take;
    ++assigned;
  }

  for (const Share& share : shares) {
    auto& members = groups[share.stratum];
    rng.shuffle(std::span(members));
    out.train.insert(out.train.end(), members.begin(), members.begin() + share.take);
    out.test.insert(out.test.end(), members.begin() + share.take, members.end());
  }
  rng.shuffle(std::span(out.train));
  rng.shuffle(std::span(out.test));
  return out;
}

DatasetSplit split(std::span<const SurveyRecord> dataset, SplitRatio ratio,
                   std::uint64_t seed, bool stratified) {
  std::vector<int> strata;
  if (stratified) {
    strata.reserve(dataset.size());
    for (const auto& r : dataset) {
      strata.push_back(r.label ? index_of(*r.label) : static_cast<int>(kNumPolarities));
    }
  }
  const IndexSplit idx = split_indices(dataset.size(), ratio, seed, strata);
  DatasetSplit out{.train = {}, .test = {}, .ratio = ratio, .seed = seed};
  out.train.reserve(idx.train.size());
  out.test.reserve(idx.test.size());
  for (const std::size_t i : idx.train) out.train.push_back(dataset[i]);
  for (const std::size_t i : idx.test) out.test.push_back(dataset[i]);
  return out;
}

}  // namespace corpus
}  // namespace survey
