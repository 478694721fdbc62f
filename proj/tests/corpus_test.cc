#include "survey/corpus.h"

#include <algorithm>
#include <set>

#include <gtest/gtest.h>

#include "survey/csv.h"
#include "survey/errors.h"
#include "survey/rng.h"
#include "survey/synthetic.h"
#include "test_util.h"

namespace survey {
namespace {

using corpus::CsvSchema;
using corpus::SplitRatio;

TEST(CsvTest, QuotedFieldsAndCrlf) {
  const auto t = csv::parse("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",z\r\n");
  ASSERT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0].fields[0], "x, y");
  EXPECT_EQ(t.rows[0].fields[1], "say \"hi\"");
  EXPECT_EQ(t.rows[1].fields[0], "multi\nline");
  EXPECT_EQ(t.rows[1].line, 3u);
  EXPECT_TRUE(t.errors.empty());
}

TEST(CsvTest, BadRowsAreCollectedWithLineNumbers) {
  const auto t = csv::parse("a,b\n1,2\n1,2,3\n\"open\"x,2\n4,5\n");
  ASSERT_EQ(t.rows.size(), 2u);
  ASSERT_EQ(t.errors.size(), 2u);
  EXPECT_EQ(t.errors[0].line, 3u);
  EXPECT_EQ(t.errors[1].line, 4u);
}

TEST(CsvTest, UnterminatedQuote) {
  const auto t = csv::parse("a\n\"never closed\n");
  EXPECT_TRUE(t.rows.empty());
  ASSERT_EQ(t.errors.size(), 1u);
  EXPECT_EQ(t.errors[0].line, 2u);
}

TEST(CsvTest, BomAndBlankLines) {
  const auto t = csv::parse("\xEF\xBB\xBFtext\n\nhola\n\n");
  ASSERT_EQ(t.header, std::vector<std::string>{"text"});
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].fields[0], "hola");
}

TEST(CsvTest, FormatQuotesWhenNeeded) {
  EXPECT_EQ(csv::format_field("plain"), "plain");
  EXPECT_EQ(csv::format_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv::format_field("say \"x\""), "\"say \"\"x\"\"\"");
  EXPECT_EQ(csv::format_field("a;b", ';'), "\"a;b\"");
}

TEST(PolarityTest, CodesAreStable) {
  EXPECT_EQ(index_of(Polarity::kNegative), 0);
  EXPECT_EQ(index_of(Polarity::kNeutral), 1);
  EXPECT_EQ(index_of(Polarity::kPositive), 2);
  EXPECT_EQ(polarity_from_index(2), Polarity::kPositive);
  EXPECT_THROW(polarity_from_index(3), IndexError);
  EXPECT_EQ(parse_polarity("Negativo"), Polarity::kNegative);
  EXPECT_EQ(parse_polarity("1"), Polarity::kNeutral);
  EXPECT_FALSE(parse_polarity("happy").has_value());
}

TEST(LoadCsvTest, TenRowFixtureDropsTwoEmpty) {
  CsvSchema schema;
  schema.label_col = "label";
  schema.meta_col = "department";
  const auto r = corpus::load_csv(testing::data_path("ten_rows.csv"), schema);
  EXPECT_EQ(r.records.size(), 8u);
  EXPECT_EQ(r.dropped_empty, 2u);
  EXPECT_TRUE(r.row_errors.empty());
  for (std::size_t i = 0; i < r.records.size(); ++i) EXPECT_EQ(r.records[i].id, i);
  EXPECT_EQ(r.records[1].text, "No comparte las diapositivas, debería mejorar");
  EXPECT_EQ(r.records[1].meta, "ENFERMERÍA");
  EXPECT_EQ(r.records[1].label, Polarity::kNegative);
}

TEST(LoadCsvTest, Table2Row) {
  CsvSchema schema;
  schema.text_col = "Suggestions";
  schema.meta_col = "Level of satisfaction";
  const auto r = corpus::load_csv(testing::data_path("table2.csv"), schema);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].text, "Share the material with us");
  EXPECT_EQ(r.records[0].meta, "Satisfied");
  EXPECT_FALSE(r.records[0].label.has_value());
}

TEST(LoadCsvTest, SatisfactionColumnAsLabel) {
  CsvSchema schema;
  schema.text_col = "Suggestions";
  schema.label_col = "Level of satisfaction";
  schema.label_kind = corpus::LabelKind::kSatisfaction;
  const auto r = corpus::load_csv(testing::data_path("table2.csv"), schema);
  ASSERT_EQ(r.records.size(), 3u);
  EXPECT_EQ(r.records[0].label, Polarity::kPositive);
  EXPECT_EQ(r.records[1].label, Polarity::kPositive);
  EXPECT_EQ(r.records[2].label, Polarity::kNegative);
}

TEST(LoadCsvTest, HeaderOnly) {
  const auto r = corpus::parse_csv("text,label\n", CsvSchema{});
  EXPECT_TRUE(r.records.empty());
  EXPECT_EQ(r.dropped_empty, 0u);
}

TEST(LoadCsvTest, MissingColumnNamesIt) {
  CsvSchema schema;
  schema.label_col = "polaridad";
  try {
    corpus::parse_csv("text,label\nhola,positive\n", schema);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("polaridad"), std::string::npos);
  }
}

TEST(LoadCsvTest, MissingFile) {
  EXPECT_THROW(corpus::load_csv("/nonexistent/file.csv", CsvSchema{}), IoError);
}

TEST(LoadCsvTest, RowLevelProblemsAreNotFatal) {
  CsvSchema schema;
  schema.label_col = "label";
  const std::string content =
      "text,label\nbien,positive\nmal,terrible\n\xC3\x28 roto,negative\nok,neutral\n";
  const auto r = corpus::parse_csv(content, schema);
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_EQ(r.records[1].text, "ok");
  EXPECT_EQ(r.records[1].id, 1u);
  ASSERT_EQ(r.row_errors.size(), 2u);
  EXPECT_EQ(r.row_errors[0].line, 3u);
  EXPECT_EQ(r.row_errors[1].line, 4u);
}

TEST(LoadCsvTest, SemicolonDelimiter) {
  CsvSchema schema;
  schema.delimiter = ';';
  const auto r = corpus::parse_csv("id;text\n1;uno, dos\n", schema);
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].text, "uno, dos");
}

TEST(LoadCsvTest, WriteThenLoadKeepsBytes) {
  testing::TempDir dir;
  CsvSchema schema;
  schema.label_col = "label";
  schema.meta_col = "department";
  std::vector<SurveyRecord> records = {
      {0, "Año de enseñanza: ñandú, pingüino", "EDUCACIÓN", Polarity::kPositive},
      {1, "Dijo \"sí\", luego\nno", "DERECHO", Polarity::kNegative},
      {2, "Él está aquí", std::nullopt, Polarity::kNeutral},
  };
  corpus::write_csv(dir / "out.csv", records, schema);
  auto r = corpus::load_csv(dir / "out.csv", schema);
  ASSERT_EQ(r.records.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(r.records[i].text, records[i].text);
    EXPECT_EQ(r.records[i].label, records[i].label);
  }
  EXPECT_EQ(r.records[2].meta, "");
}

TEST(SatisfactionTest, DefaultTable) {
  using corpus::map_satisfaction_to_polarity;
  EXPECT_EQ(map_satisfaction_to_polarity("Very satisfied"), Polarity::kPositive);
  EXPECT_EQ(map_satisfaction_to_polarity("little satisfied"), Polarity::kNegative);
  EXPECT_EQ(map_satisfaction_to_polarity("  SATISFIED "), Polarity::kPositive);
  EXPECT_EQ(map_satisfaction_to_polarity("Muy  Satisfecho"), Polarity::kPositive);
  EXPECT_EQ(map_satisfaction_to_polarity("poco satisfecho"), Polarity::kNegative);
  EXPECT_EQ(map_satisfaction_to_polarity("INSATISFECHO"), Polarity::kNegative);
  EXPECT_EQ(map_satisfaction_to_polarity("regular"), Polarity::kNeutral);
}

TEST(SatisfactionTest, TotalAndCaseInsensitive) {
  const corpus::SatisfactionMap map;
  for (const auto& [key, polarity] : map.entries()) {
    std::string upper = key;
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    EXPECT_EQ(map.lookup(key), polarity);
    EXPECT_EQ(map.lookup("\t " + upper + "  "), polarity) << key;
  }
}

TEST(SatisfactionTest, UnknownLevelCarriesString) {
  try {
    corpus::map_satisfaction_to_polarity("Extasiado");
    FAIL();
  } catch (const corpus::UnmappedLevelError& e) {
    EXPECT_EQ(e.level(), "Extasiado");
  }
}

TEST(SatisfactionTest, Override) {
  const corpus::SatisfactionMap map({{"Bueno", Polarity::kPositive}});
  EXPECT_EQ(map.lookup("bueno"), Polarity::kPositive);
  EXPECT_THROW(map.lookup("satisfied"), corpus::UnmappedLevelError);
}

std::vector<SurveyRecord> numbered(std::size_t n) {
  std::vector<SurveyRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({i, "t" + std::to_string(i), std::nullopt, polarity_from_index(i % 3)});
  }
  return out;
}

TEST(SplitTest, SizeExamples) {
  auto s = corpus::split(numbered(10), {80, 20}, 123);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.test.size(), 2u);
  s = corpus::split(numbered(506), {70, 30}, 5);
  EXPECT_EQ(s.train.size(), 354u);
  EXPECT_EQ(s.test.size(), 152u);
}

TEST(SplitTest, Deterministic) {
  const auto data = numbered(200);
  const auto a = corpus::split(data, {80, 20}, 99);
  const auto b = corpus::split(data, {80, 20}, 99);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  const auto c = corpus::split(data, {80, 20}, 100);
  EXPECT_NE(a.train, c.train);
}

TEST(SplitTest, Errors) {
  EXPECT_THROW(corpus::split(numbered(10), {80, 30}, 1), ConfigError);
  EXPECT_THROW(corpus::split(numbered(10), {0, 100}, 1), ConfigError);
  EXPECT_THROW(corpus::split(numbered(1), {80, 20}, 1), DatasetError);
}

TEST(SplitTest, PartitionPropertyRandomSizes) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(999);
    const auto data = numbered(n);
    for (const SplitRatio& ratio : corpus::kProtocolRatios) {
      for (bool stratified : {false, true}) {
        const auto s = corpus::split(data, ratio, rng.next_u64(), stratified);
        const std::size_t expected = n * static_cast<std::size_t>(ratio.train) / 100;
        ASSERT_EQ(s.train.size(), expected) << n;
        ASSERT_EQ(s.test.size(), n - expected);
        std::multiset<std::size_t> ids;
        for (const auto& r : s.train) ids.insert(r.id);
        for (const auto& r : s.test) ids.insert(r.id);
        ASSERT_EQ(ids.size(), n);
        std::size_t expect_id = 0;
        for (std::size_t id : ids) ASSERT_EQ(id, expect_id++);
      }
    }
  }
}

TEST(SplitTest, StratifiedKeepsClassShares) {
  const auto s = corpus::split(numbered(300), {80, 20}, 4, true);
  std::array<int, 3> test_counts{};
  for (const auto& r : s.test) ++test_counts[index_of(*r.label)];
  EXPECT_EQ(test_counts, (std::array<int, 3>{20, 20, 20}));
}

TEST(SyntheticTest, BalancedAndLongEnough) {
  corpus::LexiconGrammar g;
  const auto records = corpus::generate_lexicon_corpus(g);
  ASSERT_EQ(records.size(), 3000u);
  std::array<int, 3> counts{};
  for (const auto& r : records) {
    ++counts[index_of(*r.label)];
    std::size_t words = 1 + std::count(r.text.begin(), r.text.end(), ' ');
    EXPECT_GE(words, g.min_tokens);
    EXPECT_LE(words, g.max_tokens);
  }
  EXPECT_EQ(counts, (std::array<int, 3>{1000, 1000, 1000}));
  EXPECT_EQ(records, corpus::generate_lexicon_corpus(g));
}

}  // namespace
}  // namespace survey
