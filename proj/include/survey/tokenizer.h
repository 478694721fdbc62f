#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace survey::text {

// Uncased Spanish normalization: lowercase, canonical decomposition with
// combining marks removed ("está" -> "esta"; note that "ñ" becomes "n"),
// control characters turned into spaces, every punctuation or ASCII symbol
// character split out as its own token, whitespace collapsed and trimmed.
// Invalid UTF-8 bytes become U+FFFD. Idempotent.
std::string normalize(std::string_view text);

// True when every code point is punctuation or an ASCII symbol.
bool is_punctuation_token(std::string_view word);

// Splits normalized text on single spaces.
std::vector<std::string> split_words(std::string_view normalized);

inline constexpr std::string_view kContinuationPrefix = "##";
inline constexpr std::size_t kMaxWordChars = 100;

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr std::array<std::string_view, 5> kSpecialTokens = {
      "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};

  // Throws ConfigError if the specials are not the first entries in order,
  // a token repeats, or a token is empty or contains a line break.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }
  const std::string& token(int id) const;  // IndexError when out of range
  std::optional<int> find(std::string_view token) const;
  bool contains(std::string_view token) const { return find(token).has_value(); }
  int id_or_unk(std::string_view token) const { return find(token).value_or(kUnk); }

  // vocab.txt convention: one token per line, line number == id.
  std::string serialize() const;
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);
  static Vocabulary parse(std::string_view content);

  // 64-bit FNV-1a of serialize(), as 16 hex digits.
  std::string fingerprint() const;

  bool operator==(const Vocabulary& other) const {
    return id_to_token_ == other.id_to_token_;
  }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int, Hash, std::equal_to<>> token_to_id_;
};

// Specials, then every observed character as a word-initial piece, then every
// observed character as a "##" piece (both in code point order), then whole
// words with count >= min_freq by descending count (ties lexicographic) until
// max_size entries. DatasetError on an empty corpus; ConfigError when
// max_size cannot hold specials plus both character inventories, or
// min_freq < 1.
Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                       std::size_t min_freq = 1);

// Greedy longest-match-first WordPiece for a single normalized word. Returns
// {"[UNK]"} when some position has no matching piece or the word is longer
// than kMaxWordChars code points.
std::vector<std::string> wordpiece(std::string_view word, const Vocabulary& vocab);

// Normalizes, splits into words and applies wordpiece to each.
std::vector<std::string> tokenize(std::string_view text, const Vocabulary& vocab);

struct TokenizedSequence {
  std::vector<int> ids;
  std::vector<std::uint8_t> mask;
  std::size_t true_len = 0;

  std::size_t max_len() const { return ids.size(); }
  bool operator==(const TokenizedSequence&) const = default;
};

// [CLS] pieces... [SEP] then PAD up to max_len. Pieces past max_len - 2 are
// dropped from the right. ConfigError when max_len < 3.
TokenizedSequence encode(std::string_view text, const Vocabulary& vocab,
                         std::size_t max_len);

// Fraction of corpus words segmented without [UNK].
double word_coverage(std::span<const std::string> corpus, const Vocabulary& vocab);

}  // namespace survey::text
