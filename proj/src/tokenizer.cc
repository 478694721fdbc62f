#include "survey/tokenizer.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "survey/errors.h"
#include "survey/io.h"
#include "survey/utf8.h"

namespace survey::text {
namespace {

const icu::Normalizer2& nfd() {
  static const icu::Normalizer2* instance = [] {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFDInstance(status);
    if (U_FAILURE(status)) throw Error("ICU NFD normalizer unavailable");
    return n;
  }();
  return *instance;
}

bool is_punctuation(UChar32 c) {
  // BERT convention: every non-alphanumeric printable ASCII character counts.
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(c);
}

bool is_whitespace_like(UChar32 c) {
  return u_isUWhiteSpace(c) || u_charType(c) == U_CONTROL_CHAR;
}

}  // namespace

std::string normalize(std::string_view text) {
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  s.toLower(icu::Locale::getRoot());
  UErrorCode status = U_ZERO_ERROR;
  const icu::UnicodeString decomposed = nfd().normalize(s, status);
  if (U_FAILURE(status)) throw Error("NFD normalization failed");

  icu::UnicodeString out;
  bool pending_space = false;
  auto emit = [&](UChar32 c) {
    if (pending_space && !out.isEmpty()) out.append(static_cast<UChar>(' '));
    pending_space = false;
    out.append(c);
  };
  for (int32_t i = 0; i < decomposed.length();) {
    const UChar32 c = decomposed.char32At(i);
    i += U16_LENGTH(c);
    if (u_charType(c) == U_NON_SPACING_MARK) continue;
    if (is_whitespace_like(c)) {
      pending_space = true;
    } else if (is_punctuation(c)) {
      pending_space = true;
      emit(c);
      pending_space = true;
    } else {
      emit(c);
    }
  }
  std::string result;
  out.toUTF8String(result);
  return result;
}

bool is_punctuation_token(std::string_view word) {
  if (word.empty()) return false;
  const icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
  for (int32_t i = 0; i < s.length();) {
    const UChar32 c = s.char32At(i);
    i += U16_LENGTH(c);
    if (!is_punctuation(c)) return false;
  }
  return true;
}

std::vector<std::string> split_words(std::string_view normalized) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < normalized.size()) {
    std::size_t end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) words.emplace_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens)
    : id_to_token_(std::move(tokens)) {
  if (id_to_token_.size() < kSpecialTokens.size()) {
    throw ConfigError("vocabulary must start with the special tokens");
  }
  for (std::size_t i = 0; i < kSpecialTokens.size(); ++i) {
    if (id_to_token_[i] != kSpecialTokens[i]) {
      throw ConfigError("vocabulary entry " + std::to_string(i) + " must be " +
                        std::string(kSpecialTokens[i]) + ", found \"" +
                        id_to_token_[i] + "\"");
    }
  }
  token_to_id_.reserve(id_to_token_.size());
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    const std::string& tok = id_to_token_[i];
    if (tok.empty() || tok.find_first_of("\r\n") != std::string::npos) {
      throw ConfigError("invalid vocabulary token at id " + std::to_string(i));
    }
    if (!token_to_id_.emplace(tok, static_cast<int>(i)).second) {
      throw ConfigError("duplicate vocabulary token \"" + tok + "\"");
    }
  }
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw IndexError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(id_to_token_.size()));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  const auto it = token_to_id_.find(token);
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

std::string Vocabulary::serialize() const {
  std::string out;
  for (const auto& t : id_to_token_) {
    out += t;
    out.push_back('\n');
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  io::write_file_atomic(path, serialize());
}

Vocabulary Vocabulary::parse(std::string_view content) {
  std::vector<std::string> tokens;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view line = content.substr(start, end - start);
    if (line.ends_with('\r')) line.remove_suffix(1);
    tokens.emplace_back(line);
    start = end + 1;
  }
  return Vocabulary(std::move(tokens));
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::string Vocabulary::fingerprint() const {
  std::uint64_t h = 14695981039346656037ull;
  for (const char c : serialize()) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vocabulary build_vocab(std::span<const std::string> corpus, std::size_t max_size,
                       std::size_t min_freq) {
  if (min_freq < 1) throw ConfigError("min_freq must be at least 1");
  std::map<std::string, std::size_t> counts;
  std::set<std::string> alphabet;
  for (const auto& doc : corpus) {
    for (auto& word : split_words(normalize(doc))) {
      for (auto& ch : utf8::code_points(word)) alphabet.insert(std::move(ch));
      ++counts[std::move(word)];
    }
  }
  if (counts.empty()) throw DatasetError("cannot build a vocabulary from an empty corpus");

  const std::size_t required = Vocabulary::kSpecialTokens.size() + 2 * alphabet.size();
  if (max_size < required) {
    throw ConfigError("max_size " + std::to_string(max_size) +
                      " cannot hold the special tokens and the " +
                      std::to_string(alphabet.size()) + "-character alphabet (needs " +
                      std::to_string(required) + ")");
  }

  std::vector<std::string> tokens(Vocabulary::kSpecialTokens.begin(),
                                  Vocabulary::kSpecialTokens.end());
  std::set<std::string_view> present(tokens.begin(), tokens.end());
  for (const auto& ch : alphabet) tokens.push_back(ch);
  for (const auto& ch : alphabet) tokens.push_back(std::string(kContinuationPrefix) + ch);
  for (const auto& t : tokens) present.insert(t);

  std::vector<std::pair<std::string_view, std::size_t>> ranked;
  for (const auto& [word, count] : counts) {
    if (count >= min_freq) ranked.emplace_back(word, count);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;  // counts is ordered, so ties stay lexicographic
  });
  for (const auto& [word, count] : ranked) {
    if (tokens.size() >= max_size) break;
    if (present.contains(word)) continue;
    tokens.emplace_back(word);
  }
  return Vocabulary(std::move(tokens));
}

std::vector<std::string> wordpiece(std::string_view word, const Vocabulary& vocab) {
  const std::string unk(Vocabulary::kSpecialTokens[Vocabulary::kUnk]);
  const std::vector<std::string> chars = utf8::code_points(word);
  if (chars.size() > kMaxWordChars) return {unk};

  // Byte offset of every code point boundary.
  std::vector<std::size_t> offsets{0};
  for (const auto& c : chars) offsets.push_back(offsets.back() + c.size());

  std::vector<std::string> pieces;
  std::string candidate;
  std::size_t start = 0;
  while (start < chars.size()) {
    std::size_t end = chars.size();
    bool matched = false;
    for (; end > start; --end) {
      candidate.clear();
      if (start > 0) candidate = kContinuationPrefix;
      candidate.append(word.substr(offsets[start], offsets[end] - offsets[start]));
      if (vocab.contains(candidate)) {
        matched = true;
        break;
      }
    }
    if (!matched) return {unk};
    pieces.push_back(candidate);
    start = end;
  }
  return pieces;
}

std::vector<std::string> tokenize(std::string_view text, const Vocabulary& vocab) {
  std::vector<std::string> out;
  for (const auto& word : split_words(normalize(text))) {
    auto pieces = wordpiece(word, vocab);
    out.insert(out.end(), std::make_move_iterator(pieces.begin()),
               std::make_move_iterator(pieces.end()));
  }
  return out;
}

TokenizedSequence encode(std::string_view text, const Vocabulary& vocab,
                         std::size_t max_len) {
  if (max_len < 3) {
    throw ConfigError("max_len must be at least 3, got " + std::to_string(max_len));
  }
  const std::vector<std::string> pieces = tokenize(text, vocab);
  const std::size_t kept = std::min(pieces.size(), max_len - 2);

  TokenizedSequence seq;
  seq.ids.assign(max_len, Vocabulary::kPad);
  seq.mask.assign(max_len, 0);
  seq.ids[0] = Vocabulary::kCls;
  for (std::size_t i = 0; i < kept; ++i) seq.ids[i + 1] = vocab.id_or_unk(pieces[i]);
  seq.ids[kept + 1] = Vocabulary::kSep;
  seq.true_len = kept + 2;
  std::fill(seq.mask.begin(), seq.mask.begin() + static_cast<std::ptrdiff_t>(seq.true_len), 1);
  return seq;
}

double word_coverage(std::span<const std::string> corpus, const Vocabulary& vocab) {
  const std::string unk(Vocabulary::kSpecialTokens[Vocabulary::kUnk]);
  std::size_t total = 0;
  std::size_t covered = 0;
  for (const auto& doc : corpus) {
    for (const auto& word : split_words(normalize(doc))) {
      ++total;
      const auto pieces = wordpiece(word, vocab);
      if (!(pieces.size() == 1 && pieces[0] == unk)) ++covered;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(total);
}

}  // namespace survey::text
