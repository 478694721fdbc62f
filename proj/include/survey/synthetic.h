#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "survey/corpus.h"

namespace survey::corpus {

struct LexiconGrammar {
  std::size_t num_sentences = 3000;
  std::size_t min_tokens = 8;
  std::size_t max_tokens = 14;
  std::size_t cue_words = 2;  // class-indicative words per sentence
  std::uint64_t seed = 7;
};

// Seeded 3-class corpus: each sentence mixes `cue_words` words drawn from its
// class lexicon with filler words shared by every class. Classes are exactly
// balanced up to num_sentences % 3 and appear in shuffled order. Texts are
// capitalized, end with a period and contain accented Spanish words.
std::vector<SurveyRecord> generate_lexicon_corpus(const LexiconGrammar& grammar);

}  // namespace survey::corpus
