#include "survey/synthetic.h"

#include <array>
#include <string_view>

#include "survey/rng.h"

namespace survey::corpus {
namespace {

constexpr std::array<std::string_view, 12> kNegativeCues = {
    "desorganizado", "aburrido", "impuntual", "confuso",   "deficiente",
    "tarde",         "pésimo",   "grosero",   "repetitivo", "desordenado",
    "lento",         "mediocre"};

constexpr std::array<std::string_view, 12> kNeutralCues = {
    "regular",   "normal",   "aceptable", "promedio", "correcto", "suficiente",
    "estándar",  "habitual", "moderado",  "común",    "básico",   "típico"};

constexpr std::array<std::string_view, 12> kPositiveCues = {
    "excelente", "claro",     "amable",    "puntual",  "dinámico", "motivador",
    "paciente",  "brillante", "organizado", "didáctico", "atento", "increíble"};

constexpr std::array<std::string_view, 32> kFiller = {
    "el",      "docente",  "curso",     "la",       "clase",    "es",
    "muy",     "sesión",   "explica",   "tema",     "de",       "los",
    "estudiantes", "en",   "su",        "área",     "también",  "práctica",
    "material", "semestre", "profesor", "con",      "está",     "siempre",
    "las",     "actividades", "taller", "y",        "metodología", "un",
    "contenido", "evaluación"};

const auto& cues_for(Polarity p) {
  static const std::array<const std::array<std::string_view, 12>*, 3> table = {
      &kNegativeCues, &kNeutralCues, &kPositiveCues};
  return *table[index_of(p)];
}

}  // namespace

std::vector<SurveyRecord> generate_lexicon_corpus(const LexiconGrammar& grammar) {
  Rng rng(grammar.seed);
  std::vector<Polarity> classes;
  classes.reserve(grammar.num_sentences);
  for (std::size_t i = 0; i < grammar.num_sentences; ++i) {
    classes.push_back(kAllPolarities[i % kNumPolarities]);
  }
  rng.shuffle(std::span(classes));

  const std::size_t span_len = grammar.max_tokens - grammar.min_tokens + 1;
  std::vector<SurveyRecord> out;
  out.reserve(grammar.num_sentences);
  for (std::size_t i = 0; i < grammar.num_sentences; ++i) {
    const std::size_t len = grammar.min_tokens + rng.uniform_index(span_len);
    std::vector<std::string_view> words(len);
    for (auto& w : words) w = kFiller[rng.uniform_index(kFiller.size())];
    const auto& cues = cues_for(classes[i]);
    std::vector<std::size_t> slots(len);
    for (std::size_t k = 0; k < len; ++k) slots[k] = k;
    rng.shuffle(std::span(slots));
    for (std::size_t k = 0; k < grammar.cue_words && k < len; ++k) {
      words[slots[k]] = cues[rng.uniform_index(cues.size())];
    }

    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
      if (k > 0) text.push_back(' ');
      text += words[k];
    }
    if (text[0] >= 'a' && text[0] <= 'z') {
      text[0] = static_cast<char>(text[0] - 'a' + 'A');
    }
    text.push_back('.');
    out.push_back(SurveyRecord{.id = i,
                               .text = std::move(text),
                               .meta = std::nullopt,
                               .label = classes[i]});
  }
  return out;
}

}  // namespace survey::corpus
