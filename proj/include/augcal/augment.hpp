#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "augcal/lexicon.hpp"
#include "augcal/rng.hpp"
#include "augcal/translate.hpp"

namespace augcal {

// Augmentation strength. Configuration surfaces restrict alpha to the
// {0.1, 0.2, 0.3} menu via validated(); the operators themselves accept any
// alpha in [0, 1] so degenerate values remain testable.
struct Magnitude {
  double alpha = 0.1;

  // Parses one of the allowed magnitudes, rejecting anything else.
  static Magnitude validated(double alpha);
  static bool is_allowed(double alpha);
};

enum class AugmentOpKind {
  SynonymReplacement,
  RandomSwap,
  RandomDeletion,
  RandomInsertion,
  BackTranslation,
};

inline constexpr AugmentOpKind kAllOpKinds[] = {
    AugmentOpKind::SynonymReplacement, AugmentOpKind::RandomSwap,
    AugmentOpKind::RandomDeletion,     AugmentOpKind::RandomInsertion,
    AugmentOpKind::BackTranslation,
};

std::string_view op_kind_name(AugmentOpKind kind);
AugmentOpKind op_kind_from_name(std::string_view name);

// Shared inputs for the operator family.
struct AugmentContext {
  const SynonymLexicon* lexicon = nullptr;
  const StopwordList* stopwords = nullptr;
  Translator* translator = nullptr;
};

// Splits on Unicode whitespace; punctuation stays attached to its word.
std::vector<std::string> tokenize(std::string_view text);

// Joins tokens with single spaces.
std::string detokenize(const std::vector<std::string>& tokens);

// Edit count K for a magnitude: max(1, round-half-up(alpha * length)) for
// non-empty input, 0 for empty input.
std::size_t magnitude_to_count(Magnitude m, std::size_t length);

// Replaces up to K distinct eligible tokens (non-stopword, has synonyms)
// with a uniformly chosen synonym each. Length preserved. Selected positions
// are processed in ascending order.
std::vector<std::string> synonym_replacement(std::vector<std::string> tokens,
                                             Magnitude m,
                                             const SynonymLexicon& lexicon,
                                             const StopwordList& stopwords,
                                             RngStream& rng);

// Swaps two distinct uniformly chosen positions, K times. Inputs with fewer
// than two tokens are returned unchanged.
std::vector<std::string> random_swap(std::vector<std::string> tokens,
                                     Magnitude m, RngStream& rng);

// Deletes each token independently with probability alpha. Never returns an
// empty sequence for non-empty input: if every token is deleted, one token
// is kept, chosen uniformly from the input.
std::vector<std::string> random_deletion(std::vector<std::string> tokens,
                                         Magnitude m, RngStream& rng);

// K times: pick a uniformly random eligible token of the original input
// (non-stopword with synonyms), pick one of its synonyms uniformly, insert
// it at a uniformly random position of the current sequence. Iterations with
// no eligible source token are no-ops.
std::vector<std::string> random_insertion(std::vector<std::string> tokens,
                                          Magnitude m,
                                          const SynonymLexicon& lexicon,
                                          const StopwordList& stopwords,
                                          RngStream& rng);

// en -> fr -> en round trip. Magnitude does not apply. Throws on translator
// failure, reporting both hop statuses.
std::string back_translate(const std::string& text, Translator& translator);

// Dispatch for a single operator application: tokenize -> operator ->
// detokenize for token-level ops, raw-text round trip for back-translation.
// Maps non-empty input to non-empty output.
std::string apply_op(AugmentOpKind kind, Magnitude m, const std::string& text,
                     const AugmentContext& ctx, RngStream& rng);

}  // namespace augcal
