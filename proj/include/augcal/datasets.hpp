#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "augcal/extraction.hpp"

namespace augcal {

enum class DatasetKind { StrategyQA, PrfLaw, Gsm8k, Canonical };

std::string_view dataset_kind_name(DatasetKind kind);
DatasetKind dataset_kind_from_name(std::string_view name);

// One dataset question in canonical form.
struct QAItem {
  std::string id;
  std::string question;
  std::vector<std::pair<char, std::string>> options;  // MultipleChoice only
  NormalizedAnswer gold;
  TaskKind kind = TaskKind::MultipleChoice;
};

struct SplitAssignment {
  std::uint64_t seed = 0;
  std::vector<std::string> validation_ids;
  std::vector<std::string> test_ids;
};

// Imports an upstream file into canonical items:
//   strategyqa: JSON array of {question, answer: bool [, qid]}; booleans
//               render as options A) Yes / B) No.
//   prf_law:    MMLU CSV rows (question, 4 options, answer letter).
//   gsm8k:      JSONL of {question, answer} with the gold number after the
//               final "####" marker.
//   canonical:  this toolkit's own line-delimited format.
// Every returned item satisfies the QAItem invariants.
std::vector<QAItem> import_dataset(DatasetKind kind, const std::string& path);

// Canonical interchange format: one JSON object per line with fields
// {id, kind, question, options, gold}.
std::vector<QAItem> load_canonical(const std::string& path);
void save_canonical(const std::vector<QAItem>& items, const std::string& path);

// Deterministic shuffle by seed; first half validation (the larger half
// when the count is odd).
SplitAssignment split_validation_test(const std::vector<QAItem>& items,
                                      std::uint64_t seed);

// Filters items to those whose id appears in `ids`, preserving item order.
std::vector<QAItem> select_items(const std::vector<QAItem>& items,
                                 const std::vector<std::string>& ids);

struct Prompt {
  std::string system;
  std::string user;
};

// Renders the fixed answer-format template for the item's task kind,
// followed by the question and, for multiple choice, the lettered options
// one per line. `question_override` substitutes an augmented question while
// leaving everything else untouched.
Prompt render_prompt(const QAItem& item);
Prompt render_prompt(const QAItem& item, const std::string& question_override);

void validate_item(const QAItem& item);

}  // namespace augcal
