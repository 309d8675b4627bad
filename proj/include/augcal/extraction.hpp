#pragma once

#include <string>
#include <string_view>

namespace augcal {

enum class TaskKind { MultipleChoice, Numeric };

std::string_view task_kind_name(TaskKind kind);
TaskKind task_kind_from_name(std::string_view name);

// Canonical answer form used for all equality comparisons.
// MultipleChoice: a single uppercase letter A..Z. Numeric: a decimal string
// with no thousands separators, no trailing zeros after the point, no
// leading '+'. Invalid answers are values, not errors, and never compare
// equal to anything, including other invalid answers.
struct NormalizedAnswer {
  std::string canonical;
  bool valid = false;

  static NormalizedAnswer invalid() { return {}; }
  static NormalizedAnswer letter(char c);
  static NormalizedAnswer number(std::string canonical);
};

// Canonicalizes a numeric literal (strips '+', thousands separators,
// trailing fractional zeros). Returns an invalid answer when the text is not
// a number.
NormalizedAnswer normalize_numeric(std::string_view text);

// Canonicalizes an option-letter answer ("b", "(B)", "C." -> single letter).
NormalizedAnswer normalize_choice(std::string_view text);

// Parses a model response: the last `Answer:` line (case-insensitive) wins;
// without one, falls back to scanning the final non-empty line for a lone
// option letter or the final number. Total over arbitrary text.
NormalizedAnswer extract_answer(std::string_view raw, TaskKind kind);

// MultipleChoice: exact canonical match. Numeric: |a - b| <= 1e-6 after
// decimal parse. Any invalid operand compares unequal.
bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b,
                   TaskKind kind);

}  // namespace augcal
