#include "augcal/extraction.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace augcal {

std::string_view task_kind_name(TaskKind kind) {
  return kind == TaskKind::MultipleChoice ? "multiple_choice" : "numeric";
}

TaskKind task_kind_from_name(std::string_view name) {
  if (name == "multiple_choice") return TaskKind::MultipleChoice;
  if (name == "numeric") return TaskKind::Numeric;
  throw std::invalid_argument("unknown task kind: " + std::string(name));
}

NormalizedAnswer NormalizedAnswer::letter(char c) {
  return {std::string(1, static_cast<char>(std::toupper(
             static_cast<unsigned char>(c)))), true};
}

NormalizedAnswer NormalizedAnswer::number(std::string canonical) {
  return {std::move(canonical), true};
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool number_starts_at(std::string_view text, std::size_t i) {
  return is_digit(text[i]) || (text[i] == '.' && i + 1 < text.size() &&
                               is_digit(text[i + 1]));
}

// Parses the decimal literal starting at position i, tolerating thousands
// separators ("1,234.50") and a directly attached leading '-'. Returns the
// matched characters with separators removed and sets `end` to one past the
// literal.
std::string scan_number_at(std::string_view text, std::size_t i,
                           std::size_t& end) {
  std::string out;
  if (i > 0 && text[i - 1] == '-' && (i < 2 || !is_digit(text[i - 2])))
    out += '-';
  bool seen_point = false;
  std::size_t j = i;
  while (j < text.size()) {
    char c = text[j];
    if (is_digit(c)) {
      out += c;
    } else if (c == ',' && !seen_point && j + 1 < text.size() &&
               is_digit(text[j + 1])) {
      // thousands separator
    } else if (c == '.' && !seen_point && j + 1 < text.size() &&
               is_digit(text[j + 1])) {
      seen_point = true;
      out += c;
    } else {
      break;
    }
    ++j;
  }
  end = j;
  return out;
}

std::string first_number(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!number_starts_at(text, i)) continue;
    std::size_t end = 0;
    return scan_number_at(text, i, end);
  }
  return {};
}

std::string last_number(std::string_view text) {
  std::string found;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!number_starts_at(text, i)) {
      ++i;
      continue;
    }
    std::size_t end = 0;
    found = scan_number_at(text, i, end);
    i = end;
  }
  return found;
}

std::string canonicalize_number(std::string digits) {
  if (digits.empty()) return {};
  bool negative = digits[0] == '-';
  std::string body = negative ? digits.substr(1) : digits;
  if (body.empty()) return {};

  std::string intpart, fracpart;
  auto point = body.find('.');
  if (point == std::string::npos) {
    intpart = body;
  } else {
    intpart = body.substr(0, point);
    fracpart = body.substr(point + 1);
  }
  // Strip leading zeros, keep at least one integer digit.
  std::size_t nz = intpart.find_first_not_of('0');
  intpart = nz == std::string::npos ? "0" : intpart.substr(nz);
  if (intpart.empty()) intpart = "0";
  // Strip trailing fractional zeros.
  std::size_t last = fracpart.find_last_not_of('0');
  fracpart = last == std::string::npos ? "" : fracpart.substr(0, last + 1);

  std::string out = intpart;
  if (!fracpart.empty()) out += "." + fracpart;
  if (negative && out != "0") out = "-" + out;
  return out;
}

std::string_view trim_view(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Case-insensitive search for "answer" followed by optional spaces and ':'.
// Returns position past the colon, or npos.
std::size_t find_answer_tag(std::string_view line) {
  static constexpr std::string_view kTag = "answer";
  for (std::size_t i = 0; i + kTag.size() <= line.size(); ++i) {
    bool match = true;
    for (std::size_t k = 0; k < kTag.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(line[i + k])) != kTag[k]) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    std::size_t j = i + kTag.size();
    while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
    if (j < line.size() && line[j] == ':') return j + 1;
  }
  return std::string_view::npos;
}

}  // namespace

NormalizedAnswer normalize_numeric(std::string_view text) {
  std::string digits = first_number(text);
  if (digits.empty()) return NormalizedAnswer::invalid();
  std::string canonical = canonicalize_number(std::move(digits));
  if (canonical.empty()) return NormalizedAnswer::invalid();
  return NormalizedAnswer::number(std::move(canonical));
}

namespace {

// Fallback form: the entire line must be one letter inside optional
// wrapping punctuation ("(b)", "C.", " A "), so that prose starting with a
// one-letter word ("I cannot answer") stays invalid.
NormalizedAnswer lone_choice_letter(std::string_view text) {
  std::string_view t = trim_view(text);
  while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.front())))
    t.remove_prefix(1);
  while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.back())))
    t.remove_suffix(1);
  if (t.size() != 1 || !std::isalpha(static_cast<unsigned char>(t.front())))
    return NormalizedAnswer::invalid();
  return NormalizedAnswer::letter(t.front());
}

}  // namespace

NormalizedAnswer normalize_choice(std::string_view text) {
  std::string_view t = trim_view(text);
  // Strip wrapping punctuation: "(b)", "[C]", "*A*", quotes, markdown bold.
  while (!t.empty() && !std::isalnum(static_cast<unsigned char>(t.front())))
    t.remove_prefix(1);
  if (t.empty()) return NormalizedAnswer::invalid();
  char c = t.front();
  if (!std::isalpha(static_cast<unsigned char>(c)))
    return NormalizedAnswer::invalid();
  // A lone letter: the next character must not continue a word.
  if (t.size() > 1 && std::isalnum(static_cast<unsigned char>(t[1])))
    return NormalizedAnswer::invalid();
  return NormalizedAnswer::letter(c);
}

NormalizedAnswer extract_answer(std::string_view raw, TaskKind kind) {
  // Collect lines; remember the last one carrying an Answer: tag.
  std::string_view answer_payload;
  bool has_tag = false;
  std::string_view final_line;

  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    std::string_view line =
        raw.substr(pos, nl == std::string_view::npos ? raw.size() - pos
                                                     : nl - pos);
    std::size_t after = find_answer_tag(line);
    if (after != std::string_view::npos) {
      answer_payload = line.substr(after);
      has_tag = true;
    }
    if (!trim_view(line).empty()) final_line = line;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  if (has_tag) {
    return kind == TaskKind::MultipleChoice ? normalize_choice(answer_payload)
                                            : normalize_numeric(answer_payload);
  }

  // Fallback: scan the final non-empty line.
  if (final_line.empty()) return NormalizedAnswer::invalid();
  if (kind == TaskKind::MultipleChoice) return lone_choice_letter(final_line);
  std::string digits = last_number(final_line);
  if (digits.empty()) return NormalizedAnswer::invalid();
  std::string canonical = canonicalize_number(std::move(digits));
  if (canonical.empty()) return NormalizedAnswer::invalid();
  return NormalizedAnswer::number(std::move(canonical));
}

bool answers_equal(const NormalizedAnswer& a, const NormalizedAnswer& b,
                   TaskKind kind) {
  if (!a.valid || !b.valid) return false;
  if (kind == TaskKind::MultipleChoice) return a.canonical == b.canonical;
  char* end = nullptr;
  double x = std::strtod(a.canonical.c_str(), &end);
  double y = std::strtod(b.canonical.c_str(), &end);
  return std::fabs(x - y) <= 1e-6;
}

}  // namespace augcal
