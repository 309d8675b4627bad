#include "augcal/datasets.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "augcal/rng.hpp"

namespace augcal {

using nlohmann::json;

std::string_view dataset_kind_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::StrategyQA: return "strategyqa";
    case DatasetKind::PrfLaw: return "prf_law";
    case DatasetKind::Gsm8k: return "gsm8k";
    case DatasetKind::Canonical: return "canonical";
  }
  return "unknown";
}

DatasetKind dataset_kind_from_name(std::string_view name) {
  if (name == "strategyqa") return DatasetKind::StrategyQA;
  if (name == "prf_law") return DatasetKind::PrfLaw;
  if (name == "gsm8k") return DatasetKind::Gsm8k;
  if (name == "canonical") return DatasetKind::Canonical;
  throw std::invalid_argument("unknown dataset kind: " + std::string(name));
}

void validate_item(const QAItem& item) {
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("item " + item.id + ": " + what);
  };
  if (item.question.empty()) fail("empty question");
  if (!item.gold.valid) fail("gold answer not parseable");
  if (item.kind == TaskKind::MultipleChoice) {
    if (item.options.size() < 2 || item.options.size() > 26)
      fail("multiple-choice items need 2-26 options");
    std::unordered_set<char> letters;
    for (const auto& [letter, text] : item.options) {
      if (letter < 'A' || letter > 'Z') fail("option letter out of range");
      if (!letters.insert(letter).second) fail("duplicate option letter");
    }
    if (letters.count(item.gold.canonical[0]) == 0)
      fail("gold letter not among options");
  } else {
    if (!item.options.empty()) fail("numeric items must not carry options");
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

[[noreturn]] void row_error(const std::string& path, std::size_t row,
                            const std::string& what) {
  throw std::runtime_error(path + ": row " + std::to_string(row) + ": " +
                           what);
}

std::vector<QAItem> import_strategyqa(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!doc.is_array())
    throw std::runtime_error(path + ": expected a top-level JSON array");

  std::vector<QAItem> items;
  for (std::size_t row = 0; row < doc.size(); ++row) {
    const json& entry = doc[row];
    if (!entry.is_object() || !entry.contains("question") ||
        !entry.contains("answer") || !entry["answer"].is_boolean())
      row_error(path, row, "expected {question, answer: bool}");
    QAItem item;
    item.id = entry.contains("qid") && entry["qid"].is_string()
                  ? entry["qid"].get<std::string>()
                  : "strategyqa-" + std::to_string(row);
    item.question = entry["question"].get<std::string>();
    item.kind = TaskKind::MultipleChoice;
    item.options = {{'A', "Yes"}, {'B', "No"}};
    item.gold = NormalizedAnswer::letter(entry["answer"].get<bool>() ? 'A'
                                                                     : 'B');
    if (item.question.empty()) row_error(path, row, "empty question");
    validate_item(item);
    items.push_back(std::move(item));
  }
  return items;
}

// RFC 4180 CSV: quoted fields may contain commas, doubled quotes, and
// newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;

  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      field.clear();
      row.clear();
      any = false;
    } else {
      field += c;
    }
    ++i;
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<QAItem> import_prf_law(const std::string& path) {
  auto rows = parse_csv(read_file(path));
  std::vector<QAItem> items;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 6)
      row_error(path, r,
                "expected 6 fields (question, 4 options, answer), got " +
                    std::to_string(row.size()));
    QAItem item;
    item.id = "prf_law-" + std::to_string(r);
    item.question = row[0];
    item.kind = TaskKind::MultipleChoice;
    for (int o = 0; o < 4; ++o)
      item.options.emplace_back(static_cast<char>('A' + o), row[1 + o]);
    NormalizedAnswer gold = normalize_choice(row[5]);
    if (!gold.valid) row_error(path, r, "answer letter not parseable");
    item.gold = gold;
    if (item.question.empty()) row_error(path, r, "empty question");
    validate_item(item);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<QAItem> import_gsm8k(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<QAItem> items;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      ++row;
      continue;
    }
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      row_error(path, row, e.what());
    }
    if (!entry.is_object() || !entry.contains("question") ||
        !entry.contains("answer"))
      row_error(path, row, "expected {question, answer}");

    QAItem item;
    item.id = "gsm8k-" + std::to_string(row);
    item.question = entry["question"].get<std::string>();
    item.kind = TaskKind::Numeric;

    std::string solution = entry["answer"].get<std::string>();
    auto marker = solution.rfind("####");
    if (marker == std::string::npos)
      row_error(path, row, "no #### answer marker in solution");
    NormalizedAnswer gold = normalize_numeric(solution.substr(marker + 4));
    if (!gold.valid) row_error(path, row, "gold number not parseable");
    item.gold = gold;
    if (item.question.empty()) row_error(path, row, "empty question");
    validate_item(item);
    items.push_back(std::move(item));
    ++row;
  }
  return items;
}

}  // namespace

std::vector<QAItem> import_dataset(DatasetKind kind, const std::string& path) {
  switch (kind) {
    case DatasetKind::StrategyQA: return import_strategyqa(path);
    case DatasetKind::PrfLaw: return import_prf_law(path);
    case DatasetKind::Gsm8k: return import_gsm8k(path);
    case DatasetKind::Canonical: return load_canonical(path);
  }
  throw std::invalid_argument("unknown dataset kind");
}

std::vector<QAItem> load_canonical(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);

  std::vector<QAItem> items;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) {
      ++row;
      continue;
    }
    json entry;
    try {
      entry = json::parse(line);
    } catch (const json::exception& e) {
      row_error(path, row, e.what());
    }
    QAItem item;
    try {
      item.id = entry.at("id").get<std::string>();
      item.kind = task_kind_from_name(entry.at("kind").get<std::string>());
      item.question = entry.at("question").get<std::string>();
      for (const auto& opt : entry.value("options", json::array()))
        item.options.emplace_back(opt.at(0).get<std::string>().at(0),
                                  opt.at(1).get<std::string>());
      std::string gold = entry.at("gold").get<std::string>();
      item.gold = item.kind == TaskKind::MultipleChoice
                      ? normalize_choice(gold)
                      : normalize_numeric(gold);
    } catch (const json::exception& e) {
      row_error(path, row, e.what());
    }
    validate_item(item);
    items.push_back(std::move(item));
    ++row;
  }
  return items;
}

void save_canonical(const std::vector<QAItem>& items,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  for (const auto& item : items) {
    json options = json::array();
    for (const auto& [letter, text] : item.options)
      options.push_back({std::string(1, letter), text});
    json entry = {{"id", item.id},
                  {"kind", std::string(task_kind_name(item.kind))},
                  {"question", item.question},
                  {"options", options},
                  {"gold", item.gold.canonical}};
    out << entry.dump() << '\n';
  }
}

SplitAssignment split_validation_test(const std::vector<QAItem>& items,
                                      std::uint64_t seed) {
  if (items.size() < 2)
    throw std::invalid_argument("split needs at least 2 items");

  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  RngStream rng = RngStream(seed).derive("split");
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::size_t j = rng.uniform_int(i + 1);
    std::swap(order[i], order[j]);
  }

  SplitAssignment split;
  split.seed = seed;
  std::size_t validation_size = (items.size() + 1) / 2;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& side = i < validation_size ? split.validation_ids : split.test_ids;
    side.push_back(items[order[i]].id);
  }
  return split;
}

std::vector<QAItem> select_items(const std::vector<QAItem>& items,
                                 const std::vector<std::string>& ids) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  std::vector<QAItem> out;
  for (const auto& item : items)
    if (wanted.count(item.id)) out.push_back(item);
  return out;
}

namespace {

constexpr std::string_view kTemplateHead =
    "Read the question, analyze step by step, provide your answer.\n"
    "Use the following format to answer:\n"
    "```Explanation: [insert step-by-step analysis here]\n";
constexpr std::string_view kChoiceAnswerLine =
    "Answer: [ONLY the option letter; not a complete sentence]'''\n";
constexpr std::string_view kNumericAnswerLine =
    "Answer: [ONLY the number; not a complete sentence]'''\n";
constexpr std::string_view kTemplateTail =
    "Only give me the reply according to this format, don't give me any "
    "other words.";

}  // namespace

Prompt render_prompt(const QAItem& item) {
  return render_prompt(item, item.question);
}

Prompt render_prompt(const QAItem& item,
                     const std::string& question_override) {
  std::string user(kTemplateHead);
  user += item.kind == TaskKind::MultipleChoice ? kChoiceAnswerLine
                                                : kNumericAnswerLine;
  user += kTemplateTail;
  user += "\n\n";
  user += question_override;
  for (const auto& [letter, text] : item.options) {
    user += '\n';
    user += letter;
    user += ") ";
    user += text;
  }
  return Prompt{"", user};
}

}  // namespace augcal
