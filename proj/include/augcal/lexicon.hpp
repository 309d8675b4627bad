#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace augcal {

// Synonym dictionary backing synonym replacement and random insertion.
// File format: one entry per line, `word<TAB>syn1,syn2,...`. Lines starting
// with '#' and blank lines are ignored. All keys and synonyms are stored
// lowercase; a word is never its own synonym.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  static SynonymLexicon load(const std::string& path);

  // Synonyms for the lowercased word, or an empty list if absent.
  const std::vector<std::string>& synonyms(std::string_view word) const;

  bool has_synonyms(std::string_view word) const {
    return !synonyms(word).empty();
  }

  void add(std::string word, std::vector<std::string> syns);

  std::size_t size() const { return entries_.size(); }
  const std::unordered_map<std::string, std::vector<std::string>>& entries()
      const {
    return entries_;
  }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

// Lowercase stopword set. File format: one word per line, '#' comments.
class StopwordList {
 public:
  StopwordList() = default;

  static StopwordList load(const std::string& path);

  bool contains(std::string_view word) const;

  void add(std::string word);

  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

std::string to_lower(std::string_view s);

}  // namespace augcal
