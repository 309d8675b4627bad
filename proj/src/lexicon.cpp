#include "augcal/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace augcal {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

namespace {

bool has_whitespace(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void parse_error(const std::string& path, int line,
                              const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

SynonymLexicon SynonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon file: " + path);

  SynonymLexicon lex;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;

    auto tab = line.find('\t');
    if (tab == std::string::npos)
      parse_error(path, lineno, "expected `word<TAB>syn1,syn2,...`");
    std::string word = to_lower(trim(line.substr(0, tab)));
    if (word.empty() || has_whitespace(word))
      parse_error(path, lineno, "invalid head word");

    std::vector<std::string> syns;
    std::stringstream rest(line.substr(tab + 1));
    std::string piece;
    while (std::getline(rest, piece, ',')) {
      std::string syn = to_lower(trim(piece));
      if (syn.empty()) continue;
      if (has_whitespace(syn))
        parse_error(path, lineno, "synonym contains whitespace: " + syn);
      syns.push_back(std::move(syn));
    }
    if (syns.empty())
      parse_error(path, lineno, "no synonyms for word: " + word);
    lex.add(std::move(word), std::move(syns));
  }
  if (lex.size() == 0) throw std::runtime_error("empty lexicon: " + path);
  return lex;
}

void SynonymLexicon::add(std::string word, std::vector<std::string> syns) {
  auto& list = entries_[word];
  for (auto& s : syns) {
    if (s == word) continue;  // never a self-synonym
    if (std::find(list.begin(), list.end(), s) == list.end())
      list.push_back(std::move(s));
  }
  if (list.empty()) entries_.erase(word);
}

const std::vector<std::string>& SynonymLexicon::synonyms(
    std::string_view word) const {
  static const std::vector<std::string> kEmpty;
  auto it = entries_.find(to_lower(word));
  return it == entries_.end() ? kEmpty : it->second;
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopword file: " + path);

  StopwordList list;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string word = trim(line);
    if (word.empty() || word[0] == '#') continue;
    list.add(to_lower(word));
  }
  if (list.size() == 0) throw std::runtime_error("empty stopword list: " + path);
  return list;
}

bool StopwordList::contains(std::string_view word) const {
  return words_.count(to_lower(word)) > 0;
}

void StopwordList::add(std::string word) { words_.insert(std::move(word)); }

}  // namespace augcal
