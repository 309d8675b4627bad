#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "augcal/lexicon.hpp"

using namespace augcal;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("parses tab-separated entries") {
  auto path = write_temp("lex_basic.txt", "happy\tglad,joyful\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("happy") == std::vector<std::string>{"glad", "joyful"});
}

TEST_CASE("self-synonyms are stripped") {
  auto path = write_temp("lex_self.txt", "happy\thappy,glad\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("happy") == std::vector<std::string>{"glad"});
}

TEST_CASE("duplicate synonyms deduplicate preserving first occurrence") {
  auto path = write_temp("lex_dup.txt", "happy\tglad,joyful,glad\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("happy") == std::vector<std::string>{"glad", "joyful"});
}

TEST_CASE("comments and blank lines are ignored") {
  auto path = write_temp("lex_comments.txt",
                         "# header\n\nhappy\tglad\n  \nsad\tunhappy\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.size() == 2);
}

TEST_CASE("lookup is case-insensitive and never echoes the query") {
  auto path = write_temp("lex_case.txt", "Happy\tGLAD,Joyful\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("HAPPY") == std::vector<std::string>{"glad", "joyful"});
  CHECK(lex.synonyms("Happy") == std::vector<std::string>{"glad", "joyful"});
  for (const auto& [word, syns] : lex.entries())
    for (const auto& s : syns) CHECK(s != word);
}

TEST_CASE("absent word yields empty list") {
  auto path = write_temp("lex_absent.txt", "happy\tglad\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("zzxq").empty());
  CHECK_FALSE(lex.has_synonyms("zzxq"));
}

TEST_CASE("missing file errors") {
  CHECK_THROWS_WITH_AS(SynonymLexicon::load("/nonexistent/lexicon.txt"),
                       doctest::Contains("cannot open"), std::runtime_error);
}

TEST_CASE("malformed line reports its line number") {
  auto path = write_temp("lex_bad.txt", "happy\tglad\nno_tab_here\n");
  CHECK_THROWS_WITH_AS(SynonymLexicon::load(path), doctest::Contains(":2:"),
                       std::runtime_error);
}

TEST_CASE("file with no valid entries errors as empty") {
  auto path = write_temp("lex_empty.txt", "# only a comment\n\n");
  CHECK_THROWS_WITH_AS(SynonymLexicon::load(path),
                       doctest::Contains("empty lexicon"), std::runtime_error);
}

TEST_CASE("entry whose only synonym is itself is dropped") {
  auto path = write_temp("lex_only_self.txt", "happy\thappy\nsad\tunhappy\n");
  auto lex = SynonymLexicon::load(path);
  CHECK(lex.synonyms("happy").empty());
  CHECK(lex.size() == 1);
}

TEST_CASE("loading the same file twice is deterministic") {
  auto path = write_temp("lex_det.txt", "happy\tglad,joyful\nsad\tgloomy\n");
  auto a = SynonymLexicon::load(path);
  auto b = SynonymLexicon::load(path);
  REQUIRE(a.size() == b.size());
  for (const auto& [word, syns] : a.entries())
    CHECK(b.synonyms(word) == syns);
}

TEST_CASE("stopword membership is case-insensitive") {
  auto path = write_temp("stop_basic.txt", "the\na\nis\n");
  auto list = StopwordList::load(path);
  CHECK(list.contains("the"));
  CHECK(list.contains("The"));
  CHECK_FALSE(list.contains("confidence"));
}

TEST_CASE("bundled data files satisfy the invariants") {
  auto lex = SynonymLexicon::load(std::string(AUGCAL_DATA_DIR) +
                                  "/synonyms.txt");
  CHECK(lex.size() > 250);
  for (const auto& [word, syns] : lex.entries()) {
    REQUIRE_FALSE(word.empty());
    CHECK(word == to_lower(word));
    CHECK(word.find(' ') == std::string::npos);
    REQUIRE_FALSE(syns.empty());
    for (const auto& s : syns) {
      CHECK(s != word);
      CHECK(s == to_lower(s));
      CHECK(s.find(' ') == std::string::npos);
    }
  }

  auto stop = StopwordList::load(std::string(AUGCAL_DATA_DIR) +
                                 "/stopwords.txt");
  CHECK(stop.size() >= 140);
  CHECK(stop.contains("the"));
  CHECK(stop.contains("a"));
  CHECK(stop.contains("is"));
}
