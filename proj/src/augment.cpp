#include "augcal/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace augcal {

Magnitude Magnitude::validated(double alpha) {
  if (!is_allowed(alpha))
    throw std::invalid_argument("magnitude must be one of {0.1, 0.2, 0.3}");
  return Magnitude{alpha};
}

bool Magnitude::is_allowed(double alpha) {
  return alpha == 0.1 || alpha == 0.2 || alpha == 0.3;
}

std::string_view op_kind_name(AugmentOpKind kind) {
  switch (kind) {
    case AugmentOpKind::SynonymReplacement: return "synonym_replacement";
    case AugmentOpKind::RandomSwap: return "random_swap";
    case AugmentOpKind::RandomDeletion: return "random_deletion";
    case AugmentOpKind::RandomInsertion: return "random_insertion";
    case AugmentOpKind::BackTranslation: return "back_translation";
  }
  return "unknown";
}

AugmentOpKind op_kind_from_name(std::string_view name) {
  for (AugmentOpKind k : kAllOpKinds)
    if (op_kind_name(k) == name) return k;
  throw std::invalid_argument("unknown augmentation op: " + std::string(name));
}

namespace {

// Unicode whitespace code points (White_Space=yes).
bool is_unicode_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 code point at s[i]; advances i by the sequence length.
// Malformed bytes are consumed one at a time and treated as opaque.
char32_t decode_utf8(std::string_view s, std::size_t& i) {
  unsigned char c = s[i];
  std::size_t len = 1;
  char32_t cp = c;
  if (c >= 0xF0) len = 4, cp = c & 0x07;
  else if (c >= 0xE0) len = 3, cp = c & 0x0F;
  else if (c >= 0xC0) len = 2, cp = c & 0x1F;
  if (i + len > s.size()) len = 1, cp = c;
  for (std::size_t k = 1; k < len; ++k) {
    unsigned char cont = s[i + k];
    if ((cont & 0xC0) != 0x80) {
      len = 1;
      cp = c;
      break;
    }
    cp = (cp << 6) | (cont & 0x3F);
  }
  i += len;
  return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t cp = decode_utf8(text, i);
    if (is_unicode_space(cp)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.append(text.substr(start, i - start));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::size_t magnitude_to_count(Magnitude m, std::size_t length) {
  if (length == 0) return 0;
  auto k = static_cast<std::size_t>(
      std::floor(m.alpha * static_cast<double>(length) + 0.5));
  return std::max<std::size_t>(1, k);
}

namespace {

// Draws up to k distinct elements from pool via partial Fisher-Yates,
// then returns them sorted ascending.
std::vector<std::size_t> sample_distinct(std::vector<std::size_t> pool,
                                         std::size_t k, RngStream& rng) {
  k = std::min(k, pool.size());
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_int(
                            static_cast<std::uint64_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool eligible_for_synonyms(const std::string& token,
                           const SynonymLexicon& lexicon,
                           const StopwordList& stopwords) {
  std::string lower = to_lower(token);
  return !stopwords.contains(lower) && lexicon.has_synonyms(lower);
}

}  // namespace

std::vector<std::string> synonym_replacement(std::vector<std::string> tokens,
                                             Magnitude m,
                                             const SynonymLexicon& lexicon,
                                             const StopwordList& stopwords,
                                             RngStream& rng) {
  if (tokens.empty()) return tokens;

  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (eligible_for_synonyms(tokens[i], lexicon, stopwords))
      eligible.push_back(i);
  if (eligible.empty()) return tokens;

  std::size_t k = magnitude_to_count(m, tokens.size());
  for (std::size_t pos : sample_distinct(std::move(eligible), k, rng)) {
    const auto& syns = lexicon.synonyms(to_lower(tokens[pos]));
    tokens[pos] = syns[rng.uniform_int(syns.size())];
  }
  return tokens;
}

std::vector<std::string> random_swap(std::vector<std::string> tokens,
                                     Magnitude m, RngStream& rng) {
  if (tokens.size() < 2) return tokens;
  std::size_t k = magnitude_to_count(m, tokens.size());
  for (std::size_t swap = 0; swap < k; ++swap) {
    std::size_t i = rng.uniform_int(tokens.size());
    std::size_t j = rng.uniform_int(tokens.size() - 1);
    if (j >= i) ++j;  // distinct positions
    std::swap(tokens[i], tokens[j]);
  }
  return tokens;
}

std::vector<std::string> random_deletion(std::vector<std::string> tokens,
                                         Magnitude m, RngStream& rng) {
  if (tokens.empty()) return tokens;
  std::vector<std::string> kept;
  kept.reserve(tokens.size());
  for (auto& token : tokens)
    if (rng.uniform_real() >= m.alpha) kept.push_back(std::move(token));
  if (kept.empty())
    kept.push_back(tokens[rng.uniform_int(tokens.size())]);
  return kept;
}

std::vector<std::string> random_insertion(std::vector<std::string> tokens,
                                          Magnitude m,
                                          const SynonymLexicon& lexicon,
                                          const StopwordList& stopwords,
                                          RngStream& rng) {
  if (tokens.empty()) return tokens;

  // Sources come from the original input, so every inserted token is a
  // synonym of an input token.
  std::vector<std::size_t> sources;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (eligible_for_synonyms(tokens[i], lexicon, stopwords))
      sources.push_back(i);
  if (sources.empty()) return tokens;

  std::vector<std::string> original = tokens;
  std::size_t k = magnitude_to_count(m, original.size());
  for (std::size_t it = 0; it < k; ++it) {
    std::size_t src = sources[rng.uniform_int(sources.size())];
    const auto& syns = lexicon.synonyms(to_lower(original[src]));
    const std::string& syn = syns[rng.uniform_int(syns.size())];
    std::size_t pos = rng.uniform_int(tokens.size() + 1);
    tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(pos), syn);
  }
  return tokens;
}

std::string back_translate(const std::string& text, Translator& translator) {
  std::string pivot;
  try {
    pivot = translator.translate(text, "en", "fr");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("back-translation failed: en->fr: ") +
                             e.what() + "; fr->en: not attempted");
  }
  try {
    return translator.translate(pivot, "fr", "en");
  } catch (const std::exception& e) {
    throw std::runtime_error(
        std::string("back-translation failed: en->fr: ok; fr->en: ") +
        e.what());
  }
}

std::string apply_op(AugmentOpKind kind, Magnitude m, const std::string& text,
                     const AugmentContext& ctx, RngStream& rng) {
  if (kind == AugmentOpKind::BackTranslation) {
    if (ctx.translator == nullptr)
      throw std::runtime_error("back-translation requires a translator");
    std::string out = back_translate(text, *ctx.translator);
    return out.empty() ? text : out;
  }

  std::vector<std::string> tokens = tokenize(text);
  switch (kind) {
    case AugmentOpKind::SynonymReplacement:
      tokens = synonym_replacement(std::move(tokens), m, *ctx.lexicon,
                                   *ctx.stopwords, rng);
      break;
    case AugmentOpKind::RandomSwap:
      tokens = random_swap(std::move(tokens), m, rng);
      break;
    case AugmentOpKind::RandomDeletion:
      tokens = random_deletion(std::move(tokens), m, rng);
      break;
    case AugmentOpKind::RandomInsertion:
      tokens = random_insertion(std::move(tokens), m, *ctx.lexicon,
                                *ctx.stopwords, rng);
      break;
    case AugmentOpKind::BackTranslation:
      break;
  }
  std::string out = detokenize(tokens);
  return out.empty() ? text : out;
}

}  // namespace augcal
