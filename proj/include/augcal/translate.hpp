#pragma once

#include <stdexcept>
#include <string>

namespace augcal {

// Round-trip translation contract used by the back-translation operator.
// Implementations: HttpTranslator (gateway), IdentityTranslator and
// test doubles. Must tolerate concurrent calls.
class Translator {
 public:
  virtual ~Translator() = default;

  // Translates text between language codes ("en", "fr"). Throws on failure.
  virtual std::string translate(const std::string& text,
                                const std::string& source,
                                const std::string& target) = 0;
};

class IdentityTranslator final : public Translator {
 public:
  std::string translate(const std::string& text, const std::string&,
                        const std::string&) override {
    return text;
  }
};

}  // namespace augcal
