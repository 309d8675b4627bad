#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "augcal/translate.hpp"

namespace augcal {

struct EndpointConfig {
  std::string base_url;       // scheme://host[:port][/prefix]
  std::string model;
  std::string api_key_env;    // name of the env var holding the key; may be ""
  double timeout_seconds = 60.0;
  int max_retries = 3;        // retries after the first attempt
  int max_parallel = 4;
  int initial_backoff_ms = 500;
};

struct ChatRequest {
  std::string system;
  std::string user;           // must be non-empty
  double temperature = 0.0;   // in [0, 2]
  int request_index = 0;      // disambiguates repeated sampling in the cache
};

class GatewayError : public std::runtime_error {
 public:
  enum class Kind { Transport, Request, MalformedResponse, Config };

  GatewayError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Chat-completion client contract. Implementations must tolerate concurrent
// complete() calls.
class ChatClient {
 public:
  virtual ~ChatClient() = default;

  // Returns the assistant message text. Throws GatewayError.
  virtual std::string complete(const ChatRequest& req) = 0;

  virtual const std::string& model() const = 0;
};

// Deterministic offline stand-in driven by a responder function.
class MockChatClient final : public ChatClient {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit MockChatClient(Responder responder,
                          std::string model_name = "mock")
      : responder_(std::move(responder)), model_(std::move(model_name)) {}

  // Hash-driven responder emitting well-formed "Explanation/Answer" replies.
  // When index_sensitive is true the answer also depends on the request
  // index, modelling high-temperature sampling diversity.
  static Responder hashed_responder(std::uint64_t seed, bool index_sensitive);

  std::string complete(const ChatRequest& req) override;

  const std::string& model() const override { return model_; }
  int calls() const { return calls_.load(); }

 private:
  Responder responder_;
  std::string model_;
  std::atomic<int> calls_{0};
};

// HTTP client for the de-facto chat-completions shape:
// POST {base}/v1/chat/completions with {model, messages, temperature},
// reading choices[0].message.content. Retries 429/5xx/transport failures
// with exponential backoff; concurrent calls are capped at
// cfg.max_parallel.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig cfg);
  ~HttpChatClient() override;

  std::string complete(const ChatRequest& req) override;

  const std::string& model() const override { return cfg_.model; }
  const EndpointConfig& config() const { return cfg_; }

  std::vector<int> backoffs_ms() const;
  void clear_retry_log();

 private:
  struct Impl;
  EndpointConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view data);

// Stable content digest for a request; identical requests share a key.
std::string request_digest(const std::string& model, const ChatRequest& req);

// One file per entry under a directory: filename = hex digest, content = a
// one-line JSON header with the digest preimage fields followed by the raw
// response text. Writes are atomic (temp file + rename).
class ResponseCache {
 public:
  explicit ResponseCache(std::string directory);

  std::optional<std::string> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& header_json,
             const std::string& response_text);

  const std::string& directory() const { return dir_; }

 private:
  std::string dir_;
  std::atomic<std::uint64_t> tmp_counter_{0};
};

// Cache hit returns the stored text without a network call; a miss calls
// the client and persists the result. Cache I/O failures degrade to
// uncached operation with a warning on stderr. `cache` may be null.
std::string cached_complete(ResponseCache* cache, ChatClient& client,
                            const ChatRequest& req);

// Fixed paraphrase instruction issued at temperature 0; the request index
// distinguishes the i-th paraphrase.
extern const char* const kParaphraseInstruction;
std::string paraphrase(ResponseCache* cache, ChatClient& client,
                       const std::string& question, int index);

// Translation endpoint client: POST {base}/translate with
// {text, source, target}, reading {text}. Only the en<->fr pair is
// supported. Responses are cached like completions when a cache is given.
class HttpTranslator final : public Translator {
 public:
  HttpTranslator(EndpointConfig cfg, ResponseCache* cache);
  ~HttpTranslator() override;

  std::string translate(const std::string& text, const std::string& source,
                        const std::string& target) override;

 private:
  EndpointConfig cfg_;
  ResponseCache* cache_;
};

// Cache-aware wrapper around any translator (used to replay recorded
// fixtures and to share the completion cache).
class CachingTranslator final : public Translator {
 public:
  CachingTranslator(Translator& inner, ResponseCache& cache)
      : inner_(inner), cache_(cache) {}

  std::string translate(const std::string& text, const std::string& source,
                        const std::string& target) override;

 private:
  Translator& inner_;
  ResponseCache& cache_;
};

// Digest used for translation cache entries.
std::string translation_digest(const std::string& text,
                               const std::string& source,
                               const std::string& target);

void require_supported_language_pair(const std::string& source,
                                     const std::string& target);

}  // namespace augcal
