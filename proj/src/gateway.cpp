#include "augcal/gateway.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <semaphore>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "augcal/rng.hpp"

namespace augcal {

using nlohmann::json;
namespace fs = std::filesystem;

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xF];
  }
  return out;
}

namespace {

std::string format_temperature(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", t);
  return buf;
}

void validate_request(const ChatRequest& req) {
  if (req.user.empty())
    throw GatewayError(GatewayError::Kind::Request,
                       "chat request user message must be non-empty");
  if (req.temperature < 0.0 || req.temperature > 2.0)
    throw GatewayError(GatewayError::Kind::Request,
                       "temperature must be within [0, 2]");
}

}  // namespace

std::string request_digest(const std::string& model, const ChatRequest& req) {
  std::string preimage;
  preimage += model;
  preimage += '\x1f';
  preimage += req.system;
  preimage += '\x1f';
  preimage += req.user;
  preimage += '\x1f';
  preimage += format_temperature(req.temperature);
  preimage += '\x1f';
  preimage += std::to_string(req.request_index);
  return sha256_hex(preimage);
}

std::string translation_digest(const std::string& text,
                               const std::string& source,
                               const std::string& target) {
  std::string preimage = "translate\x1f" + source + "->" + target + '\x1f' +
                         text;
  return sha256_hex(preimage);
}

void require_supported_language_pair(const std::string& source,
                                     const std::string& target) {
  bool ok = (source == "en" && target == "fr") ||
            (source == "fr" && target == "en");
  if (!ok)
    throw GatewayError(GatewayError::Kind::Config,
                       "unsupported language pair: " + source + "->" + target);
}

// ---------------------------------------------------------------------------
// MockChatClient

std::string MockChatClient::complete(const ChatRequest& req) {
  validate_request(req);
  calls_.fetch_add(1);
  return responder_(req);
}

MockChatClient::Responder MockChatClient::hashed_responder(
    std::uint64_t seed, bool index_sensitive) {
  return [seed, index_sensitive](const ChatRequest& req) -> std::string {
        std::uint64_t h = RngStream::fnv1a(req.user) ^ (seed * 0x9e3779b97f4a7c15ULL);
        if (index_sensitive)
          h ^= (static_cast<std::uint64_t>(req.request_index) + 1) *
               0xbf58476d1ce4e5b9ULL;

        // Multiple-choice prompts list options as "X) text" lines; answer
        // with one of the listed letters, otherwise with a number.
        std::vector<char> letters;
        std::istringstream lines(req.user);
        std::string line;
        while (std::getline(lines, line)) {
          if (line.size() >= 2 && line[0] >= 'A' && line[0] <= 'Z' &&
              line[1] == ')')
            letters.push_back(line[0]);
        }
        std::string answer;
        if (!letters.empty())
          answer = std::string(1, letters[h % letters.size()]);
        else
          answer = std::to_string(h % 1000);
        return "Explanation: deterministic mock response.\nAnswer: " + answer;
      };
}

// ---------------------------------------------------------------------------
// HttpChatClient

namespace {

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos)
    throw GatewayError(GatewayError::Kind::Config,
                       "base URL must include a scheme: " + base_url);
  auto path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {base_url, ""};
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

struct RetryState {
  std::vector<int>* log;
  std::mutex* log_mutex;
};

// POSTs JSON with retries on 429/5xx/transport failures; returns the
// response body on 2xx. `initial_backoff_ms * 2^k` between attempts.
std::string post_with_retries(const EndpointConfig& cfg,
                              const std::string& path,
                              const httplib::Headers& headers,
                              const std::string& body,
                              const RetryState& retry) {
  ParsedUrl url = parse_base_url(cfg.base_url);
  int attempts = cfg.max_retries + 1;
  std::string last_error;

  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      int delay = cfg.initial_backoff_ms * (1 << (attempt - 1));
      if (retry.log) {
        std::lock_guard<std::mutex> lock(*retry.log_mutex);
        retry.log->push_back(delay);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(delay));
    }

    httplib::Client client(url.scheme_host_port);
    auto timeout = std::chrono::duration<double>(cfg.timeout_seconds);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(url.path_prefix + path, headers, body,
                           "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return res->body;
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw GatewayError(GatewayError::Kind::Request,
                       "HTTP " + std::to_string(res->status) + ": " +
                           res->body);
  }
  throw GatewayError(GatewayError::Kind::Transport,
                     "request failed after " + std::to_string(attempts) +
                         " attempts: " + last_error);
}

httplib::Headers auth_headers(const EndpointConfig& cfg) {
  httplib::Headers headers;
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
      throw GatewayError(GatewayError::Kind::Config,
                         "API key environment variable not set: " +
                             cfg.api_key_env);
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  return headers;
}

}  // namespace

struct HttpChatClient::Impl {
  explicit Impl(int max_parallel) : semaphore(max_parallel) {}

  std::counting_semaphore<1 << 20> semaphore;
  mutable std::mutex log_mutex;
  std::vector<int> backoff_log;
};

HttpChatClient::HttpChatClient(EndpointConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.timeout_seconds <= 0)
    throw GatewayError(GatewayError::Kind::Config, "timeout must be > 0");
  if (cfg_.max_retries < 0)
    throw GatewayError(GatewayError::Kind::Config, "retries must be >= 0");
  if (cfg_.max_parallel < 1)
    throw GatewayError(GatewayError::Kind::Config, "parallelism must be >= 1");
  impl_ = std::make_unique<Impl>(cfg_.max_parallel);
}

HttpChatClient::~HttpChatClient() = default;

std::string HttpChatClient::complete(const ChatRequest& req) {
  validate_request(req);

  json messages = json::array();
  if (!req.system.empty())
    messages.push_back({{"role", "system"}, {"content", req.system}});
  messages.push_back({{"role", "user"}, {"content", req.user}});
  json body = {{"model", cfg_.model},
               {"messages", messages},
               {"temperature", req.temperature}};

  impl_->semaphore.acquire();
  std::string response_body;
  try {
    response_body = post_with_retries(
        cfg_, "/v1/chat/completions", auth_headers(cfg_), body.dump(),
        {&impl_->backoff_log, &impl_->log_mutex});
  } catch (...) {
    impl_->semaphore.release();
    throw;
  }
  impl_->semaphore.release();

  try {
    json doc = json::parse(response_body);
    std::string content =
        doc.at("choices").at(0).at("message").at("content").get<std::string>();
    if (content.empty())
      throw GatewayError(GatewayError::Kind::MalformedResponse,
                         "empty assistant message");
    return content;
  } catch (const json::exception& e) {
    throw GatewayError(GatewayError::Kind::MalformedResponse,
                       std::string("cannot parse completion response: ") +
                           e.what());
  }
}

std::vector<int> HttpChatClient::backoffs_ms() const {
  std::lock_guard<std::mutex> lock(impl_->log_mutex);
  return impl_->backoff_log;
}

void HttpChatClient::clear_retry_log() {
  std::lock_guard<std::mutex> lock(impl_->log_mutex);
  impl_->backoff_log.clear();
}

// ---------------------------------------------------------------------------
// ResponseCache

ResponseCache::ResponseCache(std::string directory)
    : dir_(std::move(directory)) {
  fs::create_directories(dir_);
}

std::optional<std::string> ResponseCache::lookup(
    const std::string& key) const {
  fs::path path = fs::path(dir_) / key;
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string content = buffer.str();
  auto newline = content.find('\n');
  if (newline == std::string::npos) return std::nullopt;
  return content.substr(newline + 1);
}

void ResponseCache::store(const std::string& key,
                          const std::string& header_json,
                          const std::string& response_text) {
  fs::path final_path = fs::path(dir_) / key;
  fs::path tmp_path =
      fs::path(dir_) /
      (key + ".tmp." + std::to_string(tmp_counter_.fetch_add(1)) + "." +
       std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
  {
    std::ofstream out(tmp_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write cache entry: " +
                                       tmp_path.string());
    out << header_json << '\n' << response_text;
  }
  fs::rename(tmp_path, final_path);
}

namespace {

std::string cache_header(const std::string& model, const ChatRequest& req) {
  json header = {{"model", model},
                 {"temperature", format_temperature(req.temperature)},
                 {"request_index", req.request_index},
                 {"system_sha256", sha256_hex(req.system)},
                 {"user_sha256", sha256_hex(req.user)}};
  return header.dump();
}

}  // namespace

std::string cached_complete(ResponseCache* cache, ChatClient& client,
                            const ChatRequest& req) {
  if (cache == nullptr) return client.complete(req);

  std::string key = request_digest(client.model(), req);
  try {
    if (auto hit = cache->lookup(key)) return *hit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: cache lookup failed (%s); going uncached\n",
                 e.what());
  }
  std::string text = client.complete(req);
  try {
    cache->store(key, cache_header(client.model(), req), text);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: cache store failed (%s)\n", e.what());
  }
  return text;
}

// ---------------------------------------------------------------------------
// Paraphrasing

const char* const kParaphraseInstruction =
    "Rewrite the following question in different words without changing its "
    "meaning. Output only the rewritten question.";

std::string paraphrase(ResponseCache* cache, ChatClient& client,
                       const std::string& question, int index) {
  ChatRequest req;
  req.system = kParaphraseInstruction;
  req.user = question;
  req.temperature = 0.0;
  req.request_index = index;
  return cached_complete(cache, client, req);
}

// ---------------------------------------------------------------------------
// Translation

HttpTranslator::HttpTranslator(EndpointConfig cfg, ResponseCache* cache)
    : cfg_(std::move(cfg)), cache_(cache) {}

HttpTranslator::~HttpTranslator() = default;

std::string HttpTranslator::translate(const std::string& text,
                                      const std::string& source,
                                      const std::string& target) {
  require_supported_language_pair(source, target);

  std::string key = translation_digest(text, source, target);
  if (cache_ != nullptr) {
    try {
      if (auto hit = cache_->lookup(key)) return *hit;
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: cache lookup failed (%s)\n", e.what());
    }
  }

  json body = {{"text", text}, {"source", source}, {"target", target}};
  std::string response_body = post_with_retries(
      cfg_, "/translate", auth_headers(cfg_), body.dump(), {nullptr, nullptr});
  std::string translated;
  try {
    translated = json::parse(response_body).at("text").get<std::string>();
  } catch (const json::exception& e) {
    throw GatewayError(GatewayError::Kind::MalformedResponse,
                       std::string("cannot parse translation response: ") +
                           e.what());
  }

  if (cache_ != nullptr) {
    json header = {{"kind", "translate"},
                   {"source", source},
                   {"target", target},
                   {"text_sha256", sha256_hex(text)}};
    try {
      cache_->store(key, header.dump(), translated);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "warning: cache store failed (%s)\n", e.what());
    }
  }
  return translated;
}

std::string CachingTranslator::translate(const std::string& text,
                                         const std::string& source,
                                         const std::string& target) {
  require_supported_language_pair(source, target);
  std::string key = translation_digest(text, source, target);
  try {
    if (auto hit = cache_.lookup(key)) return *hit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: cache lookup failed (%s)\n", e.what());
  }
  std::string translated = inner_.translate(text, source, target);
  json header = {{"kind", "translate"},
                 {"source", source},
                 {"target", target},
                 {"text_sha256", sha256_hex(text)}};
  try {
    cache_.store(key, header.dump(), translated);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "warning: cache store failed (%s)\n", e.what());
  }
  return translated;
}

}  // namespace augcal
