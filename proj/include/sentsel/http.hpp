#pragma once

#include <chrono>
#include <string>

#include "sentsel/inference.hpp"
#include "sentsel/scoring.hpp"

namespace sentsel {

struct HttpEndpoint {
  // "http://host:port" optionally followed by a base path.
  std::string url;
  std::chrono::milliseconds timeout{30000};
  // Additional attempts after a transport failure or 5xx response.
  int retries = 2;
};

// Splits "http://host:port/base" into ("http://host:port", "/base").
std::pair<std::string, std::string> split_url(const std::string& url);

// POST <base>/classify {"texts": [...]} -> {"logits": [[...], ...]}.
class HttpScorerBackend final : public ScorerBackend {
 public:
  HttpScorerBackend(HttpEndpoint endpoint, BackendCapabilities capabilities);

  BackendCapabilities capabilities() const override { return capabilities_; }
  std::vector<Logits> classify(std::span<const std::string> texts) const override;

 private:
  HttpEndpoint endpoint_;
  BackendCapabilities capabilities_;
};

// POST <base>/generate {"prompt", "max_new_tokens", "temperature": 0}
//   -> {"text": ...}.
class HttpGenerationClient final : public GenerationClient {
 public:
  explicit HttpGenerationClient(HttpEndpoint endpoint);

  std::string generate(const std::string& prompt, int max_new_tokens) const override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace sentsel
