#include "sentsel/http.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "sentsel/error.hpp"

namespace sentsel {

namespace {

using Json = nlohmann::json;

struct Response {
  int status = 0;
  std::string body;
};

// Posts JSON, retrying transport failures and 5xx replies. Returns the last
// response or throws `Err` when no response was received at all.
template <typename Err>
Response post_json(const HttpEndpoint& endpoint, const std::string& route,
                   const std::string& payload) {
  auto [origin, base] = split_url(endpoint.url);
  std::string path = base + route;
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt <= std::max(0, endpoint.retries); ++attempt) {
    httplib::Client client(origin);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint.timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(endpoint.timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    auto result = client.Post(path, payload, "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500 && attempt < endpoint.retries) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    return Response{result->status, result->body};
  }
  throw Err(endpoint.url + route + ": " + last_error);
}

}  // namespace

std::pair<std::string, std::string> split_url(const std::string& url) {
  std::size_t scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  std::size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string base = url.substr(slash);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {url.substr(0, slash), base};
}

HttpScorerBackend::HttpScorerBackend(HttpEndpoint endpoint,
                                     BackendCapabilities capabilities)
    : endpoint_(std::move(endpoint)), capabilities_(capabilities) {}

std::vector<Logits> HttpScorerBackend::classify(std::span<const std::string> texts) const {
  Json request;
  request["texts"] = std::vector<std::string>(texts.begin(), texts.end());
  auto response = post_json<BackendError>(endpoint_, "/classify", request.dump());
  if (response.status != 200) {
    throw BackendError("/classify returned HTTP " + std::to_string(response.status));
  }
  std::vector<Logits> out;
  try {
    Json body = Json::parse(response.body);
    const auto& rows = body.at("logits");
    if (!rows.is_array()) throw BackendError("\"logits\" is not an array");
    for (const auto& row : rows) {
      if (!row.is_array()) throw BackendError("logit row is not an array");
      Logits logits;
      for (const auto& v : row) {
        if (!v.is_number()) throw BackendError("logit is not a number");
        logits.push_back(v.get<double>());
      }
      out.push_back(std::move(logits));
    }
  } catch (const Json::exception& e) {
    throw BackendError(std::string("malformed /classify response: ") + e.what());
  }
  if (out.size() != texts.size()) {
    throw BackendError("/classify returned " + std::to_string(out.size()) + " rows for " +
                       std::to_string(texts.size()) + " texts");
  }
  return out;
}

HttpGenerationClient::HttpGenerationClient(HttpEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {}

std::string HttpGenerationClient::generate(const std::string& prompt,
                                           int max_new_tokens) const {
  Json request{{"prompt", prompt}, {"max_new_tokens", max_new_tokens}, {"temperature", 0}};
  auto response = post_json<ClientError>(endpoint_, "/generate", request.dump());
  if (response.status != 200) {
    throw ClientError("/generate returned HTTP " + std::to_string(response.status));
  }
  try {
    Json body = Json::parse(response.body);
    const auto& text = body.at("text");
    if (!text.is_string()) throw ClientError("\"text\" is not a string");
    return text.get<std::string>();
  } catch (const Json::exception& e) {
    throw ClientError(std::string("malformed /generate response: ") + e.what());
  }
}

}  // namespace sentsel
