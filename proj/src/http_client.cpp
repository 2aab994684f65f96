#include "mus/http_client.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <thread>

namespace mus {

using nlohmann::json;

Endpoint parse_endpoint(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw input_error("endpoint must be an http:// URL: " + url);
  auto path_start = url.find('/', scheme_end + 3);
  Endpoint e;
  e.origin = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    e.path_prefix = url.substr(path_start);
    while (!e.path_prefix.empty() && e.path_prefix.back() == '/') e.path_prefix.pop_back();
  }
  return e;
}

namespace {

httplib::Client make_client(const Endpoint& endpoint, const HttpOptions& options) {
  httplib::Client client(endpoint.origin);
  client.set_connection_timeout(options.timeout);
  client.set_read_timeout(options.timeout);
  client.set_write_timeout(options.timeout);
  return client;
}

}  // namespace

std::string post_json_with_retry(const Endpoint& endpoint, const std::string& path, const std::string& body,
                                 const HttpOptions& options) {
  auto backoff = options.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= options.attempts; ++attempt) {
    auto client = make_client(endpoint, options);
    auto res = client.Post(endpoint.path_prefix + path, body, "application/json");
    if (res && res->status == 200) return res->body;
    last_failure = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < options.attempts) {
      warn(endpoint.origin + path + " attempt " + std::to_string(attempt) + " failed (" + last_failure +
           "); retrying");
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw external_error(endpoint.origin + path + " failed after " + std::to_string(options.attempts) +
                       " attempts: " + last_failure);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, HttpOptions options)
    : url_(std::move(url)), endpoint_(parse_endpoint(url_)), options_(options) {
  if (options_.max_batch == 0) throw input_error("max batch size must be positive");
  if (options_.attempts < 1) throw input_error("retry attempts must be >= 1");
}

void HttpEmbeddingProvider::ensure_handshake() const {
  {
    std::lock_guard lock(mutex_);
    if (model_ && dim_) return;
  }
  auto backoff = options_.initial_backoff;
  std::string last_failure;
  for (int attempt = 1; attempt <= options_.attempts; ++attempt) {
    auto client = make_client(endpoint_, options_);
    auto res = client.Get(endpoint_.path_prefix + "/health");
    if (res && res->status == 200) {
      json doc;
      try {
        doc = json::parse(res->body);
      } catch (const json::exception& e) {
        throw external_error("malformed /health response: " + std::string(e.what()), false);
      }
      if (!doc.contains("model") || !doc.contains("dim") || !doc["dim"].is_number_unsigned()) {
        throw external_error("/health response lacks model or dim", false);
      }
      std::lock_guard lock(mutex_);
      model_ = doc["model"].get<std::string>();
      dim_ = doc["dim"].get<std::size_t>();
      if (*dim_ == 0) throw external_error("/health reports dim 0", false);
      return;
    }
    last_failure = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < options_.attempts) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw external_error(url_ + "/health failed after " + std::to_string(options_.attempts) +
                       " attempts: " + last_failure);
}

std::string HttpEmbeddingProvider::identity() const {
  ensure_handshake();
  std::lock_guard lock(mutex_);
  return "http:" + *model_;
}

std::size_t HttpEmbeddingProvider::dim() const {
  ensure_handshake();
  std::lock_guard lock(mutex_);
  return *dim_;
}

std::size_t HttpEmbeddingProvider::requests_sent() const {
  std::lock_guard lock(mutex_);
  return requests_;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) {
  ensure_handshake();
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += options_.max_batch) {
    auto chunk = texts.subspan(start, std::min(options_.max_batch, texts.size() - start));
    for (auto& v : embed_chunk(chunk)) out.push_back(std::move(v));
  }
  return out;
}

std::vector<EmbeddingVector> HttpEmbeddingProvider::embed_chunk(std::span<const std::string> texts) {
  json request = {{"texts", json::array()}};
  for (const auto& t : texts) request["texts"].push_back(t);
  {
    std::lock_guard lock(mutex_);
    ++requests_;
  }
  const std::string body = post_json_with_retry(endpoint_, "/embed", request.dump(), options_);

  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw external_error("malformed /embed response: " + std::string(e.what()), false);
  }
  if (!doc.contains("vectors") || !doc["vectors"].is_array()) {
    throw external_error("/embed response lacks a vectors array", false);
  }
  const auto& vectors = doc["vectors"];
  if (vectors.size() != texts.size()) {
    throw external_error("/embed returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(texts.size()) + " texts",
                         false);
  }
  std::size_t expected_dim;
  {
    std::lock_guard lock(mutex_);
    expected_dim = *dim_;
    if (doc.contains("model") && doc["model"].is_string() && doc["model"].get<std::string>() != *model_) {
      throw external_error("embedding model changed mid-run: " + *model_ + " -> " +
                               doc["model"].get<std::string>(),
                           false);
    }
  }
  std::vector<EmbeddingVector> out;
  out.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      throw external_error("/embed returned a vector that is not an array of numbers", false);
    }
    EmbeddingVector ev{v.get<std::vector<double>>()};
    if (ev.dim() != expected_dim) {
      throw external_error("embedding dim mismatch: expected " + std::to_string(expected_dim) + ", got " +
                               std::to_string(ev.dim()),
                           false);
    }
    out.push_back(std::move(ev));
  }
  return out;
}

}  // namespace mus
