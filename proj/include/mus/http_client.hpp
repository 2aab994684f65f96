#pragma once

#include "mus/embedding.hpp"

#include <chrono>
#include <cstddef>
#include <mutex>
#include <optional>
#include <string>

namespace mus {

struct HttpOptions {
  std::size_t max_batch = 64;
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};  // doubled after every failed attempt
  std::chrono::seconds timeout{30};
};

/// Split "http://host:port/prefix" into the origin handed to the HTTP client
/// and a path prefix prepended to every route.
struct Endpoint {
  std::string origin;
  std::string path_prefix;
};
Endpoint parse_endpoint(const std::string& url);

/// Sends `body` as application/json to origin+path, retrying non-200 and
/// transport failures with exponential backoff. Returns the response body.
std::string post_json_with_retry(const Endpoint& endpoint, const std::string& path, const std::string& body,
                                 const HttpOptions& options);

/// Client for the embedding service:
///   GET  /health -> {"status":"ok","model":text,"dim":int}
///   POST /embed  {"texts":[...]} -> {"vectors":[[...]],"dim":int,"model":text}
/// Batches larger than max_batch are split transparently. The model and dim
/// are pinned by the first successful call; a later dim change is an error.
class HttpEmbeddingProvider final : public EmbeddingProvider {
public:
  explicit HttpEmbeddingProvider(std::string url, HttpOptions options = {});

  std::string identity() const override;
  std::size_t dim() const override;
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
  bool concurrent_safe() const override { return true; }

  std::size_t requests_sent() const;

private:
  void ensure_handshake() const;
  std::vector<EmbeddingVector> embed_chunk(std::span<const std::string> texts);

  std::string url_;
  Endpoint endpoint_;
  HttpOptions options_;
  mutable std::mutex mutex_;
  mutable std::optional<std::string> model_;
  mutable std::optional<std::size_t> dim_;
  std::size_t requests_ = 0;
};

}  // namespace mus
