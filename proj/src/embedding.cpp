#include "mus/embedding.hpp"
#include "mus/catalog.hpp"
#include "mus/error.hpp"

#include <cctype>
#include <cmath>

namespace mus {

double norm(const EmbeddingVector& v) noexcept {
  double s = 0.0;
  for (double x : v.components) s += x * x;
  return std::sqrt(s);
}

double dot(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw input_error("dimension mismatch: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.components[i] * b.components[i];
  return s;
}

bool is_degenerate(const EmbeddingVector& v) noexcept {
  for (double x : v.components) {
    if (x != 0.0) return false;
  }
  return true;
}

EmbeddingVector normalized(EmbeddingVector v) {
  const double n = norm(v);
  if (n == 0.0) return v;
  for (double& x : v.components) x /= n;
  return v;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EmbeddingVector local_embed(std::string_view text, std::size_t dim) {
  if (dim < 8) throw input_error("local embedder dimension must be >= 8");
  EmbeddingVector v{std::vector<double>(dim, 0.0)};
  if (text.empty()) return v;

  std::string padded;
  padded.reserve(text.size() + 2);
  padded.push_back('^');
  for (char c : text) padded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  padded.push_back('$');

  std::string salted(4, static_cast<char>(kSignSalt));
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::string_view gram(padded.data() + i, 3);
    const std::uint64_t bucket = fnv1a64(gram) % dim;
    salted.replace(1, 3, gram);
    const double sign = (fnv1a64(salted) & 1ULL) ? 1.0 : -1.0;
    v.components[bucket] += sign;
  }
  return normalized(std::move(v));
}

LocalEmbedder::LocalEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw input_error("local embedder dimension must be >= 8");
}

std::string LocalEmbedder::identity() const { return "local-trigram-fnv1a-" + std::to_string(dim_); }

std::vector<EmbeddingVector> LocalEmbedder::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(local_embed(t, dim_));
  return out;
}

EmbeddingVector embed_text(std::string_view text, EmbeddingProvider& provider) {
  std::string t = trim(text);
  return std::move(embed_texts(std::span<const std::string>(&t, 1), provider).front());
}

std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingProvider& provider) {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> batch;
  std::vector<std::size_t> slots;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    std::string t = trim(texts[i]);
    if (t.empty()) {
      out[i].components.assign(provider.dim(), 0.0);
    } else {
      batch.push_back(std::move(t));
      slots.push_back(i);
    }
  }
  if (batch.empty()) return out;
  auto vectors = provider.embed_batch(batch);
  if (vectors.size() != batch.size()) {
    throw external_error("provider returned " + std::to_string(vectors.size()) + " vectors for " +
                             std::to_string(batch.size()) + " texts",
                         false);
  }
  for (std::size_t j = 0; j < slots.size(); ++j) {
    for (double x : vectors[j].components) {
      if (!std::isfinite(x)) throw external_error("provider returned a non-finite component", false);
    }
    out[slots[j]] = std::move(vectors[j]);
  }
  return out;
}

std::vector<EmbeddingVector> CachingProvider::embed_batch(std::span<const std::string> texts) {
  std::vector<EmbeddingVector> out(texts.size());
  std::vector<std::string> missing;
  {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      auto it = cache_.find(texts[i]);
      if (it != cache_.end()) out[i] = it->second;
      else missing.push_back(texts[i]);
    }
  }
  if (missing.empty()) return out;

  std::vector<EmbeddingVector> fresh;
  if (inner_.concurrent_safe()) {
    fresh = inner_.embed_batch(missing);
  } else {
    std::lock_guard inner_lock(inner_mutex_);
    fresh = inner_.embed_batch(missing);
  }
  if (fresh.size() != missing.size()) throw external_error("provider returned a short batch", false);

  std::lock_guard lock(mutex_);
  for (std::size_t j = 0; j < missing.size(); ++j) cache_.try_emplace(missing[j], std::move(fresh[j]));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (out[i].components.empty()) out[i] = cache_.find(texts[i])->second;
  }
  return out;
}

std::size_t CachingProvider::size() const {
  std::lock_guard lock(mutex_);
  return cache_.size();
}

}  // namespace mus
