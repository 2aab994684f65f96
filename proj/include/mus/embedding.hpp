#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mus {

struct EmbeddingVector {
  std::vector<double> components;

  std::size_t dim() const noexcept { return components.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

double norm(const EmbeddingVector& v) noexcept;
double dot(const EmbeddingVector& a, const EmbeddingVector& b);

/// All-zero vectors stand for "no usable signal" (empty text, every term
/// degenerate) and are excluded from similarity math.
bool is_degenerate(const EmbeddingVector& v) noexcept;

/// Scales to unit L2 norm; degenerate vectors are returned unchanged.
EmbeddingVector normalized(EmbeddingVector v);

/// Source of text embeddings. Implementations must be deterministic for a
/// fixed identity().
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;

  /// Stable identifier of the model behind the provider (part of cache keys
  /// and config digests).
  virtual std::string identity() const = 0;
  virtual std::size_t dim() const = 0;

  /// Order-preserving batch embedding. Throws Error{external, retryable}
  /// when the backend is unavailable.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) = 0;

  /// True when embed_batch may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

/// Salt byte prepended to a trigram when hashing for the bucket sign.
inline constexpr unsigned char kSignSalt = 0x9E;
inline constexpr std::size_t kDefaultLocalDim = 256;

/// Deterministic character-trigram feature hashing: lower-case (ASCII), pad
/// with '^' and '$', hash every trigram with FNV-1a into dim buckets and
/// take the sign from the low bit of FNV-1a over (salt, trigram); low bit 1
/// adds +1, 0 adds -1. The result is L2-normalised. Empty text yields the
/// zero vector.
EmbeddingVector local_embed(std::string_view text, std::size_t dim = kDefaultLocalDim);

class LocalEmbedder final : public EmbeddingProvider {
public:
  explicit LocalEmbedder(std::size_t dim = kDefaultLocalDim);

  std::string identity() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
  bool concurrent_safe() const override { return true; }

private:
  std::size_t dim_;
};

/// Trims the text and embeds it; whitespace-only text gives the zero vector
/// of the provider's dimension.
EmbeddingVector embed_text(std::string_view text, EmbeddingProvider& provider);

/// Batch form of embed_text: trims, embeds the non-empty texts in one call and
/// leaves zero vectors in place of empty ones.
std::vector<EmbeddingVector> embed_texts(std::span<const std::string> texts, EmbeddingProvider& provider);

/// Memoises another provider per text. Insert-or-get is guarded by a mutex;
/// misses are forwarded to the wrapped provider outside the lock only when it
/// is itself concurrent-safe.
class CachingProvider final : public EmbeddingProvider {
public:
  explicit CachingProvider(EmbeddingProvider& inner) : inner_(inner) {}

  std::string identity() const override { return inner_.identity(); }
  std::size_t dim() const override { return inner_.dim(); }
  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts) override;
  bool concurrent_safe() const override { return true; }

  std::size_t size() const;

private:
  EmbeddingProvider& inner_;
  mutable std::mutex mutex_;
  std::mutex inner_mutex_;
  std::map<std::string, EmbeddingVector, std::less<>> cache_;
};

}  // namespace mus
