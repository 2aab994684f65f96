#pragma once

#include "mus/catalog.hpp"
#include "mus/composition.hpp"
#include "mus/embedding.hpp"
#include "mus/settings.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mus {

struct SimilarityRecord {
  std::string query_id;
  std::string candidate_id;
  double score = 0.0;

  friend bool operator==(const SimilarityRecord&, const SimilarityRecord&) = default;
};

/// Sorted by descending score, ties by ascending candidate_id.
struct RankedList {
  std::string query_id;
  std::vector<SimilarityRecord> entries;

  friend bool operator==(const RankedList&, const RankedList&) = default;
};

struct LabeledRecord {
  SimilarityRecord record;
  int label = 0;
};

/// dot(a,b) / (|a| |b|) clamped to [-1, 1]. Dimension mismatch and zero
/// vectors are input errors.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Scores are compared and reported as multiples of 2^-kScoreResolutionBits.
inline constexpr int kScoreResolutionBits = 32;

/// Rounds to the nearest multiple of 2^-kScoreResolutionBits.
double quantize_score(double score) noexcept;

/// quantize_score(cosine(a, b)): the score used for ranking, calibration and
/// classification, so that mathematically equal cosines compare equal.
double similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Ranking order: score descending, then candidate_id ascending.
bool ranks_before(const SimilarityRecord& a, const SimilarityRecord& b) noexcept;

/// Scores every pool member against the query (skipping the query itself and
/// degenerate vectors) and returns the full ordering, cut to k when given.
/// The caller is responsible for scenario pooling; see candidate_pool.
RankedList rank_candidates(const DatasetVector& query, const std::vector<const DatasetVector*>& pool,
                           std::optional<std::size_t> k = std::nullopt);

/// Candidate vectors for a query under a scenario: TD keeps candidates of the
/// query's topic, TG keeps every candidate. `allowed_topics`, when given,
/// further limits the pool to candidates of those topics (one split side).
std::vector<const DatasetVector*> candidate_pool(const DatasetMeta& query, const Catalog& catalog,
                                                 const std::map<std::string, DatasetVector>& vectors,
                                                 Scenario scenario,
                                                 const std::vector<std::string>* allowed_topics = nullptr);

/// Label 1 iff score >= threshold.
std::vector<LabeledRecord> classify(const std::vector<SimilarityRecord>& records, double threshold);

/// query_id,candidate_id,rank,score[,label]; scores with six decimals, rank 1-based.
void write_rankings_csv(std::ostream& out, const std::vector<RankedList>& rankings,
                        std::optional<double> threshold = std::nullopt);

}  // namespace mus
