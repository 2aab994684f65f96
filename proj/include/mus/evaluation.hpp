#pragma once

#include "mus/calibration.hpp"
#include "mus/search.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mus {

inline constexpr std::size_t kDefaultK = 10;

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

/// Ratios with a zero denominator are absent rather than 0.
struct ClassificationMetrics {
  Confusion counts;
  std::optional<double> accuracy_overall;
  std::optional<double> accuracy_pos;   // TP / (TP + FN), recall of class 1
  std::optional<double> accuracy_neg;   // TN / (TN + FP), recall of class 0
  std::optional<double> precision_pos;  // TP / (TP + FP)
  std::optional<double> precision_neg;  // TN / (TN + FN)
  /// Support-weighted mean of the per-class precisions; absent when a class
  /// with support has no defined precision.
  std::optional<double> precision_overall;

  friend bool operator==(const ClassificationMetrics&, const ClassificationMetrics&) = default;
};

ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> gold);

/// Rebuilds every ratio from a confusion matrix.
ClassificationMetrics metrics_from_counts(const Confusion& counts);

/// (# relevant in the first min(k, n) entries) / k.
double precision_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k);

/// (# relevant in the first k) / (# relevant for the query); absent when the
/// query has no relevant candidate.
std::optional<double> recall_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k);

/// (sum of P@i over relevant positions i <= k) / min(k, R_q); absent when R_q = 0.
std::optional<double> average_precision_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k);

/// Mean AP@k over queries (in query_id order) that have relevant candidates.
/// Throws degenerate_error when no query qualifies.
double map_at_k(const std::vector<RankedList>& rankings, const GroundTruth& gt, std::size_t k);

struct EvalReport {
  ClassificationMetrics classification;
  double map_at_k = 0.0;
  double p_at_k = 0.0;
  double r_at_k = 0.0;
  std::size_t k = kDefaultK;
  std::size_t queries = 0;           // queries with a non-empty ranking
  std::size_t queries_with_relevant = 0;
  double threshold = 0.0;
  std::string scenario;
  std::string enrichment;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct Evaluation {
  EvalReport report;
  std::vector<RankedList> rankings;  // evaluation-side queries, cut to k
};

/// Means of P@k, R@k and AP@k over the given rankings, following the
/// exclusion rules above; fills the ranking fields of a report.
void fill_ranking_metrics(EvalReport& report, const std::vector<RankedList>& rankings, const GroundTruth& gt,
                          std::size_t k);

/// Classifies the evaluation-split labelled pairs with calib.threshold and
/// ranks every evaluation query against its scenario pool.
Evaluation evaluate(const Catalog& catalog, const SplitSpec& split, const GroundTruth& gt,
                    const CalibrationResult& calib, const CompositionConfig& cfg, EnrichmentSetting setting,
                    EmbeddingProvider& provider, std::size_t k = kDefaultK, const PairScoringOptions& options = {});

std::string to_json(const EvalReport& report);

/// Two blocks laid out like the classification and retrieval result tables.
std::string render_table(const EvalReport& report);

/// Header plus one machine-readable row.
std::string render_csv(const EvalReport& report);

}  // namespace mus
