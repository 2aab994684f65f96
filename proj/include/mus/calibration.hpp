#pragma once

#include "mus/catalog.hpp"
#include "mus/composition.hpp"
#include "mus/search.hpp"
#include "mus/settings.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mus {

inline constexpr double kDefaultSplitRatio = 0.4;

struct SplitSpec {
  std::vector<std::string> test_topics;  // sorted
  std::vector<std::string> eval_topics;  // sorted
  double ratio = kDefaultSplitRatio;
  std::uint64_t seed = 0;

  bool is_test(const std::string& topic) const;
  bool is_eval(const std::string& topic) const;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Topic-level split: round(ratio * topics) topics go to the test side, the
/// rest to evaluation. Topics are shuffled with a Fisher-Yates pass driven by
/// mt19937_64(seed), so the split is reproducible across platforms.
SplitSpec split_by_topic(const Catalog& catalog, double ratio, std::uint64_t seed);
SplitSpec split_topics(std::vector<std::string> topics, double ratio, std::uint64_t seed);

struct GroundTruth {
  std::map<std::pair<std::string, std::string>, int> labels;  // (query, candidate) -> {0,1}

  std::optional<int> label(const std::string& query, const std::string& candidate) const;
  /// Number of label-1 pairs for the query.
  std::size_t relevant_count(const std::string& query) const;
};

/// CSV with header `query_table,candidate_table,label`. Table names are
/// catalog ids or source filenames; filenames are mapped to ids the same
/// way ingestion does. Every pair must reference catalog datasets when a
/// catalog is given.
GroundTruth load_ground_truth(const std::filesystem::path& path, const Catalog* catalog = nullptr);
GroundTruth parse_ground_truth(std::string_view csv_text, const Catalog* catalog = nullptr);

struct RocPoint {
  double threshold = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double j = 0.0;

  friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct CalibrationResult {
  double threshold = 0.0;    // the calibrated cut-off, always an observed score
  double j_statistic = 0.0;  // TPR - FPR at threshold
  std::vector<RocPoint> curve;  // one point per distinct observed score, threshold descending
  std::string scenario;
  std::string enrichment;
  std::size_t pairs = 0;
  std::size_t positives = 0;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

struct ScoredLabel {
  double score = 0.0;
  int label = 0;
};

/// Sweeps every distinct observed score t (classifying score >= t as 1),
/// maximising J = TPR - FPR. J values are compared exactly as rationals;
/// among maxima the largest threshold wins. Throws degenerate_error when all
/// labels are equal.
CalibrationResult youden_threshold(const std::vector<ScoredLabel>& scored);

struct PairScoringOptions {
  /// TG only: add every same-split (query, candidate) pair of a different
  /// topic that the ground truth does not label, as label 0.
  bool cross_topic_negatives = false;
};

/// Ground-truth pairs whose query topic lies in `topics`, scored under the
/// scenario's pooling rule (TD: same-topic candidates only; TG: any
/// candidate of the same split side). Pairs touching a degenerate vector
/// are skipped. Output is ordered by (query, candidate).
std::vector<std::pair<SimilarityRecord, int>> score_labeled_pairs(
    const Catalog& catalog, const std::vector<std::string>& topics, const GroundTruth& gt,
    const std::map<std::string, DatasetVector>& vectors, Scenario scenario, const PairScoringOptions& options = {});

/// Composes the test-split datasets, scores their labelled pairs and runs
/// youden_threshold.
CalibrationResult calibrate(const Catalog& catalog, const SplitSpec& split, const GroundTruth& gt,
                            const CompositionConfig& cfg, EnrichmentSetting setting, EmbeddingProvider& provider,
                            const PairScoringOptions& options = {});

/// Ids of the datasets whose topic is in `topics`, in catalog order.
std::vector<std::string> dataset_ids_in(const Catalog& catalog, const std::vector<std::string>& topics);

std::string to_json(const SplitSpec& split);
std::string to_json(const CalibrationResult& result);
CalibrationResult calibration_from_json(std::string_view text);
SplitSpec split_from_json(std::string_view text);

}  // namespace mus
