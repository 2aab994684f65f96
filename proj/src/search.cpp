#include "mus/search.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace mus {

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dim() != b.dim()) {
    throw input_error("cosine: dimension mismatch " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw input_error("cosine: degenerate (zero) vector");
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

double quantize_score(double score) noexcept {
  return std::ldexp(std::nearbyint(std::ldexp(score, kScoreResolutionBits)), -kScoreResolutionBits);
}

double similarity(const EmbeddingVector& a, const EmbeddingVector& b) { return quantize_score(cosine(a, b)); }

bool ranks_before(const SimilarityRecord& a, const SimilarityRecord& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.candidate_id < b.candidate_id;
}

RankedList rank_candidates(const DatasetVector& query, const std::vector<const DatasetVector*>& pool,
                           std::optional<std::size_t> k) {
  if (k && *k == 0) throw input_error("k must be positive");
  RankedList out;
  out.query_id = query.dataset_id;
  if (query.degenerate || is_degenerate(query.vector)) {
    warn("query " + query.dataset_id + " has a degenerate vector; nothing ranked");
    return out;
  }

  std::vector<const DatasetVector*> members;
  std::set<std::string> seen;
  for (const auto* c : pool) {
    if (c->dataset_id == query.dataset_id) continue;
    if (c->degenerate || is_degenerate(c->vector)) continue;
    if (!seen.insert(c->dataset_id).second) throw input_error("duplicate candidate in pool: " + c->dataset_id);
    members.push_back(c);
  }
  if (members.empty()) {
    warn("empty candidate pool for query " + query.dataset_id);
    return out;
  }

  std::vector<kernels::ScorePair> pairs;
  pairs.reserve(members.size());
  for (const auto* c : members) pairs.push_back({&query.vector, &c->vector});
  const auto scores = kernels::similarity_scores_parallel(pairs);

  out.entries.reserve(members.size());
  for (std::size_t i = 0; i < members.size(); ++i) {
    out.entries.push_back({query.dataset_id, members[i]->dataset_id, scores[i]});
  }
  std::sort(out.entries.begin(), out.entries.end(), ranks_before);
  if (k && out.entries.size() > *k) out.entries.resize(*k);
  return out;
}

std::vector<const DatasetVector*> candidate_pool(const DatasetMeta& query, const Catalog& catalog,
                                                 const std::map<std::string, DatasetVector>& vectors,
                                                 Scenario scenario, const std::vector<std::string>* allowed_topics) {
  std::vector<const DatasetVector*> pool;
  for (const auto* c : catalog.with_role(Role::candidate)) {
    if (scenario == Scenario::td && c->topic != query.topic) continue;
    if (allowed_topics && std::find(allowed_topics->begin(), allowed_topics->end(), c->topic) == allowed_topics->end()) {
      continue;
    }
    auto it = vectors.find(c->id);
    if (it != vectors.end()) pool.push_back(&it->second);
  }
  return pool;
}

std::vector<LabeledRecord> classify(const std::vector<SimilarityRecord>& records, double threshold) {
  std::vector<LabeledRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r, r.score >= threshold ? 1 : 0});
  return out;
}

void write_rankings_csv(std::ostream& out, const std::vector<RankedList>& rankings, std::optional<double> threshold) {
  out << "query_id,candidate_id,rank,score" << (threshold ? ",label" : "") << '\n';
  char buf[64];
  for (const auto& list : rankings) {
    for (std::size_t i = 0; i < list.entries.size(); ++i) {
      const auto& e = list.entries[i];
      std::snprintf(buf, sizeof buf, "%.6f", e.score);
      out << e.query_id << ',' << e.candidate_id << ',' << (i + 1) << ',' << buf;
      if (threshold) out << ',' << (e.score >= *threshold ? 1 : 0);
      out << '\n';
    }
  }
}

}  // namespace mus
