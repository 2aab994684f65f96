#include "mus/evaluation.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace mus {

using nlohmann::json;

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassificationMetrics metrics_from_counts(const Confusion& c) {
  ClassificationMetrics m;
  m.counts = c;
  m.accuracy_overall = ratio(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn);
  m.accuracy_pos = ratio(c.tp, c.tp + c.fn);
  m.accuracy_neg = ratio(c.tn, c.tn + c.fp);
  m.precision_pos = ratio(c.tp, c.tp + c.fp);
  m.precision_neg = ratio(c.tn, c.tn + c.fn);

  const std::size_t support_pos = c.tp + c.fn;
  const std::size_t support_neg = c.tn + c.fp;
  const std::size_t support = support_pos + support_neg;
  const bool pos_ok = support_pos == 0 || m.precision_pos.has_value();
  const bool neg_ok = support_neg == 0 || m.precision_neg.has_value();
  if (support > 0 && pos_ok && neg_ok) {
    double weighted = 0.0;
    if (support_pos > 0) weighted += static_cast<double>(support_pos) * *m.precision_pos;
    if (support_neg > 0) weighted += static_cast<double>(support_neg) * *m.precision_neg;
    m.precision_overall = weighted / static_cast<double>(support);
  }
  return m;
}

ClassificationMetrics classification_metrics(std::span<const int> predicted, std::span<const int> gold) {
  if (predicted.size() != gold.size()) throw input_error("predicted and gold labels differ in length");
  if (predicted.empty()) throw input_error("classification metrics need at least one label");
  Confusion c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const int p = predicted[i];
    const int g = gold[i];
    if ((p != 0 && p != 1) || (g != 0 && g != 1)) throw input_error("labels must be 0 or 1");
    if (p == 1 && g == 1) ++c.tp;
    else if (p == 1) ++c.fp;
    else if (g == 0) ++c.tn;
    else ++c.fn;
  }
  return metrics_from_counts(c);
}

namespace {

bool relevant(const GroundTruth& gt, const SimilarityRecord& r) {
  auto l = gt.label(r.query_id, r.candidate_id);
  return l && *l == 1;
}

}  // namespace

double precision_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k) {
  if (k == 0) throw input_error("k must be positive");
  if (ranked.entries.empty()) throw input_error("precision@k of an empty ranking for " + ranked.query_id);
  const std::size_t n = std::min(k, ranked.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += relevant(gt, ranked.entries[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::optional<double> recall_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k) {
  if (k == 0) throw input_error("k must be positive");
  const std::size_t total = gt.relevant_count(ranked.query_id);
  if (total == 0) return std::nullopt;
  const std::size_t n = std::min(k, ranked.entries.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += relevant(gt, ranked.entries[i]) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(total);
}

std::optional<double> average_precision_at_k(const RankedList& ranked, const GroundTruth& gt, std::size_t k) {
  if (k == 0) throw input_error("k must be positive");
  const std::size_t total = gt.relevant_count(ranked.query_id);
  if (total == 0) return std::nullopt;
  const std::size_t n = std::min(k, ranked.entries.size());
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!relevant(gt, ranked.entries[i])) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(i + 1);
  }
  return sum / static_cast<double>(std::min(k, total));
}

namespace {

std::vector<const RankedList*> by_query_id(const std::vector<RankedList>& rankings) {
  std::vector<const RankedList*> sorted;
  for (const auto& r : rankings) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) { return a->query_id < b->query_id; });
  return sorted;
}

}  // namespace

double map_at_k(const std::vector<RankedList>& rankings, const GroundTruth& gt, std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* r : by_query_id(rankings)) {
    auto ap = average_precision_at_k(*r, gt, k);
    if (!ap) {
      warn("query " + r->query_id + " has no relevant candidates; excluded from MAP@k");
      continue;
    }
    sum += *ap;
    ++n;
  }
  if (n == 0) throw degenerate_error("MAP@k undefined: no query has a relevant candidate");
  return sum / static_cast<double>(n);
}

void fill_ranking_metrics(EvalReport& report, const std::vector<RankedList>& rankings, const GroundTruth& gt,
                          std::size_t k) {
  report.k = k;
  double p_sum = 0.0, r_sum = 0.0, ap_sum = 0.0;
  std::size_t p_n = 0, r_n = 0;
  for (const auto* r : by_query_id(rankings)) {
    if (r->entries.empty()) {
      warn("query " + r->query_id + " has an empty ranking; excluded from @k metrics");
      continue;
    }
    p_sum += precision_at_k(*r, gt, k);
    ++p_n;
    auto rec = recall_at_k(*r, gt, k);
    auto ap = average_precision_at_k(*r, gt, k);
    if (!rec || !ap) {
      warn("query " + r->query_id + " has no relevant candidates; excluded from MAP@k and R@k");
      continue;
    }
    r_sum += *rec;
    ap_sum += *ap;
    ++r_n;
  }
  report.queries = p_n;
  report.queries_with_relevant = r_n;
  report.p_at_k = p_n ? p_sum / static_cast<double>(p_n) : 0.0;
  report.r_at_k = r_n ? r_sum / static_cast<double>(r_n) : 0.0;
  report.map_at_k = r_n ? ap_sum / static_cast<double>(r_n) : 0.0;
}

Evaluation evaluate(const Catalog& catalog, const SplitSpec& split, const GroundTruth& gt,
                    const CalibrationResult& calib, const CompositionConfig& cfg, EnrichmentSetting setting,
                    EmbeddingProvider& provider, std::size_t k, const PairScoringOptions& options) {
  if (k == 0) throw input_error("k must be positive");
  const auto ids = dataset_ids_in(catalog, split.eval_topics);
  const auto vectors = compose_catalog(catalog, cfg, provider, setting, &ids);

  Evaluation out;
  EvalReport& report = out.report;
  report.threshold = calib.threshold;
  report.scenario = std::string(to_string(cfg.scenario));
  report.enrichment = std::string(to_string(setting));

  const auto pairs = score_labeled_pairs(catalog, split.eval_topics, gt, vectors, cfg.scenario, options);
  if (pairs.empty()) throw degenerate_error("no labelled pairs in the evaluation split");
  std::vector<int> predicted, gold;
  predicted.reserve(pairs.size());
  gold.reserve(pairs.size());
  for (const auto& [rec, label] : pairs) {
    predicted.push_back(rec.score >= calib.threshold ? 1 : 0);
    gold.push_back(label);
  }
  report.classification = classification_metrics(predicted, gold);

  for (const auto* q : catalog.with_role(Role::query)) {
    if (!split.is_eval(q->topic)) continue;
    auto qv = vectors.find(q->id);
    if (qv == vectors.end() || qv->second.degenerate) {
      warn("query " + q->id + " has no usable vector; not ranked");
      continue;
    }
    auto pool = candidate_pool(*q, catalog, vectors, cfg.scenario, &split.eval_topics);
    out.rankings.push_back(rank_candidates(qv->second, pool, k));
  }
  fill_ranking_metrics(report, out.rankings, gt, k);
  return out;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string fmt(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

std::string fmt(double v) { return fmt(std::optional<double>(v)); }

}  // namespace

std::string to_json(const EvalReport& r) {
  const auto& m = r.classification;
  json doc = {
      {"scenario", r.scenario},
      {"enrichment", r.enrichment},
      {"threshold", r.threshold},
      {"k", r.k},
      {"queries", r.queries},
      {"queries_with_relevant", r.queries_with_relevant},
      {"counts", {{"tp", m.counts.tp}, {"fp", m.counts.fp}, {"tn", m.counts.tn}, {"fn", m.counts.fn}}},
      {"accuracy_overall", optional_json(m.accuracy_overall)},
      {"accuracy_pos", optional_json(m.accuracy_pos)},
      {"accuracy_neg", optional_json(m.accuracy_neg)},
      {"precision_overall", optional_json(m.precision_overall)},
      {"precision_pos", optional_json(m.precision_pos)},
      {"precision_neg", optional_json(m.precision_neg)},
      {"map_at_k", r.map_at_k},
      {"p_at_k", r.p_at_k},
      {"r_at_k", r.r_at_k},
  };
  return doc.dump(2) + "\n";
}

std::string render_table(const EvalReport& r) {
  const auto& m = r.classification;
  char line[256];
  std::ostringstream out;
  out << "Classification (threshold applied to evaluation pairs)\n";
  std::snprintf(line, sizeof line, "%-4s %-16s %6s | %-8s %-8s %-8s | %-8s %-8s %-8s\n", "", "", "MUS_t", "Acc",
                "Acc(1)", "Acc(0)", "Prec", "Prec(1)", "Prec(0)");
  out << line;
  std::snprintf(line, sizeof line, "%-4s %-16s %6.2f | %-8s %-8s %-8s | %-8s %-8s %-8s\n", r.scenario.c_str(),
                r.enrichment.c_str(), r.threshold, fmt(m.accuracy_overall).c_str(), fmt(m.accuracy_pos).c_str(),
                fmt(m.accuracy_neg).c_str(), fmt(m.precision_overall).c_str(), fmt(m.precision_pos).c_str(),
                fmt(m.precision_neg).c_str());
  out << line << '\n';
  out << "Retrieval (k = " << r.k << ", " << r.queries << " queries)\n";
  std::snprintf(line, sizeof line, "%-26s %-8s %-8s %-8s\n", "Method", "MAP@k", "P@k", "R@k");
  out << line;
  const std::string method = "MUS - " + r.enrichment + "(" + r.scenario + ")";
  std::snprintf(line, sizeof line, "%-26s %-8s %-8s %-8s\n", method.c_str(), fmt(r.map_at_k).c_str(),
                fmt(r.p_at_k).c_str(), fmt(r.r_at_k).c_str());
  out << line;
  return out.str();
}

std::string render_csv(const EvalReport& r) {
  const auto& m = r.classification;
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", *v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "scenario,enrichment,threshold,accuracy_overall,accuracy_pos,accuracy_neg,precision_overall,precision_pos,"
         "precision_neg,k,map_at_k,p_at_k,r_at_k,tp,fp,tn,fn\n";
  out << r.scenario << ',' << r.enrichment << ',' << cell(r.threshold) << ',' << cell(m.accuracy_overall) << ','
      << cell(m.accuracy_pos) << ',' << cell(m.accuracy_neg) << ',' << cell(m.precision_overall) << ','
      << cell(m.precision_pos) << ',' << cell(m.precision_neg) << ',' << r.k << ',' << cell(r.map_at_k) << ','
      << cell(r.p_at_k) << ',' << cell(r.r_at_k) << ',' << m.counts.tp << ',' << m.counts.fp << ',' << m.counts.tn
      << ',' << m.counts.fn << '\n';
  return out.str();
}

}  // namespace mus
