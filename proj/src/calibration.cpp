#include "mus/calibration.hpp"
#include "mus/csv.hpp"
#include "mus/diagnostics.hpp"
#include "mus/error.hpp"
#include "mus/kernels.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace mus {

using nlohmann::json;

bool SplitSpec::is_test(const std::string& topic) const {
  return std::binary_search(test_topics.begin(), test_topics.end(), topic);
}

bool SplitSpec::is_eval(const std::string& topic) const {
  return std::binary_search(eval_topics.begin(), eval_topics.end(), topic);
}

SplitSpec split_topics(std::vector<std::string> topics, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw input_error("split ratio must lie in (0, 1)");
  std::sort(topics.begin(), topics.end());
  topics.erase(std::unique(topics.begin(), topics.end()), topics.end());
  if (topics.size() < 2) throw input_error("a topic split needs at least 2 topics, found " + std::to_string(topics.size()));

  const auto n_test = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(topics.size())));
  if (n_test == 0 || n_test == topics.size()) {
    throw input_error("split ratio " + std::to_string(ratio) + " over " + std::to_string(topics.size()) +
                      " topics leaves one side empty");
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = topics.size() - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(topics[i], topics[j]);
  }

  SplitSpec s;
  s.ratio = ratio;
  s.seed = seed;
  s.test_topics.assign(topics.begin(), topics.begin() + static_cast<std::ptrdiff_t>(n_test));
  s.eval_topics.assign(topics.begin() + static_cast<std::ptrdiff_t>(n_test), topics.end());
  std::sort(s.test_topics.begin(), s.test_topics.end());
  std::sort(s.eval_topics.begin(), s.eval_topics.end());
  return s;
}

SplitSpec split_by_topic(const Catalog& catalog, double ratio, std::uint64_t seed) {
  return split_topics(catalog.topics(), ratio, seed);
}

// ---------------------------------------------------------------------------

std::optional<int> GroundTruth::label(const std::string& query, const std::string& candidate) const {
  auto it = labels.find({query, candidate});
  if (it == labels.end()) return std::nullopt;
  return it->second;
}

std::size_t GroundTruth::relevant_count(const std::string& query) const {
  std::size_t n = 0;
  for (auto it = labels.lower_bound({query, std::string()}); it != labels.end() && it->first.first == query; ++it) {
    if (it->second == 1) ++n;
  }
  return n;
}

namespace {

std::string resolve_table(const std::string& name, const Catalog* catalog) {
  std::string t = trim(name);
  if (catalog && catalog->contains(t)) return t;
  std::string id = dataset_id_from_title(t);
  if (catalog && !catalog->contains(id)) throw input_error("ground truth references unknown table '" + t + "'");
  return id;
}

}  // namespace

GroundTruth parse_ground_truth(std::string_view csv_text, const Catalog* catalog) {
  std::istringstream in{std::string(csv_text)};
  auto header = csv::read_record(in);
  for (auto& h : header) h = trim(h);
  if (header != std::vector<std::string>{"query_table", "candidate_table", "label"}) {
    throw input_error("ground truth header must be query_table,candidate_table,label");
  }
  GroundTruth gt;
  int row = 1;
  for (;;) {
    auto rec = csv::read_record(in);
    if (rec.empty()) break;
    ++row;
    if (rec.size() == 1 && trim(rec[0]).empty()) continue;
    if (rec.size() != 3) throw input_error("ground truth row " + std::to_string(row) + ": expected 3 fields");
    const std::string label = trim(rec[2]);
    if (label != "0" && label != "1") {
      throw input_error("ground truth row " + std::to_string(row) + ": label must be 0 or 1");
    }
    auto key = std::make_pair(resolve_table(rec[0], catalog), resolve_table(rec[1], catalog));
    auto [it, inserted] = gt.labels.emplace(key, label == "1" ? 1 : 0);
    if (!inserted && it->second != (label == "1" ? 1 : 0)) {
      throw input_error("ground truth row " + std::to_string(row) + ": conflicting label for " + key.first + "," +
                        key.second);
    }
  }
  return gt;
}

GroundTruth load_ground_truth(const std::filesystem::path& path, const Catalog* catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open ground truth " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_ground_truth(buf.str(), catalog);
}

// ---------------------------------------------------------------------------

CalibrationResult youden_threshold(const std::vector<ScoredLabel>& scored) {
  std::int64_t positives = 0;
  for (const auto& s : scored) {
    if (!std::isfinite(s.score)) throw input_error("calibration scores must be finite");
    if (s.label != 0 && s.label != 1) throw input_error("calibration labels must be 0 or 1");
    positives += s.label;
  }
  const std::int64_t negatives = static_cast<std::int64_t>(scored.size()) - positives;
  if (positives == 0 || negatives == 0) {
    throw degenerate_error("degenerate calibration set: " + std::to_string(positives) + " positive and " +
                           std::to_string(negatives) + " negative pairs");
  }

  std::vector<ScoredLabel> sorted = scored;
  std::sort(sorted.begin(), sorted.end(), [](const ScoredLabel& a, const ScoredLabel& b) { return a.score > b.score; });

  CalibrationResult r;
  r.pairs = scored.size();
  r.positives = static_cast<std::size_t>(positives);
  std::int64_t tp = 0, fp = 0;
  std::int64_t best_num = 0;
  bool have_best = false;
  for (std::size_t i = 0; i < sorted.size();) {
    const double t = sorted[i].score;
    for (; i < sorted.size() && sorted[i].score == t; ++i) {
      if (sorted[i].label == 1) ++tp;
      else ++fp;
    }
    RocPoint p;
    p.threshold = t;
    p.tpr = static_cast<double>(tp) / static_cast<double>(positives);
    p.fpr = static_cast<double>(fp) / static_cast<double>(negatives);
    p.j = p.tpr - p.fpr;
    r.curve.push_back(p);
    // J * P * N, exact in integers; strict '>' keeps the larger threshold on ties.
    const std::int64_t num = tp * negatives - fp * positives;
    if (!have_best || num > best_num) {
      have_best = true;
      best_num = num;
      r.threshold = p.threshold;
      r.j_statistic = p.j;
    }
  }
  return r;
}

std::vector<std::string> dataset_ids_in(const Catalog& catalog, const std::vector<std::string>& topics) {
  std::vector<std::string> ids;
  for (const auto& [id, d] : catalog.datasets) {
    if (std::find(topics.begin(), topics.end(), d.topic) != topics.end()) ids.push_back(id);
  }
  return ids;
}

std::vector<std::pair<SimilarityRecord, int>> score_labeled_pairs(
    const Catalog& catalog, const std::vector<std::string>& topics, const GroundTruth& gt,
    const std::map<std::string, DatasetVector>& vectors, Scenario scenario, const PairScoringOptions& options) {
  const std::set<std::string> topic_set(topics.begin(), topics.end());
  auto usable = [&](const std::string& id) -> const DatasetVector* {
    auto it = vectors.find(id);
    if (it == vectors.end() || it->second.degenerate) return nullptr;
    return &it->second;
  };

  std::map<std::pair<std::string, std::string>, int> pairs;
  for (const auto& [key, label] : gt.labels) {
    const auto& [q, c] = key;
    if (!catalog.contains(q) || !catalog.contains(c)) continue;
    const auto& qd = catalog.at(q);
    const auto& cd = catalog.at(c);
    if (!topic_set.count(qd.topic) || !topic_set.count(cd.topic)) continue;
    if (scenario == Scenario::td && qd.topic != cd.topic) continue;
    pairs.emplace(key, label);
  }
  if (scenario == Scenario::tg && options.cross_topic_negatives) {
    for (const auto* q : catalog.with_role(Role::query)) {
      if (!topic_set.count(q->topic)) continue;
      for (const auto* c : catalog.with_role(Role::candidate)) {
        if (c->topic == q->topic || !topic_set.count(c->topic)) continue;
        pairs.emplace(std::make_pair(q->id, c->id), 0);
      }
    }
  }

  std::vector<std::pair<SimilarityRecord, int>> out;
  std::vector<kernels::ScorePair> jobs;
  std::size_t skipped = 0;
  for (const auto& [key, label] : pairs) {
    const auto* qv = usable(key.first);
    const auto* cv = usable(key.second);
    if (!qv || !cv) {
      ++skipped;
      continue;
    }
    out.push_back({SimilarityRecord{key.first, key.second, 0.0}, label});
    jobs.push_back({&qv->vector, &cv->vector});
  }
  if (skipped > 0) warn(std::to_string(skipped) + " labelled pair(s) skipped: missing or degenerate vectors");
  const auto scores = kernels::similarity_scores_parallel(jobs);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].first.score = scores[i];
  return out;
}

CalibrationResult calibrate(const Catalog& catalog, const SplitSpec& split, const GroundTruth& gt,
                            const CompositionConfig& cfg, EnrichmentSetting setting, EmbeddingProvider& provider,
                            const PairScoringOptions& options) {
  const auto ids = dataset_ids_in(catalog, split.test_topics);
  const auto vectors = compose_catalog(catalog, cfg, provider, setting, &ids);
  const auto pairs = score_labeled_pairs(catalog, split.test_topics, gt, vectors, cfg.scenario, options);
  std::vector<ScoredLabel> scored;
  scored.reserve(pairs.size());
  for (const auto& [rec, label] : pairs) scored.push_back({rec.score, label});
  auto result = youden_threshold(scored);
  result.scenario = std::string(to_string(cfg.scenario));
  result.enrichment = std::string(to_string(setting));
  return result;
}

// ---------------------------------------------------------------------------

std::string to_json(const SplitSpec& split) {
  json doc = {{"ratio", split.ratio},
              {"seed", split.seed},
              {"test_topics", split.test_topics},
              {"eval_topics", split.eval_topics}};
  return doc.dump(2) + "\n";
}

SplitSpec split_from_json(std::string_view text) {
  try {
    auto doc = json::parse(text);
    SplitSpec s;
    s.ratio = doc.at("ratio").get<double>();
    s.seed = doc.at("seed").get<std::uint64_t>();
    s.test_topics = doc.at("test_topics").get<std::vector<std::string>>();
    s.eval_topics = doc.at("eval_topics").get<std::vector<std::string>>();
    std::sort(s.test_topics.begin(), s.test_topics.end());
    std::sort(s.eval_topics.begin(), s.eval_topics.end());
    return s;
  } catch (const json::exception& e) {
    throw input_error(std::string("malformed split JSON: ") + e.what());
  }
}

std::string to_json(const CalibrationResult& r) {
  json curve = json::array();
  for (const auto& p : r.curve) curve.push_back({{"threshold", p.threshold}, {"tpr", p.tpr}, {"fpr", p.fpr}, {"j", p.j}});
  json doc = {{"threshold", r.threshold},
              {"j_statistic", r.j_statistic},
              {"scenario", r.scenario},
              {"enrichment", r.enrichment},
              {"pairs", r.pairs},
              {"positives", r.positives},
              {"curve", curve}};
  return doc.dump(2) + "\n";
}

CalibrationResult calibration_from_json(std::string_view text) {
  try {
    auto doc = json::parse(text);
    CalibrationResult r;
    r.threshold = doc.at("threshold").get<double>();
    r.j_statistic = doc.at("j_statistic").get<double>();
    r.scenario = doc.value("scenario", std::string());
    r.enrichment = doc.value("enrichment", std::string());
    r.pairs = doc.value("pairs", std::size_t{0});
    r.positives = doc.value("positives", std::size_t{0});
    for (const auto& p : doc.value("curve", json::array())) {
      r.curve.push_back({p.at("threshold").get<double>(), p.at("tpr").get<double>(), p.at("fpr").get<double>(),
                         p.at("j").get<double>()});
    }
    return r;
  } catch (const json::exception& e) {
    throw input_error(std::string("malformed calibration JSON: ") + e.what());
  }
}

}  // namespace mus
