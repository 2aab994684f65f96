#include "mus/kernels.hpp"
#include "mus/search.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mus::kernels {

EmbeddingVector mean_of_units(std::span<const EmbeddingVector* const> ordered, std::size_t dim) {
  EmbeddingVector sum{std::vector<double>(dim, 0.0)};
  std::size_t count = 0;
  for (const EmbeddingVector* v : ordered) {
    if (is_degenerate(*v)) continue;
    for (std::size_t i = 0; i < dim; ++i) sum.components[i] += v->components[i];
    ++count;
  }
  if (count == 0) return sum;
  for (double& x : sum.components) x /= static_cast<double>(count);
  return normalized(std::move(sum));
}

std::vector<double> similarity_scores_serial(std::span<const ScorePair> pairs) {
  std::vector<double> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = similarity(*pairs[i].a, *pairs[i].b);
  return out;
}

std::vector<double> similarity_scores_parallel(std::span<const ScorePair> pairs) {
  std::vector<double> out(pairs.size());
  const auto n = static_cast<std::ptrdiff_t>(pairs.size());
  // similarity() throws on bad input; validate serially so no exception escapes
  // the parallel region.
  for (const auto& p : pairs) {
    if (p.a->dim() != p.b->dim() || is_degenerate(*p.a) || is_degenerate(*p.b)) {
      return similarity_scores_serial(pairs);
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = similarity(*pairs[i].a, *pairs[i].b);
  return out;
}

std::vector<EmbeddingVector> mean_composites_serial(std::span<const std::vector<std::size_t>> groups,
                                                    std::span<const EmbeddingVector> table, std::size_t dim) {
  std::vector<EmbeddingVector> out(groups.size());
  std::vector<const EmbeddingVector*> ordered;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ordered.clear();
    for (std::size_t idx : groups[g]) ordered.push_back(&table[idx]);
    out[g] = mean_of_units(ordered, dim);
  }
  return out;
}

std::vector<EmbeddingVector> mean_composites_parallel(std::span<const std::vector<std::size_t>> groups,
                                                      std::span<const EmbeddingVector> table, std::size_t dim) {
  std::vector<EmbeddingVector> out(groups.size());
  const auto n = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel
  {
    std::vector<const EmbeddingVector*> ordered;
#pragma omp for schedule(dynamic, 8)
    for (std::ptrdiff_t g = 0; g < n; ++g) {
      ordered.clear();
      for (std::size_t idx : groups[g]) ordered.push_back(&table[idx]);
      out[g] = mean_of_units(ordered, dim);
    }
  }
  return out;
}

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace mus::kernels
