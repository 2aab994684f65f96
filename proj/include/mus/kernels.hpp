#pragma once

// Data-parallel inner loops of the engine. Every kernel has a serial
// reference and an OpenMP version; both perform the same per-item
// arithmetic, so their outputs are bitwise identical.

#include "mus/embedding.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace mus::kernels {

struct ScorePair {
  const EmbeddingVector* a;
  const EmbeddingVector* b;
};

/// Mean of the given unit (or zero) vectors in the order supplied, zero
/// vectors skipped, renormalised. Returns the zero vector of `dim` when
/// nothing contributes.
EmbeddingVector mean_of_units(std::span<const EmbeddingVector* const> ordered, std::size_t dim);

std::vector<double> similarity_scores_serial(std::span<const ScorePair> pairs);
std::vector<double> similarity_scores_parallel(std::span<const ScorePair> pairs);

/// groups[i] lists indices into `table` (already unit-normalised); the index
/// order inside a group is the accumulation order.
std::vector<EmbeddingVector> mean_composites_serial(std::span<const std::vector<std::size_t>> groups,
                                                    std::span<const EmbeddingVector> table, std::size_t dim);
std::vector<EmbeddingVector> mean_composites_parallel(std::span<const std::vector<std::size_t>> groups,
                                                      std::span<const EmbeddingVector> table, std::size_t dim);

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads() noexcept;

}  // namespace mus::kernels
