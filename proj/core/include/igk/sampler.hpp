#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "igk/clip.hpp"

namespace igk {

// Portable seeded shuffling. The engine is std::mt19937_64 (output fully fixed
// by the C++ standard); bounded draws use rejection sampling
//   threshold = 2^64 mod bound; draw x until x >= threshold; return x mod bound
// and shuffles are Fisher-Yates from the last index down, j = draw(i + 1).
using SeededEngine = std::mt19937_64;

std::uint64_t bounded_draw(SeededEngine& engine, std::uint64_t bound);

template <typename T>
void seeded_shuffle(std::vector<T>& items, SeededEngine& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded_draw(engine, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

// Per-batch Track-II : Track-I proportion.
struct BatchRatio {
  unsigned track2 = 8;
  unsigned track1 = 2;
};

struct Batch {
  std::size_t epoch = 0;
  std::vector<std::string> track2_ids;
  std::vector<std::string> track1_ids;
};

struct BatchPlan {
  std::uint64_t seed = 0;
  std::size_t batch_size = 0;
  BatchRatio ratio;
  std::size_t track2_per_batch = 0;
  std::size_t track1_per_batch = 0;
  std::vector<Batch> batches;
};

// Per epoch the Track-II pool is shuffled once and consumed without
// replacement; the epoch ends when it cannot fill another quota (partial
// batches are dropped). An exhausted Track-I pool is reshuffled and reused.
// Ids are sorted before shuffling, so the plan depends only on the id sets.
// One engine seeded with `seed` drives every shuffle, Track-II first.
// Throws RatioIndivisible and EmptyPool.
BatchPlan mixture_batches(std::vector<std::string> track2_ids, std::vector<std::string> track1_ids,
                          std::size_t batch_size, BatchRatio ratio, std::uint64_t seed,
                          std::size_t epochs = 1);

BatchPlan mixture_batches(const Corpus& corpus, std::size_t batch_size, BatchRatio ratio,
                          std::uint64_t seed, std::size_t epochs = 1);

// Per-track quotas for a batch size; throws RatioIndivisible.
std::pair<std::size_t, std::size_t> batch_quotas(std::size_t batch_size, BatchRatio ratio);

std::string serialize_batch_plan(const BatchPlan& plan);

}  // namespace igk
