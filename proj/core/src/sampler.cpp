#include "igk/sampler.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "igk/error.hpp"

namespace igk {

std::uint64_t bounded_draw(SeededEngine& engine, std::uint64_t bound) {
  if (bound == 0) {
    throw Error(ErrorCode::InvariantViolation, "bounded draw with an empty range");
  }
  // 2^64 mod bound, computed without 128-bit arithmetic.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine();
    if (x >= threshold) return x % bound;
  }
}

std::pair<std::size_t, std::size_t> batch_quotas(std::size_t batch_size, BatchRatio ratio) {
  const std::size_t parts = static_cast<std::size_t>(ratio.track2) + ratio.track1;
  if (batch_size == 0 || parts == 0 || (batch_size * ratio.track2) % parts != 0) {
    throw Error(ErrorCode::RatioIndivisible,
                fmt::format("batch size {} does not split {}:{} into whole clips", batch_size,
                            ratio.track2, ratio.track1));
  }
  const std::size_t track2 = batch_size * ratio.track2 / parts;
  return {track2, batch_size - track2};
}

BatchPlan mixture_batches(std::vector<std::string> track2_ids, std::vector<std::string> track1_ids,
                          std::size_t batch_size, BatchRatio ratio, std::uint64_t seed,
                          std::size_t epochs) {
  const auto [quota2, quota1] = batch_quotas(batch_size, ratio);
  if ((quota2 > 0 && track2_ids.empty()) || (quota1 > 0 && track1_ids.empty())) {
    throw Error(ErrorCode::EmptyPool, "a track pool needed by the ratio is empty");
  }
  if (quota2 == 0) {
    throw Error(ErrorCode::RatioIndivisible, "the Track-II quota must be positive");
  }

  std::sort(track2_ids.begin(), track2_ids.end());
  std::sort(track1_ids.begin(), track1_ids.end());

  BatchPlan plan;
  plan.seed = seed;
  plan.batch_size = batch_size;
  plan.ratio = ratio;
  plan.track2_per_batch = quota2;
  plan.track1_per_batch = quota1;

  SeededEngine engine(seed);
  std::vector<std::string> pool1 = track1_ids;
  std::size_t cursor1 = 0;

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    std::vector<std::string> pool2 = track2_ids;
    seeded_shuffle(pool2, engine);
    if (quota1 > 0) {
      seeded_shuffle(pool1, engine);
      cursor1 = 0;
    }
    for (std::size_t cursor2 = 0; cursor2 + quota2 <= pool2.size(); cursor2 += quota2) {
      Batch batch;
      batch.epoch = epoch;
      batch.track2_ids.assign(pool2.begin() + static_cast<std::ptrdiff_t>(cursor2),
                              pool2.begin() + static_cast<std::ptrdiff_t>(cursor2 + quota2));
      for (std::size_t k = 0; k < quota1; ++k) {
        if (cursor1 == pool1.size()) {
          seeded_shuffle(pool1, engine);
          cursor1 = 0;
        }
        batch.track1_ids.push_back(pool1[cursor1++]);
      }
      plan.batches.push_back(std::move(batch));
    }
  }
  return plan;
}

BatchPlan mixture_batches(const Corpus& corpus, std::size_t batch_size, BatchRatio ratio,
                          std::uint64_t seed, std::size_t epochs) {
  std::vector<std::string> track2;
  std::vector<std::string> track1;
  for (const auto& clip : corpus.clips) {
    (clip.track == Track::II ? track2 : track1).push_back(clip.id);
  }
  return mixture_batches(std::move(track2), std::move(track1), batch_size, ratio, seed, epochs);
}

std::string serialize_batch_plan(const BatchPlan& plan) {
  nlohmann::ordered_json doc;
  doc["seed"] = plan.seed;
  doc["batch_size"] = plan.batch_size;
  doc["ratio"] = {plan.ratio.track2, plan.ratio.track1};
  doc["track2_per_batch"] = plan.track2_per_batch;
  doc["track1_per_batch"] = plan.track1_per_batch;
  auto& batches = doc["batches"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.batches.size(); ++i) {
    const auto& b = plan.batches[i];
    nlohmann::ordered_json jb;
    jb["index"] = i;
    jb["epoch"] = b.epoch;
    jb["composition"] = fmt::format("{} II + {} I", b.track2_ids.size(), b.track1_ids.size());
    jb["track2"] = b.track2_ids;
    jb["track1"] = b.track1_ids;
    batches.push_back(std::move(jb));
  }
  return doc.dump(2) + "\n";
}

}  // namespace igk
