#pragma once

#include <span>
#include <vector>

#include "geoseq/dataset.hpp"
#include "geoseq/training.hpp"

namespace geoseq {

struct DatasetConfig {
  BaseSources sources;
  OffsetOptions offsets;
  // Directions for the anchor-offset test split; set to intercardinal for
  // the unseen-direction generalization split.
  DirectionSet test_directions = DirectionSet::cardinal;
  SplitOptions split;
  bool cot = false;
};

struct DatasetBundle {
  std::vector<Sample> base_train;
  std::vector<Sample> base_test;
  std::vector<Sample> offset_train;
  std::vector<Sample> offset_test;
  std::vector<CotRecord> cot_train;  // empty unless cot
};

// Base samples are split by location first; each anchor-offset sample then
// inherits the split of the base sample it was derived from.
DatasetBundle build_dataset(std::span<const Poi> pois, const DatasetConfig& config);

std::vector<MleExample> mle_examples(const PolicyModel& model, std::span<const Sample> samples);
std::vector<GrpoPrompt> grpo_prompts(const PolicyModel& model, std::span<const Sample> samples);

}  // namespace geoseq
