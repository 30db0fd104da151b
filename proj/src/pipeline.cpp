#include "geoseq/pipeline.hpp"

#include "geoseq/errors.hpp"
#include "geoseq/seeding.hpp"

namespace geoseq {

DatasetBundle build_dataset(std::span<const Poi> pois, const DatasetConfig& config) {
  std::vector<Sample> base = build_base(pois, config.sources);
  if (config.cot) {
    for (Sample& s : base) s.thinking = neighbor_text(s, pois);
  }
  auto [train, test] = split_dataset(std::move(base), config.split);

  DatasetBundle out;
  OffsetOptions train_offsets = config.offsets;
  train_offsets.seed = derive_seed(config.offsets.seed, "offset-train");
  OffsetOptions test_offsets = config.offsets;
  test_offsets.seed = derive_seed(config.offsets.seed, "offset-test");
  test_offsets.directions = config.test_directions;

  out.offset_train = build_anchor_offset(train, train_offsets);
  out.offset_test = build_anchor_offset(test, test_offsets);
  for (Sample& s : out.offset_train) s.split = Split::train;
  for (Sample& s : out.offset_test) s.split = Split::test;

  if (config.cot) {
    for (const Sample& s : train) out.cot_train.push_back(format_cot(s, s.thinking.value_or("")));
  }
  out.base_train = std::move(train);
  out.base_test = std::move(test);
  return out;
}

std::vector<MleExample> mle_examples(const PolicyModel& model, std::span<const Sample> samples) {
  std::vector<MleExample> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) {
    if (s.target_geohash.length() != model.sequence_length()) {
      throw InvalidArgument("sample " + s.id + " target length differs from model sequence length");
    }
    out.push_back({featurize(s.input, model.buckets()), geohash_to_tokens(s.target_geohash)});
  }
  return out;
}

std::vector<GrpoPrompt> grpo_prompts(const PolicyModel& model, std::span<const Sample> samples) {
  std::vector<GrpoPrompt> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back({s.id, featurize(s.input, model.buckets()), s.target});
  return out;
}

}  // namespace geoseq
