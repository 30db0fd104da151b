#include <cstdio>

#include "geoseq/cli.hpp"
#include "geoseq/errors.hpp"

namespace geoseq {

using nlohmann::json;

json to_json(const RunConfig& c) {
  const DatasetConfig& d = c.dataset;
  json j;
  j["command"] = c.command;
  j["seed"] = c.seed;
  j["geohash_length"] = c.geohash_length;
  j["reward"] = {{"threshold_m", c.reward.threshold},
                 {"normalizer", c.reward.normalizer},
                 {"invalid_penalty", c.reward.invalid_penalty}};
  j["grpo"] = {{"group_size", c.grpo.group_size},
               {"epochs", c.grpo.epochs},
               {"batch_size", c.grpo.batch_size},
               {"steps_per_batch", c.grpo.steps_per_batch},
               {"temperature", c.grpo.temperature},
               {"clip_eps", c.grpo.step.clip_eps},
               {"kl_coeff", c.grpo.step.kl_coeff},
               {"lr", c.grpo.step.learning_rate}};
  j["sft"] = {{"epochs", c.sft.epochs},
              {"lr", c.sft.learning_rate},
              {"shuffle", c.sft.shuffle},
              {"until_acc", c.sft_until_acc ? json(*c.sft_until_acc) : json(nullptr)}};
  j["model"] = {{"buckets", c.buckets}};
  j["dataset"] = {{"synth_pois", c.synth_pois},
                  {"synth_bbox", {c.synth_bbox.lat_min, c.synth_bbox.lon_min, c.synth_bbox.lat_max,
                                  c.synth_bbox.lon_max}},
                  {"sources",
                   {{"name", d.sources.name},
                    {"address", d.sources.address},
                    {"search_query", d.sources.search_query},
                    {"noise_prob", d.sources.noise_prob}}},
                  {"output_format", d.sources.output_format == OutputFormat::geohash ? "geohash" : "coordinates"},
                  {"directions", to_string(d.offsets.directions)},
                  {"test_directions", to_string(d.test_directions)},
                  {"offset_min_m", d.offsets.min_distance_m},
                  {"offset_max_m", d.offsets.max_distance_m},
                  {"train_fraction", d.split.train_fraction},
                  {"coverage_radius_m", d.split.coverage_radius_m},
                  {"cot", d.cot}};
  j["decode"] = {{"beam_width", c.beam_width}, {"top_k", c.top_k}};
  j["eval"] = {{"baseline", c.baseline},
               {"invalid_distance_m", c.invalid_distance_m ? json(*c.invalid_distance_m) : json(nullptr)}};
  j["paths"] = c.paths;
  return j;
}

BBox parse_bbox(const std::string& text) {
  BBox b;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf , %lf , %lf , %lf %c", &b.lat_min, &b.lon_min, &b.lat_max, &b.lon_max,
                  &tail) != 4) {
    throw InvalidArgument("bbox must be 'lat_min,lon_min,lat_max,lon_max', got '" + text + "'");
  }
  make_latlon(b.lat_min, b.lon_min);
  make_latlon(b.lat_max, b.lon_max);
  if (!(b.lat_min < b.lat_max) || !(b.lon_min < b.lon_max)) {
    throw InvalidArgument("bbox minimums must be below maximums: '" + text + "'");
  }
  return b;
}

}  // namespace geoseq
