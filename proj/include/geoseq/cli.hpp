#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoseq/pipeline.hpp"
#include "geoseq/reward.hpp"
#include "geoseq/training.hpp"

namespace geoseq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;

// Everything a command was run with. Written as "config_echo" into each
// artifact the command produces.
struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  int geohash_length = kDefaultGeohashLength;
  RewardParams reward;
  GrpoConfig grpo;
  MleOptions sft;
  std::optional<double> sft_until_acc;
  std::uint32_t buckets = kDefaultBuckets;
  DatasetConfig dataset;
  int synth_pois = 256;
  BBox synth_bbox{39.95, 40.00, 116.28, 116.35};
  int beam_width = 0;
  int top_k = 1;
  std::string baseline;
  std::optional<double> invalid_distance_m;
  std::map<std::string, std::vector<std::string>> paths;
};

nlohmann::json to_json(const RunConfig& config);

// Parses "lat_min,lon_min,lat_max,lon_max". Throws InvalidArgument.
BBox parse_bbox(const std::string& text);

// args excludes the program name. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geoseq
