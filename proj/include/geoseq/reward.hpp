#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoseq/geohash.hpp"

namespace geoseq {

// Distance-deviation reward R = (sqrt(T) - sqrt(D)) / S, with D in meters.
struct RewardParams {
  double threshold = 100.0;   // T: reward crosses zero at D == T
  double normalizer = 1000.0; // S
  // Reward for outputs that fail geohash validation. Must stay below the
  // reward of any valid terrestrial guess.
  double invalid_penalty = -4.5;

  // Throws InvalidArgument when T <= 0, S <= 0 or the penalty could beat a
  // valid prediction at half the meridian circumference.
  void check() const;
};

// Longest geodesic on WGS-84 (half the meridian ellipse perimeter), meters.
inline constexpr double kMaxGeodesicDistance = 20003931.4586;

double reward_from_distance(double distance_m, const RewardParams& params = {});
double reward(const LatLon& pred, const LatLon& truth, const RewardParams& params = {});

// validate -> decode -> centroid -> reward; malformed output earns invalid_penalty.
double reward_of_output(std::string_view raw, const LatLon& truth, const RewardParams& params = {},
                        int expected_length = kDefaultGeohashLength);

// a_i = (r_i - mean) / (population_std + eps). Requires at least two rewards.
std::vector<double> group_advantages(std::span<const double> rewards, double eps = 1e-8);

struct RolloutGroup {
  std::string prompt_id;
  std::vector<std::string> candidates;
  std::vector<double> rewards;
  std::vector<double> advantages;

  std::size_t size() const { return candidates.size(); }
};

// Scores every candidate against truth and fills rewards/advantages.
void score_group(RolloutGroup& group, const LatLon& truth, const RewardParams& params = {}, double eps = 1e-8);

}  // namespace geoseq
