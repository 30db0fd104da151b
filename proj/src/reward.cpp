#include "geoseq/reward.hpp"

#include <cmath>
#include <numeric>

#include "geoseq/errors.hpp"
#include "geoseq/geodesic.hpp"

namespace geoseq {

void RewardParams::check() const {
  if (!(threshold > 0.0)) throw InvalidArgument("reward threshold T must be positive");
  if (!(normalizer > 0.0)) throw InvalidArgument("reward normalizer S must be positive");
  if (!(invalid_penalty < reward_from_distance(kMaxGeodesicDistance, *this))) {
    throw InvalidArgument("invalid_penalty must be below the reward of the farthest valid prediction");
  }
}

double reward_from_distance(double distance_m, const RewardParams& params) {
  return (std::sqrt(params.threshold) - std::sqrt(distance_m)) / params.normalizer;
}

double reward(const LatLon& pred, const LatLon& truth, const RewardParams& params) {
  return reward_from_distance(inverse_distance(pred, truth), params);
}

double reward_of_output(std::string_view raw, const LatLon& truth, const RewardParams& params, int expected_length) {
  const auto hash = try_validate(raw, expected_length);
  if (!hash) return params.invalid_penalty;
  return reward(centroid(decode(*hash)), truth, params);
}

std::vector<double> group_advantages(std::span<const double> rewards, double eps) {
  if (rewards.size() < 2) throw InvalidArgument("group needs at least 2 rewards");
  const auto n = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / n;
  double sq = 0.0;
  for (double r : rewards) sq += (r - mean) * (r - mean);
  const double denom = std::sqrt(sq / n) + eps;
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / denom);
  return out;
}

void score_group(RolloutGroup& group, const LatLon& truth, const RewardParams& params, double eps) {
  group.rewards.clear();
  for (const auto& c : group.candidates) group.rewards.push_back(reward_of_output(c, truth, params));
  group.advantages = group_advantages(group.rewards, eps);
}

}  // namespace geoseq
