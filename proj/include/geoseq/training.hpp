#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geoseq/features.hpp"
#include "geoseq/policy.hpp"
#include "geoseq/reward.hpp"

namespace geoseq {

// Gradient with the model's shape: dense over prev_table, sparse over the
// (bucket, position) rows of feat_table that were touched.
class ParamGradient {
 public:
  explicit ParamGradient(const PolicyModel& model);

  // Chains d(objective)/d(logits) at one (position, prev, feats) step into the weights.
  void add_logit_gradient(const QueryFeatures& feats, int position, int prev, const SymbolScores& dlogits);

  double prev_component(int position, int prev, int next) const;
  double feat_component(std::uint32_t bucket, int position, int next) const;

  // model += step * gradient
  void apply(PolicyModel& model, double step) const;

 private:
  int sequence_length_;
  std::vector<double> prev_;
  std::map<std::pair<std::uint32_t, int>, SymbolScores> feat_;
};

struct MleExample {
  QueryFeatures feats;
  std::vector<int> tokens;
};

// Throws InvalidArgument when a target length differs from the model's sequence length.
std::vector<MleExample> make_mle_examples(const PolicyModel& model,
                                          std::span<const std::pair<std::string, Geohash>> pairs);

double sequence_log_likelihood(const PolicyModel& model, const QueryFeatures& feats, std::span<const int> tokens);
ParamGradient log_likelihood_gradient(const PolicyModel& model, const QueryFeatures& feats,
                                      std::span<const int> tokens);

struct MleOptions {
  int epochs = 10;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  bool shuffle = true;
};

struct MleReport {
  // Mean per-sequence log-likelihood seen during each epoch, measured before
  // each example's update.
  std::vector<double> epoch_mean_log_likelihood;
};

// Per-example stochastic gradient ascent on the sequence log-likelihood.
MleReport mle_train(PolicyModel& model, std::span<const MleExample> examples, const MleOptions& options,
                    const std::function<void(int epoch, double mean_ll)>& on_epoch = {});

// One prompt's rollouts and their group-normalized advantages.
struct GrpoBatchItem {
  QueryFeatures feats;
  std::vector<Rollout> rollouts;
  std::vector<double> advantages;
};

struct GrpoStepOptions {
  double clip_eps = 0.2;
  double learning_rate = 2.0;
  double kl_coeff = 0.0;
};

// Mean over all rollout tokens of min(ratio * A, clip(ratio, 1-eps, 1+eps) * A)
// minus kl_coeff times the mean exact KL(old || current) of the next-symbol
// distributions. ratio = pi_current(token) / pi_old(token), with pi_old taken
// from the log-probs recorded at sampling time.
double grpo_objective(const PolicyModel& current, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
                      double clip_eps, double kl_coeff);
ParamGradient grpo_gradient(const PolicyModel& current, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
                            double clip_eps, double kl_coeff);

// One ascent step on grpo_objective. Throws InvalidArgument on ragged groups.
void grpo_step(PolicyModel& model, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
               const GrpoStepOptions& options);

struct GrpoPrompt {
  std::string id;
  QueryFeatures feats;
  LatLon truth;
};

struct GrpoConfig {
  int group_size = 8;
  int epochs = 3;
  int batch_size = 8;  // prompts per rollout batch; the old-policy snapshot is refreshed per batch
  int steps_per_batch = 1;
  double temperature = 1.0;
  GrpoStepOptions step;
  std::uint64_t seed = 0;
};

struct GrpoEpochStats {
  int epoch = 0;
  double mean_reward = 0.0;
  double mean_best_reward = 0.0;  // mean over prompts of the group maximum
  long invalid_outputs = 0;
  long rollouts = 0;
};

// rollout -> reward -> advantage -> grpo_step, for config.epochs passes over the prompts.
std::vector<GrpoEpochStats> grpo_train(PolicyModel& model, std::span<const GrpoPrompt> prompts,
                                       const GrpoConfig& config, const RewardParams& reward_params,
                                       const std::function<void(const GrpoEpochStats&)>& on_epoch = {});

}  // namespace geoseq
