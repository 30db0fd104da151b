#include "geoseq/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "geoseq/errors.hpp"
#include "geoseq/seeding.hpp"

namespace geoseq {

ParamGradient::ParamGradient(const PolicyModel& model)
    : sequence_length_(model.sequence_length()), prev_(model.prev_weights().size(), 0.0) {}

void ParamGradient::add_logit_gradient(const QueryFeatures& feats, int position, int prev,
                                       const SymbolScores& dlogits) {
  const auto off =
      (static_cast<std::size_t>(position) * kPrevStates + static_cast<std::size_t>(prev)) * kVocabSize;
  for (std::size_t k = 0; k < kVocabSize; ++k) prev_[off + k] += dlogits[k];
  for (std::uint32_t f : feats.ids) {
    auto [it, inserted] = feat_.try_emplace({f, position});
    if (inserted) it->second.fill(0.0);
    for (std::size_t k = 0; k < kVocabSize; ++k) it->second[k] += dlogits[k];
  }
}

double ParamGradient::prev_component(int position, int prev, int next) const {
  return prev_[(static_cast<std::size_t>(position) * kPrevStates + static_cast<std::size_t>(prev)) * kVocabSize +
               static_cast<std::size_t>(next)];
}

double ParamGradient::feat_component(std::uint32_t bucket, int position, int next) const {
  const auto it = feat_.find({bucket, position});
  return it == feat_.end() ? 0.0 : it->second[static_cast<std::size_t>(next)];
}

void ParamGradient::apply(PolicyModel& model, double step) const {
  auto& w = model.prev_weights();
  for (std::size_t i = 0; i < prev_.size(); ++i) w[i] += step * prev_[i];
  for (const auto& [key, g] : feat_) {
    auto row = model.feat_row(key.first, key.second);
    for (std::size_t k = 0; k < kVocabSize; ++k) row[k] += step * g[k];
  }
}

std::vector<MleExample> make_mle_examples(const PolicyModel& model,
                                          std::span<const std::pair<std::string, Geohash>> pairs) {
  std::vector<MleExample> out;
  out.reserve(pairs.size());
  for (const auto& [query, target] : pairs) {
    if (target.length() != model.sequence_length()) {
      throw InvalidArgument("target '" + target.text() + "' length differs from model sequence length " +
                            std::to_string(model.sequence_length()));
    }
    out.push_back({featurize(query, model.buckets()), geohash_to_tokens(target)});
  }
  return out;
}

double sequence_log_likelihood(const PolicyModel& model, const QueryFeatures& feats, std::span<const int> tokens) {
  if (static_cast<int>(tokens.size()) != model.sequence_length()) {
    throw InvalidArgument("token sequence length differs from model sequence length");
  }
  double ll = 0.0;
  int prev = kStartSymbol;
  for (int t = 0; t < model.sequence_length(); ++t) {
    const int y = tokens[static_cast<std::size_t>(t)];
    ll += log_softmax(model.logits(feats, t, prev))[static_cast<std::size_t>(y)];
    prev = y;
  }
  return ll;
}

ParamGradient log_likelihood_gradient(const PolicyModel& model, const QueryFeatures& feats,
                                      std::span<const int> tokens) {
  if (static_cast<int>(tokens.size()) != model.sequence_length()) {
    throw InvalidArgument("token sequence length differs from model sequence length");
  }
  ParamGradient grad(model);
  int prev = kStartSymbol;
  for (int t = 0; t < model.sequence_length(); ++t) {
    const int y = tokens[static_cast<std::size_t>(t)];
    SymbolScores g = next_distribution(model, feats, t, prev);
    for (double& v : g) v = -v;
    g[static_cast<std::size_t>(y)] += 1.0;
    grad.add_logit_gradient(feats, t, prev, g);
    prev = y;
  }
  return grad;
}

MleReport mle_train(PolicyModel& model, std::span<const MleExample> examples, const MleOptions& options,
                    const std::function<void(int, double)>& on_epoch) {
  for (const auto& ex : examples) {
    if (static_cast<int>(ex.tokens.size()) != model.sequence_length()) {
      throw InvalidArgument("training target length differs from model sequence length");
    }
  }
  MleReport report;
  if (examples.empty()) return report;

  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(options.seed, "mle-shuffle"));

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    if (options.shuffle) std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t idx : order) {
      const auto& ex = examples[idx];
      // Each position owns disjoint rows, so updating position by position
      // is the same as a full per-example gradient step.
      int prev = kStartSymbol;
      for (int t = 0; t < model.sequence_length(); ++t) {
        const int y = ex.tokens[static_cast<std::size_t>(t)];
        const SymbolScores z = model.logits(ex.feats, t, prev);
        const SymbolScores lp = log_softmax(z);
        total += lp[static_cast<std::size_t>(y)];
        SymbolScores g{};
        for (std::size_t k = 0; k < kVocabSize; ++k) g[k] = -std::exp(lp[k]);
        g[static_cast<std::size_t>(y)] += 1.0;
        auto base = model.prev_row(t, prev);
        for (std::size_t k = 0; k < kVocabSize; ++k) base[k] += options.learning_rate * g[k];
        for (std::uint32_t f : ex.feats.ids) {
          auto row = model.feat_row(f, t);
          for (std::size_t k = 0; k < kVocabSize; ++k) row[k] += options.learning_rate * g[k];
        }
        prev = y;
      }
    }
    const double mean = total / static_cast<double>(examples.size());
    report.epoch_mean_log_likelihood.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return report;
}

namespace {

void check_batch(const PolicyModel& model, std::span<const GrpoBatchItem> batch) {
  if (batch.empty()) throw InvalidArgument("GRPO batch is empty");
  const std::size_t group = batch.front().rollouts.size();
  if (group < 2) throw InvalidArgument("GRPO group size must be at least 2");
  for (const auto& item : batch) {
    if (item.rollouts.size() != group || item.advantages.size() != group) {
      throw InvalidArgument("GRPO groups have mismatched sizes");
    }
    for (const auto& r : item.rollouts) {
      if (static_cast<int>(r.tokens.size()) != model.sequence_length() ||
          r.token_log_probs.size() != r.tokens.size()) {
        throw InvalidArgument("rollout length differs from model sequence length");
      }
    }
  }
}

std::size_t token_count(std::span<const GrpoBatchItem> batch) {
  std::size_t n = 0;
  for (const auto& item : batch) {
    for (const auto& r : item.rollouts) n += r.tokens.size();
  }
  return n;
}

double clipped(double ratio, double eps) { return std::clamp(ratio, 1.0 - eps, 1.0 + eps); }

// True when the unclipped term is the one selected by min(), i.e. the term
// whose gradient flows. At the kink both sides are equal; the unclipped side wins.
bool unclipped_active(double ratio, double advantage, double eps) {
  return advantage >= 0.0 ? ratio <= 1.0 + eps : ratio >= 1.0 - eps;
}

double kl(const SymbolScores& old_lp, const SymbolScores& new_lp) {
  double sum = 0.0;
  for (std::size_t k = 0; k < kVocabSize; ++k) sum += std::exp(old_lp[k]) * (old_lp[k] - new_lp[k]);
  return sum;
}

}  // namespace

double grpo_objective(const PolicyModel& current, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
                      double clip_eps, double kl_coeff) {
  check_batch(current, batch);
  double total = 0.0;
  for (const auto& item : batch) {
    for (std::size_t i = 0; i < item.rollouts.size(); ++i) {
      const Rollout& r = item.rollouts[i];
      const double adv = item.advantages[i];
      int prev = kStartSymbol;
      for (int t = 0; t < current.sequence_length(); ++t) {
        const auto y = static_cast<std::size_t>(r.tokens[static_cast<std::size_t>(t)]);
        const SymbolScores lp = log_softmax(current.logits(item.feats, t, prev));
        const double ratio = std::exp(lp[y] - r.token_log_probs[static_cast<std::size_t>(t)]);
        total += std::min(ratio * adv, clipped(ratio, clip_eps) * adv);
        if (kl_coeff != 0.0) {
          total -= kl_coeff * kl(log_softmax(old.logits(item.feats, t, prev)), lp);
        }
        prev = r.tokens[static_cast<std::size_t>(t)];
      }
    }
  }
  return total / static_cast<double>(token_count(batch));
}

ParamGradient grpo_gradient(const PolicyModel& current, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
                            double clip_eps, double kl_coeff) {
  check_batch(current, batch);
  const double inv_n = 1.0 / static_cast<double>(token_count(batch));
  ParamGradient grad(current);
  for (const auto& item : batch) {
    for (std::size_t i = 0; i < item.rollouts.size(); ++i) {
      const Rollout& r = item.rollouts[i];
      const double adv = item.advantages[i];
      int prev = kStartSymbol;
      for (int t = 0; t < current.sequence_length(); ++t) {
        const auto y = static_cast<std::size_t>(r.tokens[static_cast<std::size_t>(t)]);
        const SymbolScores lp = log_softmax(current.logits(item.feats, t, prev));
        const double ratio = std::exp(lp[y] - r.token_log_probs[static_cast<std::size_t>(t)]);
        SymbolScores g{};
        if (adv != 0.0 && unclipped_active(ratio, adv, clip_eps)) {
          // d(ratio * A)/dz = A * ratio * (onehot(y) - p)
          for (std::size_t k = 0; k < kVocabSize; ++k) g[k] = -adv * ratio * std::exp(lp[k]);
          g[y] += adv * ratio;
        }
        if (kl_coeff != 0.0) {
          // d KL(old || current)/dz = p_current - p_old
          const SymbolScores old_lp = log_softmax(old.logits(item.feats, t, prev));
          for (std::size_t k = 0; k < kVocabSize; ++k) g[k] -= kl_coeff * (std::exp(lp[k]) - std::exp(old_lp[k]));
        }
        for (double& v : g) v *= inv_n;
        grad.add_logit_gradient(item.feats, t, prev, g);
        prev = r.tokens[static_cast<std::size_t>(t)];
      }
    }
  }
  return grad;
}

void grpo_step(PolicyModel& model, const PolicyModel& old, std::span<const GrpoBatchItem> batch,
               const GrpoStepOptions& options) {
  const ParamGradient grad = grpo_gradient(model, old, batch, options.clip_eps, options.kl_coeff);
  grad.apply(model, options.learning_rate);
}

std::vector<GrpoEpochStats> grpo_train(PolicyModel& model, std::span<const GrpoPrompt> prompts,
                                       const GrpoConfig& config, const RewardParams& reward_params,
                                       const std::function<void(const GrpoEpochStats&)>& on_epoch) {
  if (config.group_size < 2) throw InvalidArgument("GRPO group size must be at least 2");
  if (config.batch_size < 1) throw InvalidArgument("GRPO batch size must be positive");
  if (config.steps_per_batch < 1) throw InvalidArgument("GRPO steps per batch must be positive");
  if (!(config.step.clip_eps >= 0.0)) throw InvalidArgument("clip epsilon must be non-negative");
  reward_params.check();

  std::vector<GrpoEpochStats> history;
  std::vector<std::size_t> order(prompts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_rng(derive_seed(config.seed, "grpo-shuffle"));
  const std::uint64_t rollout_seed = derive_seed(config.seed, "rollout");

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    GrpoEpochStats stats;
    stats.epoch = epoch;
    double reward_sum = 0.0;
    double best_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const PolicyModel old = model;
      std::vector<GrpoBatchItem> batch;
      batch.reserve(stop - start);
      for (std::size_t b = start; b < stop; ++b) {
        const std::size_t p = order[b];
        const GrpoPrompt& prompt = prompts[p];
        // Seeded per (epoch, prompt, member) so rollouts do not depend on batch order.
        const std::uint64_t prompt_seed = derive_seed(rollout_seed, static_cast<std::uint64_t>(epoch), p);
        GrpoBatchItem item;
        item.feats = prompt.feats;
        RolloutGroup group;
        group.prompt_id = prompt.id;
        for (int g = 0; g < config.group_size; ++g) {
          Rollout r = sample_rollout(old, prompt.feats, config.temperature,
                                     derive_seed(prompt_seed, static_cast<std::uint64_t>(g), 0));
          group.candidates.push_back(r.text());
          item.rollouts.push_back(std::move(r));
        }
        score_group(group, prompt.truth, reward_params);
        for (double r : group.rewards) {
          reward_sum += r;
          if (r == reward_params.invalid_penalty) ++stats.invalid_outputs;
        }
        best_sum += *std::max_element(group.rewards.begin(), group.rewards.end());
        stats.rollouts += config.group_size;
        item.advantages = std::move(group.advantages);
        batch.push_back(std::move(item));
      }
      for (int s = 0; s < config.steps_per_batch; ++s) grpo_step(model, old, batch, config.step);
    }
    if (!prompts.empty()) {
      stats.mean_reward = reward_sum / static_cast<double>(stats.rollouts);
      stats.mean_best_reward = best_sum / static_cast<double>(prompts.size());
    }
    history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return history;
}

}  // namespace geoseq
