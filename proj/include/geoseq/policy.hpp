#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geoseq/features.hpp"
#include "geoseq/geohash.hpp"

namespace geoseq {

inline constexpr int kVocabSize = 32;
inline constexpr int kStartSymbol = 32;  // previous-symbol slot used at position 0
inline constexpr int kPrevStates = 33;

using SymbolScores = std::array<double, kVocabSize>;

// Log-linear autoregressive distribution over geohash symbols:
//   logits(t, prev, feats) = prev_table[t][prev] + sum_f feat_table[f][t]
// The next-symbol distribution is the softmax of those 32 logits.
class PolicyModel {
 public:
  explicit PolicyModel(std::uint32_t buckets = kDefaultBuckets, int sequence_length = kDefaultGeohashLength);

  std::uint32_t buckets() const { return buckets_; }
  int sequence_length() const { return sequence_length_; }

  std::span<double, kVocabSize> prev_row(int position, int prev);
  std::span<const double, kVocabSize> prev_row(int position, int prev) const;
  std::span<double, kVocabSize> feat_row(std::uint32_t bucket, int position);
  std::span<const double, kVocabSize> feat_row(std::uint32_t bucket, int position) const;

  // Flat weight storage, for finite-difference checks and serialization.
  std::vector<double>& prev_weights() { return prev_; }
  const std::vector<double>& prev_weights() const { return prev_; }
  std::vector<double>& feat_weights() { return feat_; }
  const std::vector<double>& feat_weights() const { return feat_; }

  SymbolScores logits(const QueryFeatures& feats, int position, int prev) const;

  friend bool operator==(const PolicyModel&, const PolicyModel&) = default;

 private:
  std::uint32_t buckets_;
  int sequence_length_;
  std::vector<double> prev_;  // [position][prev][next]
  std::vector<double> feat_;  // [bucket][position][next]
};

// Numerically stable softmax / log-softmax of logits / temperature.
SymbolScores softmax(const SymbolScores& logits, double temperature = 1.0);
SymbolScores log_softmax(const SymbolScores& logits);

SymbolScores next_distribution(const PolicyModel& model, const QueryFeatures& feats, int position, int prev);

struct Rollout {
  std::vector<int> tokens;
  // Log-probabilities under the untempered sampling-time policy; these are
  // the pi_old terms of the clipped-surrogate ratio.
  std::vector<double> token_log_probs;
  double total_log_prob = 0.0;

  // Space-separated symbols, the format the policy "emits".
  std::string text() const;
};

// Draws sequence_length symbols from softmax(logits / temperature). Same seed, same rollout.
Rollout sample_rollout(const PolicyModel& model, const QueryFeatures& feats, double temperature, std::uint64_t seed);

// Argmax at every step; ties go to the lowest symbol index.
Rollout greedy_decode(const PolicyModel& model, const QueryFeatures& feats);

std::string tokens_to_string(std::span<const int> tokens);
Geohash tokens_to_geohash(std::span<const int> tokens);
// Throws InvalidArgument if the hash has the wrong length for the model.
std::vector<int> geohash_to_tokens(const Geohash& g);

}  // namespace geoseq
