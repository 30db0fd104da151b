#include "geoseq/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "geoseq/errors.hpp"

namespace geoseq {

namespace {

double uniform01(std::mt19937_64& rng) {
  // 53 random mantissa bits; identical on every standard library.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int argmax(const SymbolScores& v) {
  int best = 0;
  for (int k = 1; k < kVocabSize; ++k) {
    if (v[static_cast<std::size_t>(k)] > v[static_cast<std::size_t>(best)]) best = k;
  }
  return best;
}

}  // namespace

PolicyModel::PolicyModel(std::uint32_t buckets, int sequence_length)
    : buckets_(buckets), sequence_length_(sequence_length) {
  if (buckets == 0) throw InvalidArgument("bucket count must be positive");
  if (sequence_length < 1) throw InvalidArgument("sequence length must be positive");
  const auto len = static_cast<std::size_t>(sequence_length);
  prev_.assign(len * kPrevStates * kVocabSize, 0.0);
  feat_.assign(static_cast<std::size_t>(buckets) * len * kVocabSize, 0.0);
}

std::span<double, kVocabSize> PolicyModel::prev_row(int position, int prev) {
  const auto off = (static_cast<std::size_t>(position) * kPrevStates + static_cast<std::size_t>(prev)) * kVocabSize;
  return std::span<double, kVocabSize>(prev_.data() + off, kVocabSize);
}

std::span<const double, kVocabSize> PolicyModel::prev_row(int position, int prev) const {
  const auto off = (static_cast<std::size_t>(position) * kPrevStates + static_cast<std::size_t>(prev)) * kVocabSize;
  return std::span<const double, kVocabSize>(prev_.data() + off, kVocabSize);
}

std::span<double, kVocabSize> PolicyModel::feat_row(std::uint32_t bucket, int position) {
  const auto off = (static_cast<std::size_t>(bucket) * static_cast<std::size_t>(sequence_length_) +
                    static_cast<std::size_t>(position)) *
                   kVocabSize;
  return std::span<double, kVocabSize>(feat_.data() + off, kVocabSize);
}

std::span<const double, kVocabSize> PolicyModel::feat_row(std::uint32_t bucket, int position) const {
  const auto off = (static_cast<std::size_t>(bucket) * static_cast<std::size_t>(sequence_length_) +
                    static_cast<std::size_t>(position)) *
                   kVocabSize;
  return std::span<const double, kVocabSize>(feat_.data() + off, kVocabSize);
}

SymbolScores PolicyModel::logits(const QueryFeatures& feats, int position, int prev) const {
  if (position < 0 || position >= sequence_length_) throw InvalidArgument("position out of range");
  if (prev < 0 || prev >= kPrevStates) throw InvalidArgument("previous symbol out of range");
  if (feats.buckets != buckets_) throw InvalidArgument("feature bucket count does not match model");
  SymbolScores z{};
  const auto base = prev_row(position, prev);
  std::copy(base.begin(), base.end(), z.begin());
  for (std::uint32_t f : feats.ids) {
    const auto row = feat_row(f, position);
    for (int k = 0; k < kVocabSize; ++k) z[static_cast<std::size_t>(k)] += row[static_cast<std::size_t>(k)];
  }
  return z;
}

SymbolScores softmax(const SymbolScores& logits, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  SymbolScores p{};
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    p[k] = std::exp((logits[k] - top) / temperature);
    sum += p[k];
  }
  for (double& v : p) v /= sum;
  return p;
}

SymbolScores log_softmax(const SymbolScores& logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double log_norm = top + std::log(sum);
  SymbolScores out{};
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = logits[k] - log_norm;
  return out;
}

SymbolScores next_distribution(const PolicyModel& model, const QueryFeatures& feats, int position, int prev) {
  return softmax(model.logits(feats, position, prev));
}

std::string Rollout::text() const {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.push_back(geohash_symbol(tokens[i]));
  }
  return out;
}

Rollout sample_rollout(const PolicyModel& model, const QueryFeatures& feats, double temperature, std::uint64_t seed) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  std::mt19937_64 rng(seed);
  Rollout out;
  int prev = kStartSymbol;
  for (int t = 0; t < model.sequence_length(); ++t) {
    const SymbolScores z = model.logits(feats, t, prev);
    const SymbolScores p = softmax(z, temperature);
    const double u = uniform01(rng);
    double cum = 0.0;
    int pick = -1;
    for (int k = 0; k < kVocabSize; ++k) {
      cum += p[static_cast<std::size_t>(k)];
      if (u < cum) {
        pick = k;
        break;
      }
    }
    if (pick < 0) {
      // u landed in the rounding slack above the cumulative sum.
      for (int k = kVocabSize - 1; k >= 0; --k) {
        if (p[static_cast<std::size_t>(k)] > 0.0) {
          pick = k;
          break;
        }
      }
    }
    const double lp = log_softmax(z)[static_cast<std::size_t>(pick)];
    out.tokens.push_back(pick);
    out.token_log_probs.push_back(lp);
    out.total_log_prob += lp;
    prev = pick;
  }
  return out;
}

Rollout greedy_decode(const PolicyModel& model, const QueryFeatures& feats) {
  Rollout out;
  int prev = kStartSymbol;
  for (int t = 0; t < model.sequence_length(); ++t) {
    const SymbolScores lp = log_softmax(model.logits(feats, t, prev));
    const int pick = argmax(lp);
    out.tokens.push_back(pick);
    out.token_log_probs.push_back(lp[static_cast<std::size_t>(pick)]);
    out.total_log_prob += lp[static_cast<std::size_t>(pick)];
    prev = pick;
  }
  return out;
}

std::string tokens_to_string(std::span<const int> tokens) {
  std::string s;
  s.reserve(tokens.size());
  for (int t : tokens) {
    if (t < 0 || t >= kVocabSize) throw InvalidArgument("token out of range");
    s.push_back(geohash_symbol(t));
  }
  return s;
}

Geohash tokens_to_geohash(std::span<const int> tokens) { return Geohash::parse(tokens_to_string(tokens)); }

std::vector<int> geohash_to_tokens(const Geohash& g) {
  std::vector<int> out;
  out.reserve(g.text().size());
  for (char c : g.text()) out.push_back(geohash_symbol_index(c));
  return out;
}

}  // namespace geoseq
