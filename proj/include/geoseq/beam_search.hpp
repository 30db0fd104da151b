#pragma once

#include <functional>
#include <span>
#include <vector>

#include "geoseq/geohash.hpp"
#include "geoseq/policy.hpp"

namespace geoseq {

struct BeamHypothesis {
  std::vector<int> tokens;
  double log_prob = 0.0;
};

// Fills `out` (size vocab) with next-symbol log-probabilities given a prefix.
using StepScorer = std::function<void(std::span<const int> prefix, std::span<double> out)>;

// Width-limited breadth search over a fixed number of steps. Each step keeps
// the `width` best extensions ranked by cumulative log-probability, ties broken
// by lexicographically smaller token sequence. Returns the best top_k complete
// sequences in that order. Requires 1 <= top_k <= width.
std::vector<BeamHypothesis> beam_search(int vocab, int length, int width, int top_k, const StepScorer& scorer);

struct ScoredGeohash {
  Geohash geohash;
  double log_prob;
};

std::vector<ScoredGeohash> beam_search(const PolicyModel& model, const QueryFeatures& feats, int width, int top_k);

}  // namespace geoseq
