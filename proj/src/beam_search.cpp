#include "geoseq/beam_search.hpp"

#include <algorithm>

#include "geoseq/errors.hpp"

namespace geoseq {

namespace {

bool ranks_before(const BeamHypothesis& a, const BeamHypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

}  // namespace

std::vector<BeamHypothesis> beam_search(int vocab, int length, int width, int top_k, const StepScorer& scorer) {
  if (vocab < 1 || length < 1) throw InvalidArgument("beam search needs a positive vocabulary and length");
  if (top_k < 1 || top_k > width) throw InvalidArgument("beam search requires 1 <= top_k <= width");

  std::vector<BeamHypothesis> beams(1);
  std::vector<double> step(static_cast<std::size_t>(vocab));
  for (int t = 0; t < length; ++t) {
    std::vector<BeamHypothesis> expanded;
    expanded.reserve(beams.size() * static_cast<std::size_t>(vocab));
    for (const auto& beam : beams) {
      scorer(beam.tokens, step);
      for (int k = 0; k < vocab; ++k) {
        BeamHypothesis next;
        next.tokens.reserve(static_cast<std::size_t>(t) + 1);
        next.tokens = beam.tokens;
        next.tokens.push_back(k);
        next.log_prob = beam.log_prob + step[static_cast<std::size_t>(k)];
        expanded.push_back(std::move(next));
      }
    }
    const auto keep = std::min(expanded.size(), static_cast<std::size_t>(width));
    std::partial_sort(expanded.begin(), expanded.begin() + static_cast<std::ptrdiff_t>(keep), expanded.end(),
                      ranks_before);
    expanded.resize(keep);
    beams = std::move(expanded);
  }
  beams.resize(std::min(beams.size(), static_cast<std::size_t>(top_k)));
  return beams;
}

std::vector<ScoredGeohash> beam_search(const PolicyModel& model, const QueryFeatures& feats, int width, int top_k) {
  const StepScorer scorer = [&](std::span<const int> prefix, std::span<double> out) {
    const int t = static_cast<int>(prefix.size());
    const int prev = prefix.empty() ? kStartSymbol : prefix.back();
    const SymbolScores lp = log_softmax(model.logits(feats, t, prev));
    std::copy(lp.begin(), lp.end(), out.begin());
  };
  std::vector<ScoredGeohash> out;
  for (auto& h : beam_search(kVocabSize, model.sequence_length(), width, top_k, scorer)) {
    out.push_back({tokens_to_geohash(h.tokens), h.log_prob});
  }
  return out;
}

}  // namespace geoseq
