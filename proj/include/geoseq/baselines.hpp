#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "geoseq/dataset.hpp"

namespace geoseq {

// Levenshtein distance over bytes (unit insert/delete/substitute).
std::size_t edit_distance(std::string_view a, std::string_view b);

// L2-normalized character-bigram count vector, sparse and sorted by bigram.
using BigramVector = std::vector<std::pair<std::uint16_t, double>>;
BigramVector bigram_vector(std::string_view text);
double cosine(const BigramVector& a, const BigramVector& b);

// Simplified stand-ins for the retrieval pipelines: raw-string edit distance
// in place of NER + edit distance, and bigram cosine in place of dense
// embeddings (+ edit-distance rerank in place of a cross-encoder). Every POI
// contributes two entries, its name and its address; matching is case-insensitive.
class RetrievalIndex {
 public:
  explicit RetrievalIndex(std::span<const Poi> pois);

  // Entry with minimum edit distance; ties to the lowest POI id.
  LatLon levenshtein(std::string_view query) const;

  // Best entry by cosine (ties to lowest id). With rerank and top_k > 1 the
  // top_k entries are reordered by ascending edit distance (ties to lowest id).
  LatLon vector(std::string_view query, int top_k, bool rerank) const;

  struct Entry {
    std::uint64_t poi_id;
    std::string text;  // lowercased
    LatLon location;
    BigramVector bigrams;
  };
  const std::vector<Entry>& entries() const { return entries_; }

 private:
  std::vector<Entry> entries_;
};

LatLon levenshtein_baseline(std::string_view query, std::span<const Poi> pois);
LatLon vector_baseline(std::string_view query, std::span<const Poi> pois, int top_k, bool rerank);

std::string ascii_lower(std::string_view text);

}  // namespace geoseq
