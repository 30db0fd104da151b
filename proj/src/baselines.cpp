#include "geoseq/baselines.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "geoseq/errors.hpp"

namespace geoseq {

std::string ascii_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80) c = static_cast<char>(std::tolower(u));
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + cost});
      diag = up;
    }
  }
  return row[b.size()];
}

BigramVector bigram_vector(std::string_view text) {
  std::map<std::uint16_t, double> counts;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    const auto key = static_cast<std::uint16_t>((static_cast<unsigned char>(text[i]) << 8) |
                                                static_cast<unsigned char>(text[i + 1]));
    counts[key] += 1.0;
  }
  double norm = 0.0;
  for (const auto& [k, v] : counts) norm += v * v;
  norm = std::sqrt(norm);
  BigramVector out(counts.begin(), counts.end());
  for (auto& [k, v] : out) v /= norm;
  return out;
}

double cosine(const BigramVector& a, const BigramVector& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  double dot = 0.0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      dot += a[i++].second * b[j++].second;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot;
}

RetrievalIndex::RetrievalIndex(std::span<const Poi> pois) {
  if (pois.empty()) throw InvalidArgument("retrieval database is empty");
  for (const Poi& p : pois) {
    for (const std::string* text : {&p.name, &p.address}) {
      Entry e{p.id, ascii_lower(*text), p.location, {}};
      e.bigrams = bigram_vector(e.text);
      entries_.push_back(std::move(e));
    }
  }
  std::stable_sort(entries_.begin(), entries_.end(),
                   [](const Entry& a, const Entry& b) { return a.poi_id < b.poi_id; });
}

LatLon RetrievalIndex::levenshtein(std::string_view query) const {
  const std::string q = ascii_lower(query);
  const Entry* best = nullptr;
  std::size_t best_d = 0;
  // Entries are ordered by id, so strict < keeps the lowest id on ties.
  for (const Entry& e : entries_) {
    const std::size_t d = edit_distance(q, e.text);
    if (best == nullptr || d < best_d) {
      best = &e;
      best_d = d;
    }
  }
  return best->location;
}

LatLon RetrievalIndex::vector(std::string_view query, int top_k, bool rerank) const {
  if (top_k < 1) throw InvalidArgument("top_k must be at least 1");
  const std::string q = ascii_lower(query);
  const BigramVector qv = bigram_vector(q);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) scored.emplace_back(cosine(qv, entries_[i].bigrams), i);
  // Index order equals id order, so the index settles cosine ties.
  const auto k = std::min(scored.size(), static_cast<std::size_t>(top_k));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  if (!rerank || k == 1) return entries_[scored.front().second].location;

  std::vector<std::pair<std::size_t, std::size_t>> reranked;  // (edit distance, entry index)
  for (std::size_t i = 0; i < k; ++i) {
    reranked.emplace_back(edit_distance(q, entries_[scored[i].second].text), scored[i].second);
  }
  std::sort(reranked.begin(), reranked.end());
  return entries_[reranked.front().second].location;
}

LatLon levenshtein_baseline(std::string_view query, std::span<const Poi> pois) {
  return RetrievalIndex(pois).levenshtein(query);
}

LatLon vector_baseline(std::string_view query, std::span<const Poi> pois, int top_k, bool rerank) {
  return RetrievalIndex(pois).vector(query, top_k, rerank);
}

}  // namespace geoseq
