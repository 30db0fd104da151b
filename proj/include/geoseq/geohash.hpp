#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace geoseq {

// Geodetic coordinate on WGS-84, degrees. Longitude is kept in [-180, 180).
struct LatLon {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const LatLon&, const LatLon&) = default;
};

// Validates lat in [-90, 90] and lon in [-180, 180]; lon == 180 becomes -180.
// Throws InvalidArgument otherwise.
LatLon make_latlon(double lat, double lon);

struct BBox {
  double lat_min = 0.0;
  double lat_max = 0.0;
  double lon_min = 0.0;
  double lon_max = 0.0;

  // Half-open on the upper edges, except that the northernmost cell row
  // also owns lat == 90.
  bool contains(const LatLon& p) const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

inline constexpr std::string_view kGeohashAlphabet = "0123456789bcdefghjkmnpqrstuvwxyz";
inline constexpr int kMaxGeohashLength = 12;
inline constexpr int kDefaultGeohashLength = 9;

// Index of c in the alphabet, or -1.
int geohash_symbol_index(char c);
inline char geohash_symbol(int index) { return kGeohashAlphabet[static_cast<std::size_t>(index)]; }

class Geohash {
 public:
  // Strict parse: 1..12 alphabet characters, nothing else. Throws InvalidGeohash.
  static Geohash parse(std::string_view text);

  const std::string& text() const { return text_; }
  int length() const { return static_cast<int>(text_.size()); }

  // "wx4ej8mdt" -> "w x 4 e j 8 m d t"
  std::string spaced() const;

  friend bool operator==(const Geohash&, const Geohash&) = default;
  friend auto operator<=>(const Geohash&, const Geohash&) = default;

 private:
  explicit Geohash(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

Geohash encode(const LatLon& p, int length = kDefaultGeohashLength);
BBox decode(const Geohash& g);
LatLon centroid(const BBox& b);

// Canonicalizes a raw model output (drops ASCII whitespace, lowercases) and
// checks alphabet and exact length. Throws InvalidGeohash.
Geohash validate(std::string_view raw, int expected_length = kDefaultGeohashLength);
std::optional<Geohash> try_validate(std::string_view raw, int expected_length = kDefaultGeohashLength);

}  // namespace geoseq
