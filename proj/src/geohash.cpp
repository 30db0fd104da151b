#include "geoseq/geohash.hpp"

#include <cctype>
#include <cmath>

#include "geoseq/errors.hpp"

namespace geoseq {

namespace {

constexpr std::array<std::int8_t, 128> make_decode_table() {
  std::array<std::int8_t, 128> table{};
  for (auto& v : table) v = -1;
  for (std::size_t i = 0; i < kGeohashAlphabet.size(); ++i) {
    table[static_cast<std::size_t>(kGeohashAlphabet[i])] = static_cast<std::int8_t>(i);
  }
  return table;
}

constexpr auto kDecodeTable = make_decode_table();

struct AxisBits {
  int lon;
  int lat;
};

// Longitude takes the first bit, so it gets the extra one when 5n is odd.
AxisBits axis_bits(int length) {
  const int total = 5 * length;
  return {(total + 1) / 2, total / 2};
}

// Lower edge of cell `index` when [lo, lo + span) is cut into 2^bits cells.
// Exact in double for bits <= 30 and the spans used here.
double cell_edge(double lo, double span, std::uint64_t index, int bits) {
  return lo + std::ldexp(span * static_cast<double>(index), -bits);
}

// Index of the dyadic cell holding v. The floating estimate is corrected
// against exact cell edges so the result matches interval bisection bit for bit.
std::uint64_t quantize(double v, double lo, double span, int bits) {
  const std::uint64_t cells = std::uint64_t{1} << bits;
  double est = std::floor(std::ldexp((v - lo) / span, bits));
  if (est < 0.0) est = 0.0;
  auto index = static_cast<std::uint64_t>(est);
  if (index >= cells) index = cells - 1;
  while (index > 0 && v < cell_edge(lo, span, index, bits)) --index;
  while (index + 1 < cells && v >= cell_edge(lo, span, index + 1, bits)) ++index;
  return index;
}

void check_length(int length) {
  if (length < 1 || length > kMaxGeohashLength) {
    throw InvalidArgument("geohash length must be in [1, 12], got " + std::to_string(length));
  }
}

}  // namespace

LatLon make_latlon(double lat, double lon) {
  if (!std::isfinite(lat) || lat < -90.0 || lat > 90.0) {
    throw InvalidArgument("latitude out of range: " + std::to_string(lat));
  }
  if (!std::isfinite(lon) || lon < -180.0 || lon > 180.0) {
    throw InvalidArgument("longitude out of range: " + std::to_string(lon));
  }
  if (lon == 180.0) lon = -180.0;
  return {lat, lon};
}

bool BBox::contains(const LatLon& p) const {
  const bool lat_in = (p.lat >= lat_min && p.lat < lat_max) || (lat_max == 90.0 && p.lat == 90.0);
  const bool lon_in = p.lon >= lon_min && p.lon < lon_max;
  return lat_in && lon_in;
}

int geohash_symbol_index(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < kDecodeTable.size() ? kDecodeTable[u] : -1;
}

Geohash Geohash::parse(std::string_view text) {
  if (text.empty() || text.size() > static_cast<std::size_t>(kMaxGeohashLength)) {
    throw InvalidGeohash("length " + std::to_string(text.size()) + " outside [1, 12]");
  }
  for (char c : text) {
    if (geohash_symbol_index(c) < 0) {
      throw InvalidGeohash(std::string("character '") + c + "' not in alphabet");
    }
  }
  return Geohash(std::string(text));
}

std::string Geohash::spaced() const {
  std::string out;
  out.reserve(text_.size() * 2);
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.push_back(text_[i]);
  }
  return out;
}

Geohash encode(const LatLon& p, int length) {
  check_length(length);
  const LatLon q = make_latlon(p.lat, p.lon);
  const auto [lon_bits, lat_bits] = axis_bits(length);
  const std::uint64_t lon_index = quantize(q.lon, -180.0, 360.0, lon_bits);
  const std::uint64_t lat_index = quantize(q.lat, -90.0, 180.0, lat_bits);

  std::string text(static_cast<std::size_t>(length), '0');
  int lon_left = lon_bits;
  int lat_left = lat_bits;
  for (int c = 0; c < length; ++c) {
    int symbol = 0;
    for (int b = 0; b < 5; ++b) {
      const int bit_pos = c * 5 + b;
      std::uint64_t bit = 0;
      if (bit_pos % 2 == 0) {
        bit = (lon_index >> --lon_left) & 1U;
      } else {
        bit = (lat_index >> --lat_left) & 1U;
      }
      symbol = (symbol << 1) | static_cast<int>(bit);
    }
    text[static_cast<std::size_t>(c)] = geohash_symbol(symbol);
  }
  return Geohash::parse(text);
}

BBox decode(const Geohash& g) {
  const int length = g.length();
  const auto [lon_bits, lat_bits] = axis_bits(length);
  std::uint64_t lon_index = 0;
  std::uint64_t lat_index = 0;
  for (int c = 0; c < length; ++c) {
    const int symbol = geohash_symbol_index(g.text()[static_cast<std::size_t>(c)]);
    for (int b = 0; b < 5; ++b) {
      const std::uint64_t bit = (static_cast<unsigned>(symbol) >> (4 - b)) & 1U;
      if ((c * 5 + b) % 2 == 0) {
        lon_index = (lon_index << 1) | bit;
      } else {
        lat_index = (lat_index << 1) | bit;
      }
    }
  }
  BBox box;
  box.lon_min = cell_edge(-180.0, 360.0, lon_index, lon_bits);
  box.lon_max = cell_edge(-180.0, 360.0, lon_index + 1, lon_bits);
  box.lat_min = cell_edge(-90.0, 180.0, lat_index, lat_bits);
  box.lat_max = cell_edge(-90.0, 180.0, lat_index + 1, lat_bits);
  return box;
}

LatLon centroid(const BBox& b) {
  return {(b.lat_min + b.lat_max) / 2.0, (b.lon_min + b.lon_max) / 2.0};
}

Geohash validate(std::string_view raw, int expected_length) {
  std::string cleaned;
  cleaned.reserve(raw.size());
  for (char c : raw) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isspace(u)) continue;
    cleaned.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
  }
  if (static_cast<int>(cleaned.size()) != expected_length) {
    throw InvalidGeohash("expected " + std::to_string(expected_length) + " symbols, got " +
                         std::to_string(cleaned.size()));
  }
  return Geohash::parse(cleaned);
}

std::optional<Geohash> try_validate(std::string_view raw, int expected_length) {
  try {
    return validate(raw, expected_length);
  } catch (const InvalidGeohash&) {
    return std::nullopt;
  }
}

}  // namespace geoseq
