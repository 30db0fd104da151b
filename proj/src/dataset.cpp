#include "geoseq/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "geoseq/errors.hpp"
#include "geoseq/seeding.hpp"

namespace geoseq {

namespace {

constexpr std::array<Direction, 4> kCardinal{{{"north", 0.0}, {"east", 90.0}, {"south", 180.0}, {"west", 270.0}}};
constexpr std::array<Direction, 4> kIntercardinal{
    {{"northeast", 45.0}, {"southeast", 135.0}, {"southwest", 225.0}, {"northwest", 315.0}}};
constexpr std::array<Direction, 8> kBoth{{{"north", 0.0},
                                          {"east", 90.0},
                                          {"south", 180.0},
                                          {"west", 270.0},
                                          {"northeast", 45.0},
                                          {"southeast", 135.0},
                                          {"southwest", 225.0},
                                          {"northwest", 315.0}}};
constexpr std::array<std::string_view, 8> kCompass{"north", "northeast", "east",      "southeast",
                                                   "south", "southwest", "west",      "northwest"};

// Portable draws: the standard distributions are implementation-defined.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[below(rng, i)]);
  }
}

std::string noisy(std::string_view text, double p, std::mt19937_64& rng) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (unit(rng) < p) continue;
    if (i + 1 < text.size() && unit(rng) < p) {
      out.push_back(text[i + 1]);
      out.push_back(text[i]);
      ++i;
      continue;
    }
    out.push_back(text[i]);
  }
  return out.empty() ? std::string(text) : out;
}

}  // namespace

std::string_view to_string(SampleKind kind) { return kind == SampleKind::base ? "base" : "anchor_offset"; }
std::string_view to_string(Split split) { return split == Split::train ? "train" : "test"; }

std::string_view to_string(DirectionSet set) {
  switch (set) {
    case DirectionSet::cardinal:
      return "cardinal";
    case DirectionSet::intercardinal:
      return "intercardinal";
    case DirectionSet::both:
      return "both";
  }
  return "cardinal";
}

DirectionSet parse_direction_set(std::string_view text) {
  if (text == "cardinal") return DirectionSet::cardinal;
  if (text == "intercardinal") return DirectionSet::intercardinal;
  if (text == "both") return DirectionSet::both;
  throw InvalidArgument("unknown direction set '" + std::string(text) + "'");
}

OutputFormat parse_output_format(std::string_view text) {
  if (text == "geohash") return OutputFormat::geohash;
  if (text == "coordinates") return OutputFormat::coordinates;
  throw InvalidArgument("unknown output format '" + std::string(text) + "'");
}

std::span<const Direction> directions(DirectionSet set) {
  switch (set) {
    case DirectionSet::cardinal:
      return kCardinal;
    case DirectionSet::intercardinal:
      return kIntercardinal;
    case DirectionSet::both:
      return kBoth;
  }
  return kCardinal;
}

std::optional<Direction> find_direction(std::string_view name) {
  for (const auto& d : kBoth) {
    if (d.name == name) return d;
  }
  return std::nullopt;
}

std::string_view compass_word(Bearing bearing) {
  const auto sector = static_cast<std::size_t>(std::floor((bearing.degrees() + 22.5) / 45.0)) % kCompass.size();
  return kCompass[sector];
}

std::string Sample::output() const {
  if (output_format == OutputFormat::geohash) return target_geohash.spaced();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f, %.6f", target.lat, target.lon);
  return buf;
}

Sample make_sample(std::string id, std::string input, const LatLon& target, SampleKind kind) {
  return Sample{std::move(id), std::move(input), encode(target, kDefaultGeohashLength), target, kind,
                Split::train, std::nullopt, std::nullopt, OutputFormat::geohash};
}

std::vector<Sample> build_base(std::span<const Poi> pois, const BaseSources& sources) {
  if (pois.empty()) throw InvalidArgument("POI list is empty");
  std::mt19937_64 rng(derive_seed(sources.seed, "search-query-noise"));
  std::vector<Sample> out;
  for (const Poi& poi : pois) {
    const std::string stem = "base/" + std::to_string(poi.id) + "/";
    auto add = [&](std::string_view source, std::string input) {
      Sample s = make_sample(stem + std::string(source), std::move(input), poi.location, SampleKind::base);
      s.output_format = sources.output_format;
      out.push_back(std::move(s));
    };
    if (sources.name) add("name", poi.name);
    if (sources.address) add("address", poi.address);
    if (sources.search_query) add("query", noisy(poi.name, sources.noise_prob, rng));
  }
  return out;
}

std::vector<Sample> build_anchor_offset(std::span<const Sample> base, const OffsetOptions& options) {
  if (options.min_distance_m >= options.max_distance_m || options.min_distance_m < 0) {
    throw InvalidArgument("offset range must satisfy 0 <= min < max");
  }
  const auto dirs = directions(options.directions);
  std::mt19937_64 rng(derive_seed(options.seed, "anchor-offset"));
  const auto span = static_cast<std::uint64_t>(options.max_distance_m - options.min_distance_m + 1);
  std::vector<Sample> out;
  out.reserve(base.size());
  for (const Sample& b : base) {
    const Direction dir = dirs[below(rng, dirs.size())];
    const int distance = options.min_distance_m + static_cast<int>(below(rng, span));
    const LatLon target = forward(b.target, Bearing(dir.azimuth_deg), distance);
    std::string id = b.id;
    if (id.rfind("base/", 0) == 0) id.replace(0, 4, "offset");
    Sample s = make_sample(std::move(id),
                           std::to_string(distance) + " meters " + std::string(dir.name) + " of " + b.input, target,
                           SampleKind::anchor_offset);
    s.offset_meta = OffsetMeta{std::string(dir.name), static_cast<double>(distance), b.target};
    s.output_format = b.output_format;
    out.push_back(std::move(s));
  }
  return out;
}

std::optional<std::string> neighbor_text(const Sample& sample, std::span<const Poi> pois) {
  const LatLon& here = sample.anchor();
  const Poi* best = nullptr;
  double best_d = 0.0;
  for (const Poi& p : pois) {
    if (p.location == here) continue;
    const double d = inverse_distance(p.location, here);
    if (best == nullptr || d < best_d || (d == best_d && p.id < best->id)) {
      best = &p;
      best_d = d;
    }
  }
  if (best == nullptr) return std::nullopt;
  const InverseSolution sol = solve_inverse(best->location, sample.target);
  return std::to_string(static_cast<long>(std::lround(sol.distance_m))) + " meters " +
         std::string(compass_word(sol.initial_bearing)) + " of " + best->address;
}

CotRecord format_cot(const Sample& sample, std::string_view thinking) {
  if (thinking.empty()) return {sample.id, sample.input, sample.output()};
  return {sample.id, sample.input + " <thinking>", std::string(thinking) + " </thinking> " + sample.output()};
}

nlohmann::json to_json(const CotRecord& record) {
  return {{"id", record.id}, {"input", record.input}, {"output", record.output}};
}

std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(std::vector<Sample> samples,
                                                                  const SplitOptions& options) {
  if (!(options.train_fraction > 0.0 && options.train_fraction < 1.0)) {
    throw InvalidArgument("train fraction must be in (0, 1)");
  }
  // Locations in first-seen order.
  std::vector<LatLon> locations;
  std::map<std::pair<double, double>, std::size_t> location_index;
  std::vector<std::size_t> sample_location(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const LatLon& a = samples[i].anchor();
    auto [it, inserted] = location_index.try_emplace({a.lat, a.lon}, locations.size());
    if (inserted) locations.push_back(a);
    sample_location[i] = it->second;
  }

  std::vector<std::size_t> order(locations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(options.seed, "split"));
  portable_shuffle(order, rng);

  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(locations.size()) * (1.0 - options.train_fraction)));
  std::vector<bool> is_test(locations.size(), false);
  std::vector<std::size_t> train_locs(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t loc = order[i];
    const LatLon& p = locations[loc];
    const bool covered = std::any_of(train_locs.begin(), train_locs.end(), [&](std::size_t t) {
      const LatLon& q = locations[t];
      // ~0.01 degree of latitude is > 1 km; skip the geodesic for obvious misses.
      if (std::abs(q.lat - p.lat) > options.coverage_radius_m / 100000.0) return false;
      return inverse_distance(p, q) <= options.coverage_radius_m;
    });
    if (covered) {
      is_test[loc] = true;
    } else {
      train_locs.push_back(loc);
    }
  }

  std::pair<std::vector<Sample>, std::vector<Sample>> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Sample& s = samples[i];
    if (is_test[sample_location[i]]) {
      s.split = Split::test;
      out.second.push_back(std::move(s));
    } else {
      s.split = Split::train;
      out.first.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<Poi> synth_city(int n_pois, const BBox& bbox, std::uint64_t seed) {
  if (n_pois < 1) throw InvalidArgument("need at least one POI");
  if (!(bbox.lat_min < bbox.lat_max && bbox.lon_min < bbox.lon_max)) throw InvalidArgument("empty bbox");

  static constexpr std::array<std::string_view, 24> kAdjectives{
      "Golden", "Silver", "Red",    "Blue",   "Green",  "Quiet",  "Sunny",  "Old",
      "New",    "Royal",  "Happy",  "Lucky",  "Bright", "Grand",  "Little", "Jade",
      "Crystal", "Maple", "Cedar",  "Pearl",  "Amber",  "Misty",  "Eastern", "Western"};
  static constexpr std::array<std::string_view, 24> kNouns{
      "Bakery",  "Library", "Garden",  "Pharmacy", "Hotel",   "Market",  "Clinic",   "Cafe",
      "School",  "Theater", "Gallery", "Bookstore", "Tower",  "Plaza",   "Station",  "Courtyard",
      "Teahouse", "Gym",    "Bank",    "Museum",   "Bistro",  "Studio",  "Pavilion", "Workshop"};
  static constexpr std::array<std::string_view, 16> kStreets{
      "Zhichun", "Xueyuan", "Chengfu", "Shuangqing", "Huaqing", "Wudaokou", "Qinghua", "Beisihuan",
      "Suzhou",  "Haidian", "Zhongguancun", "Danling", "Caihefang", "Kexueyuan", "Baofusi", "Lanqiying"};
  static constexpr std::array<std::string_view, 4> kDistricts{"Riverside", "Hillcrest", "Oakwood", "Lakeview"};

  std::mt19937_64 rng(derive_seed(seed, "synth-city"));

  // Roads: half run east-west at jittered latitudes, half north-south at jittered longitudes.
  const int roads_per_axis = std::clamp(static_cast<int>(std::lround(std::sqrt(n_pois / 8.0))), 2, 8);
  struct Road {
    std::string name;
    bool east_west;
    double coord;  // latitude for east-west roads, longitude for north-south
  };
  std::vector<Road> roads;
  std::vector<std::size_t> street_pick(kStreets.size());
  std::iota(street_pick.begin(), street_pick.end(), std::size_t{0});
  portable_shuffle(street_pick, rng);
  for (int axis = 0; axis < 2; ++axis) {
    const bool ew = axis == 0;
    const double lo = ew ? bbox.lat_min : bbox.lon_min;
    const double hi = ew ? bbox.lat_max : bbox.lon_max;
    const double step = (hi - lo) / roads_per_axis;
    for (int r = 0; r < roads_per_axis; ++r) {
      const double coord = lo + step * (r + 0.5) + step * 0.2 * (unit(rng) - 0.5);
      roads.push_back({std::string(kStreets[street_pick[roads.size() % street_pick.size()]]), ew, coord});
    }
  }

  std::vector<std::size_t> name_pick(kAdjectives.size() * kNouns.size());
  std::iota(name_pick.begin(), name_pick.end(), std::size_t{0});
  portable_shuffle(name_pick, rng);

  constexpr double kMetersPerDegree = 111320.0;
  const double mid_lat = (bbox.lat_min + bbox.lat_max) / 2.0;
  const double deg_per_m_lat = 1.0 / kMetersPerDegree;
  const double deg_per_m_lon = 1.0 / (kMetersPerDegree * std::cos(mid_lat * 3.14159265358979323846 / 180.0));

  std::map<std::size_t, std::set<int>> used_numbers;
  std::set<std::string> used_names;
  std::vector<Poi> out;
  out.reserve(static_cast<std::size_t>(n_pois));
  for (int i = 0; i < n_pois; ++i) {
    const std::size_t road_idx = below(rng, roads.size());
    const Road& road = roads[road_idx];
    const double along = unit(rng);
    const double jitter_m = (unit(rng) - 0.5) * 30.0;
    LatLon loc;
    if (road.east_west) {
      loc.lat = road.coord + jitter_m * deg_per_m_lat;
      loc.lon = bbox.lon_min + along * (bbox.lon_max - bbox.lon_min);
    } else {
      loc.lon = road.coord + jitter_m * deg_per_m_lon;
      loc.lat = bbox.lat_min + along * (bbox.lat_max - bbox.lat_min);
    }
    loc.lat = std::clamp(loc.lat, bbox.lat_min, std::nextafter(bbox.lat_max, bbox.lat_min));
    loc.lon = std::clamp(loc.lon, bbox.lon_min, std::nextafter(bbox.lon_max, bbox.lon_min));

    int number = 1 + static_cast<int>(along * 400.0);
    auto& numbers = used_numbers[road_idx];
    while (numbers.count(number) != 0) ++number;
    numbers.insert(number);

    const std::size_t pick = name_pick[static_cast<std::size_t>(i) % name_pick.size()];
    std::string name = std::string(kAdjectives[pick / kNouns.size()]) + " " + std::string(kNouns[pick % kNouns.size()]);
    if (static_cast<std::size_t>(i) >= name_pick.size()) name += " " + std::to_string(i / name_pick.size() + 1);
    while (used_names.count(name) != 0) name += "+";
    used_names.insert(name);

    const bool north = loc.lat >= mid_lat;
    const bool east = loc.lon >= (bbox.lon_min + bbox.lon_max) / 2.0;
    const std::string_view district = kDistricts[(north ? 0U : 2U) + (east ? 1U : 0U)];

    Poi poi;
    poi.id = static_cast<std::uint64_t>(i + 1);
    poi.name = std::move(name);
    poi.address = "No." + std::to_string(number) + " " + road.name + " Road, " + std::string(district) + " District";
    poi.location = loc;
    out.push_back(std::move(poi));
  }
  return out;
}

}  // namespace geoseq
