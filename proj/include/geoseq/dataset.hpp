#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geoseq/geodesic.hpp"
#include "geoseq/geohash.hpp"

namespace geoseq {

struct Poi {
  std::uint64_t id = 0;
  std::string name;
  std::string address;
  LatLon location;

  friend bool operator==(const Poi&, const Poi&) = default;
};

enum class SampleKind { base, anchor_offset };
enum class Split { train, test };
enum class OutputFormat { geohash, coordinates };
enum class DirectionSet { cardinal, intercardinal, both };

std::string_view to_string(SampleKind kind);
std::string_view to_string(Split split);
std::string_view to_string(DirectionSet set);
DirectionSet parse_direction_set(std::string_view text);
OutputFormat parse_output_format(std::string_view text);

struct Direction {
  std::string_view name;
  double azimuth_deg;
};

std::span<const Direction> directions(DirectionSet set);
std::optional<Direction> find_direction(std::string_view name);
// Nearest of the eight compass words.
std::string_view compass_word(Bearing bearing);

struct OffsetMeta {
  std::string direction;
  double distance_m = 0.0;
  LatLon anchor;

  friend bool operator==(const OffsetMeta&, const OffsetMeta&) = default;
};

struct Sample {
  std::string id;
  std::string input;
  Geohash target_geohash;  // always encode(target, 9)
  LatLon target;
  SampleKind kind = SampleKind::base;
  Split split = Split::train;
  std::optional<std::string> thinking;
  std::optional<OffsetMeta> offset_meta;
  OutputFormat output_format = OutputFormat::geohash;

  // The anchor location for offset samples, the target otherwise.
  const LatLon& anchor() const { return offset_meta ? offset_meta->anchor : target; }
  // The "output" field: spaced geohash, or "lat, lon" with six decimals.
  std::string output() const;

  friend bool operator==(const Sample&, const Sample&) = default;
};

Sample make_sample(std::string id, std::string input, const LatLon& target, SampleKind kind);

struct BaseSources {
  bool name = true;
  bool address = true;
  // Name with seeded character drops and adjacent swaps, standing in for
  // colloquial search-engine queries.
  bool search_query = false;
  double noise_prob = 0.05;
  std::uint64_t seed = 0;
  OutputFormat output_format = OutputFormat::geohash;
};

// One sample per enabled source per POI.
std::vector<Sample> build_base(std::span<const Poi> pois, const BaseSources& sources);

struct OffsetOptions {
  DirectionSet directions = DirectionSet::cardinal;
  int min_distance_m = 30;
  int max_distance_m = 500;
  std::uint64_t seed = 0;
};

// One "{d} meters {direction} of {text}" sample per base sample. Distances are
// whole meters drawn uniformly from [min, max]; the label is the ellipsoidal
// forward solution from the base target along the direction's azimuth.
std::vector<Sample> build_anchor_offset(std::span<const Sample> base, const OffsetOptions& options);

// "{d} meters {direction} of {address}" relating the nearest other POI to
// the sample's anchor, or nullopt when there is no other POI.
std::optional<std::string> neighbor_text(const Sample& sample, std::span<const Poi> pois);

struct CotRecord {
  std::string id;
  std::string input;
  std::string output;
};

// input + " <thinking>" / thinking + " </thinking> " + spaced geohash. An empty
// thinking text yields the plain input/output pair.
CotRecord format_cot(const Sample& sample, std::string_view thinking);
nlohmann::json to_json(const CotRecord& record);

struct SplitOptions {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  double coverage_radius_m = 500.0;
};

// Shuffled split by anchor location: samples sharing an anchor stay together.
// A location drawn for test stays there only if some training location lies
// within coverage_radius_m; otherwise it moves to train. Sets each sample's split.
std::pair<std::vector<Sample>, std::vector<Sample>> split_dataset(std::vector<Sample> samples,
                                                                  const SplitOptions& options);

// Street-grid city inside bbox with names and "No.{k} {Street} Road, {District} District" addresses.
std::vector<Poi> synth_city(int n_pois, const BBox& bbox, std::uint64_t seed);

nlohmann::json to_json(const Sample& sample);
Sample sample_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Poi& poi);
Poi poi_from_json(const nlohmann::json& j);

// One JSON object per line. Readers throw FormatError naming the 1-based line.
void write_samples_jsonl(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path);
void write_pois_jsonl(const std::filesystem::path& path, std::span<const Poi> pois);
std::vector<Poi> read_pois_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const nlohmann::json> records);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

}  // namespace geoseq
