#include <cstdio>
#include <fstream>

#include "geoseq/dataset.hpp"
#include "geoseq/errors.hpp"

namespace geoseq {

using nlohmann::json;

json to_json(const Sample& s) {
  json j;
  j["id"] = s.id;
  j["input"] = s.input;
  j["output"] = s.output();
  j["lat"] = s.target.lat;
  j["lon"] = s.target.lon;
  j["kind"] = to_string(s.kind);
  j["split"] = to_string(s.split);
  j["thinking"] = s.thinking ? json(*s.thinking) : json(nullptr);
  if (s.offset_meta) {
    j["offset_meta"] = {{"direction", s.offset_meta->direction},
                        {"distance_m", s.offset_meta->distance_m},
                        {"anchor_lat", s.offset_meta->anchor.lat},
                        {"anchor_lon", s.offset_meta->anchor.lon}};
  } else {
    j["offset_meta"] = nullptr;
  }
  return j;
}

Sample sample_from_json(const json& j) {
  try {
    const LatLon target = make_latlon(j.at("lat").get<double>(), j.at("lon").get<double>());
    const std::string kind = j.at("kind").get<std::string>();
    SampleKind k;
    if (kind == "base") {
      k = SampleKind::base;
    } else if (kind == "anchor_offset") {
      k = SampleKind::anchor_offset;
    } else {
      throw FormatError("unknown kind '" + kind + "'");
    }
    Sample s = make_sample(j.at("id").get<std::string>(), j.at("input").get<std::string>(), target, k);

    const std::string split = j.value("split", "train");
    if (split == "train") {
      s.split = Split::train;
    } else if (split == "test") {
      s.split = Split::test;
    } else {
      throw FormatError("unknown split '" + split + "'");
    }

    const std::string output = j.at("output").get<std::string>();
    if (auto hash = try_validate(output)) {
      if (*hash != s.target_geohash) {
        throw FormatError("output geohash " + hash->text() + " does not match lat/lon cell " +
                          s.target_geohash.text());
      }
      s.output_format = OutputFormat::geohash;
    } else {
      double lat = 0.0;
      double lon = 0.0;
      if (std::sscanf(output.c_str(), "%lf , %lf", &lat, &lon) != 2) {
        throw FormatError("output is neither a geohash nor 'lat, lon': " + output);
      }
      s.output_format = OutputFormat::coordinates;
    }

    if (j.contains("thinking") && !j.at("thinking").is_null()) s.thinking = j.at("thinking").get<std::string>();
    if (j.contains("offset_meta") && !j.at("offset_meta").is_null()) {
      const json& m = j.at("offset_meta");
      s.offset_meta = OffsetMeta{m.at("direction").get<std::string>(), m.at("distance_m").get<double>(),
                                 make_latlon(m.at("anchor_lat").get<double>(), m.at("anchor_lon").get<double>())};
    }
    if (s.kind == SampleKind::anchor_offset && !s.offset_meta) {
      throw FormatError("anchor_offset sample without offset_meta");
    }
    return s;
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

json to_json(const Poi& poi) {
  return {{"id", poi.id}, {"name", poi.name}, {"address", poi.address}, {"lat", poi.location.lat},
          {"lon", poi.location.lon}};
}

Poi poi_from_json(const json& j) {
  try {
    Poi poi;
    poi.id = j.at("id").get<std::uint64_t>();
    poi.name = j.at("name").get<std::string>();
    poi.address = j.at("address").get<std::string>();
    poi.location = make_latlon(j.at("lat").get<double>(), j.at("lon").get<double>());
    return poi;
  } catch (const json::exception& e) {
    throw FormatError(e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

void write_jsonl(const std::filesystem::path& path, std::span<const json> records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  for (const json& r : records) out << r.dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_records(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(json::parse(line)));
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void write_samples_jsonl(const std::filesystem::path& path, std::span<const Sample> samples) {
  std::vector<json> records;
  records.reserve(samples.size());
  for (const Sample& s : samples) records.push_back(to_json(s));
  write_jsonl(path, records);
}

std::vector<Sample> read_samples_jsonl(const std::filesystem::path& path) {
  return read_records<Sample>(path, [](const json& j) { return sample_from_json(j); });
}

void write_pois_jsonl(const std::filesystem::path& path, std::span<const Poi> pois) {
  std::vector<json> records;
  records.reserve(pois.size());
  for (const Poi& p : pois) records.push_back(to_json(p));
  write_jsonl(path, records);
}

std::vector<Poi> read_pois_jsonl(const std::filesystem::path& path) {
  return read_records<Poi>(path, [](const json& j) { return poi_from_json(j); });
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  return read_records<json>(path, [](const json& j) { return j; });
}

}  // namespace geoseq
