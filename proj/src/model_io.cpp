#include "geoseq/model_io.hpp"

#include <algorithm>
#include <fstream>

#include "geoseq/errors.hpp"

namespace geoseq {

using nlohmann::json;

json model_to_json(const PolicyModel& model, const json& config_echo) {
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["B"] = model.buckets();
  doc["sequence_length"] = model.sequence_length();
  doc["feature_hash"] = kFeatureHashName;

  json prev = json::array();
  for (int t = 0; t < model.sequence_length(); ++t) {
    json rows = json::array();
    for (int p = 0; p < kPrevStates; ++p) {
      const auto row = model.prev_row(t, p);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    prev.push_back(std::move(rows));
  }
  doc["prev_table"] = std::move(prev);

  json feat = json::array();
  for (std::uint32_t b = 0; b < model.buckets(); ++b) {
    for (int t = 0; t < model.sequence_length(); ++t) {
      const auto row = model.feat_row(b, t);
      if (std::all_of(row.begin(), row.end(), [](double w) { return w == 0.0; })) continue;
      feat.push_back({{"bucket", b}, {"position", t}, {"weights", std::vector<double>(row.begin(), row.end())}});
    }
  }
  doc["feat_table"] = std::move(feat);
  if (!config_echo.is_null()) doc["config_echo"] = config_echo;
  return doc;
}

namespace {

void read_row(const json& src, std::span<double, kVocabSize> dst) {
  if (!src.is_array() || src.size() != kVocabSize) throw FormatError("weight row must hold 32 numbers");
  for (std::size_t k = 0; k < kVocabSize; ++k) {
    if (!src[k].is_number()) throw FormatError("weight row contains a non-number");
    dst[k] = src[k].get<double>();
  }
}

}  // namespace

PolicyModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw FormatError("model document is not an object");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format_version " + std::to_string(version));
    }
    if (doc.contains("feature_hash") && doc.at("feature_hash") != kFeatureHashName) {
      throw FormatError("model uses unknown feature hash " + doc.at("feature_hash").dump());
    }
    const auto buckets = doc.at("B").get<std::uint32_t>();
    const int length = doc.at("sequence_length").get<int>();
    if (buckets == 0 || length < 1) throw FormatError("model dimensions must be positive");
    PolicyModel model(buckets, length);

    const json& prev = doc.at("prev_table");
    if (!prev.is_array() || prev.size() != static_cast<std::size_t>(length)) {
      throw FormatError("prev_table must have sequence_length entries");
    }
    for (int t = 0; t < length; ++t) {
      const json& rows = prev[static_cast<std::size_t>(t)];
      if (!rows.is_array() || rows.size() != kPrevStates) throw FormatError("prev_table rows must number 33");
      for (int p = 0; p < kPrevStates; ++p) read_row(rows[static_cast<std::size_t>(p)], model.prev_row(t, p));
    }
    for (const json& entry : doc.at("feat_table")) {
      const auto bucket = entry.at("bucket").get<std::uint32_t>();
      const int position = entry.at("position").get<int>();
      if (bucket >= buckets || position < 0 || position >= length) {
        throw FormatError("feat_table entry out of range");
      }
      read_row(entry.at("weights"), model.feat_row(bucket, position));
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model: ") + e.what());
  }
}

void save_model(const PolicyModel& model, const std::filesystem::path& path, const json& config_echo) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << model_to_json(model, config_echo).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

PolicyModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace geoseq
