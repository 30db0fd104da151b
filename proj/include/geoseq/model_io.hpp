#pragma once

#include <filesystem>

#include <json.hpp>

#include "geoseq/policy.hpp"

namespace geoseq {

inline constexpr int kModelFormatVersion = 1;
inline constexpr const char* kFeatureHashName = "fnv1a64-byte-trigram";

// {format_version, B, sequence_length, feature_hash, prev_table, feat_table, config_echo}
// feat_table lists only rows with a nonzero weight, as {bucket, position, weights}.
nlohmann::json model_to_json(const PolicyModel& model, const nlohmann::json& config_echo = nullptr);
// Throws FormatError on unknown versions or malformed content.
PolicyModel model_from_json(const nlohmann::json& doc);

void save_model(const PolicyModel& model, const std::filesystem::path& path,
                const nlohmann::json& config_echo = nullptr);
// Throws IoError if unreadable, FormatError if the content is not a model.
PolicyModel load_model(const std::filesystem::path& path);

}  // namespace geoseq
