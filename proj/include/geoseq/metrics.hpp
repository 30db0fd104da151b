#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "geoseq/geohash.hpp"

namespace geoseq {

struct PredictionRecord {
  std::string sample_id;
  std::string raw_output;
  std::optional<LatLon> pred;  // present iff raw_output validated
  LatLon truth;
};

// Validates raw_output and fills pred with the cell centroid when it parses.
PredictionRecord make_record(std::string sample_id, std::string raw_output, const LatLon& truth,
                             int expected_length = kDefaultGeohashLength);

// How invalid outputs enter ADD. They are always counted in EC and always
// fail every Acc@k.
struct InvalidDistancePolicy {
  // nullopt: excluded from ADD. Otherwise they contribute this distance.
  std::optional<double> distance_m;
};

inline const std::vector<double> kDefaultThresholds{100.0, 200.0, 500.0};

struct MetricsReport {
  double add_m = 0.0;  // NaN when no record contributes a distance
  std::vector<std::pair<double, double>> acc_at;  // (threshold m, fraction), ascending thresholds
  long ec = 0;
  long n = 0;

  double acc(double threshold) const;
};

// Throws InvalidArgument on an empty record set.
MetricsReport compute_metrics(std::span<const PredictionRecord> records,
                              std::span<const double> thresholds = kDefaultThresholds,
                              const InvalidDistancePolicy& policy = {});

std::optional<double> record_distance(const PredictionRecord& record);

// {add_m, acc: {"100": ..}, ec, n, config_echo}
nlohmann::json to_json(const MetricsReport& report, const nlohmann::json& config_echo = nullptr);
// {sample_id, raw_output, pred_lat, pred_lon, truth_lat, truth_lon, distance_m, valid}
nlohmann::json to_json(const PredictionRecord& record);

}  // namespace geoseq
