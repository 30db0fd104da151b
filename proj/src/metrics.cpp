#include "geoseq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geoseq/errors.hpp"
#include "geoseq/geodesic.hpp"

namespace geoseq {

using nlohmann::json;

PredictionRecord make_record(std::string sample_id, std::string raw_output, const LatLon& truth,
                             int expected_length) {
  PredictionRecord r{std::move(sample_id), std::move(raw_output), std::nullopt, truth};
  if (auto hash = try_validate(r.raw_output, expected_length)) r.pred = centroid(decode(*hash));
  return r;
}

std::optional<double> record_distance(const PredictionRecord& record) {
  if (!record.pred) return std::nullopt;
  return inverse_distance(*record.pred, record.truth);
}

double MetricsReport::acc(double threshold) const {
  for (const auto& [k, v] : acc_at) {
    if (k == threshold) return v;
  }
  throw InvalidArgument("no Acc@" + std::to_string(threshold) + " in report");
}

MetricsReport compute_metrics(std::span<const PredictionRecord> records, std::span<const double> thresholds,
                              const InvalidDistancePolicy& policy) {
  if (records.empty()) throw InvalidArgument("cannot compute metrics over zero records");
  std::vector<double> ks(thresholds.begin(), thresholds.end());
  std::sort(ks.begin(), ks.end());

  MetricsReport report;
  report.n = static_cast<long>(records.size());
  std::vector<long> hits(ks.size(), 0);
  double sum = 0.0;
  long counted = 0;
  for (const auto& r : records) {
    const auto d = record_distance(r);
    if (!d) {
      ++report.ec;
      if (policy.distance_m) {
        sum += *policy.distance_m;
        ++counted;
      }
      continue;
    }
    sum += *d;
    ++counted;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      if (*d <= ks[i]) ++hits[i];
    }
  }
  report.add_m = counted > 0 ? sum / static_cast<double>(counted) : std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    report.acc_at.emplace_back(ks[i], static_cast<double>(hits[i]) / static_cast<double>(report.n));
  }
  return report;
}

namespace {

std::string threshold_key(double k) {
  if (k == std::floor(k) && std::abs(k) < 1e15) return std::to_string(static_cast<long long>(k));
  return json(k).dump();
}

}  // namespace

json to_json(const MetricsReport& report, const json& config_echo) {
  json acc = json::object();
  for (const auto& [k, v] : report.acc_at) acc[threshold_key(k)] = v;
  json j;
  j["add_m"] = std::isnan(report.add_m) ? json(nullptr) : json(report.add_m);
  j["acc"] = std::move(acc);
  j["ec"] = report.ec;
  j["n"] = report.n;
  j["config_echo"] = config_echo;
  return j;
}

json to_json(const PredictionRecord& record) {
  json j;
  j["sample_id"] = record.sample_id;
  j["raw_output"] = record.raw_output;
  j["truth_lat"] = record.truth.lat;
  j["truth_lon"] = record.truth.lon;
  j["valid"] = record.pred.has_value();
  if (record.pred) {
    j["pred_lat"] = record.pred->lat;
    j["pred_lon"] = record.pred->lon;
    j["distance_m"] = *record_distance(record);
  } else {
    j["pred_lat"] = nullptr;
    j["pred_lon"] = nullptr;
    j["distance_m"] = nullptr;
  }
  return j;
}

}  // namespace geoseq
