#include "geoseq/evaluation.hpp"

#include <fstream>

#include "geoseq/beam_search.hpp"
#include "geoseq/errors.hpp"
#include "geoseq/features.hpp"

namespace geoseq {

std::string PolicyPredictor::name() const {
  return mode_.beam_width > 0 ? "policy-beam" + std::to_string(mode_.beam_width) : "policy-greedy";
}

std::string PolicyPredictor::predict(const std::string& query) const {
  const QueryFeatures feats = featurize(query, model_.buckets());
  if (mode_.beam_width > 0) {
    return beam_search(model_, feats, mode_.beam_width, 1).front().geohash.spaced();
  }
  return greedy_decode(model_, feats).text();
}

BaselineKind parse_baseline(std::string_view name) {
  if (name == "lev") return BaselineKind::levenshtein;
  if (name == "vec1") return BaselineKind::vector_top1;
  if (name == "vec5r") return BaselineKind::vector_top5_rerank;
  throw InvalidArgument("unknown baseline '" + std::string(name) + "' (expected lev, vec1 or vec5r)");
}

std::string BaselinePredictor::name() const {
  switch (kind_) {
    case BaselineKind::levenshtein:
      return "levenshtein (simplified)";
    case BaselineKind::vector_top1:
      return "vector-top1 (simplified)";
    case BaselineKind::vector_top5_rerank:
      return "vector-top5-rerank (simplified)";
  }
  return "baseline";
}

std::string BaselinePredictor::predict(const std::string& query) const {
  LatLon p;
  switch (kind_) {
    case BaselineKind::levenshtein:
      p = index_.levenshtein(query);
      break;
    case BaselineKind::vector_top1:
      p = index_.vector(query, 1, false);
      break;
    case BaselineKind::vector_top5_rerank:
      p = index_.vector(query, 5, true);
      break;
  }
  return encode(p).spaced();
}

EvalResult run_eval(const Predictor& predictor, std::span<const Sample> samples, std::span<const double> thresholds,
                    const InvalidDistancePolicy& policy) {
  EvalResult result;
  result.records.reserve(samples.size());
  for (const Sample& s : samples) {
    result.records.push_back(make_record(s.id, predictor.predict(s.input), s.target));
  }
  result.report = compute_metrics(result.records, thresholds, policy);
  return result;
}

void write_eval_outputs(const EvalResult& result, const std::filesystem::path& report_path,
                        const std::filesystem::path& records_path, const nlohmann::json& config_echo) {
  if (!records_path.empty()) {
    std::vector<nlohmann::json> rows;
    rows.reserve(result.records.size());
    for (const auto& r : result.records) rows.push_back(to_json(r));
    write_jsonl(records_path, rows);
  }
  std::ofstream out(report_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + report_path.string());
  out << to_json(result.report, config_echo).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + report_path.string());
}

}  // namespace geoseq
