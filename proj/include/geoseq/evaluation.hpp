#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoseq/baselines.hpp"
#include "geoseq/dataset.hpp"
#include "geoseq/metrics.hpp"
#include "geoseq/policy.hpp"

namespace geoseq {

// Anything that turns a query into a raw output string for the metric pipeline.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  virtual std::string predict(const std::string& query) const = 0;
};

struct DecodeMode {
  int beam_width = 0;  // 0 = greedy

  static DecodeMode greedy() { return {}; }
  static DecodeMode beam(int width) { return {width}; }
};

class PolicyPredictor : public Predictor {
 public:
  PolicyPredictor(const PolicyModel& model, DecodeMode mode) : model_(model), mode_(mode) {}
  std::string name() const override;
  std::string predict(const std::string& query) const override;

 private:
  const PolicyModel& model_;
  DecodeMode mode_;
};

enum class BaselineKind { levenshtein, vector_top1, vector_top5_rerank };

// Parses "lev", "vec1", "vec5r". Throws InvalidArgument for anything else.
BaselineKind parse_baseline(std::string_view name);

// Retrieval baselines emit the geohash of the retrieved coordinates, so they
// go through the same validate/decode path as the policy.
class BaselinePredictor : public Predictor {
 public:
  BaselinePredictor(BaselineKind kind, std::span<const Poi> pois) : kind_(kind), index_(pois) {}
  std::string name() const override;
  std::string predict(const std::string& query) const override;

 private:
  BaselineKind kind_;
  RetrievalIndex index_;
};

struct EvalResult {
  MetricsReport report;
  std::vector<PredictionRecord> records;
};

EvalResult run_eval(const Predictor& predictor, std::span<const Sample> samples,
                    std::span<const double> thresholds = kDefaultThresholds,
                    const InvalidDistancePolicy& policy = {});

void write_eval_outputs(const EvalResult& result, const std::filesystem::path& report_path,
                        const std::filesystem::path& records_path, const nlohmann::json& config_echo);

}  // namespace geoseq
