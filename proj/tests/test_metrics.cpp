#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "geoseq/baselines.hpp"
#include "geoseq/errors.hpp"
#include "geoseq/evaluation.hpp"
#include "geoseq/metrics.hpp"
#include "geoseq/reward.hpp"
#include "oracles.hpp"

using namespace geoseq;
namespace fs = std::filesystem;

namespace {

PredictionRecord at_distance(const LatLon& truth, double d, double bearing = 90.0) {
  return {"r", "", forward(truth, Bearing(bearing), d), truth};
}

PredictionRecord invalid(const LatLon& truth) { return {"bad", "nope", std::nullopt, truth}; }

class TablePredictor : public Predictor {
 public:
  explicit TablePredictor(std::map<std::string, std::string> table) : table_(std::move(table)) {}
  std::string name() const override { return "table"; }
  std::string predict(const std::string& query) const override { return table_.at(query); }

 private:
  std::map<std::string, std::string> table_;
};

std::string random_text(std::mt19937_64& rng, const std::string& chars, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, chars.size() - 1);
  std::string s;
  for (int i = len(rng); i > 0; --i) s.push_back(chars[pick(rng)]);
  return s;
}

}  // namespace

TEST_CASE("worked example") {
  const LatLon t{39.98, 116.30};
  const std::vector<PredictionRecord> records{at_distance(t, 50), at_distance(t, 150), at_distance(t, 600)};
  const MetricsReport r = compute_metrics(records);
  CHECK(std::abs(r.add_m - 800.0 / 3.0) <= 1e-6);
  CHECK(r.acc(100) == 1.0 / 3.0);
  CHECK(r.acc(200) == 2.0 / 3.0);
  CHECK(r.acc(500) == 2.0 / 3.0);
  CHECK(r.ec == 0);
  CHECK(r.n == 3);
}

TEST_CASE("exact and invalid predictions") {
  const LatLon t{39.98, 116.30};
  const std::vector<PredictionRecord> exact(5, PredictionRecord{"x", "", t, t});
  const MetricsReport e = compute_metrics(exact);
  CHECK(e.add_m == 0.0);
  for (const auto& [k, v] : e.acc_at) CHECK(v == 1.0);
  CHECK(e.ec == 0);

  std::vector<PredictionRecord> mixed(3, PredictionRecord{"x", "", t, t});
  mixed.push_back(invalid(t));
  const MetricsReport m = compute_metrics(mixed);
  CHECK(m.ec == 1);
  CHECK(m.n == 4);
  CHECK(m.acc(500) == 0.75);
  CHECK(m.add_m == 0.0);
  const MetricsReport charged = compute_metrics(mixed, kDefaultThresholds, {kMaxGeodesicDistance});
  CHECK(charged.add_m == doctest::Approx(kMaxGeodesicDistance / 4.0).epsilon(1e-12));

  const std::vector<PredictionRecord> none{invalid(t), invalid(t)};
  const MetricsReport all_bad = compute_metrics(none);
  CHECK(std::isnan(all_bad.add_m));
  CHECK(to_json(all_bad).at("add_m").is_null());
  CHECK(all_bad.ec == 2);
  CHECK(all_bad.acc(100) == 0.0);

  CHECK_THROWS_AS(compute_metrics(std::vector<PredictionRecord>{}), InvalidArgument);
  const PredictionRecord made = make_record("id", "w x 4 e j 8 m d t", t);
  REQUIRE(made.pred.has_value());
  CHECK(*made.pred == centroid(decode(Geohash::parse("wx4ej8mdt"))));
  CHECK_FALSE(make_record("id", "wx4ej8md", t).pred.has_value());
}

TEST_CASE("metrics equal a brute-force recomputation") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> size(1, 40);
  std::uniform_real_distribution<double> dist(0.0, 1200.0);
  std::uniform_real_distribution<double> bearing(0.0, 360.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-180.0, 180.0);
  const std::vector<double> thresholds{50.0, 100.0, 200.0, 500.0, 1000.0};
  for (int set = 0; set < 1000; ++set) {
    std::vector<PredictionRecord> records;
    for (int i = size(rng); i > 0; --i) {
      const LatLon truth{lat(rng), lon(rng)};
      if (coin(rng) < 0.2) {
        records.push_back(invalid(truth));
      } else {
        records.push_back(at_distance(truth, dist(rng), bearing(rng)));
      }
    }
    const std::optional<double> charge = coin(rng) < 0.5 ? std::nullopt : std::optional<double>(5000.0);
    const MetricsReport r = compute_metrics(records, thresholds, {charge});
    const oracle::MetricsOracle o = oracle::metrics(records, thresholds, charge);
    REQUIRE(r.ec == o.ec);
    REQUIRE(r.n == static_cast<long>(records.size()));
    if (std::isnan(o.add)) {
      REQUIRE(std::isnan(r.add_m));
    } else {
      REQUIRE(r.add_m == doctest::Approx(o.add).epsilon(1e-12));
    }
    REQUIRE(r.acc_at.size() == thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      REQUIRE(r.acc_at[k].first == thresholds[k]);
      REQUIRE(r.acc_at[k].second == o.acc[k]);
      if (k > 0) REQUIRE(r.acc_at[k].second >= r.acc_at[k - 1].second);
    }
  }
}

TEST_CASE("report JSON layout") {
  const LatLon t{39.98, 116.30};
  const std::vector<PredictionRecord> records{at_distance(t, 50), invalid(t)};
  const nlohmann::json j = geoseq::to_json(compute_metrics(records), nlohmann::json{{"seed", 3}});
  CHECK(j.at("acc").at("100") == 0.5);
  CHECK(j.at("acc").contains("200"));
  CHECK(j.at("acc").contains("500"));
  CHECK(j.at("ec") == 1);
  CHECK(j.at("n") == 2);
  CHECK(j.at("config_echo").at("seed") == 3);
  const nlohmann::json row = to_json(records[1]);
  CHECK(row.at("valid") == false);
  CHECK(row.at("pred_lat").is_null());
}

TEST_CASE("edit distance") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("same", "same") == 0);
  std::mt19937_64 rng(32);
  for (int i = 0; i < 2000; ++i) {
    const std::string a = random_text(rng, "abc", 12), b = random_text(rng, "abc", 12);
    REQUIRE(edit_distance(a, b) == oracle::levenshtein(a, b));
  }
}

TEST_CASE("bigram cosine") {
  CHECK(cosine(bigram_vector("central library"), bigram_vector("central library")) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(bigram_vector("abab"), bigram_vector("xyxy")) == 0.0);
  CHECK(cosine(bigram_vector("a"), bigram_vector("abc")) == 0.0);
  std::mt19937_64 rng(33);
  for (int i = 0; i < 2000; ++i) {
    const std::string a = random_text(rng, "abcd ", 15), b = random_text(rng, "abcd ", 15);
    REQUIRE(cosine(bigram_vector(a), bigram_vector(b)) == doctest::Approx(oracle::bigram_cosine(a, b)).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("levenshtein baseline") {
  const std::vector<Poi> pois{{2, "Jade Cafe", "No.5 Suzhou Road, Oakwood District", {39.96, 116.31}},
                              {1, "Jade Cafx", "No.9 Suzhou Road, Oakwood District", {39.97, 116.32}},
                              {3, "Grand Hotel", "No.1 Haidian Road, Lakeview District", {39.99, 116.33}}};
  CHECK(levenshtein_baseline("Grand Hotel", pois) == pois[2].location);
  CHECK(levenshtein_baseline("no.1 haidian road, lakeview district", pois) == pois[2].location);
  // "Jade Cafz" is one edit from both cafes; the lower id wins.
  CHECK(levenshtein_baseline("Jade Cafz", pois) == pois[1].location);
  CHECK(vector_baseline("Grand Hotel", pois, 1, false) == pois[2].location);
}

TEST_CASE("top-5 rerank equals the brute-force ordering") {
  std::vector<Poi> pois;
  const std::vector<std::string> words{"jade", "cafe", "grand", "hotel", "suzhou", "road", "park", "bank", "tower", "mall"};
  std::mt19937_64 rng(34);
  for (int i = 0; i < 5; ++i) {
    const auto id = static_cast<std::uint64_t>(5 - i);
    pois.push_back({id, words[rng() % 10] + " " + words[rng() % 10], "no." + std::to_string(i) + " " + words[rng() % 10] + " road",
                    {39.9 + 0.01 * i, 116.3}});
  }
  std::vector<std::pair<std::string, LatLon>> entries;
  std::vector<Poi> sorted = pois;
  std::sort(sorted.begin(), sorted.end(), [](const Poi& a, const Poi& b) { return a.id < b.id; });
  for (const auto& p : sorted) {
    entries.push_back({ascii_lower(p.name), p.location});
    entries.push_back({ascii_lower(p.address), p.location});
  }
  const RetrievalIndex index(pois);
  REQUIRE(index.entries().size() == 10);
  for (std::size_t i = 0; i < entries.size(); ++i) REQUIRE(index.entries()[i].text == entries[i].first);

  for (int q = 0; q < 500; ++q) {
    const std::string query = words[rng() % 10] + random_text(rng, "aeiou rt", 6) + words[rng() % 10];
    std::vector<std::size_t> order(entries.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> cos;
    for (const auto& e : entries) cos.push_back(oracle::bigram_cosine(query, e.first));
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (cos[a] != cos[b]) return cos[a] > cos[b];
      return a < b;
    });
    CHECK(index.vector(query, 1, false) == entries[order[0]].second);
    order.resize(5);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto da = oracle::levenshtein(query, entries[a].first), db = oracle::levenshtein(query, entries[b].first);
      if (da != db) return da < db;
      return a < b;
    });
    REQUIRE(index.vector(query, 5, true) == entries[order[0]].second);
  }
}

TEST_CASE("evaluation harness") {
  std::vector<Sample> samples;
  std::map<std::string, std::string> truth_table, junk_table;
  for (int i = 0; i < 30; ++i) {
    const LatLon p{39.95 + 0.001 * i, 116.30 + 0.0007 * i};
    samples.push_back(make_sample("s" + std::to_string(i), "query " + std::to_string(i), p, SampleKind::base));
    truth_table[samples.back().input] = encode(p, 9).spaced();
    junk_table[samples.back().input] = "no hash here";
  }
  const EvalResult perfect = run_eval(TablePredictor(truth_table), samples);
  CHECK(perfect.report.add_m <= 3.4);
  CHECK(perfect.report.acc(100) == 1.0);
  CHECK(perfect.records.size() == 30);

  const EvalResult junk = run_eval(TablePredictor(junk_table), samples);
  CHECK(junk.report.ec == 30);
  CHECK(junk.report.acc(500) == 0.0);

  const fs::path dir = fs::temp_directory_path() / "geoseq_test_metrics";
  fs::create_directories(dir);
  write_eval_outputs(perfect, dir / "a.json", dir / "a.jsonl", {{"k", 1}});
  write_eval_outputs(run_eval(TablePredictor(truth_table), samples), dir / "b.json", dir / "b.jsonl", {{"k", 1}});
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.jsonl") == slurp(dir / "b.jsonl"));
  CHECK_THROWS_AS(write_eval_outputs(perfect, dir / "missing" / "x.json", "", nullptr), IoError);

  CHECK(parse_baseline("lev") == BaselineKind::levenshtein);
  CHECK(parse_baseline("vec1") == BaselineKind::vector_top1);
  CHECK(parse_baseline("vec5r") == BaselineKind::vector_top5_rerank);
  CHECK_THROWS_AS(parse_baseline("bm25"), InvalidArgument);

  std::vector<Poi> pois;
  std::vector<Sample> by_name;
  for (int i = 0; i < 10; ++i) {
    pois.push_back({static_cast<std::uint64_t>(i + 1), "Place " + std::string(1, static_cast<char>('A' + i)) + " Hall",
                    "No." + std::to_string(i) + " Test Road", {39.95 + 0.003 * i, 116.30}});
    by_name.push_back(make_sample("n" + std::to_string(i), pois.back().name, pois.back().location, SampleKind::base));
  }
  for (auto kind : {BaselineKind::levenshtein, BaselineKind::vector_top1, BaselineKind::vector_top5_rerank}) {
    const BaselinePredictor b(kind, pois);
    CHECK(b.name().find("simplified") != std::string::npos);
    CHECK(run_eval(b, by_name).report.acc(100) == 1.0);
  }
}
