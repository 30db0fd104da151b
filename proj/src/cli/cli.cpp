#include "geoseq/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <CLI11.hpp>

#include "geoseq/beam_search.hpp"
#include "geoseq/errors.hpp"
#include "geoseq/evaluation.hpp"
#include "geoseq/model_io.hpp"
#include "geoseq/seeding.hpp"

namespace geoseq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::vector<Sample> read_samples(const std::vector<std::string>& paths) {
  std::vector<Sample> all;
  for (const auto& p : paths) {
    auto part = read_samples_jsonl(p);
    all.insert(all.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return all;
}

// Appends JSON lines to an optional log file and mirrors them to stdout.
class EventLog {
 public:
  EventLog(std::ostream& out, const std::string& path) : out_(out), path_(path) {}

  void header(const json& config_echo) { lines_ += json{{"event", "config"}, {"config_echo", config_echo}}.dump() + "\n"; }

  void emit(const json& line) {
    const std::string text = line.dump();
    out_ << text << '\n';
    lines_ += text + "\n";
  }

  void flush() const {
    if (!path_.empty()) write_text(path_, lines_);
  }

 private:
  std::ostream& out_;
  std::string path_;
  std::string lines_;
};

void apply_sources(BaseSources& sources, const std::string& list) {
  sources.name = sources.address = sources.search_query = false;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "name") {
      sources.name = true;
    } else if (item == "address") {
      sources.address = true;
    } else if (item == "query") {
      sources.search_query = true;
    } else {
      throw InvalidArgument("unknown source '" + item + "' (expected name, address, query)");
    }
  }
  if (!sources.name && !sources.address && !sources.search_query) throw InvalidArgument("no sources enabled");
}

json candidate_json(int rank, const Geohash& g, double log_prob) {
  const LatLon c = centroid(decode(g));
  return {{"rank", rank}, {"geohash", g.text()}, {"lat", c.lat}, {"lon", c.lon}, {"log_prob", log_prob}};
}

std::vector<ScoredGeohash> decode_query(const PolicyModel& model, const std::string& query, int beam, int top) {
  if (top < 1) throw InvalidArgument("--top must be at least 1");
  if (beam == 0 && top > 1) beam = top;
  if (beam < 0) throw InvalidArgument("--beam must be non-negative");
  if (beam > 0 && top > beam) throw InvalidArgument("--top must not exceed --beam");
  const QueryFeatures feats = featurize(query, model.buckets());
  if (beam == 0) {
    const Rollout r = greedy_decode(model, feats);
    return {{tokens_to_geohash(r.tokens), r.total_log_prob}};
  }
  return beam_search(model, feats, beam, top);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::function<void()> action;

  CLI::App app{"Geohash sequence geocoder: data, training, decoding and evaluation", "geoseq"};
  app.require_subcommand(1);

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", cfg.seed, "Run seed (falls back to GEOSEQ_SEED)")->envname("GEOSEQ_SEED");
  };

  // geohash
  auto* geohash_cmd = app.add_subcommand("geohash", "Encode or decode geohashes");
  geohash_cmd->require_subcommand(1);
  double lat = 0.0;
  double lon = 0.0;
  int len = kDefaultGeohashLength;
  auto* enc = geohash_cmd->add_subcommand("encode", "Print the geohash of a coordinate");
  enc->add_option("--lat", lat)->required();
  enc->add_option("--lon", lon)->required();
  enc->add_option("--len", len)->capture_default_str();
  enc->callback([&] {
    action = [&] { out << encode(make_latlon(lat, lon), len).text() << '\n'; };
  });
  std::string hash_text;
  auto* dec = geohash_cmd->add_subcommand("decode", "Print the cell bounds and centroid as JSON");
  dec->add_option("hash", hash_text)->required();
  dec->callback([&] {
    action = [&] {
      const Geohash g = Geohash::parse(hash_text);
      const BBox b = decode(g);
      const LatLon c = centroid(b);
      const json doc{{"geohash", g.text()},
                     {"bbox", {{"lat_min", b.lat_min}, {"lat_max", b.lat_max}, {"lon_min", b.lon_min}, {"lon_max", b.lon_max}}},
                     {"centroid", {{"lat", c.lat}, {"lon", c.lon}}}};
      out << doc.dump() << '\n';
    };
  });

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "Synthesize POIs and build training data");
  dataset_cmd->require_subcommand(1);
  std::string bbox_text;
  std::string out_path;
  auto* synth = dataset_cmd->add_subcommand("synth", "Write a synthetic street-grid city as POI JSONL");
  synth->add_option("--n", cfg.synth_pois)->capture_default_str();
  synth->add_option("--bbox", bbox_text, "lat_min,lon_min,lat_max,lon_max");
  synth->add_option("--out", out_path)->required();
  add_seed(synth);
  synth->callback([&] {
    action = [&] {
      cfg.command = "dataset synth";
      if (!bbox_text.empty()) cfg.synth_bbox = parse_bbox(bbox_text);
      if (cfg.synth_pois < 1) throw InvalidArgument("--n must be positive");
      cfg.paths["out"] = {out_path};
      const auto pois = synth_city(cfg.synth_pois, cfg.synth_bbox, derive_seed(cfg.seed, "dataset"));
      write_pois_jsonl(out_path, pois);
      write_json(out_path + ".manifest.json",
                 {{"config_echo", to_json(cfg)}, {"files", {{fs::path(out_path).filename().string(), pois.size()}}}});
    };
  });

  std::string pois_path;
  std::string out_dir;
  std::string directions = "cardinal";
  std::string test_directions = "cardinal";
  std::string sources = "name,address";
  std::string output_format = "geohash";
  auto* build = dataset_cmd->add_subcommand("build", "Build base and anchor-offset splits from POIs");
  build->add_option("--pois", pois_path)->required();
  build->add_option("--out-dir", out_dir)->required();
  build->add_option("--directions", directions, "cardinal|intercardinal|both")->capture_default_str();
  build->add_option("--test-directions", test_directions, "Directions for the offset test split")
      ->capture_default_str();
  build->add_option("--offset-min", cfg.dataset.offsets.min_distance_m)->capture_default_str();
  build->add_option("--offset-max", cfg.dataset.offsets.max_distance_m)->capture_default_str();
  build->add_flag("--cot", cfg.dataset.cot, "Also write base_train_cot.jsonl");
  build->add_option("--sources", sources, "Comma list of name,address,query")->capture_default_str();
  build->add_option("--noise-prob", cfg.dataset.sources.noise_prob)->capture_default_str();
  build->add_option("--train-fraction", cfg.dataset.split.train_fraction)->capture_default_str();
  build->add_option("--radius", cfg.dataset.split.coverage_radius_m, "Test coverage radius in meters")
      ->capture_default_str();
  build->add_option("--output-format", output_format, "geohash|coordinates")->capture_default_str();
  add_seed(build);
  build->callback([&] {
    action = [&] {
      cfg.command = "dataset build";
      DatasetConfig& d = cfg.dataset;
      d.offsets.directions = parse_direction_set(directions);
      d.test_directions = parse_direction_set(test_directions);
      d.sources.output_format = parse_output_format(output_format);
      apply_sources(d.sources, sources);
      const std::uint64_t base_seed = derive_seed(cfg.seed, "dataset");
      d.sources.seed = derive_seed(base_seed, "sources");
      d.offsets.seed = derive_seed(base_seed, "offsets");
      d.split.seed = derive_seed(base_seed, "split");
      cfg.paths["pois"] = {pois_path};
      cfg.paths["out_dir"] = {out_dir};

      const auto pois = read_pois_jsonl(pois_path);
      const DatasetBundle bundle = build_dataset(pois, d);
      ensure_dir(out_dir);
      const fs::path dir(out_dir);
      json files;
      auto put = [&](const std::string& name, std::span<const Sample> samples) {
        write_samples_jsonl(dir / name, samples);
        files[name] = samples.size();
      };
      put("base_train.jsonl", bundle.base_train);
      put("base_test.jsonl", bundle.base_test);
      put("anchor_offset_train.jsonl", bundle.offset_train);
      put("anchor_offset_test.jsonl", bundle.offset_test);
      if (d.cot) {
        std::vector<json> rows;
        for (const auto& r : bundle.cot_train) rows.push_back(to_json(r));
        write_jsonl(dir / "base_train_cot.jsonl", rows);
        files["base_train_cot.jsonl"] = rows.size();
      }
      write_json(dir / "manifest.json", {{"config_echo", to_json(cfg)}, {"files", files}});
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Supervised (sft) or reinforcement (grpo) training");
  train_cmd->require_subcommand(1);
  std::vector<std::string> data_paths;
  std::string log_path;
  double until_acc = 0.0;
  auto* sft = train_cmd->add_subcommand("sft", "Maximum-likelihood training on sample targets");
  sft->add_option("--data", data_paths, "Sample JSONL files")->required();
  sft->add_option("--out", out_path)->required();
  sft->add_option("--epochs", cfg.sft.epochs, "Epochs (upper bound with --until-acc)")->capture_default_str();
  sft->add_option("--lr", cfg.sft.learning_rate)->capture_default_str();
  sft->add_option("--buckets", cfg.buckets)->capture_default_str();
  auto* until_opt =
      sft->add_option("--until-acc", until_acc, "Stop once greedy Acc@100 on the training data reaches this");
  sft->add_option("--log", log_path, "JSON-lines training log");
  add_seed(sft);
  sft->callback([&] {
    action = [&] {
      cfg.command = "train sft";
      if (until_opt->count() > 0) cfg.sft_until_acc = until_acc;
      if (cfg.sft.epochs < 1) throw InvalidArgument("--epochs must be positive");
      if (cfg.buckets < 1) throw InvalidArgument("--buckets must be positive");
      cfg.paths["data"] = data_paths;
      cfg.paths["out"] = {out_path};
      if (!log_path.empty()) cfg.paths["log"] = {log_path};
      const json echo = to_json(cfg);

      const auto samples = read_samples(data_paths);
      PolicyModel model(cfg.buckets, cfg.geohash_length);
      const auto examples = mle_examples(model, samples);
      EventLog log(out, log_path);
      log.header(echo);
      const std::uint64_t sft_seed = derive_seed(cfg.seed, "sft");
      for (int epoch = 0; epoch < cfg.sft.epochs; ++epoch) {
        MleOptions o = cfg.sft;
        o.epochs = 1;
        o.seed = derive_seed(sft_seed, static_cast<std::uint64_t>(epoch), 0);
        const MleReport report = mle_train(model, examples, o);
        json line{{"event", "epoch"}, {"epoch", epoch}, {"mean_log_likelihood", report.epoch_mean_log_likelihood.at(0)}};
        bool done = false;
        if (cfg.sft_until_acc) {
          const double acc = run_eval(PolicyPredictor(model, DecodeMode::greedy()), samples).report.acc(100.0);
          line["train_acc100"] = acc;
          done = acc >= *cfg.sft_until_acc;
        }
        log.emit(line);
        if (done) break;
      }
      save_model(model, out_path, echo);
      log.flush();
    };
  });

  std::string model_in;
  auto* grpo = train_cmd->add_subcommand("grpo", "Group-relative policy optimization from a starting model");
  grpo->add_option("--data", data_paths, "Sample JSONL files providing prompts")->required();
  grpo->add_option("--model-in", model_in)->required();
  grpo->add_option("--out", out_path)->required();
  grpo->add_option("--group-size", cfg.grpo.group_size)->capture_default_str();
  grpo->add_option("--epochs", cfg.grpo.epochs)->capture_default_str();
  grpo->add_option("--clip", cfg.grpo.step.clip_eps)->capture_default_str();
  grpo->add_option("--kl", cfg.grpo.step.kl_coeff)->capture_default_str();
  grpo->add_option("--lr", cfg.grpo.step.learning_rate)->capture_default_str();
  grpo->add_option("--batch-size", cfg.grpo.batch_size)->capture_default_str();
  grpo->add_option("--steps-per-batch", cfg.grpo.steps_per_batch)->capture_default_str();
  grpo->add_option("--temperature", cfg.grpo.temperature)->capture_default_str();
  grpo->add_option("--reward-threshold", cfg.reward.threshold)->capture_default_str();
  grpo->add_option("--reward-normalizer", cfg.reward.normalizer)->capture_default_str();
  grpo->add_option("--invalid-penalty", cfg.reward.invalid_penalty)->capture_default_str();
  grpo->add_option("--log", log_path, "JSON-lines training log");
  add_seed(grpo);
  grpo->callback([&] {
    action = [&] {
      cfg.command = "train grpo";
      if (cfg.grpo.group_size < 2) throw InvalidArgument("--group-size must be at least 2");
      if (cfg.grpo.epochs < 1) throw InvalidArgument("--epochs must be positive");
      if (cfg.grpo.batch_size < 1) throw InvalidArgument("--batch-size must be positive");
      if (cfg.grpo.steps_per_batch < 1) throw InvalidArgument("--steps-per-batch must be positive");
      if (!(cfg.grpo.temperature > 0.0)) throw InvalidArgument("--temperature must be positive");
      if (!(cfg.grpo.step.clip_eps >= 0.0)) throw InvalidArgument("--clip must be non-negative");
      cfg.reward.check();
      cfg.grpo.seed = derive_seed(cfg.seed, "rollout");
      cfg.paths["data"] = data_paths;
      cfg.paths["model_in"] = {model_in};
      cfg.paths["out"] = {out_path};
      if (!log_path.empty()) cfg.paths["log"] = {log_path};

      PolicyModel model = load_model(model_in);
      cfg.buckets = model.buckets();
      if (model.sequence_length() != cfg.geohash_length) {
        throw FormatError("model sequence length " + std::to_string(model.sequence_length()) +
                          " does not match geohash length " + std::to_string(cfg.geohash_length));
      }
      const json echo = to_json(cfg);
      const auto samples = read_samples(data_paths);
      if (samples.empty()) throw InvalidArgument("no prompts in --data");
      const auto prompts = grpo_prompts(model, samples);
      EventLog log(out, log_path);
      log.header(echo);
      grpo_train(model, prompts, cfg.grpo, cfg.reward, [&](const GrpoEpochStats& s) {
        log.emit({{"event", "epoch"},
                  {"epoch", s.epoch},
                  {"mean_reward", s.mean_reward},
                  {"mean_best_reward", s.mean_best_reward},
                  {"invalid_outputs", s.invalid_outputs},
                  {"rollouts", s.rollouts}});
      });
      save_model(model, out_path, echo);
      log.flush();
    };
  });

  // predict
  std::string model_path;
  std::string query;
  auto* predict = app.add_subcommand("predict", "Decode a query into ranked geohash candidates");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--query", query)->required();
  predict->add_option("--beam", cfg.beam_width, "Beam width; 0 decodes greedily")->capture_default_str();
  predict->add_option("--top", cfg.top_k)->capture_default_str();
  predict->callback([&] {
    action = [&] {
      const PolicyModel model = load_model(model_path);
      int rank = 0;
      for (const auto& c : decode_query(model, query, cfg.beam_width, cfg.top_k)) {
        out << candidate_json(rank++, c.geohash, c.log_prob).dump() << '\n';
      }
    };
  });

  // eval
  std::string baseline_name;
  std::string records_path;
  double invalid_distance = 0.0;
  auto* eval = app.add_subcommand("eval", "Score a model or retrieval baseline on labeled samples");
  auto* model_opt = eval->add_option("--model", model_path);
  auto* baseline_opt = eval->add_option("--baseline", baseline_name, "lev|vec1|vec5r");
  model_opt->excludes(baseline_opt);
  eval->add_option("--data", data_paths)->required();
  eval->add_option("--pois", pois_path, "POI JSONL for retrieval baselines");
  eval->add_option("--out", out_path, "Report JSON")->required();
  eval->add_option("--records", records_path, "Per-sample JSONL");
  eval->add_option("--beam", cfg.beam_width, "Beam width for the model; 0 decodes greedily")->capture_default_str();
  auto* invalid_opt = eval->add_option("--invalid-distance", invalid_distance,
                                       "Distance charged to invalid outputs in ADD (default: excluded)");
  eval->callback([&] {
    action = [&] {
      cfg.command = "eval";
      if (invalid_opt->count() > 0) cfg.invalid_distance_m = invalid_distance;
      cfg.paths["data"] = data_paths;
      cfg.paths["out"] = {out_path};
      if (!records_path.empty()) cfg.paths["records"] = {records_path};
      std::unique_ptr<Predictor> predictor;
      std::optional<PolicyModel> model;
      std::vector<Poi> pois;
      if (!baseline_name.empty()) {
        cfg.baseline = baseline_name;
        const BaselineKind kind = parse_baseline(baseline_name);
        if (pois_path.empty()) throw InvalidArgument("--baseline requires --pois");
        cfg.paths["pois"] = {pois_path};
        pois = read_pois_jsonl(pois_path);
        predictor = std::make_unique<BaselinePredictor>(kind, pois);
      } else if (!model_path.empty()) {
        if (cfg.beam_width < 0) throw InvalidArgument("--beam must be non-negative");
        cfg.paths["model"] = {model_path};
        model = load_model(model_path);
        cfg.buckets = model->buckets();
        predictor = std::make_unique<PolicyPredictor>(
            *model, cfg.beam_width > 0 ? DecodeMode::beam(cfg.beam_width) : DecodeMode::greedy());
      } else {
        throw InvalidArgument("one of --model or --baseline is required");
      }
      const auto samples = read_samples(data_paths);
      if (samples.empty()) throw InvalidArgument("no samples in --data");
      const EvalResult result = run_eval(*predictor, samples, kDefaultThresholds, {cfg.invalid_distance_m});
      json echo = to_json(cfg);
      echo["eval"]["predictor"] = predictor->name();
      write_eval_outputs(result, out_path, records_path, echo);
      json summary = to_json(result.report);
      summary.erase("config_echo");
      out << summary.dump() << '\n';
    };
  });

  // render
  int render_beam = 50;
  int render_top = 50;
  auto* render = app.add_subcommand("render", "Write beam candidates as a GeoJSON point collection");
  render->add_option("--model", model_path)->required();
  render->add_option("--query", query)->required();
  render->add_option("--beam", render_beam)->capture_default_str();
  render->add_option("--top", render_top)->capture_default_str();
  render->add_option("--out", out_path)->required();
  render->callback([&] {
    action = [&] {
      cfg.command = "render";
      cfg.beam_width = render_beam;
      cfg.top_k = render_top;
      if (render_beam < 1) throw InvalidArgument("--beam must be at least 1");
      cfg.paths["model"] = {model_path};
      cfg.paths["out"] = {out_path};
      const PolicyModel model = load_model(model_path);
      cfg.buckets = model.buckets();
      json features = json::array();
      int rank = 0;
      for (const auto& c : decode_query(model, query, render_beam, render_top)) {
        const LatLon p = centroid(decode(c.geohash));
        features.push_back({{"type", "Feature"},
                            {"geometry", {{"type", "Point"}, {"coordinates", {p.lon, p.lat}}}},
                            {"properties", {{"rank", rank++}, {"log_prob", c.log_prob}, {"geohash", c.geohash.text()}}}});
      }
      json doc{{"type", "FeatureCollection"}, {"query", query}, {"features", features}, {"config_echo", to_json(cfg)}};
      write_json(out_path, doc);
    };
  });

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.emplace_back("geoseq");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const IoError& e) {
    err << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace geoseq
