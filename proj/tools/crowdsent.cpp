// crowdsent: command-line front end for the classification, ranking and
// trend pipeline. Exit codes: 0 success, 1 usage, 2 data, 3 numeric.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crowdsent/corpus.hpp"
#include "crowdsent/error.hpp"
#include "crowdsent/evaluation.hpp"
#include "crowdsent/pipeline.hpp"
#include "crowdsent/prediction.hpp"
#include "crowdsent/synth.hpp"

namespace fs = std::filesystem;
using namespace crowdsent;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string bundle;
  std::string features;
  std::string model;
  std::string out;
  std::vector<std::string> settings;

  std::string input;
  std::string schema = "raw";
  std::string registry;
  std::string report;
  std::string registry_out;
  std::string expect_hash;
  std::string mode = "half";
  std::size_t top = 10;
  std::string bucket = "hour";
  std::vector<std::int64_t> event_starts;
  std::vector<std::string> outcomes;
  std::string winners;
  std::string spec;
};

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + o.out + "'");
  out << text;
}

void emit_json(const Options& o, const nlohmann::json& j) { emit(o, j.dump(2) + "\n"); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("'" + path + "' is not valid JSON: " + e.what());
  }
}

Schema parse_schema(const std::string& s) {
  if (s == "raw") return Schema::raw;
  if (s == "annotated") return Schema::annotated;
  throw UsageError("unknown schema '" + s + "' (expected raw or annotated)");
}

EventRegistry registry_or_empty(const Options& o) {
  if (!o.registry.empty()) return load_registry(o.registry);
  if (parse_schema(o.schema) == Schema::annotated) {
    throw UsageError("--registry is required for annotated input");
  }
  return {};
}

EventRegistry require_registry(const Options& o) {
  if (o.registry.empty()) throw UsageError("--registry is required");
  return load_registry(o.registry);
}

std::vector<AnnotatedTweet> load_annotated(const std::string& path, const EventRegistry& r) {
  return std::get<std::vector<AnnotatedTweet>>(load_corpus(path, Schema::annotated, r));
}

std::vector<Tweet> load_texts(const Options& o, const EventRegistry& r) {
  const auto corpus = load_corpus(o.input, parse_schema(o.schema), r);
  if (const auto* raw = std::get_if<std::vector<Tweet>>(&corpus)) return *raw;
  std::vector<Tweet> out;
  for (const auto& t : std::get<std::vector<AnnotatedTweet>>(corpus)) out.push_back(t.tweet);
  return out;
}

std::string jsonl(const auto& tweets) {
  std::ostringstream s;
  write_jsonl(s, tweets);
  return s.str();
}

PipelineConfig build_config(const Options& o) {
  PipelineConfig c;
  if (!o.config.empty()) apply_config_file(c, o.config);
  // Flags win over the config file.
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) c.seed = *o.seed;
  if (!o.features.empty()) c.features = parse_bundle(o.features);
  if (!o.model.empty()) c.model = parse_classifier_kind(o.model);
  c.validate();
  return c;
}

std::optional<std::uint64_t> parse_hash(const std::string& s) {
  if (s.empty()) return std::nullopt;
  std::size_t used = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(s, &used, 16);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw UsageError("--expect-hash must be a hex string");
  return v;
}

Pipeline require_bundle(const Options& o) {
  if (o.bundle.empty()) throw UsageError("--bundle is required");
  return load_bundle(o.bundle, parse_hash(o.expect_hash));
}

std::vector<TimedPrediction> timed(const std::vector<AnnotatedTweet>& preds) {
  std::vector<TimedPrediction> out;
  for (const auto& p : preds) out.push_back({{p.target, p.sentiment}, p.tweet.timestamp});
  return out;
}

// Subcommands ----------------------------------------------------------------

void run_ingest(const Options& o) {
  const auto registry = registry_or_empty(o);
  const auto corpus = load_corpus(o.input, parse_schema(o.schema), registry);
  emit(o, std::visit([](const auto& tweets) { return jsonl(tweets); }, corpus));
}

void run_clean(const Options& o) {
  const auto registry = registry_or_empty(o);
  auto corpus = load_corpus(o.input, parse_schema(o.schema), registry);
  const auto [text, report] = std::visit(
      [](auto tweets) {
        auto [kept, rep] = preprocess(std::move(tweets));
        return std::pair{jsonl(kept), rep};
      },
      std::move(corpus));
  emit(o, text);
  const auto rep = to_json(report).dump(2) + "\n";
  if (o.report.empty()) {
    std::cerr << rep;
  } else {
    write_file(o.report, rep);
  }
}

void run_featurize(const Options& o) {
  const auto registry = registry_or_empty(o);
  const auto tweets = load_texts(o, registry);
  std::vector<TokenSequence> tokens;
  for (const auto& t : tweets) tokens.push_back(prepare_tokens(t.text));

  FeatureExtractor extractor;
  std::vector<SparseVector> xs;
  if (!o.bundle.empty()) {
    const auto p = require_bundle(o);
    if (p.config.model == ClassifierKind::elman) {
      throw UsageError("bundle holds an Elman model, which has no feature vectors");
    }
    extractor = p.features;
    for (const auto& t : tokens) xs.push_back(extractor.transform(t));
  } else {
    const auto c = build_config(o).resolved();
    auto fitted = fit_features(tokens, c, load_lexicon(c), false);
    extractor = std::move(fitted.extractor);
    xs = std::move(fitted.train);
  }
  std::ostringstream s;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : xs[i].entries()) entries.push_back({e.index, e.value});
    s << nlohmann::json{{"id", tweets[i].id}, {"dimension", xs[i].dimension()},
                        {"features", entries}}
             .dump()
      << '\n';
  }
  emit(o, s.str());
  if (!o.registry_out.empty()) write_file(o.registry_out, extractor.registry().dump(2) + "\n");
}

void run_train(const Options& o) {
  if (o.bundle.empty()) throw UsageError("--bundle is required");
  const auto registry = require_registry(o);
  const auto config = build_config(o);
  const auto train = load_annotated(o.input, registry);
  const auto pipeline = train_pipeline(train, registry, config);
  save_bundle(pipeline, o.bundle);
  nlohmann::json summary = {{"event_id", registry.event_id},
                            {"training_tweets", train.size()},
                            {"config", pipeline.config.to_json()}};
  if (pipeline.config.model != ClassifierKind::elman) {
    summary["feature_registry"] = pipeline.features.registry();
  }
  emit_json(o, summary);
}

void run_predict(const Options& o) {
  const auto p = require_bundle(o);
  const auto tweets = load_texts(o, p.registry);
  const auto outputs = p.predict_all(tweets);
  std::vector<AnnotatedTweet> preds;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    preds.push_back({tweets[i], outputs[i].category.target, outputs[i].category.sentiment});
  }
  emit(o, jsonl(preds));
}

void run_evaluate(const Options& o) {
  nlohmann::json reports = nlohmann::json::array();
  if (!o.bundle.empty()) {
    const auto p = require_bundle(o);
    const auto test = load_annotated(o.input, p.registry);
    const auto space = LabelSpace::from_registry(p.registry);
    std::vector<Tweet> tweets;
    std::vector<LabelSet> truth, pred;
    for (const auto& t : test) {
      tweets.push_back(t.tweet);
      truth.push_back(to_multilabel({t.target, t.sentiment}, space));
    }
    for (const auto& out : p.predict_all(tweets)) pred.push_back(out.labels);
    reports.push_back(hamming_report(truth, pred, space).to_json());
  } else {
    if (o.outcomes.empty() || o.winners.empty()) {
      throw UsageError("evaluate needs --bundle with --input, or --outcome with --winners");
    }
    const auto winners = read_json(o.winners);
    std::vector<RankedList> lists;
    for (const auto& path : o.outcomes) {
      const auto outcome = read_json(path);
      RankedList list;
      try {
        list.query_id = outcome.at("event_id").get<std::string>();
        const auto& ranked = outcome.at("ranked");
        const auto k = outcome.at("k").get<std::size_t>();
        for (std::size_t i = 0; i < k && i < ranked.size(); ++i) {
          list.items.push_back(ranked[i].at("target").get<std::string>());
        }
        if (!winners.contains(list.query_id)) {
          throw DataError("no winners listed for event '" + list.query_id + "'");
        }
        for (const auto& w : winners.at(list.query_id)) list.relevant.insert(w.get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed outcome or winners file: " + std::string(e.what()));
      }
      lists.push_back(std::move(list));
    }
    reports.push_back(f1_report(lists).to_json());
    reports.push_back(map_report(lists).to_json());
  }
  emit_json(o, {{"reports", reports}});
}

void run_outcome(const Options& o) {
  const auto registry = require_registry(o);
  const auto preds = timed(load_annotated(o.input, registry));
  RankMode mode;
  if (o.mode == "half") {
    mode = RankMode::half_list();
  } else if (o.mode == "top") {
    mode = RankMode::top_n(o.top);
  } else {
    throw UsageError("unknown --mode '" + o.mode + "' (expected half or top)");
  }
  emit_json(o, rank_outcome(aggregate(preds), registry, mode).to_json());
}

void run_trends(const Options& o) {
  const auto registry = require_registry(o);
  const auto preds = timed(load_annotated(o.input, registry));
  emit(o, trend_series(preds, parse_bucketing(o.bucket), registry, o.event_starts).to_csv());
}

void run_influence(const Options& o) {
  const auto registry = require_registry(o);
  const auto preds = timed(load_annotated(o.input, registry));
  emit_json(o, influence_json(expert_influence(preds, registry), registry));
}

void run_synth(const Options& o) {
  auto spec = parse_synth_spec(read_json(o.spec));
  if (o.seed) spec.seed = *o.seed;
  emit(o, jsonl(generate_synthetic(spec)));
  if (!o.registry_out.empty()) write_file(o.registry_out, to_json(spec.registry()).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"crowdsent: tweet (target, sentiment) classification and crowd outcome ranking"};
  app.require_subcommand(1);
  Options o;

  const auto add_out = [&](CLI::App* c) {
    c->add_option("--out", o.out, "Output file (default stdout)");
  };
  const auto add_input = [&](CLI::App* c, bool required) {
    auto* opt = c->add_option("--input", o.input, "Corpus file (.jsonl or .csv)");
    if (required) opt->required();
    c->add_option("--schema", o.schema, "raw or annotated")->capture_default_str();
    c->add_option("--registry", o.registry, "Event registry JSON");
  };
  const auto add_model_flags = [&](CLI::App* c) {
    c->add_option("--config", o.config, "Config file (key = value, [section])");
    c->add_option("--seed", o.seed, "Master seed");
    c->add_option("--features", o.features, "Feature bundle f1..f6");
    c->add_option("--model", o.model, "nb, svm, elman or rakel");
    c->add_option("--set", o.settings, "Config override key=value (repeatable)");
  };
  const auto add_bundle = [&](CLI::App* c) {
    c->add_option("--bundle", o.bundle, "Model bundle path");
    c->add_option("--expect-hash", o.expect_hash, "Required feature registry hash (hex)");
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and rewrite it as JSONL");
  add_input(ingest, true);
  add_out(ingest);

  auto* clean = app.add_subcommand("clean", "Normalize texts and drop filtered tweets");
  add_input(clean, true);
  add_out(clean);
  clean->add_option("--report", o.report, "Filter report JSON (default stderr)");

  auto* featurize = app.add_subcommand("featurize", "Write feature vectors as JSONL");
  add_input(featurize, true);
  add_model_flags(featurize);
  add_bundle(featurize);
  add_out(featurize);
  featurize->add_option("--registry-out", o.registry_out, "Feature registry JSON output");

  auto* train = app.add_subcommand("train", "Fit features and a classifier into a bundle");
  add_input(train, true);
  add_model_flags(train);
  add_bundle(train);
  add_out(train);

  auto* predict = app.add_subcommand("predict", "Label tweets with a trained bundle");
  add_input(predict, true);
  add_bundle(predict);
  add_out(predict);

  auto* evaluate = app.add_subcommand("evaluate", "Hamming loss, or mean F1 and MAP of outcomes");
  add_input(evaluate, false);
  add_bundle(evaluate);
  add_out(evaluate);
  evaluate->add_option("--outcome", o.outcomes, "Outcome JSON files, one per event");
  evaluate->add_option("--winners", o.winners, "JSON object: event_id -> true winners");

  auto* outcome = app.add_subcommand("outcome", "Rank participants by predicted sentiment");
  add_input(outcome, true);
  add_out(outcome);
  outcome->add_option("--mode", o.mode, "half or top")->capture_default_str();
  outcome->add_option("--top", o.top, "List size for --mode top")->capture_default_str();

  auto* trends = app.add_subcommand("trends", "Volume and sentiment per time bucket (CSV)");
  add_input(trends, true);
  add_out(trends);
  trends->add_option("--bucket", o.bucket, "hour, day or event")->capture_default_str();
  trends->add_option("--event-starts", o.event_starts, "Event bucket boundaries")
      ->delimiter(',');

  auto* influence = app.add_subcommand("influence", "Sentiment before and after the announcement");
  add_input(influence, true);
  add_out(influence);

  auto* synth = app.add_subcommand("synth", "Generate a labelled synthetic corpus");
  synth->add_option("--spec", o.spec, "Synthetic corpus spec JSON")->required();
  synth->add_option("--seed", o.seed, "Overrides the seed in --spec");
  synth->add_option("--registry-out", o.registry_out, "Registry JSON output");
  add_out(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::usage);
  }

  try {
    if (*ingest) run_ingest(o);
    if (*clean) run_clean(o);
    if (*featurize) run_featurize(o);
    if (*train) run_train(o);
    if (*predict) run_predict(o);
    if (*evaluate) run_evaluate(o);
    if (*outcome) run_outcome(o);
    if (*trends) run_trends(o);
    if (*influence) run_influence(o);
    if (*synth) run_synth(o);
  } catch (const Error& e) {
    std::cerr << "crowdsent: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "crowdsent: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
