#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "crowdsent/error.hpp"
#include "crowdsent/pipeline.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto r = std::from_chars(value.data(), end, out);
  if (r.ec != std::errc{} || r.ptr != end) {
    throw UsageError("invalid value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

std::size_t as_size(std::string_view k, std::string_view v) {
  return parse_number<std::size_t>(k, v);
}
double as_double(std::string_view k, std::string_view v) { return parse_number<double>(k, v); }

using Setter = std::function<void(PipelineConfig&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"features", [](auto& c, auto, auto v) { c.features = parse_bundle(v); }},
      {"model", [](auto& c, auto, auto v) { c.model = parse_classifier_kind(v); }},
      {"seed", [](auto& c, auto k, auto v) { c.seed = parse_number<std::uint64_t>(k, v); }},
      {"min_count", [](auto& c, auto k, auto v) { c.min_count = as_size(k, v); }},
      {"threads", [](auto& c, auto k, auto v) { c.threads = as_size(k, v); }},
      {"lexicon", [](auto& c, auto, auto v) { c.lexicon = std::string(v); }},
      {"synonyms", [](auto& c, auto, auto v) { c.synonyms = std::string(v); }},
      {"pv.dims", [](auto& c, auto k, auto v) { c.pv.dims = as_size(k, v); }},
      {"pv.window", [](auto& c, auto k, auto v) { c.pv.window = as_size(k, v); }},
      {"pv.negatives", [](auto& c, auto k, auto v) { c.pv.negatives = as_size(k, v); }},
      {"pv.epochs", [](auto& c, auto k, auto v) { c.pv.epochs = as_size(k, v); }},
      {"pv.lr_start", [](auto& c, auto k, auto v) { c.pv.lr_start = as_double(k, v); }},
      {"pv.lr_end", [](auto& c, auto k, auto v) { c.pv.lr_end = as_double(k, v); }},
      {"pv.infer_steps", [](auto& c, auto k, auto v) { c.pv_infer_steps = as_size(k, v); }},
      {"lda.topics", [](auto& c, auto k, auto v) { c.lda.topics = as_size(k, v); }},
      {"lda.alpha", [](auto& c, auto k, auto v) { c.lda.alpha = as_double(k, v); }},
      {"lda.beta", [](auto& c, auto k, auto v) { c.lda.beta = as_double(k, v); }},
      {"lda.iterations", [](auto& c, auto k, auto v) { c.lda.iterations = as_size(k, v); }},
      {"lda.burn_in", [](auto& c, auto k, auto v) { c.lda.burn_in = as_size(k, v); }},
      {"lda.sample_every", [](auto& c, auto k, auto v) { c.lda.sample_every = as_size(k, v); }},
      {"lda.infer_iterations",
       [](auto& c, auto k, auto v) { c.lda_infer_iterations = as_size(k, v); }},
      {"infer_training",
       [](auto& c, auto k, auto v) {
         if (v != "true" && v != "false") {
           throw UsageError("invalid value '" + std::string(v) + "' for " + std::string(k));
         }
         c.infer_training = v == "true";
       }},
      {"nb.smoothing", [](auto& c, auto k, auto v) { c.nb_smoothing = as_double(k, v); }},
      {"svm.c", [](auto& c, auto k, auto v) { c.smo.C = as_double(k, v); }},
      {"svm.tol", [](auto& c, auto k, auto v) { c.smo.tol = as_double(k, v); }},
      {"svm.max_passes", [](auto& c, auto k, auto v) { c.smo.max_passes = as_size(k, v); }},
      {"elman.embedding", [](auto& c, auto k, auto v) { c.elman.embedding = as_size(k, v); }},
      {"elman.hidden", [](auto& c, auto k, auto v) { c.elman.hidden = as_size(k, v); }},
      {"elman.epochs", [](auto& c, auto k, auto v) { c.elman.epochs = as_size(k, v); }},
      {"elman.lr", [](auto& c, auto k, auto v) { c.elman.lr = as_double(k, v); }},
      {"elman.bptt_limit", [](auto& c, auto k, auto v) { c.elman.bptt_limit = as_size(k, v); }},
      {"elman.clip", [](auto& c, auto k, auto v) { c.elman.clip = as_double(k, v); }},
      {"rakel.k", [](auto& c, auto k, auto v) { c.rakel.k = as_size(k, v); }},
      {"rakel.m", [](auto& c, auto k, auto v) { c.rakel.m = as_size(k, v); }},
      {"rakel.threshold", [](auto& c, auto k, auto v) { c.rakel.threshold = as_double(k, v); }},
      {"rakel.base", [](auto& c, auto, auto v) { c.rakel.base.kind = parse_base_kind(v); }},
  };
  return table;
}

}  // namespace

ClassifierKind parse_classifier_kind(std::string_view s) {
  if (s == "nb") return ClassifierKind::nb;
  if (s == "svm") return ClassifierKind::svm;
  if (s == "elman") return ClassifierKind::elman;
  if (s == "rakel") return ClassifierKind::rakel;
  throw UsageError("unknown model '" + std::string(s) + "' (expected nb, svm, elman or rakel)");
}

std::string to_string(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::nb: return "nb";
    case ClassifierKind::svm: return "svm";
    case ClassifierKind::elman: return "elman";
    case ClassifierKind::rakel: return "rakel";
  }
  return "nb";
}

void PipelineConfig::validate() const {
  const bool dense = features == FeatureBundle::f5 || features == FeatureBundle::f6;
  if (model != ClassifierKind::elman && dense) {
    if (pv.dims == 0) throw UsageError("f5 and f6 need pv.dims > 0");
    if (pv_infer_steps == 0) throw UsageError("f5 and f6 need pv.infer_steps > 0");
    if (features == FeatureBundle::f6) {
      if (lda.topics == 0) throw UsageError("f6 needs lda.topics > 0");
      if (lda.sample_every == 0) throw UsageError("f6 needs lda.sample_every > 0");
      if (lda_infer_iterations == 0) throw UsageError("f6 needs lda.infer_iterations > 0");
    }
  }
  if (min_count == 0) throw UsageError("min_count must be at least 1");
  if (!(nb_smoothing > 0)) throw UsageError("nb.smoothing must be positive");
  if (!(smo.C > 0) || !(smo.tol > 0)) throw UsageError("svm.c and svm.tol must be positive");
  if (model == ClassifierKind::elman && (elman.hidden == 0 || elman.embedding == 0)) {
    throw UsageError("elman.hidden and elman.embedding must be positive");
  }
  if (model == ClassifierKind::rakel) {
    if (rakel.k == 0) throw UsageError("rakel.k must be at least 1");
    if (!(rakel.threshold >= 0 && rakel.threshold <= 1)) {
      throw UsageError("rakel.threshold must lie in [0, 1]");
    }
  }
}

PipelineConfig PipelineConfig::resolved() const {
  PipelineConfig c = *this;
  c.pv.seed = derive_seed(seed, "pv");
  c.lda.seed = derive_seed(seed, "lda");
  c.smo.seed = derive_seed(seed, "svm");
  c.elman.seed = derive_seed(seed, "elman");
  c.rakel.seed = derive_seed(seed, "rakel");
  c.rakel.base.nb_smoothing = nb_smoothing;
  c.rakel.base.smo = c.smo;
  c.rakel.threads = threads;
  // Lock-free PV updates are not reproducible.
  c.pv.threads = 1;
  return c;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json j;
  j["features"] = std::string(to_string(features));
  j["model"] = to_string(model);
  j["seed"] = seed;
  j["min_count"] = min_count;
  j["threads"] = threads;
  j["lexicon"] = lexicon ? nlohmann::json(lexicon->string()) : nlohmann::json(nullptr);
  j["synonyms"] = synonyms ? nlohmann::json(synonyms->string()) : nlohmann::json(nullptr);
  j["pv"] = {{"dims", pv.dims},         {"window", pv.window},   {"negatives", pv.negatives},
             {"epochs", pv.epochs},     {"lr_start", pv.lr_start}, {"lr_end", pv.lr_end},
             {"infer_steps", pv_infer_steps}};
  j["lda"] = {{"topics", lda.topics},
              {"alpha", lda.alpha ? nlohmann::json(*lda.alpha) : nlohmann::json(nullptr)},
              {"beta", lda.beta},
              {"iterations", lda.iterations},
              {"burn_in", lda.burn_in},
              {"sample_every", lda.sample_every},
              {"infer_iterations", lda_infer_iterations}};
  j["infer_training"] = infer_training;
  j["nb"] = {{"smoothing", nb_smoothing}};
  j["svm"] = {{"c", smo.C}, {"tol", smo.tol}, {"max_passes", smo.max_passes}};
  j["elman"] = {{"embedding", elman.embedding}, {"hidden", elman.hidden},
                {"epochs", elman.epochs},       {"lr", elman.lr},
                {"bptt_limit", elman.bptt_limit}, {"clip", elman.clip}};
  j["rakel"] = {{"k", rakel.k},
                {"m", rakel.m ? nlohmann::json(*rakel.m) : nlohmann::json(nullptr)},
                {"threshold", rakel.threshold},
                {"base", to_string(rakel.base.kind)}};
  return j;
}

void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  it->second(config, key, value);
}

std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string line;
    bool quoted = false;
    for (char c : raw) {
      if (c == '"') quoted = !quoted;
      if (c == '#' && !quoted) break;
      line += c;
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto where = " on config line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError("unterminated section" + where);
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("expected key = value" + where);
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) throw UsageError("empty key" + where);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    } else if (!value.empty() && value.front() == '"') {
      throw UsageError("unterminated string" + where);
    }
    out.emplace_back(section.empty() ? key : section + "." + key, value);
  }
  return out;
}

void apply_config_file(PipelineConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  for (const auto& [k, v] : parse_config_text(buf.str())) apply_setting(config, k, v);
}

}  // namespace crowdsent
