#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/corpus.hpp"
#include "crowdsent/embeddings.hpp"
#include "crowdsent/features.hpp"
#include "crowdsent/multilabel.hpp"
#include "crowdsent/topics.hpp"

namespace crowdsent {

enum class ClassifierKind { nb, svm, elman, rakel };
ClassifierKind parse_classifier_kind(std::string_view s);
std::string to_string(ClassifierKind kind);

/// Everything a train run needs. Module seeds are not set directly: each is
/// derived from `seed` with a fixed label when the pipeline is trained.
struct PipelineConfig {
  FeatureBundle features = FeatureBundle::f6;
  ClassifierKind model = ClassifierKind::rakel;
  std::uint64_t seed = 1;
  std::size_t min_count = 1;
  /// 0 uses the hardware concurrency for classifier members.
  std::size_t threads = 0;
  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> synonyms;

  PvConfig pv;
  std::size_t pv_infer_steps = 100;
  LdaConfig lda;
  std::size_t lda_infer_iterations = 50;
  /// Dense bundles: classifier training vectors come from the same inference
  /// path as unseen tweets instead of the jointly fitted vectors.
  bool infer_training = true;
  double nb_smoothing = 1.0;
  SmoConfig smo;
  ElmanConfig elman;
  RakelConfig rakel;

  /// Throws UsageError for settings no pipeline can run with.
  void validate() const;
  /// Copy with every module seed derived from `seed`.
  PipelineConfig resolved() const;
  nlohmann::json to_json() const;
};

/// Sets one dotted key ("pv.dims", "rakel.base", ...). Throws UsageError for
/// unknown keys and unparsable values.
void apply_setting(PipelineConfig& config, std::string_view key, std::string_view value);

/// `key = value` lines; `[section]` prefixes later keys with "section.".
/// '#' starts a comment outside double quotes. Values may be quoted.
std::vector<std::pair<std::string, std::string>> parse_config_text(std::string_view text);
void apply_config_file(PipelineConfig& config, const std::filesystem::path& path);

/// Fitted feature extraction for one bundle.
struct FeatureExtractor {
  FeatureBundle bundle = FeatureBundle::f1;
  Vocabulary vocab;                 // n-gram bundles
  PolarityLexicon lexicon;
  std::optional<PvModel> pv;        // f5, f6
  std::optional<LdaModel> lda;      // f6
  std::size_t pv_infer_steps = 0;
  std::size_t lda_infer_iterations = 0;
  std::uint64_t infer_seed = 0;
  /// Per-dimension offset subtracted before clamping at zero, so count-based
  /// learners see non-negative dense features. Empty when unused.
  std::vector<double> shift;

  std::size_t dimension() const;
  /// Unseen documents: n-gram counts, or inferred embedding and topic
  /// proportions seeded from the token text.
  SparseVector transform(const TokenSequence& tokens) const;
  /// Inferred dense values before the shift (f5, f6).
  std::vector<double> raw_dense(const TokenSequence& tokens) const;
  std::uint64_t hash() const;
  nlohmann::json registry() const;
};

struct FittedFeatures {
  FeatureExtractor extractor;
  std::vector<SparseVector> train;
};

/// `nonnegative` requests the dense shift for count-based learners. PV and
/// LDA are fitted concurrently for f6.
FittedFeatures fit_features(std::span<const TokenSequence> corpus, const PipelineConfig& config,
                            PolarityLexicon lexicon, bool nonnegative);

/// Cleans and tokenizes one text.
TokenSequence prepare_tokens(std::string_view text);

using ClassifierPayload = std::variant<NaiveBayesModel, SvmOvrModel, ElmanModel, RakelModel>;

struct PipelineOutput {
  JointCategory category;
  LabelSet labels;  // multi-label output for rakel, the pair's flags otherwise
};

struct Pipeline {
  PipelineConfig config;  // resolved
  EventRegistry registry;
  FeatureExtractor features;  // unfitted for elman
  ClassifierPayload model;

  PipelineOutput predict(const Tweet& tweet) const;
  PipelineOutput predict_tokens(const TokenSequence& tokens) const;
  std::vector<PipelineOutput> predict_all(std::span<const Tweet> tweets) const;
};

/// Texts are cleaned and tokenized; filtering is left to the caller. Throws
/// NumericError when a fitted model holds non-finite parameters.
Pipeline train_pipeline(std::span<const AnnotatedTweet> train, const EventRegistry& registry,
                        const PipelineConfig& config);

/// Loads the configured lexicon files, or returns an empty lexicon.
PolarityLexicon load_lexicon(const PipelineConfig& config);

// ---------------------------------------------------------------------------
// Bundles

inline constexpr std::uint32_t kBundleVersion = 1;

/// Writes the trained pipeline with a magic string, format version, feature
/// registry hash and payload checksum. No timestamps, so equal pipelines
/// produce equal files.
void save_bundle(const Pipeline& pipeline, const std::filesystem::path& path);

/// Throws DataError for a wrong magic, an unsupported version, a truncated
/// or corrupt payload, or a registry hash that differs from the recomputed
/// one or from `expected_hash`. Nothing is returned on failure.
Pipeline load_bundle(const std::filesystem::path& path,
                     std::optional<std::uint64_t> expected_hash = std::nullopt);

}  // namespace crowdsent
