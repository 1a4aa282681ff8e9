#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "crowdsent/sparse.hpp"

namespace crowdsent {

/// Lowercased tokens of one cleaned tweet. Never contains empty strings.
using TokenSequence = std::vector<std::string>;

/// Splits cleaned text into lowercased word tokens, hashtags ("#word") and
/// punctuation runs ("!!!", ":)"). USER and URL placeholders come out as
/// "user" and "url".
TokenSequence tokenize(std::string_view cleaned_text);

// ---------------------------------------------------------------------------
// Part-of-speech tags (universal tagset)

enum class PosTag : std::uint8_t {
  noun, verb, adj, adv, pron, det, adp, num, conj, prt, punct, x
};
inline constexpr std::size_t kPosTagCount = 12;

std::string_view to_string(PosTag tag);

class PosTagger {
 public:
  virtual ~PosTagger() = default;
  /// One tag per token.
  virtual std::vector<PosTag> tag(const TokenSequence& tokens) const = 0;
};

/// Closed-class word lists plus suffix rules; open-class fallback is NOUN.
class RuleTagger final : public PosTagger {
 public:
  std::vector<PosTag> tag(const TokenSequence& tokens) const override;
  static PosTag tag_token(std::string_view token);
};

std::vector<PosTag> tag_pos(const TokenSequence& tokens);

// ---------------------------------------------------------------------------
// Prior polarity

/// Pleasantness lexicon on the raw 1-3 scale with an optional synonym table
/// consulted for words missing from the lexicon.
class PolarityLexicon {
 public:
  /// Throws DataError when the score is outside [1, 3].
  void add(std::string word, double raw_score);
  void add_synonyms(std::string word, std::vector<std::string> synonyms);

  /// Lexicon TSV: word<TAB>score. Synonym TSV: word<TAB>syn1,syn2,...
  /// Blank lines and lines starting with '#' are skipped.
  static PolarityLexicon load(const std::filesystem::path& lexicon,
                              const std::optional<std::filesystem::path>& synonyms);

  /// Raw score of `word`, or of its first synonym present in the lexicon.
  std::optional<double> resolve(std::string_view word) const;

  const std::map<std::string, double, std::less<>>& scores() const { return scores_; }
  const std::map<std::string, std::vector<std::string>, std::less<>>& synonyms() const {
    return synonyms_;
  }
  bool empty() const { return scores_.empty(); }
  std::uint64_t hash() const;

 private:
  std::map<std::string, double, std::less<>> scores_;
  std::map<std::string, std::vector<std::string>, std::less<>> synonyms_;
};

inline constexpr double kDalPositiveAbove = 0.8;
inline constexpr double kDalNegativeBelow = 0.5;

/// Maps the raw 1-3 scale onto [0, 1].
constexpr double normalize_dal(double raw) { return (raw - 1.0) / 2.0; }

struct DalFeatures {
  std::size_t pos_count = 0;
  std::size_t neg_count = 0;
  double score_sum = 0.0;
};

DalFeatures dal_features(const TokenSequence& tokens, const PolarityLexicon& lexicon);

// ---------------------------------------------------------------------------
// Vocabulary and vector assembly

/// f1 unigrams, f2 bigrams, f3 both, f4 both plus MISC, f5 document
/// embedding, f6 document embedding plus topic proportions.
enum class FeatureBundle { f1, f2, f3, f4, f5, f6 };

FeatureBundle parse_bundle(std::string_view name);
std::string_view to_string(FeatureBundle bundle);
bool uses_ngrams(FeatureBundle bundle);

struct FeatureBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t dimension = 0;
};

// MISC layout: punctuation classes, POS frequencies, DAL triple, then
// hashtag / mention / hyperlink counts.
inline constexpr std::array<std::string_view, 6> kPunctuationClasses{
    "exclamation", "question", "period", "comma", "quote", "other"};
inline constexpr std::size_t kMiscDimension =
    kPunctuationClasses.size() + kPosTagCount + 3 + 3;

/// Frozen unigram + bigram index. Unigrams occupy [0, U) and bigrams
/// [0, B) in their own blocks, each in lexicographic order.
class Vocabulary {
 public:
  using Bigram = std::pair<std::string, std::string>;

  Vocabulary() = default;

  /// Keeps every unigram and bigram occurring at least `min_count` times.
  /// Throws DataError on an empty corpus.
  static Vocabulary fit(std::span<const TokenSequence> corpus, std::size_t min_count);
  static Vocabulary from_terms(std::vector<std::string> unigrams,
                               std::vector<Bigram> bigrams);

  std::optional<std::uint32_t> unigram_index(std::string_view term) const;
  std::optional<std::uint32_t> bigram_index(std::string_view first,
                                            std::string_view second) const;

  const std::vector<std::string>& unigrams() const { return unigrams_; }
  const std::vector<Bigram>& bigrams() const { return bigrams_; }

  /// Named blocks for an n-gram bundle (f1-f4).
  std::vector<FeatureBlock> registry(FeatureBundle bundle) const;
  std::size_t dimension(FeatureBundle bundle) const;

  std::uint64_t hash() const;

 private:
  std::vector<std::string> unigrams_;
  std::vector<Bigram> bigrams_;
  std::map<std::string, std::uint32_t, std::less<>> unigram_ids_;
  std::map<Bigram, std::uint32_t> bigram_ids_;
};

nlohmann::json registry_json(FeatureBundle bundle, std::span<const FeatureBlock> blocks);

/// Counts-based vector for bundles f1-f4. Out-of-vocabulary n-grams are
/// ignored. f5/f6 need fitted embedding models and raise UsageError here;
/// a bundle with no n-gram terms raises DataError.
SparseVector assemble_vector(const TokenSequence& tokens, const Vocabulary& vocab,
                             FeatureBundle bundle, const PolarityLexicon& lexicon,
                             const PosTagger& tagger);
SparseVector assemble_vector(const TokenSequence& tokens, const Vocabulary& vocab,
                             FeatureBundle bundle, const PolarityLexicon& lexicon);

/// The MISC block alone.
std::array<double, kMiscDimension> misc_features(const TokenSequence& tokens,
                                                 const PolarityLexicon& lexicon,
                                                 const PosTagger& tagger);

}  // namespace crowdsent
