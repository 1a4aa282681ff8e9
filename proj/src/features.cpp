#include "crowdsent/features.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"
#include "crowdsent/text.hpp"

namespace crowdsent {

namespace {

bool is_word_cp(char32_t c) {
  return text::is_letter(c) || (c >= '0' && c <= '9') || c == '_';
}

bool is_apostrophe(char32_t c) { return c == '\'' || c == U'\u2019'; }

void tokenize_chunk(std::string_view chunk, TokenSequence& out) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    const auto cp = text::decode_utf8(chunk, i);
    const bool hashtag =
        cp.value == '#' && i + 1 < chunk.size() &&
        is_word_cp(text::decode_utf8(chunk, i + 1).value);
    if (hashtag || is_word_cp(cp.value)) {
      std::size_t j = i + cp.length;
      while (j < chunk.size()) {
        const auto next = text::decode_utf8(chunk, j);
        if (is_word_cp(next.value)) {
          j += next.length;
          continue;
        }
        // Apostrophes stay inside words ("don't").
        if (is_apostrophe(next.value) && j + next.length < chunk.size() &&
            is_word_cp(text::decode_utf8(chunk, j + next.length).value)) {
          j += next.length;
          continue;
        }
        break;
      }
      out.push_back(text::ascii_lower(chunk.substr(i, j - i)));
      i = j;
    } else {
      std::size_t j = i + cp.length;
      while (j < chunk.size()) {
        const auto next = text::decode_utf8(chunk, j);
        if (is_word_cp(next.value)) break;
        if (next.value == '#' && j + 1 < chunk.size() &&
            is_word_cp(text::decode_utf8(chunk, j + 1).value)) {
          break;
        }
        j += next.length;
      }
      out.emplace_back(chunk.substr(i, j - i));
      i = j;
    }
  }
}

}  // namespace

TokenSequence tokenize(std::string_view cleaned) {
  TokenSequence tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && text::is_ascii_space(cleaned[i])) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !text::is_ascii_space(cleaned[j])) ++j;
    if (j > i) tokenize_chunk(cleaned.substr(i, j - i), tokens);
    i = j;
  }
  return tokens;
}

// ---------------------------------------------------------------------------

std::string_view to_string(PosTag tag) {
  static constexpr std::array<std::string_view, kPosTagCount> kNames{
      "NOUN", "VERB", "ADJ", "ADV", "PRON", "DET",
      "ADP",  "NUM",  "CONJ", "PRT", "PUNCT", "X"};
  return kNames[static_cast<std::size_t>(tag)];
}

namespace {

using WordSet = std::unordered_set<std::string_view>;

const WordSet kDeterminers{"the", "a", "an", "this", "that", "these", "those",
                           "every", "each", "some", "any", "no", "another",
                           "either", "neither", "all", "both", "such"};
const WordSet kPronouns{
    "i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself",
    "he", "him", "his", "himself", "she", "her", "hers", "herself", "it",
    "its", "itself", "we", "us", "our", "ours", "ourselves", "they", "them",
    "their", "theirs", "themselves", "who", "whom", "whose", "which", "what",
    "someone", "somebody", "anyone", "anybody", "everyone", "everybody",
    "nobody", "nothing", "something", "everything", "anything", "i'm",
    "you're", "he's", "she's", "it's", "we're", "they're", "i've", "i'll"};
const WordSet kAdpositions{
    "in", "on", "at", "by", "for", "with", "about", "against", "between",
    "into", "through", "during", "before", "after", "above", "below", "from",
    "of", "off", "over", "under", "since", "until", "without", "within",
    "across", "along", "among", "around", "behind", "beside", "beyond",
    "despite", "except", "inside", "near", "onto", "outside", "toward",
    "towards", "upon", "via", "like", "than", "per"};
const WordSet kConjunctions{"and", "or", "but", "nor", "yet", "so", "because",
                            "although", "though", "if", "unless", "while",
                            "whereas", "whether", "&"};
const WordSet kParticles{"to", "not", "n't", "up", "out", "'s", "s"};
const WordSet kAdverbs{
    "very", "too", "also", "just", "now", "then", "here", "there", "never",
    "always", "often", "really", "only", "still", "even", "again", "quite",
    "almost", "already", "soon", "ever", "yes", "maybe", "perhaps", "how",
    "when", "where", "why", "well", "much", "more", "most", "less", "least",
    "rather", "tonight", "today", "tomorrow", "yesterday", "away", "back"};
const WordSet kVerbs{
    "is", "am", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "do", "does", "did", "will", "would", "can", "could", "should",
    "shall", "may", "might", "must", "get", "gets", "got", "go", "goes",
    "went", "gone", "say", "says", "said", "make", "makes", "made", "know",
    "knew", "think", "thought", "take", "took", "see", "saw", "come", "came",
    "want", "vote", "win", "won", "lose", "lost", "need", "let", "give",
    "gave", "tell", "told", "keep", "seem", "feel", "felt", "love", "hate",
    "like", "don't", "doesn't", "didn't", "can't", "won't", "isn't",
    "aren't", "wasn't", "weren't"};
const WordSet kNumberWords{"zero", "one", "two", "three", "four", "five",
                           "six", "seven", "eight", "nine", "ten", "eleven",
                           "twelve", "hundred", "thousand", "million",
                           "billion", "first", "second", "third"};

struct SuffixRule {
  std::string_view suffix;
  std::size_t min_length;
  PosTag tag;
};

// First match wins.
constexpr std::array<SuffixRule, 15> kSuffixRules{{
    {"ing", 5, PosTag::verb},   {"ed", 4, PosTag::verb},
    {"ly", 4, PosTag::adv},     {"ous", 5, PosTag::adj},
    {"ful", 5, PosTag::adj},    {"ive", 5, PosTag::adj},
    {"able", 6, PosTag::adj},   {"ible", 6, PosTag::adj},
    {"less", 6, PosTag::adj},   {"ish", 5, PosTag::adj},
    {"est", 5, PosTag::adj},    {"ic", 5, PosTag::adj},
    {"al", 5, PosTag::adj},     {"ize", 5, PosTag::verb},
    {"ise", 5, PosTag::verb},
}};

bool has_word_char(std::string_view token) {
  for (std::size_t i = 0; i < token.size();) {
    const auto cp = text::decode_utf8(token, i);
    if (is_word_cp(cp.value)) return true;
    i += cp.length;
  }
  return false;
}

bool is_numeric(std::string_view token) {
  bool digit = false;
  for (char c : token) {
    if (c >= '0' && c <= '9') {
      digit = true;
    } else if (c != '.' && c != ',' && c != '%') {
      return false;
    }
  }
  return digit;
}

bool has_letter(std::string_view token) {
  for (std::size_t i = 0; i < token.size();) {
    const auto cp = text::decode_utf8(token, i);
    if (text::is_letter(cp.value)) return true;
    i += cp.length;
  }
  return false;
}

}  // namespace

PosTag RuleTagger::tag_token(std::string_view token) {
  if (!has_word_char(token)) return PosTag::punct;
  if (token.front() == '#') return PosTag::x;
  if (is_numeric(token) || kNumberWords.count(token)) return PosTag::num;
  if (kDeterminers.count(token)) return PosTag::det;
  if (kPronouns.count(token)) return PosTag::pron;
  if (kConjunctions.count(token)) return PosTag::conj;
  if (kParticles.count(token)) return PosTag::prt;
  if (kVerbs.count(token)) return PosTag::verb;
  if (kAdpositions.count(token)) return PosTag::adp;
  if (kAdverbs.count(token)) return PosTag::adv;
  for (const auto& rule : kSuffixRules) {
    if (token.size() >= rule.min_length && token.ends_with(rule.suffix)) {
      return rule.tag;
    }
  }
  return has_letter(token) ? PosTag::noun : PosTag::x;
}

std::vector<PosTag> RuleTagger::tag(const TokenSequence& tokens) const {
  std::vector<PosTag> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) tags.push_back(tag_token(t));
  return tags;
}

std::vector<PosTag> tag_pos(const TokenSequence& tokens) {
  return RuleTagger{}.tag(tokens);
}

// ---------------------------------------------------------------------------

void PolarityLexicon::add(std::string word, double raw_score) {
  if (!(raw_score >= 1.0 && raw_score <= 3.0)) {
    throw DataError("pleasantness score for '" + word + "' outside [1, 3]");
  }
  scores_[text::ascii_lower(word)] = raw_score;
}

void PolarityLexicon::add_synonyms(std::string word,
                                   std::vector<std::string> synonyms) {
  for (auto& s : synonyms) s = text::ascii_lower(s);
  synonyms_[text::ascii_lower(word)] = std::move(synonyms);
}

namespace {

template <typename Fn>
void for_each_tsv_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError(path.string() + ": line " + std::to_string(n) +
                      ": expected word<TAB>value");
    }
    try {
      fn(line.substr(0, tab), line.substr(tab + 1));
    } catch (const DataError& e) {
      throw DataError(path.string() + ": line " + std::to_string(n) + ": " +
                      e.what());
    }
  }
}

}  // namespace

PolarityLexicon PolarityLexicon::load(
    const std::filesystem::path& lexicon,
    const std::optional<std::filesystem::path>& synonyms) {
  PolarityLexicon lex;
  for_each_tsv_line(lexicon, [&](std::string word, const std::string& value) {
    std::size_t used = 0;
    double score = 0.0;
    try {
      score = std::stod(value, &used);
    } catch (const std::exception&) {
      throw DataError("score is not a number: '" + value + "'");
    }
    if (used != value.size()) throw DataError("score is not a number: '" + value + "'");
    lex.add(std::move(word), score);
  });
  if (synonyms) {
    for_each_tsv_line(*synonyms, [&](std::string word, const std::string& value) {
      std::vector<std::string> list;
      std::stringstream ss(value);
      std::string item;
      while (std::getline(ss, item, ',')) {
        if (!item.empty()) list.push_back(item);
      }
      lex.add_synonyms(std::move(word), std::move(list));
    });
  }
  return lex;
}

std::optional<double> PolarityLexicon::resolve(std::string_view word) const {
  if (auto it = scores_.find(word); it != scores_.end()) return it->second;
  if (auto it = synonyms_.find(word); it != synonyms_.end()) {
    for (const auto& syn : it->second) {
      if (auto hit = scores_.find(syn); hit != scores_.end()) return hit->second;
    }
  }
  return std::nullopt;
}

std::uint64_t PolarityLexicon::hash() const {
  std::uint64_t h = fnv1a("lexicon");
  for (const auto& [w, s] : scores_) {
    h = fnv1a(w, h);
    h = fnv1a(std::to_string(s), h);
  }
  for (const auto& [w, syns] : synonyms_) {
    h = fnv1a(w, h);
    for (const auto& s : syns) h = fnv1a(s, fnv1a(",", h));
  }
  return h;
}

DalFeatures dal_features(const TokenSequence& tokens, const PolarityLexicon& lexicon) {
  DalFeatures f;
  for (const auto& t : tokens) {
    const auto raw = lexicon.resolve(t);
    if (!raw) continue;
    const double s = normalize_dal(*raw);
    if (s > kDalPositiveAbove) ++f.pos_count;
    if (s < kDalNegativeBelow) ++f.neg_count;
    f.score_sum += s;
  }
  return f;
}

// ---------------------------------------------------------------------------

FeatureBundle parse_bundle(std::string_view name) {
  static constexpr std::array<std::string_view, 6> kNames{"f1", "f2", "f3",
                                                          "f4", "f5", "f6"};
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (name == kNames[i]) return static_cast<FeatureBundle>(i);
  }
  throw UsageError("unknown feature bundle '" + std::string(name) +
                   "' (expected f1..f6)");
}

std::string_view to_string(FeatureBundle bundle) {
  static constexpr std::array<std::string_view, 6> kNames{"f1", "f2", "f3",
                                                          "f4", "f5", "f6"};
  return kNames[static_cast<std::size_t>(bundle)];
}

bool uses_ngrams(FeatureBundle bundle) {
  return bundle != FeatureBundle::f5 && bundle != FeatureBundle::f6;
}

Vocabulary Vocabulary::fit(std::span<const TokenSequence> corpus,
                           std::size_t min_count) {
  if (corpus.empty()) throw DataError("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, std::size_t> uni;
  std::map<Bigram, std::size_t> bi;
  for (const auto& doc : corpus) {
    for (std::size_t i = 0; i < doc.size(); ++i) {
      ++uni[doc[i]];
      if (i + 1 < doc.size()) ++bi[{doc[i], doc[i + 1]}];
    }
  }
  std::vector<std::string> unigrams;
  std::vector<Bigram> bigrams;
  for (auto& [term, n] : uni) {
    if (n >= min_count) unigrams.push_back(term);
  }
  for (auto& [term, n] : bi) {
    if (n >= min_count) bigrams.push_back(term);
  }
  return from_terms(std::move(unigrams), std::move(bigrams));
}

Vocabulary Vocabulary::from_terms(std::vector<std::string> unigrams,
                                  std::vector<Bigram> bigrams) {
  std::sort(unigrams.begin(), unigrams.end());
  unigrams.erase(std::unique(unigrams.begin(), unigrams.end()), unigrams.end());
  std::sort(bigrams.begin(), bigrams.end());
  bigrams.erase(std::unique(bigrams.begin(), bigrams.end()), bigrams.end());
  Vocabulary v;
  v.unigrams_ = std::move(unigrams);
  v.bigrams_ = std::move(bigrams);
  for (std::size_t i = 0; i < v.unigrams_.size(); ++i) {
    v.unigram_ids_.emplace(v.unigrams_[i], static_cast<std::uint32_t>(i));
  }
  for (std::size_t i = 0; i < v.bigrams_.size(); ++i) {
    v.bigram_ids_.emplace(v.bigrams_[i], static_cast<std::uint32_t>(i));
  }
  return v;
}

std::optional<std::uint32_t> Vocabulary::unigram_index(std::string_view term) const {
  auto it = unigram_ids_.find(term);
  if (it == unigram_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Vocabulary::bigram_index(std::string_view first,
                                                      std::string_view second) const {
  auto it = bigram_ids_.find(Bigram{first, second});
  if (it == bigram_ids_.end()) return std::nullopt;
  return it->second;
}

std::vector<FeatureBlock> Vocabulary::registry(FeatureBundle bundle) const {
  std::vector<FeatureBlock> blocks;
  std::size_t offset = 0;
  auto push = [&](std::string name, std::size_t dim) {
    blocks.push_back({std::move(name), offset, dim});
    offset += dim;
  };
  switch (bundle) {
    case FeatureBundle::f1:
      push("unigram", unigrams_.size());
      break;
    case FeatureBundle::f2:
      push("bigram", bigrams_.size());
      break;
    case FeatureBundle::f3:
      push("unigram", unigrams_.size());
      push("bigram", bigrams_.size());
      break;
    case FeatureBundle::f4:
      push("unigram", unigrams_.size());
      push("bigram", bigrams_.size());
      push("misc", kMiscDimension);
      break;
    default:
      throw UsageError("feature bundle " + std::string(to_string(bundle)) +
                       " is not an n-gram bundle");
  }
  return blocks;
}

std::size_t Vocabulary::dimension(FeatureBundle bundle) const {
  std::size_t d = 0;
  for (const auto& b : registry(bundle)) d += b.dimension;
  return d;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = fnv1a("vocabulary");
  for (const auto& u : unigrams_) h = fnv1a(u, fnv1a("\x1eu", h));
  for (const auto& [a, b] : bigrams_) {
    h = fnv1a(b, fnv1a("\x1f", fnv1a(a, fnv1a("\x1e" "b", h))));
  }
  return h;
}

nlohmann::json registry_json(FeatureBundle bundle, std::span<const FeatureBlock> blocks) {
  nlohmann::json out;
  out["bundle"] = std::string(to_string(bundle));
  std::size_t total = 0;
  auto arr = nlohmann::json::array();
  for (const auto& b : blocks) {
    arr.push_back({{"name", b.name}, {"offset", b.offset}, {"dimension", b.dimension}});
    total += b.dimension;
  }
  out["blocks"] = std::move(arr);
  out["dimension"] = total;
  return out;
}

namespace {

std::size_t punctuation_class(char c) {
  switch (c) {
    case '!': return 0;
    case '?': return 1;
    case '.': return 2;
    case ',': return 3;
    case '"':
    case '\'':
    case '`': return 4;
    default: return 5;
  }
}

}  // namespace

std::array<double, kMiscDimension> misc_features(const TokenSequence& tokens,
                                                 const PolarityLexicon& lexicon,
                                                 const PosTagger& tagger) {
  std::array<double, kMiscDimension> misc{};
  const auto tags = tagger.tag(tokens);
  const std::size_t pos_offset = kPunctuationClasses.size();
  const std::size_t dal_offset = pos_offset + kPosTagCount;
  const std::size_t twitter_offset = dal_offset + 3;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    misc[pos_offset + static_cast<std::size_t>(tags[i])] += 1.0;
    if (tags[i] == PosTag::punct) {
      for (std::size_t k = 0; k < t.size();) {
        const auto cp = text::decode_utf8(t, k);
        misc[punctuation_class(cp.length == 1 ? t[k] : '\0')] += 1.0;
        k += cp.length;
      }
    }
    if (t.size() > 1 && t[0] == '#') misc[twitter_offset] += 1.0;
    if (t == "user") misc[twitter_offset + 1] += 1.0;
    if (t == "url") misc[twitter_offset + 2] += 1.0;
  }
  const auto dal = dal_features(tokens, lexicon);
  misc[dal_offset] = static_cast<double>(dal.pos_count);
  misc[dal_offset + 1] = static_cast<double>(dal.neg_count);
  misc[dal_offset + 2] = dal.score_sum;
  return misc;
}

SparseVector assemble_vector(const TokenSequence& tokens, const Vocabulary& vocab,
                             FeatureBundle bundle, const PolarityLexicon& lexicon,
                             const PosTagger& tagger) {
  const auto blocks = vocab.registry(bundle);
  std::size_t ngram_dim = 0;
  for (const auto& b : blocks) {
    if (b.name != "misc") ngram_dim += b.dimension;
  }
  if (ngram_dim == 0) {
    throw DataError("vocabulary has no terms for feature bundle " +
                    std::string(to_string(bundle)));
  }

  std::size_t dimension = 0;
  for (const auto& b : blocks) dimension += b.dimension;
  std::vector<SparseVector::Entry> entries;
  for (const auto& block : blocks) {
    if (block.name == "unigram") {
      for (const auto& t : tokens) {
        if (auto id = vocab.unigram_index(t)) {
          entries.push_back({static_cast<std::uint32_t>(block.offset + *id), 1.0});
        }
      }
    } else if (block.name == "bigram") {
      for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
        if (auto id = vocab.bigram_index(tokens[i], tokens[i + 1])) {
          entries.push_back({static_cast<std::uint32_t>(block.offset + *id), 1.0});
        }
      }
    } else {
      const auto misc = misc_features(tokens, lexicon, tagger);
      for (std::size_t i = 0; i < misc.size(); ++i) {
        entries.push_back({static_cast<std::uint32_t>(block.offset + i), misc[i]});
      }
    }
  }
  return SparseVector::from_pairs(dimension, std::move(entries));
}

SparseVector assemble_vector(const TokenSequence& tokens, const Vocabulary& vocab,
                             FeatureBundle bundle, const PolarityLexicon& lexicon) {
  return assemble_vector(tokens, vocab, bundle, lexicon, RuleTagger{});
}

}  // namespace crowdsent
