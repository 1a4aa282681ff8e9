#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace crowdsent {

enum class Sentiment : std::uint8_t { positive = 0, negative = 1 };

std::string_view to_string(Sentiment s);
/// Accepts "pos"/"neg" and "positive"/"negative".
Sentiment parse_sentiment(std::string_view s);

struct Tweet {
  std::string id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC
  std::string text;
  bool is_retweet = false;
};

struct AnnotatedTweet {
  Tweet tweet;
  std::string target;
  Sentiment sentiment = Sentiment::positive;
};

/// Participants of one event (candidates of a debate, nominees of an award
/// category, players in an MVP race). Participant order is significant: it
/// fixes category order and every tie-break downstream.
struct EventRegistry {
  std::string event_id;
  std::vector<std::string> participants;
  std::int64_t event_time = 0;
  std::optional<std::int64_t> expert_announcement_time;

  /// Throws DataError when participants are empty or repeated.
  void validate() const;
  std::optional<std::size_t> index_of(std::string_view target) const;
};

EventRegistry parse_registry(const nlohmann::json& j);
nlohmann::json to_json(const EventRegistry& registry);
EventRegistry load_registry(const std::filesystem::path& path);

enum class Schema { raw, annotated };
enum class FileFormat { jsonl, csv };

/// ".csv" selects CSV, anything else JSONL.
FileFormat detect_format(const std::filesystem::path& path);

std::vector<Tweet> read_raw(std::istream& in, FileFormat format);
std::vector<AnnotatedTweet> read_annotated(std::istream& in, FileFormat format,
                                           const EventRegistry& registry);

using Corpus = std::variant<std::vector<Tweet>, std::vector<AnnotatedTweet>>;

/// Reads a corpus file in file order. Malformed records raise DataError with
/// the 1-based line number; annotated targets outside the registry raise
/// DataError naming the target.
Corpus load_corpus(const std::filesystem::path& path, Schema schema,
                   const EventRegistry& registry);

nlohmann::json to_json(const Tweet& tweet);
nlohmann::json to_json(const AnnotatedTweet& tweet);
void write_jsonl(std::ostream& out, const std::vector<Tweet>& tweets);
void write_jsonl(std::ostream& out, const std::vector<AnnotatedTweet>& tweets);

// ---------------------------------------------------------------------------
// Preprocessing

/// Cleaned text plus how many substitutions were made.
struct CleanResult {
  std::string text;
  std::size_t mentions = 0;
  std::size_t urls = 0;
  std::size_t collapsed_runs = 0;
};

/// Replaces @-mentions with USER and hyperlinks with URL, then shortens any
/// run of more than three identical letters to exactly three. Everything
/// else is copied byte-for-byte.
///
/// Mentions are "@" followed by 1-15 of [A-Za-z0-9_]; replacement repeats
/// until no mention remains, so "@@bob" becomes "USER". Hyperlinks are
/// "http://" or "https://" followed by any run of non-space bytes.
CleanResult clean_tweet_counted(std::string_view text);
std::string clean_tweet(std::string_view text);

struct CleanReport {
  std::size_t mentions_replaced = 0;
  std::size_t urls_replaced = 0;
  std::size_t repeats_collapsed = 0;
  std::size_t empty_dropped = 0;
  // Tweet ids carrying conflicting annotations, and the records they held.
  std::size_t multi_sentiment_dropped = 0;
  std::size_t multi_sentiment_records_dropped = 0;
  std::size_t retweets_dropped = 0;
  std::size_t duplicates_dropped = 0;

  /// Records removed, comparable with the input size.
  std::size_t total_dropped() const;
  CleanReport& operator+=(const CleanReport& other);
};

nlohmann::json to_json(const CleanReport& report);

/// Removes conflicting-annotation ids, retweets and duplicate texts, in that
/// order. Survivors keep their input order.
std::pair<std::vector<AnnotatedTweet>, CleanReport> filter_corpus(
    std::vector<AnnotatedTweet> tweets);

/// Retweet and duplicate removal for unlabeled tweets.
std::pair<std::vector<Tweet>, CleanReport> filter_corpus(std::vector<Tweet> tweets);

/// clean_tweet on every text, drop tweets left blank, then filter_corpus.
std::pair<std::vector<AnnotatedTweet>, CleanReport> preprocess(
    std::vector<AnnotatedTweet> tweets);
std::pair<std::vector<Tweet>, CleanReport> preprocess(std::vector<Tweet> tweets);

bool is_retweet(const Tweet& tweet);

}  // namespace crowdsent
