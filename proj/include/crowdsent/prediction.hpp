#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/corpus.hpp"

namespace crowdsent {

struct TimedPrediction {
  JointCategory category;
  std::int64_t timestamp = 0;
};

struct Tally {
  std::size_t pos = 0;
  std::size_t neg = 0;

  std::size_t total() const { return pos + neg; }
  /// pos / (pos + neg), unset without mentions.
  std::optional<double> score() const;
  bool operator==(const Tally&) const = default;
};

using SentimentTally = std::map<std::string, Tally>;

SentimentTally aggregate(std::span<const TimedPrediction> preds);

struct RankMode {
  enum class Kind { half_list, top_n } kind = Kind::half_list;
  std::size_t n = 0;

  static RankMode half_list() { return {}; }
  static RankMode top_n(std::size_t n) { return {Kind::top_n, n}; }
};

struct RankedEntry {
  std::string target;
  double raw = 0.0;   // positive fraction; 0 without mentions
  double norm = 0.0;  // min-max over participants; all 0 when raw scores are equal
  Tally tally;
};

struct RankedOutcome {
  std::string event_id;
  std::vector<RankedEntry> ranked;
  std::size_t k = 0;

  std::vector<std::string> winners() const;
  nlohmann::json to_json() const;
};

/// Every registry participant is ranked: normalized score descending, then
/// mentioned before unmentioned, then registry order. half_list gives
/// k = max(1, floor(n / 2)); top_n gives k = min(n, participants).
/// Throws DataError for an empty tally or a target outside the registry.
RankedOutcome rank_outcome(const SentimentTally& tally, const EventRegistry& registry,
                           RankMode mode);

enum class Bucketing { hour, day, event };
Bucketing parse_bucketing(std::string_view s);
std::string to_string(Bucketing b);

struct TrendBucket {
  std::int64_t start = 0;
  std::size_t volume = 0;
  std::vector<Tally> tallies;  // registry order
};

struct TrendSeries {
  Bucketing bucketing = Bucketing::hour;
  std::vector<std::string> targets;
  std::vector<TrendBucket> buckets;

  /// bucket_start,target,pos,neg,score,volume; score blank without mentions.
  std::string to_csv() const;
};

/// Hour and day buckets are aligned to UTC and contiguous from the first to
/// the last occupied bucket, empty ones included. Event buckets run from each
/// boundary to the next; `event_starts` defaults to the registry's event time,
/// and the first bucket also holds anything earlier.
TrendSeries trend_series(std::span<const TimedPrediction> preds, Bucketing bucketing,
                         const EventRegistry& registry,
                         std::span<const std::int64_t> event_starts = {});

struct Influence {
  std::string target;
  std::optional<double> before;
  std::optional<double> after;
  std::optional<double> delta;  // after - before, when both are defined
};

/// Splits at the announcement time: ts < announcement is before. Throws
/// DataError when the registry has no announcement time.
std::vector<Influence> expert_influence(std::span<const TimedPrediction> preds,
                                        const EventRegistry& registry);
nlohmann::json influence_json(const std::vector<Influence>& rows, const EventRegistry& registry);

}  // namespace crowdsent
