#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdsent/corpus.hpp"

namespace crowdsent {

/// Rate change for one participant from `time` on.
struct RateShock {
  std::string target;
  std::int64_t time = 0;
  double rate = 0.0;
};

/// Seeded generator for labelled event corpora with planted sentiment rates.
struct SynthSpec {
  std::string event_id = "synthetic";
  std::vector<std::string> participants;
  std::vector<double> rates;                    // planted positive rate per participant
  std::vector<std::vector<std::string>> signatures;  // empty: derived from the name
  std::vector<std::size_t> volumes;             // tweets per bucket
  std::int64_t start = 0;
  std::int64_t bucket_seconds = 3600;
  std::optional<RateShock> shock;
  /// Probability that the sentiment word matches the tweet's label.
  double polarity_accuracy = 0.9;
  std::size_t noise_words = 3;
  /// Probability of an extra @mention and of a hashtag.
  double mention_rate = 0.3;
  double hashtag_rate = 0.2;
  std::uint64_t seed = 1;

  /// Throws UsageError describing the first invalid field.
  void validate() const;
  EventRegistry registry() const;
};

SynthSpec parse_synth_spec(const nlohmann::json& j);

/// Targets are uniform over participants. A tweet is positive with its
/// target's rate, or the shock rate at or after the shock time.
std::vector<AnnotatedTweet> generate_synthetic(const SynthSpec& spec);

}  // namespace crowdsent
