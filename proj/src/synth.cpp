#include "crowdsent/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

const std::vector<std::string> kPositive = {"great", "strong", "love",  "awesome",
                                            "best",  "good",   "brilliant", "winning"};
const std::vector<std::string> kNegative = {"bad",   "weak",  "hate", "awful",
                                            "worst", "terrible", "poor", "losing"};
const std::vector<std::string> kNoise = {"debate", "tonight", "watch", "stage", "live",
                                         "question", "people", "time", "said", "now",
                                         "vote", "news", "crowd", "answer", "speech"};

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

const std::string& pick(Rng& rng, const std::vector<std::string>& words) {
  return words[rng.below(words.size())];
}

bool probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

void SynthSpec::validate() const {
  if (participants.empty()) throw UsageError("synth spec needs at least one participant");
  std::set<std::string> seen(participants.begin(), participants.end());
  if (seen.size() != participants.size()) throw UsageError("synth participants repeat");
  if (rates.size() != participants.size()) {
    throw UsageError("synth spec needs one rate per participant");
  }
  for (double r : rates) {
    if (!probability(r)) throw UsageError("synth rates must lie in [0, 1]");
  }
  if (!signatures.empty() && signatures.size() != participants.size()) {
    throw UsageError("synth signatures must be empty or one list per participant");
  }
  for (const auto& s : signatures) {
    if (s.empty()) throw UsageError("synth signature lists must not be empty");
  }
  if (bucket_seconds <= 0) throw UsageError("synth bucket_seconds must be positive");
  for (double p : {polarity_accuracy, mention_rate, hashtag_rate}) {
    if (!probability(p)) throw UsageError("synth probabilities must lie in [0, 1]");
  }
  if (shock) {
    if (!seen.count(shock->target)) {
      throw UsageError("synth shock target '" + shock->target + "' is not a participant");
    }
    if (!probability(shock->rate)) throw UsageError("synth shock rate must lie in [0, 1]");
  }
}

EventRegistry SynthSpec::registry() const {
  EventRegistry r;
  r.event_id = event_id;
  r.participants = participants;
  r.event_time = start;
  if (shock) r.expert_announcement_time = shock->time;
  return r;
}

SynthSpec parse_synth_spec(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "event_id",          "participants", "rates",       "signatures",
      "volumes",           "start",        "bucket_seconds", "shock",
      "polarity_accuracy", "noise_words",  "mention_rate", "hashtag_rate",
      "seed"};
  if (!j.is_object()) throw UsageError("synth spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw UsageError("unknown synth spec key '" + key + "'");
  }
  SynthSpec s;
  try {
    s.event_id = j.value("event_id", s.event_id);
    s.participants = j.at("participants").get<std::vector<std::string>>();
    s.rates = j.at("rates").get<std::vector<double>>();
    s.signatures = j.value("signatures", s.signatures);
    for (const auto& v : j.at("volumes")) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        throw UsageError("synth volumes must be non-negative integers");
      }
      s.volumes.push_back(v.get<std::size_t>());
    }
    s.start = j.value("start", s.start);
    s.bucket_seconds = j.value("bucket_seconds", s.bucket_seconds);
    if (j.contains("shock") && !j.at("shock").is_null()) {
      const auto& k = j.at("shock");
      s.shock = RateShock{k.at("target").get<std::string>(), k.at("time").get<std::int64_t>(),
                          k.at("rate").get<double>()};
    }
    s.polarity_accuracy = j.value("polarity_accuracy", s.polarity_accuracy);
    s.noise_words = j.value("noise_words", s.noise_words);
    s.mention_rate = j.value("mention_rate", s.mention_rate);
    s.hashtag_rate = j.value("hashtag_rate", s.hashtag_rate);
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("invalid synth spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::vector<AnnotatedTweet> generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  const std::size_t P = spec.participants.size();
  std::vector<std::vector<std::string>> sigs = spec.signatures;
  if (sigs.empty()) {
    for (const auto& p : spec.participants) sigs.push_back({lower(p)});
  }
  std::optional<std::size_t> shocked;
  if (spec.shock) {
    shocked = static_cast<std::size_t>(
        std::find(spec.participants.begin(), spec.participants.end(), spec.shock->target) -
        spec.participants.begin());
  }

  Rng rng(derive_seed(spec.seed, "synth.corpus"));
  std::vector<AnnotatedTweet> out;
  std::size_t serial = 0;
  for (std::size_t b = 0; b < spec.volumes.size(); ++b) {
    const std::int64_t base = spec.start + static_cast<std::int64_t>(b) * spec.bucket_seconds;
    const std::size_t first = out.size();
    for (std::size_t n = 0; n < spec.volumes[b]; ++n) {
      const std::size_t who = rng.below(P);
      const std::int64_t ts =
          base + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(spec.bucket_seconds)));
      double rate = spec.rates[who];
      if (shocked && *shocked == who && ts >= spec.shock->time) rate = spec.shock->rate;
      const bool positive = rng.bernoulli(rate);
      const bool faithful = rng.bernoulli(spec.polarity_accuracy);

      std::vector<std::string> words;
      words.push_back(pick(rng, sigs[who]));
      words.push_back(pick(rng, positive == faithful ? kPositive : kNegative));
      for (std::size_t i = 0; i < spec.noise_words; ++i) words.push_back(pick(rng, kNoise));
      if (rng.bernoulli(spec.mention_rate)) words.push_back("@fan" + std::to_string(rng.below(1000)));
      if (rng.bernoulli(spec.hashtag_rate)) words.push_back("#" + lower(pick(rng, sigs[who])));
      rng.shuffle(std::span<std::string>(words));

      AnnotatedTweet t;
      t.tweet.id = spec.event_id + "-" + std::to_string(serial++);
      t.tweet.timestamp = ts;
      for (const auto& w : words) t.tweet.text += (t.tweet.text.empty() ? "" : " ") + w;
      t.target = spec.participants[who];
      t.sentiment = positive ? Sentiment::positive : Sentiment::negative;
      out.push_back(std::move(t));
    }
    std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
                     [](const AnnotatedTweet& a, const AnnotatedTweet& b) {
                       return a.tweet.timestamp < b.tweet.timestamp;
                     });
  }
  return out;
}

}  // namespace crowdsent
