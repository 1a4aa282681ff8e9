#include "crowdsent/prediction.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <sstream>

#include "crowdsent/error.hpp"

namespace crowdsent {

namespace {

std::int64_t floor_to(std::int64_t ts, std::int64_t width) {
  std::int64_t q = ts / width;
  if (ts % width != 0 && ts < 0) --q;
  return q * width;
}

std::size_t participant(const EventRegistry& registry, const std::string& target) {
  const auto i = registry.index_of(target);
  if (!i) throw DataError("target '" + target + "' is not in the registry");
  return *i;
}

std::string shortest(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::optional<double> Tally::score() const {
  if (total() == 0) return std::nullopt;
  return static_cast<double>(pos) / static_cast<double>(total());
}

SentimentTally aggregate(std::span<const TimedPrediction> preds) {
  SentimentTally t;
  for (const auto& p : preds) {
    auto& e = t[p.category.target];
    (p.category.sentiment == Sentiment::positive ? e.pos : e.neg) += 1;
  }
  return t;
}

std::vector<std::string> RankedOutcome::winners() const {
  std::vector<std::string> w;
  for (std::size_t i = 0; i < k && i < ranked.size(); ++i) w.push_back(ranked[i].target);
  return w;
}

nlohmann::json RankedOutcome::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : ranked) {
    rows.push_back({{"target", e.target}, {"raw", e.raw}, {"norm", e.norm},
                    {"pos", e.tally.pos}, {"neg", e.tally.neg}});
  }
  return {{"event_id", event_id}, {"ranked", rows}, {"k", k}};
}

RankedOutcome rank_outcome(const SentimentTally& tally, const EventRegistry& registry,
                           RankMode mode) {
  if (tally.empty()) throw DataError("cannot rank an empty tally");
  for (const auto& [target, _] : tally) participant(registry, target);
  const std::size_t n = registry.participants.size();

  RankedOutcome out;
  out.event_id = registry.event_id;
  for (const auto& p : registry.participants) {
    RankedEntry e;
    e.target = p;
    if (auto it = tally.find(p); it != tally.end()) e.tally = it->second;
    e.raw = e.tally.score().value_or(0.0);
    out.ranked.push_back(e);
  }
  const auto [lo, hi] = std::minmax_element(
      out.ranked.begin(), out.ranked.end(),
      [](const RankedEntry& a, const RankedEntry& b) { return a.raw < b.raw; });
  const double min = lo->raw, span = hi->raw - lo->raw;
  for (auto& e : out.ranked) e.norm = span > 0 ? (e.raw - min) / span : 0.0;
  // Stable sort keeps registry order as the last key.
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const RankedEntry& a, const RankedEntry& b) {
                     if (a.norm != b.norm) return a.norm > b.norm;
                     return a.tally.total() > 0 && b.tally.total() == 0;
                   });
  out.k = mode.kind == RankMode::Kind::half_list ? std::max<std::size_t>(1, n / 2)
                                                 : std::min(mode.n, n);
  return out;
}

Bucketing parse_bucketing(std::string_view s) {
  if (s == "hour") return Bucketing::hour;
  if (s == "day") return Bucketing::day;
  if (s == "event") return Bucketing::event;
  throw UsageError("unknown bucketing '" + std::string(s) + "' (expected hour, day or event)");
}

std::string to_string(Bucketing b) {
  switch (b) {
    case Bucketing::hour: return "hour";
    case Bucketing::day: return "day";
    case Bucketing::event: return "event";
  }
  return "hour";
}

std::string TrendSeries::to_csv() const {
  std::ostringstream out;
  out << "bucket_start,target,pos,neg,score,volume\n";
  for (const auto& b : buckets) {
    for (std::size_t i = 0; i < targets.size(); ++i) {
      const auto& t = b.tallies[i];
      out << b.start << ',' << targets[i] << ',' << t.pos << ',' << t.neg << ',';
      if (auto s = t.score()) out << shortest(*s);
      out << ',' << b.volume << '\n';
    }
  }
  return out.str();
}

TrendSeries trend_series(std::span<const TimedPrediction> preds, Bucketing bucketing,
                         const EventRegistry& registry,
                         std::span<const std::int64_t> event_starts) {
  TrendSeries s;
  s.bucketing = bucketing;
  s.targets = registry.participants;
  if (preds.empty()) return s;
  const std::size_t P = registry.participants.size();
  std::vector<std::size_t> who;
  for (const auto& p : preds) who.push_back(participant(registry, p.category.target));

  std::vector<std::size_t> slot(preds.size());
  if (bucketing == Bucketing::event) {
    std::vector<std::int64_t> bounds(event_starts.begin(), event_starts.end());
    if (bounds.empty()) bounds.push_back(registry.event_time);
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    for (auto b : bounds) s.buckets.push_back({b, 0, std::vector<Tally>(P)});
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const auto it = std::upper_bound(bounds.begin(), bounds.end(), preds[i].timestamp);
      slot[i] = it == bounds.begin() ? 0 : static_cast<std::size_t>(it - bounds.begin()) - 1;
    }
  } else {
    const std::int64_t width = bucketing == Bucketing::hour ? 3600 : 86400;
    std::int64_t first = floor_to(preds[0].timestamp, width), last = first;
    for (const auto& p : preds) {
      first = std::min(first, floor_to(p.timestamp, width));
      last = std::max(last, floor_to(p.timestamp, width));
    }
    for (std::int64_t b = first; b <= last; b += width) {
      s.buckets.push_back({b, 0, std::vector<Tally>(P)});
    }
    for (std::size_t i = 0; i < preds.size(); ++i) {
      slot[i] = static_cast<std::size_t>((floor_to(preds[i].timestamp, width) - first) / width);
    }
  }
  for (std::size_t i = 0; i < preds.size(); ++i) {
    auto& b = s.buckets[slot[i]];
    ++b.volume;
    auto& t = b.tallies[who[i]];
    (preds[i].category.sentiment == Sentiment::positive ? t.pos : t.neg) += 1;
  }
  return s;
}

std::vector<Influence> expert_influence(std::span<const TimedPrediction> preds,
                                        const EventRegistry& registry) {
  if (!registry.expert_announcement_time) {
    throw DataError("registry '" + registry.event_id + "' has no expert announcement time");
  }
  const auto split = *registry.expert_announcement_time;
  const std::size_t P = registry.participants.size();
  std::vector<Tally> before(P), after(P);
  for (const auto& p : preds) {
    auto& t = (p.timestamp < split ? before : after)[participant(registry, p.category.target)];
    (p.category.sentiment == Sentiment::positive ? t.pos : t.neg) += 1;
  }
  std::vector<Influence> rows;
  for (std::size_t i = 0; i < P; ++i) {
    Influence r{registry.participants[i], before[i].score(), after[i].score(), std::nullopt};
    if (r.before && r.after) r.delta = *r.after - *r.before;
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json influence_json(const std::vector<Influence>& rows, const EventRegistry& registry) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"target", r.target}, {"before", optional_json(r.before)},
                   {"after", optional_json(r.after)}, {"delta", optional_json(r.delta)}});
  }
  return {{"event_id", registry.event_id},
          {"announcement", registry.expert_announcement_time.value_or(0)},
          {"targets", out}};
}

}  // namespace crowdsent
