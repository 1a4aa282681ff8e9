#include "crowdsent/prediction.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"

using namespace crowdsent;

namespace {

constexpr auto kPos = Sentiment::positive;
constexpr auto kNeg = Sentiment::negative;

EventRegistry registry(std::vector<std::string> participants) {
  EventRegistry r;
  r.event_id = "ev";
  r.participants = std::move(participants);
  r.event_time = 1450224000;  // 2015-12-16T00:00:00Z
  r.expert_announcement_time = 1450267200;
  return r;
}

std::vector<TimedPrediction> repeat(const std::string& t, std::size_t pos, std::size_t neg,
                                    std::int64_t ts = 0) {
  std::vector<TimedPrediction> out;
  for (std::size_t i = 0; i < pos; ++i) out.push_back({{t, kPos}, ts});
  for (std::size_t i = 0; i < neg; ++i) out.push_back({{t, kNeg}, ts});
  return out;
}

std::vector<std::string> order(const RankedOutcome& o) {
  std::vector<std::string> v;
  for (const auto& e : o.ranked) v.push_back(e.target);
  return v;
}

}  // namespace

TEST(Aggregate, Examples) {
  EXPECT_TRUE(aggregate({}).empty());
  const std::vector<TimedPrediction> three{{{"A", kPos}, 0}, {{"A", kNeg}, 0}, {{"A", kPos}, 0}};
  EXPECT_EQ(aggregate(three).at("A"), (Tally{2, 1}));
  const std::vector<TimedPrediction> six{{{"A", kPos}, 0}, {{"B", kNeg}, 0}, {{"C", kPos}, 0},
                                         {{"B", kNeg}, 0}, {{"A", kNeg}, 0}, {{"B", kPos}, 0}};
  const auto t = aggregate(six);
  EXPECT_EQ(t.at("A"), (Tally{1, 1}));
  EXPECT_EQ(t.at("B"), (Tally{1, 2}));
  EXPECT_EQ(t.at("C"), (Tally{1, 0}));
}

TEST(Aggregate, PermutationInvariant) {
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TimedPrediction> p;
    for (int i = 0; i < 30; ++i) {
      p.push_back({{std::string(1, static_cast<char>('A' + rng.below(4))), rng.bernoulli(0.5) ? kPos : kNeg}, 0});
    }
    const auto before = aggregate(p);
    rng.shuffle(std::span<TimedPrediction>(p));
    EXPECT_EQ(aggregate(p), before);
  }
}

TEST(RankOutcome, TwoParticipantHandExample) {
  auto p = repeat("A", 30, 10);
  auto b = repeat("B", 10, 30);
  p.insert(p.end(), b.begin(), b.end());
  const auto o = rank_outcome(aggregate(p), registry({"B", "A"}), RankMode::half_list());
  EXPECT_EQ(order(o), (std::vector<std::string>{"A", "B"}));
  EXPECT_DOUBLE_EQ(o.ranked[0].raw, 0.75);
  EXPECT_DOUBLE_EQ(o.ranked[1].raw, 0.25);
  EXPECT_DOUBLE_EQ(o.ranked[0].norm, 1.0);
  EXPECT_DOUBLE_EQ(o.ranked[1].norm, 0.0);
  EXPECT_EQ(o.k, 1u);
  EXPECT_EQ(o.winners(), std::vector<std::string>{"A"});
}

TEST(RankOutcome, IdenticalTalliesKeepRegistryOrder) {
  std::vector<TimedPrediction> p;
  for (auto t : {"C", "A", "B"}) {
    auto r = repeat(t, 3, 2);
    p.insert(p.end(), r.begin(), r.end());
  }
  const auto o = rank_outcome(aggregate(p), registry({"C", "A", "B"}), RankMode::half_list());
  EXPECT_EQ(order(o), (std::vector<std::string>{"C", "A", "B"}));
  for (const auto& e : o.ranked) EXPECT_EQ(e.norm, 0.0);
}

TEST(RankOutcome, ListSizes) {
  std::vector<std::string> ten;
  for (int i = 0; i < 10; ++i) ten.push_back("p" + std::to_string(i));
  const auto t = aggregate(repeat("p3", 1, 0));
  EXPECT_EQ(rank_outcome(t, registry(ten), RankMode::half_list()).k, 5u);
  EXPECT_EQ(rank_outcome(t, registry({"p3"}), RankMode::half_list()).k, 1u);
  EXPECT_EQ(rank_outcome(t, registry({"p3", "x", "y"}), RankMode::half_list()).k, 1u);
  EXPECT_EQ(rank_outcome(t, registry(ten), RankMode::top_n(3)).k, 3u);
  EXPECT_EQ(rank_outcome(t, registry(ten), RankMode::top_n(30)).k, 10u);
}

TEST(RankOutcome, UnmentionedRankLastBehindZeroScores) {
  const auto t = aggregate(repeat("B", 0, 4));
  const auto o = rank_outcome(t, registry({"A", "B", "C"}), RankMode::half_list());
  EXPECT_EQ(order(o), (std::vector<std::string>{"B", "A", "C"}));
}

TEST(RankOutcome, Errors) {
  EXPECT_THROW(rank_outcome({}, registry({"A"}), RankMode::half_list()), DataError);
  EXPECT_THROW(rank_outcome(aggregate(repeat("Z", 1, 0)), registry({"A"}), RankMode::half_list()),
               DataError);
}

// Oracle: sort by any strictly increasing transform of the raw score.
TEST(RankOutcome, OrderInvariantUnderMonotoneTransforms) {
  Rng rng(4);
  const std::vector<std::string> names{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 300; ++trial) {
    SentimentTally t;
    for (const auto& n : names) {
      if (rng.bernoulli(0.8)) t[n] = {rng.below(5), rng.below(5)};
    }
    if (t.empty()) t["a"] = {1, 0};
    const auto o = rank_outcome(t, registry(names), RankMode::half_list());

    const double a = rng.uniform(0.5, 3.0), b = rng.uniform(-1, 1);
    auto f = [&](double x) { return std::exp(a * x) + b; };
    std::vector<std::size_t> idx(names.size());
    std::iota(idx.begin(), idx.end(), 0u);
    auto raw = [&](std::size_t i) {
      auto it = t.find(names[i]);
      return it == t.end() ? 0.0 : it->second.score().value_or(0.0);
    };
    auto mentioned = [&](std::size_t i) {
      auto it = t.find(names[i]);
      return it != t.end() && it->second.total() > 0;
    };
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
      if (f(raw(x)) != f(raw(y))) return f(raw(x)) > f(raw(y));
      return mentioned(x) && !mentioned(y);
    });
    std::vector<std::string> expect;
    for (auto i : idx) expect.push_back(names[i]);
    EXPECT_EQ(order(o), expect);

    bool distinct = false;
    for (const auto& e : o.ranked) {
      EXPECT_GE(e.norm, 0.0);
      EXPECT_LE(e.norm, 1.0);
      distinct |= e.raw != o.ranked[0].raw;
    }
    if (distinct) EXPECT_EQ(o.ranked[0].norm, 1.0);
  }
}

TEST(RankOutcome, Json) {
  const auto o = rank_outcome(aggregate(repeat("A", 1, 1)), registry({"A", "B"}), RankMode::half_list());
  const auto j = o.to_json();
  EXPECT_EQ(j["event_id"], "ev");
  EXPECT_EQ(j["k"], 1);
  EXPECT_EQ(j["ranked"][0]["target"], "A");
  EXPECT_EQ(j["ranked"][0]["raw"], 0.5);
}

TEST(Trends, SingleHour) {
  const auto p = repeat("A", 3, 4, 1450224000 + 100);
  const auto s = trend_series(p, Bucketing::hour, registry({"A", "B"}));
  ASSERT_EQ(s.buckets.size(), 1u);
  EXPECT_EQ(s.buckets[0].start, 1450224000);
  EXPECT_EQ(s.buckets[0].volume, 7u);
}

TEST(Trends, DayBucketsRelativeToEvent) {
  // Five timestamps on the event day, the next day and the day after.
  const std::int64_t day0 = 1450224000;
  const std::vector<TimedPrediction> p{{{"A", kPos}, day0 + 10},
                                       {{"B", kNeg}, day0 + 86399},
                                       {{"A", kNeg}, day0 + 86400},
                                       {{"A", kPos}, day0 + 2 * 86400 + 5},
                                       {{"B", kPos}, day0 + 2 * 86400 + 7000}};
  const auto s = trend_series(p, Bucketing::day, registry({"A", "B"}));
  ASSERT_EQ(s.buckets.size(), 3u);
  EXPECT_EQ(s.buckets[0].start, day0);
  EXPECT_EQ(s.buckets[1].start, day0 + 86400);
  EXPECT_EQ(s.buckets[0].volume, 2u);
  EXPECT_EQ(s.buckets[1].volume, 1u);
  EXPECT_EQ(s.buckets[2].volume, 2u);
  EXPECT_EQ(s.buckets[2].tallies[1], (Tally{1, 0}));
}

TEST(Trends, EmptyInputAndGaps) {
  EXPECT_TRUE(trend_series({}, Bucketing::hour, registry({"A"})).buckets.empty());
  const std::vector<TimedPrediction> p{{{"A", kPos}, 0}, {{"A", kPos}, 3 * 3600}};
  const auto s = trend_series(p, Bucketing::hour, registry({"A"}));
  ASSERT_EQ(s.buckets.size(), 4u);
  EXPECT_EQ(s.buckets[1].volume, 0u);
  EXPECT_EQ(s.buckets[2].start - s.buckets[1].start, 3600);
}

TEST(Trends, NegativeTimestampsFloorDown) {
  const std::vector<TimedPrediction> p{{{"A", kPos}, -1}};
  EXPECT_EQ(trend_series(p, Bucketing::hour, registry({"A"})).buckets[0].start, -3600);
}

TEST(Trends, EventBoundaries) {
  const std::vector<std::int64_t> starts{100, 200, 300};
  const std::vector<TimedPrediction> p{{{"A", kPos}, 50}, {{"A", kPos}, 150}, {{"A", kNeg}, 250},
                                       {{"A", kNeg}, 999}};
  const auto s = trend_series(p, Bucketing::event, registry({"A"}), starts);
  ASSERT_EQ(s.buckets.size(), 3u);
  EXPECT_EQ(s.buckets[0].volume, 2u);  // includes the early tweet
  EXPECT_EQ(s.buckets[1].volume, 1u);
  EXPECT_EQ(s.buckets[2].volume, 1u);
}

TEST(Trends, VolumesSumToInput) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TimedPrediction> p;
    const std::size_t n = rng.below(50);
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back({{rng.bernoulli(0.5) ? "A" : "B", kPos}, static_cast<std::int64_t>(rng.below(400000))});
    }
    for (auto b : {Bucketing::hour, Bucketing::day, Bucketing::event}) {
      const auto s = trend_series(p, b, registry({"A", "B"}));
      std::size_t v = 0;
      for (const auto& bucket : s.buckets) v += bucket.volume;
      EXPECT_EQ(v, n);
    }
  }
}

TEST(Trends, Csv) {
  const std::vector<TimedPrediction> p{{{"A", kPos}, 0}, {{"A", kNeg}, 0}, {{"A", kPos}, 0}};
  const auto s = trend_series(p, Bucketing::hour, registry({"A", "B"}));
  EXPECT_EQ(s.to_csv(),
            "bucket_start,target,pos,neg,score,volume\n"
            "0,A,2,1,0.6666666666666666,3\n"
            "0,B,0,0,,3\n");
}

TEST(Influence, Examples) {
  const auto r = registry({"A", "B"});
  const auto split = *r.expert_announcement_time;
  auto all_before = repeat("A", 2, 1, split - 1);
  for (const auto& row : expert_influence(all_before, r)) EXPECT_FALSE(row.after);

  auto p = repeat("A", 1, 1, split - 10);
  auto after = repeat("A", 3, 1, split);
  p.insert(p.end(), after.begin(), after.end());
  const auto rows = expert_influence(p, r);
  EXPECT_DOUBLE_EQ(*rows[0].before, 0.5);
  EXPECT_DOUBLE_EQ(*rows[0].after, 0.75);
  EXPECT_DOUBLE_EQ(*rows[0].delta, 0.25);
  EXPECT_FALSE(rows[1].before);
  EXPECT_FALSE(rows[1].delta);

  auto same = repeat("B", 2, 3, split - 5);
  auto same_after = repeat("B", 2, 3, split + 5);
  same.insert(same.end(), same_after.begin(), same_after.end());
  EXPECT_EQ(*expert_influence(same, r)[1].delta, 0.0);

  const auto j = influence_json(rows, r);
  EXPECT_TRUE(j["targets"][1]["delta"].is_null());

  auto none = r;
  none.expert_announcement_time.reset();
  EXPECT_THROW(expert_influence(p, none), DataError);
}
