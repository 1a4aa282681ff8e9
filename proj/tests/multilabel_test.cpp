#include "crowdsent/multilabel.hpp"

#include <gtest/gtest.h>

#include <set>

#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"

using namespace crowdsent;

namespace {

LabelSpace space4() { return LabelSpace{{"trump", "cruz"}}; }  // |L| = 4

LabelSet gold(const LabelSpace& s, std::size_t target, bool positive) {
  LabelSet set(s.size(), false);
  set[target] = true;
  set[positive ? s.positive() : s.negative()] = true;
  return set;
}

// Feature t < P marks the target, P and P + 1 the sentiment; the last three are noise.
struct Synthetic {
  std::vector<SparseVector> xs;
  std::vector<LabelSet> ys;
};

Synthetic synthetic(const LabelSpace& s, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Synthetic d;
  const std::size_t P = s.participants.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t target = rng.below(P);
    const bool positive = rng.bernoulli(0.5);
    std::vector<double> x(P + 5, 0.0);
    x[target] = 1.0 + rng.below(2);
    if (rng.bernoulli(0.85)) x[P + (positive ? 0 : 1)] = 1.0;
    for (int k = 0; k < 2; ++k) x[P + 2 + rng.below(3)] += 1.0;
    d.xs.push_back(SparseVector::from_dense(x));
    d.ys.push_back(gold(s, target, positive));
  }
  return d;
}

LpClassifier constant_member(std::vector<std::uint32_t> labels, std::vector<bool> out) {
  LpClassifier lp;
  lp.labels = std::move(labels);
  lp.categories = {std::move(out)};
  return lp;
}

}  // namespace

TEST(LabelSpace, LayoutAndGold) {
  const auto s = space4();
  EXPECT_EQ(s.size(), 4u);
  EXPECT_EQ(s.positive(), 2u);
  EXPECT_EQ(s.name(3), "negative");
  EXPECT_TRUE(is_gold(gold(s, 1, false), s));
  EXPECT_FALSE(is_gold(LabelSet{true, true, true, false}, s));
  EXPECT_FALSE(is_gold(LabelSet{true, false, true, true}, s));
  EXPECT_FALSE(is_gold(LabelSet{false, false, true, false}, s));
  EXPECT_FALSE(is_gold(LabelSet{true, false, true}, s));
}

TEST(Rakel, Binomial) {
  EXPECT_EQ(binomial(4, 2), 6u);
  EXPECT_EQ(binomial(10, 3), 120u);
  EXPECT_EQ(binomial(3, 5), 0u);
  EXPECT_EQ(binomial(60, 30), 118264581564861424u);
  EXPECT_EQ(binomial(200, 100), std::numeric_limits<std::size_t>::max());
}

TEST(Rakel, FullLabelsetIsForcedWhenKEqualsL) {
  const auto sets = sample_labelsets(5, 5, 1, 3);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0], (std::vector<std::uint32_t>{0, 1, 2, 3, 4}));
}

TEST(Rakel, ExhaustiveSamplingGivesEveryPair) {
  const auto sets = sample_labelsets(4, 2, 6, 9);
  std::set<std::vector<std::uint32_t>> got(sets.begin(), sets.end());
  std::set<std::vector<std::uint32_t>> want{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  EXPECT_EQ(got, want);
}

TEST(Rakel, SampledLabelsetsAreDistinctSortedAndSeeded) {
  for (auto [n, k, m] : {std::tuple{8, 3, 16}, std::tuple{40, 5, 80}}) {
    const auto sets = sample_labelsets(n, k, m, 1);
    std::set<std::vector<std::uint32_t>> unique(sets.begin(), sets.end());
    EXPECT_EQ(unique.size(), static_cast<std::size_t>(m));
    for (const auto& s : sets) {
      EXPECT_EQ(s.size(), static_cast<std::size_t>(k));
      EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
      EXPECT_LT(s.back(), static_cast<std::uint32_t>(n));
    }
    EXPECT_EQ(sets, sample_labelsets(n, k, m, 1));
    EXPECT_NE(sets, sample_labelsets(n, k, m, 2));
  }
  EXPECT_THROW(sample_labelsets(4, 5, 1, 0), UsageError);
  EXPECT_THROW(sample_labelsets(4, 2, 7, 0), UsageError);
  EXPECT_THROW(sample_labelsets(4, 0, 1, 0), UsageError);
}

TEST(Rakel, ProjectionIsIntersection) {
  const auto s = space4();
  const std::vector<std::uint32_t> trump_neg{0, 3};
  EXPECT_EQ(project(gold(s, 0, true), trump_neg), (std::vector<bool>{true, false}));
}

TEST(Rakel, VoteRatiosAndThreshold) {
  RakelModel m;
  m.space_size = 4;
  m.threshold = 0.5;
  m.members.push_back(constant_member({0, 2}, {true, true}));
  m.members.push_back(constant_member({0, 3}, {true, false}));
  m.members.push_back(constant_member({0, 2}, {false, false}));
  const auto p = predict_rakel(m, SparseVector(1));
  EXPECT_NEAR(p.ratios[0], 2.0 / 3.0, 1e-15);
  EXPECT_TRUE(p.labels[0]);
  EXPECT_DOUBLE_EQ(p.ratios[1], 0.0);  // covered by no member
  EXPECT_FALSE(p.labels[1]);
  EXPECT_DOUBLE_EQ(p.ratios[2], 0.5);  // not strictly above threshold
  EXPECT_FALSE(p.labels[2]);
  EXPECT_DOUBLE_EQ(p.ratios[3], 0.0);
}

TEST(Rakel, ThresholdMonotonicity) {
  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> ratios(6);
    for (auto& r : ratios) r = rng.below(4) / 3.0;
    const double lo = rng.uniform(), hi = lo + rng.uniform() * (1 - lo);
    const auto a = threshold_labels(ratios, lo), b = threshold_labels(ratios, hi);
    for (std::size_t l = 0; l < ratios.size(); ++l) EXPECT_LE(b[l], a[l]);
  }
}

TEST(Rakel, SingleFullMemberEqualsPureLabelPowerset) {
  const LabelSpace s{{"a", "b", "c"}};
  const auto train = synthetic(s, 150, 1);
  const auto test = synthetic(s, 50, 2);
  for (auto kind : {BaseKind::svm, BaseKind::nb}) {
    RakelConfig c;
    c.k = s.size();
    c.m = 1;
    c.seed = 11;
    c.base.kind = kind;
    const auto model = train_rakel(train.xs, train.ys, s, c);
    ASSERT_EQ(model.members.size(), 1u);
    std::vector<std::uint32_t> all{0, 1, 2, 3, 4};
    const auto lp = train_lp(train.xs, train.ys, all, c.base, derive_seed(11, "rakel.member.0"));
    for (const auto& x : test.xs) {
      const auto p = predict_rakel(model, x);
      EXPECT_EQ(p.labels, lp.predict(x));
    }
  }
}

TEST(Rakel, LearnsSyntheticLabels) {
  const LabelSpace s{{"a", "b", "c"}};
  const auto train = synthetic(s, 200, 3);
  const auto test = synthetic(s, 100, 4);
  RakelConfig c;
  c.seed = 2;
  const auto model = train_rakel(train.xs, train.ys, s, c);
  EXPECT_EQ(model.members.size(), 10u);  // min(2 * 5, C(5, 3))
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.xs.size(); ++i) {
    const auto p = predict_rakel(model, test.xs[i]);
    for (double r : p.ratios) {
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
    }
    const auto pair = to_pair(p.ratios, s);
    const auto target = static_cast<std::size_t>(
        std::find(s.participants.begin(), s.participants.end(), pair.target) - s.participants.begin());
    correct += test.ys[i][target];
  }
  EXPECT_GE(correct, 90u);
}

TEST(Rakel, Errors) {
  const auto s = space4();
  const auto d = synthetic(LabelSpace{{"trump", "cruz"}}, 10, 1);
  RakelConfig c;
  c.k = 5;
  EXPECT_THROW(train_rakel(d.xs, d.ys, s, c), UsageError);
  c.k = 2;
  c.m = 7;
  EXPECT_THROW(train_rakel(d.xs, d.ys, s, c), UsageError);
  c.m.reset();
  auto bad = d.ys;
  bad[3][s.negative()] = bad[3][s.positive()] = true;
  EXPECT_THROW(train_rakel(d.xs, bad, s, c), DataError);
}

TEST(Rakel, Deterministic) {
  const LabelSpace s{{"a", "b", "c"}};
  const auto d = synthetic(s, 60, 7);
  RakelConfig c;
  c.threads = 4;
  const auto a = train_rakel(d.xs, d.ys, s, c);
  c.threads = 1;
  const auto b = train_rakel(d.xs, d.ys, s, c);
  ASSERT_EQ(a.members.size(), b.members.size());
  for (std::size_t i = 0; i < a.members.size(); ++i) EXPECT_EQ(a.members[i].labels, b.members[i].labels);
  for (const auto& x : d.xs) EXPECT_EQ(predict_rakel(a, x).ratios, predict_rakel(b, x).ratios);
}

TEST(ToPair, Examples) {
  const LabelSpace s{{"trump", "cruz"}};
  const std::vector<double> r{0.9, 0.2, 0.8, 0.1};
  EXPECT_EQ(to_pair(r, s), (JointCategory{"trump", Sentiment::positive}));
  const std::vector<double> zero(4, 0.0);
  EXPECT_EQ(to_pair(zero, s), (JointCategory{"trump", Sentiment::positive}));
  const std::vector<double> cruz_neg{0.0, 1.0, 0.0, 1.0};
  EXPECT_EQ(to_pair(cruz_neg, s), (JointCategory{"cruz", Sentiment::negative}));
}
