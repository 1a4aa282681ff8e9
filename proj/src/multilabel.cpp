#include "crowdsent/multilabel.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "crowdsent/error.hpp"
#include "crowdsent/parallel.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

// Full enumeration below this many labelsets; rejection sampling above.
constexpr std::size_t kEnumerateLimit = 100000;

bool next_combination(std::vector<std::uint32_t>& c, std::size_t n) {
  const std::size_t k = c.size();
  for (std::size_t i = k; i-- > 0;) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (std::size_t j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

LabelSpace LabelSpace::from_registry(const EventRegistry& registry) {
  return LabelSpace{registry.participants};
}

std::string LabelSpace::name(std::size_t label) const {
  if (label < participants.size()) return participants[label];
  if (label == positive()) return "positive";
  if (label == negative()) return "negative";
  throw DataError("label index " + std::to_string(label) + " out of range");
}

bool is_gold(const LabelSet& set, const LabelSpace& space) {
  if (set.size() != space.size()) return false;
  const auto targets = std::count(set.begin(), set.begin() + static_cast<std::ptrdiff_t>(space.participants.size()), true);
  return targets == 1 && set[space.positive()] != set[space.negative()];
}

BaseKind parse_base_kind(std::string_view s) {
  if (s == "nb") return BaseKind::nb;
  if (s == "svm") return BaseKind::svm;
  throw UsageError("unknown base classifier '" + std::string(s) + "' (expected nb or svm)");
}

std::string to_string(BaseKind kind) { return kind == BaseKind::nb ? "nb" : "svm"; }

std::vector<bool> project(const LabelSet& set, std::span<const std::uint32_t> labels) {
  std::vector<bool> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(set[l]);
  return out;
}

const std::vector<bool>& LpClassifier::predict(const SparseVector& x) const {
  std::size_t c = 0;
  if (const auto* nb = std::get_if<NaiveBayesModel>(&base)) {
    c = crowdsent::predict(*nb, x).category;
  } else if (const auto* svm = std::get_if<SvmOvrModel>(&base)) {
    c = crowdsent::predict(*svm, x).category;
  }
  return categories[c];
}

LpClassifier train_lp(std::span<const SparseVector> xs, std::span<const LabelSet> ys,
                      std::vector<std::uint32_t> labels, const BaseConfig& base,
                      std::uint64_t seed) {
  if (xs.empty()) throw DataError("cannot train a label-powerset classifier on empty data");
  if (xs.size() != ys.size()) throw DataError("feature and labelset counts differ");
  std::sort(labels.begin(), labels.end());
  LpClassifier lp;
  lp.labels = std::move(labels);

  std::map<std::vector<bool>, std::size_t> index;
  std::vector<std::size_t> classes;
  classes.reserve(ys.size());
  for (const auto& y : ys) {
    auto proj = project(y, lp.labels);
    auto [it, fresh] = index.emplace(proj, lp.categories.size());
    if (fresh) lp.categories.push_back(std::move(proj));
    classes.push_back(it->second);
  }
  if (lp.categories.size() == 1) return lp;

  if (base.kind == BaseKind::nb) {
    lp.base = train_naive_bayes(xs, classes, lp.categories.size(), base.nb_smoothing);
  } else {
    SmoConfig smo = base.smo;
    smo.seed = seed;
    // Members already run in parallel; keep each one sequential.
    lp.base = train_svm_ovr(xs, classes, lp.categories.size(), smo, 1);
  }
  return lp;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = n - k + i;
    // r * num / i stays exact because r * num is divisible by i.
    if (r > std::numeric_limits<std::size_t>::max() / num) {
      return std::numeric_limits<std::size_t>::max();
    }
    r = r * num / i;
  }
  return r;
}

std::vector<std::vector<std::uint32_t>> sample_labelsets(std::size_t n, std::size_t k,
                                                         std::size_t m, std::uint64_t seed) {
  if (k < 1 || k > n) throw UsageError("labelset size k must be in [1, |L|]");
  const std::size_t total = binomial(n, k);
  if (m < 1 || m > total) throw UsageError("member count m must be in [1, C(|L|, k)]");
  Rng rng(derive_seed(seed, "rakel.labelsets"));
  std::vector<std::vector<std::uint32_t>> out;
  if (total <= kEnumerateLimit) {
    std::vector<std::vector<std::uint32_t>> all;
    std::vector<std::uint32_t> c(k);
    std::iota(c.begin(), c.end(), 0u);
    do {
      all.push_back(c);
    } while (next_combination(c, n));
    rng.shuffle(std::span<std::vector<std::uint32_t>>(all));
    all.resize(m);
    return all;
  }
  std::set<std::vector<std::uint32_t>> seen;
  std::vector<std::uint32_t> pool(n);
  while (out.size() < m) {
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + rng.below(n - i)]);
    }
    std::vector<std::uint32_t> pick(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(pick.begin(), pick.end());
    if (seen.insert(pick).second) out.push_back(std::move(pick));
  }
  return out;
}

RakelModel train_rakel(std::span<const SparseVector> xs, std::span<const LabelSet> ys,
                       const LabelSpace& space, const RakelConfig& config) {
  if (xs.empty()) throw DataError("cannot train RAkEL on empty data");
  if (xs.size() != ys.size()) throw DataError("feature and labelset counts differ");
  if (!(config.threshold > 0.0 && config.threshold < 1.0)) {
    throw UsageError("RAkEL threshold must be in (0, 1)");
  }
  const std::size_t L = space.size();
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (!is_gold(ys[i], space)) {
      throw DataError("labelset " + std::to_string(i) +
                      " must set exactly one target and one sentiment");
    }
  }
  if (config.k < 1 || config.k > L) throw UsageError("labelset size k must be in [1, |L|]");
  const std::size_t m = config.m ? *config.m : std::min(2 * L, binomial(L, config.k));

  RakelModel model;
  model.space_size = L;
  model.k = config.k;
  model.threshold = config.threshold;
  model.seed = config.seed;
  const auto sets = sample_labelsets(L, config.k, m, config.seed);
  model.members.resize(sets.size());
  parallel_for(sets.size(), config.threads, [&](std::size_t i) {
    model.members[i] = train_lp(xs, ys, sets[i], config.base,
                                derive_seed(config.seed, "rakel.member." + std::to_string(i)));
  });
  return model;
}

LabelSet threshold_labels(std::span<const double> ratios, double threshold) {
  LabelSet out(ratios.size(), false);
  for (std::size_t l = 0; l < ratios.size(); ++l) out[l] = ratios[l] > threshold;
  return out;
}

RakelPrediction predict_rakel(const RakelModel& model, const SparseVector& x) {
  std::vector<double> yes(model.space_size, 0.0), covered(model.space_size, 0.0);
  for (const auto& member : model.members) {
    const auto& proj = member.predict(x);
    for (std::size_t i = 0; i < member.labels.size(); ++i) {
      covered[member.labels[i]] += 1.0;
      if (proj[i]) yes[member.labels[i]] += 1.0;
    }
  }
  RakelPrediction p;
  p.ratios.resize(model.space_size, 0.0);
  for (std::size_t l = 0; l < model.space_size; ++l) {
    if (covered[l] > 0) p.ratios[l] = yes[l] / covered[l];
  }
  p.labels = threshold_labels(p.ratios, model.threshold);
  return p;
}

JointCategory to_pair(std::span<const double> ratios, const LabelSpace& space) {
  if (ratios.size() != space.size()) throw DataError("ratio count does not match label space");
  const std::size_t n = space.participants.size();
  const std::size_t target = argmax_lowest(ratios.subspan(0, n));
  const bool positive = ratios[space.positive()] >= ratios[space.negative()];
  return {space.participants[target], positive ? Sentiment::positive : Sentiment::negative};
}

}  // namespace crowdsent
