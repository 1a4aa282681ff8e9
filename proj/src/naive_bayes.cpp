#include <cmath>
#include <limits>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/error.hpp"

namespace crowdsent {

std::size_t category_count(const EventRegistry& registry) {
  return 2 * registry.participants.size();
}

std::size_t category_index(const EventRegistry& registry, const JointCategory& c) {
  const auto p = registry.index_of(c.target);
  if (!p) throw DataError("unknown target '" + c.target + "'");
  return 2 * *p + (c.sentiment == Sentiment::negative ? 1 : 0);
}

JointCategory category_at(const EventRegistry& registry, std::size_t index) {
  if (index >= category_count(registry)) {
    throw DataError("category index " + std::to_string(index) + " out of range");
  }
  return {registry.participants[index / 2],
          index % 2 ? Sentiment::negative : Sentiment::positive};
}

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

NaiveBayesModel train_naive_bayes(std::span<const SparseVector> xs,
                                  std::span<const std::size_t> labels,
                                  std::size_t num_classes, double smoothing) {
  if (xs.empty()) throw DataError("cannot train Naive Bayes on empty data");
  if (xs.size() != labels.size()) throw DataError("feature and label counts differ");
  if (num_classes == 0) throw UsageError("Naive Bayes needs at least one class");
  if (!(smoothing > 0.0)) throw UsageError("Naive Bayes smoothing must be positive");

  NaiveBayesModel m;
  m.dimension = xs.front().dimension();
  m.smoothing = smoothing;
  Matrix counts(num_classes, m.dimension);
  std::vector<double> totals(num_classes, 0.0);
  std::vector<double> docs(num_classes, 0.0);
  for (std::size_t n = 0; n < xs.size(); ++n) {
    const auto c = labels[n];
    if (c >= num_classes) throw DataError("label " + std::to_string(c) + " out of range");
    if (xs[n].dimension() != m.dimension) throw DataError("feature dimensions differ");
    ++docs[c];
    for (const auto& e : xs[n].entries()) {
      if (e.value < 0.0) {
        throw DataError("Naive Bayes features must be non-negative counts");
      }
      counts(c, e.index) += e.value;
      totals[c] += e.value;
    }
  }

  const double N = static_cast<double>(xs.size());
  const double D = static_cast<double>(m.dimension);
  m.log_priors.resize(num_classes);
  m.log_likelihoods = Matrix(num_classes, m.dimension);
  for (std::size_t c = 0; c < num_classes; ++c) {
    m.log_priors[c] = docs[c] > 0 ? std::log(docs[c] / N)
                                  : -std::numeric_limits<double>::infinity();
    const double denom = std::log(totals[c] + smoothing * D);
    for (std::size_t i = 0; i < m.dimension; ++i) {
      m.log_likelihoods(c, i) = std::log(counts(c, i) + smoothing) - denom;
    }
  }
  return m;
}

Prediction predict(const NaiveBayesModel& model, const SparseVector& x) {
  if (x.dimension() != model.dimension) {
    throw DataError("feature dimension " + std::to_string(x.dimension()) +
                    " does not match model dimension " + std::to_string(model.dimension));
  }
  Prediction p;
  p.scores.resize(model.num_classes());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < model.num_classes(); ++c) {
    double s = model.log_priors[c];
    if (std::isfinite(s)) {
      for (const auto& e : x.entries()) s += e.value * model.log_likelihoods(c, e.index);
    }
    p.scores[c] = s;
    top = std::max(top, s);
  }
  double z = 0.0;
  for (double s : p.scores) z += std::exp(s - top);
  const double log_z = top + std::log(z);
  for (double& s : p.scores) s -= log_z;
  p.category = argmax_lowest(p.scores);
  return p;
}

}  // namespace crowdsent
