#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/error.hpp"
#include "crowdsent/parallel.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

constexpr double kTau = 1e-12;

// Linear kernel rows K(i, .) with FIFO eviction.
class KernelRows {
 public:
  KernelRows(std::span<const SparseVector> xs, std::size_t dimension)
      : xs_(xs), scatter_(dimension, 0.0) {
    const std::size_t n = xs.size();
    capacity_ = std::max<std::size_t>(2, std::min(n, (std::size_t{256} << 20) / (8 * n + 1)));
  }

  const std::vector<double>& row(std::uint32_t i) {
    if (auto it = rows_.find(i); it != rows_.end()) return it->second;
    if (rows_.size() >= capacity_) {
      rows_.erase(order_.front());
      order_.pop_front();
    }
    for (const auto& e : xs_[i].entries()) scatter_[e.index] = e.value;
    std::vector<double> r(xs_.size());
    for (std::size_t t = 0; t < xs_.size(); ++t) r[t] = xs_[t].dot(scatter_);
    for (const auto& e : xs_[i].entries()) scatter_[e.index] = 0.0;
    order_.push_back(i);
    return rows_.emplace(i, std::move(r)).first->second;
  }

 private:
  std::span<const SparseVector> xs_;
  std::vector<double> scatter_;
  std::size_t capacity_;
  std::unordered_map<std::uint32_t, std::vector<double>> rows_;
  std::deque<std::uint32_t> order_;
};

}  // namespace

double SvmBinaryModel::decision(const SparseVector& x) const {
  if (x.dimension() != w.size()) {
    throw DataError("feature dimension " + std::to_string(x.dimension()) +
                    " does not match model dimension " + std::to_string(w.size()));
  }
  return x.dot(w) + bias;
}

SvmBinaryModel smo_solve(std::span<const SparseVector> xs, std::span<const int> y,
                         const SmoConfig& config) {
  if (xs.empty()) throw DataError("cannot train an SVM on empty data");
  if (xs.size() != y.size()) throw DataError("feature and label counts differ");
  if (!(config.C > 0.0)) throw UsageError("SVM C must be positive");
  if (!(config.tol > 0.0)) throw UsageError("SVM tol must be positive");
  const std::size_t n = xs.size();
  const std::size_t dim = xs.front().dimension();
  bool has_pos = false, has_neg = false;
  for (std::size_t t = 0; t < n; ++t) {
    if (y[t] != 1 && y[t] != -1) throw DataError("SVM labels must be +1 or -1");
    if (xs[t].dimension() != dim) throw DataError("feature dimensions differ");
    (y[t] > 0 ? has_pos : has_neg) = true;
  }
  if (!has_pos || !has_neg) throw DataError("SVM training data needs both classes");

  const double C = config.C;
  SvmBinaryModel m;
  m.C = C;
  m.alphas.assign(n, 0.0);
  m.labels.resize(n);
  for (std::size_t t = 0; t < n; ++t) m.labels[t] = static_cast<std::int8_t>(y[t]);

  // Scan order only matters for ties between equally violating examples.
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(config.seed, "smo.order"));
  rng.shuffle(std::span<std::uint32_t>(order));

  std::vector<double> diag(n), grad(n, -1.0);
  for (std::size_t t = 0; t < n; ++t) diag[t] = xs[t].squared_norm();
  auto& alpha = m.alphas;
  auto in_up = [&](std::size_t t) { return y[t] > 0 ? alpha[t] < C : alpha[t] > 0; };
  auto in_low = [&](std::size_t t) { return y[t] > 0 ? alpha[t] > 0 : alpha[t] < C; };
  // v_t = -y_t G_t; at the optimum v is <= b on the up set and >= b on the low set.
  auto v = [&](std::size_t t) { return -y[t] * grad[t]; };

  KernelRows kernel(xs, dim);
  const std::size_t cap = config.max_passes * std::max<std::size_t>(n, 1000);
  double up_max = 0.0, low_min = 0.0;
  std::vector<double> Ki, Kj;  // copies; the cache may evict
  for (;;) {
    up_max = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t i = -1;
    for (auto t : order) {
      if (in_up(t) && v(t) > up_max) {
        up_max = v(t);
        i = t;
      }
    }
    low_min = std::numeric_limits<double>::infinity();
    for (auto t : order) {
      if (in_low(t)) low_min = std::min(low_min, v(t));
    }
    if (i < 0 || up_max - low_min <= config.tol) {
      m.converged = true;
      break;
    }
    if (m.iterations >= cap) break;

    Ki = kernel.row(static_cast<std::uint32_t>(i));
    std::ptrdiff_t j = -1;
    double best = std::numeric_limits<double>::infinity();
    for (auto t : order) {
      if (!in_low(t)) continue;
      const double b = up_max - v(t);
      if (b <= 0) continue;
      double a = diag[i] + diag[t] - 2.0 * Ki[t];
      if (a <= 0) a = kTau;
      if (-b * b / a < best) {
        best = -b * b / a;
        j = t;
      }
    }
    Kj = kernel.row(static_cast<std::uint32_t>(j));

    double a = diag[i] + diag[j] - 2.0 * Ki[j];
    if (a <= 0) a = kTau;
    // Step along alpha_i += y_i lambda, alpha_j -= y_j lambda.
    const double bound_i = y[i] > 0 ? C - alpha[i] : alpha[i];
    const double bound_j = y[j] > 0 ? alpha[j] : C - alpha[j];
    double lambda = (up_max - v(j)) / a;
    bool clip_i = false, clip_j = false;
    if (lambda >= bound_i) {
      lambda = bound_i;
      clip_i = true;
    }
    if (lambda >= bound_j) {
      lambda = bound_j;
      clip_j = true;
      clip_i = lambda == bound_i;
    }
    alpha[i] += y[i] * lambda;
    alpha[j] -= y[j] * lambda;
    if (clip_i) alpha[i] = y[i] > 0 ? C : 0.0;
    if (clip_j) alpha[j] = y[j] > 0 ? 0.0 : C;
    for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * lambda * (Ki[t] - Kj[t]);
    ++m.iterations;
  }

  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] > 0 && alpha[t] < C) {
      free_sum += v(t);
      ++free_count;
    }
  }
  m.bias = free_count ? free_sum / static_cast<double>(free_count) : 0.5 * (up_max + low_min);
  if (!std::isfinite(m.bias)) m.bias = 0.0;

  m.w.assign(dim, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0) continue;
    m.support.push_back(static_cast<std::uint32_t>(t));
    for (const auto& e : xs[t].entries()) m.w[e.index] += alpha[t] * y[t] * e.value;
  }
  for (double wk : m.w) {
    if (!std::isfinite(wk)) throw NumericError("SVM weights are not finite");
  }
  return m;
}

std::size_t SvmOvrModel::member_count() const {
  return static_cast<std::size_t>(
      std::count_if(members.begin(), members.end(), [](const auto& m) { return m.has_value(); }));
}

SvmOvrModel train_svm_ovr(std::span<const SparseVector> xs,
                          std::span<const std::size_t> labels, std::size_t num_classes,
                          const SmoConfig& config, std::size_t threads) {
  if (xs.empty()) throw DataError("cannot train an SVM on empty data");
  if (xs.size() != labels.size()) throw DataError("feature and label counts differ");
  std::vector<bool> present(num_classes, false);
  for (auto c : labels) {
    if (c >= num_classes) throw DataError("label " + std::to_string(c) + " out of range");
    present[c] = true;
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw DataError("one-vs-rest SVM needs at least two categories in the data");
  }

  SvmOvrModel m;
  m.dimension = xs.front().dimension();
  m.num_classes = num_classes;
  m.members.resize(num_classes);
  parallel_for(num_classes, threads, [&](std::size_t c) {
    if (!present[c]) return;
    std::vector<int> y(labels.size());
    for (std::size_t t = 0; t < labels.size(); ++t) y[t] = labels[t] == c ? 1 : -1;
    SmoConfig member = config;
    member.seed = derive_seed(config.seed, "ovr." + std::to_string(c));
    m.members[c] = smo_solve(xs, y, member);
  });
  return m;
}

Prediction predict(const SvmOvrModel& model, const SparseVector& x) {
  if (x.dimension() != model.dimension) {
    throw DataError("feature dimension " + std::to_string(x.dimension()) +
                    " does not match model dimension " + std::to_string(model.dimension));
  }
  Prediction p;
  p.scores.resize(model.num_classes, -std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < model.num_classes; ++c) {
    if (model.members[c]) p.scores[c] = model.members[c]->decision(x);
  }
  p.category = argmax_lowest(p.scores);
  return p;
}

}  // namespace crowdsent
