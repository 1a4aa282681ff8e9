#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/corpus.hpp"
#include "crowdsent/sparse.hpp"

namespace crowdsent {

/// Participant indicators followed by [positive, negative].
struct LabelSpace {
  std::vector<std::string> participants;

  static LabelSpace from_registry(const EventRegistry& registry);
  std::size_t size() const { return participants.size() + 2; }
  std::size_t positive() const { return participants.size(); }
  std::size_t negative() const { return participants.size() + 1; }
  std::string name(std::size_t label) const;
};

/// One flag per label in LabelSpace order.
using LabelSet = std::vector<bool>;

/// Exactly one participant flag and one sentiment flag.
bool is_gold(const LabelSet& set, const LabelSpace& space);

enum class BaseKind { nb, svm };
BaseKind parse_base_kind(std::string_view s);
std::string to_string(BaseKind kind);

struct BaseConfig {
  BaseKind kind = BaseKind::svm;
  double nb_smoothing = 1.0;
  SmoConfig smo;
};

/// Label-powerset classifier over a fixed subset of labels. Each distinct
/// projection seen in training becomes one class, in order of first
/// appearance.
struct LpClassifier {
  std::vector<std::uint32_t> labels;               // sorted label indices
  std::vector<std::vector<bool>> categories;        // projection per class
  std::variant<std::monostate, NaiveBayesModel, SvmOvrModel> base;  // monostate: one class

  /// Predicted projection, one flag per entry of `labels`.
  const std::vector<bool>& predict(const SparseVector& x) const;
};

/// Flags of `set` restricted to `labels`.
std::vector<bool> project(const LabelSet& set, std::span<const std::uint32_t> labels);

LpClassifier train_lp(std::span<const SparseVector> xs, std::span<const LabelSet> ys,
                      std::vector<std::uint32_t> labels, const BaseConfig& base,
                      std::uint64_t seed);

struct RakelConfig {
  std::size_t k = 3;
  /// Unset means min(2|L|, C(|L|, k)).
  std::optional<std::size_t> m;
  double threshold = 0.5;
  BaseConfig base;
  std::uint64_t seed = 1;
  std::size_t threads = 0;
};

struct RakelModel {
  std::size_t space_size = 0;
  std::size_t k = 0;
  double threshold = 0.5;
  std::uint64_t seed = 0;
  std::vector<LpClassifier> members;
};

/// C(n, k), saturating at SIZE_MAX.
std::size_t binomial(std::size_t n, std::size_t k);

/// m distinct sorted k-subsets of [0, n), drawn uniformly without replacement.
std::vector<std::vector<std::uint32_t>> sample_labelsets(std::size_t n, std::size_t k,
                                                         std::size_t m, std::uint64_t seed);

/// Member i is trained with seed derive_seed(config.seed, "rakel.member.<i>").
/// Throws UsageError for k or m out of range and DataError for labelsets that
/// are not gold.
RakelModel train_rakel(std::span<const SparseVector> xs, std::span<const LabelSet> ys,
                       const LabelSpace& space, const RakelConfig& config);

struct RakelPrediction {
  LabelSet labels;
  std::vector<double> ratios;  // positive votes / members covering the label
};

RakelPrediction predict_rakel(const RakelModel& model, const SparseVector& x);

/// Labels whose ratio is strictly above `threshold`.
LabelSet threshold_labels(std::span<const double> ratios, double threshold);

/// Target with the highest participant ratio, sentiment with the higher of the
/// two sentiment ratios. Ties go to label order, so positive wins a tie.
JointCategory to_pair(std::span<const double> ratios, const LabelSpace& space);

}  // namespace crowdsent
