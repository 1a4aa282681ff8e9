#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "crowdsent/corpus.hpp"
#include "crowdsent/features.hpp"
#include "crowdsent/matrix.hpp"
#include "crowdsent/sparse.hpp"

namespace crowdsent {

/// A (target, sentiment) pair treated as one class.
struct JointCategory {
  std::string target;
  Sentiment sentiment = Sentiment::positive;

  bool operator==(const JointCategory&) const = default;
};

/// Categories are ordered registry order x {positive, negative}:
/// index = 2 * participant + (sentiment == negative).
std::size_t category_count(const EventRegistry& registry);
std::size_t category_index(const EventRegistry& registry, const JointCategory& c);
JointCategory category_at(const EventRegistry& registry, std::size_t index);

/// Argmax category and the full score per category. Ties go to the lowest
/// index.
struct Prediction {
  std::size_t category = 0;
  std::vector<double> scores;
};

std::size_t argmax_lowest(std::span<const double> scores);

// Naive Bayes ---------------------------------------------------------------

struct NaiveBayesModel {
  std::size_t dimension = 0;
  double smoothing = 1.0;
  std::vector<double> log_priors;  // -inf for classes absent from training
  Matrix log_likelihoods;          // classes x dimension

  std::size_t num_classes() const { return log_priors.size(); }
};

/// Multinomial likelihoods with additive smoothing over the feature universe.
/// Feature values act as counts, so negative values throw DataError.
NaiveBayesModel train_naive_bayes(std::span<const SparseVector> xs,
                                  std::span<const std::size_t> labels,
                                  std::size_t num_classes, double smoothing = 1.0);

/// Scores are log posteriors: log P(c) + sum_i x_i log P(f_i|c), normalized.
Prediction predict(const NaiveBayesModel& model, const SparseVector& x);

// SVM -----------------------------------------------------------------------

struct SmoConfig {
  double C = 1.0;
  double tol = 1e-3;
  /// Pair updates are capped at max_passes * max(n, 1000).
  std::size_t max_passes = 10;
  std::uint64_t seed = 1;
};

/// Linear-kernel binary SVM. f(x) = w . x + bias.
struct SvmBinaryModel {
  double C = 1.0;
  std::vector<double> alphas;
  std::vector<std::int8_t> labels;  // +1 / -1 per training example
  std::vector<std::uint32_t> support;
  std::vector<double> w;
  double bias = 0.0;
  bool converged = false;
  std::size_t iterations = 0;

  double decision(const SparseVector& x) const;
};

/// Dual SMO with second-order working-set selection. Stops once the maximal
/// KKT violation gap is <= tol. Throws DataError unless both signs appear.
SvmBinaryModel smo_solve(std::span<const SparseVector> xs, std::span<const int> y,
                         const SmoConfig& config);

struct SvmOvrModel {
  std::size_t dimension = 0;
  std::size_t num_classes = 0;
  /// One member per class seen in training; absent classes score -inf.
  std::vector<std::optional<SvmBinaryModel>> members;

  std::size_t member_count() const;
};

/// Throws DataError when fewer than two classes are present.
SvmOvrModel train_svm_ovr(std::span<const SparseVector> xs,
                          std::span<const std::size_t> labels, std::size_t num_classes,
                          const SmoConfig& config, std::size_t threads = 0);

/// Scores are decision values.
Prediction predict(const SvmOvrModel& model, const SparseVector& x);

// Elman RNN -------------------------------------------------------------------

struct ElmanConfig {
  std::size_t embedding = 50;
  std::size_t hidden = 32;
  std::size_t epochs = 30;
  double lr = 0.05;
  std::size_t bptt_limit = 16;
  /// Per-example gradient norm cap.
  double clip = 5.0;
  std::uint64_t seed = 1;
};

struct ElmanModel {
  ElmanConfig config;
  std::size_t num_classes = 0;
  std::vector<std::string> words;  // sorted; row i of `embeddings`
  Matrix embeddings;               // |V| x e
  Matrix w_xh;                     // e x h
  Matrix w_hh;                     // h x h
  std::vector<double> b_h;
  Matrix w_hy;                     // h x C
  std::vector<double> b_y;

  /// Known token ids in order; unknown tokens are dropped.
  std::vector<std::uint32_t> encode(const TokenSequence& tokens) const;
};

struct ElmanTraining {
  ElmanModel model;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
  std::size_t skipped = 0;         // examples without known tokens
};

/// Xavier-uniform initialization; SGD over a freshly shuffled order each
/// epoch. Throws DataError when no example has tokens.
ElmanTraining train_elman(std::span<const TokenSequence> xs,
                          std::span<const std::size_t> labels, std::size_t num_classes,
                          const ElmanConfig& config);

/// Scores are softmax probabilities.
Prediction predict(const ElmanModel& model, const TokenSequence& tokens);

namespace elman {

/// Same shapes as the model parameters.
struct Gradients {
  Matrix embeddings, w_xh, w_hh, w_hy;
  std::vector<double> b_h, b_y;

  explicit Gradients(const ElmanModel& m);
};

/// Cross-entropy of the softmax over the final hidden state.
double loss(const ElmanModel& model, std::span<const std::uint32_t> ids, std::size_t label);

/// Adds truncated-BPTT gradients into `grads` and returns the loss. The
/// gradient is exact when the sequence is no longer than bptt_limit.
double accumulate_gradients(const ElmanModel& model, std::span<const std::uint32_t> ids,
                            std::size_t label, Gradients& grads);

/// Parameters with Xavier-uniform weights and zero biases, no training.
ElmanModel init(std::span<const TokenSequence> xs, std::size_t num_classes,
                const ElmanConfig& config);

}  // namespace elman

}  // namespace crowdsent
