#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsent/features.hpp"
#include "crowdsent/matrix.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

struct LdaConfig {
  std::size_t topics = 20;
  /// Unset means 50 / topics.
  std::optional<double> alpha;
  double beta = 0.01;
  std::size_t iterations = 500;
  std::size_t burn_in = 200;
  std::size_t sample_every = 10;
  std::uint64_t seed = 1;

  double resolved_alpha() const;
};

struct LdaModel {
  std::size_t topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> words;              // sorted; column j of phi
  std::vector<std::uint32_t> topic_word_counts;  // T x |V|, final sweep
  std::vector<std::uint32_t> topic_counts;       // length T
  Matrix phi;                                  // T x |V|, averaged estimate

  std::optional<std::uint32_t> word_id(std::string_view word) const;
  std::uint64_t hash() const;
};

struct LdaFit {
  LdaModel model;
  Matrix theta;  // |D| x T
};

/// Throws UsageError for topics == 0 or sample_every == 0, DataError for an
/// empty corpus or one without tokens.
LdaFit fit_lda(std::span<const TokenSequence> corpus, const LdaConfig& config);

struct InferredTopics {
  std::vector<double> values;
  bool empty_input = false;  // no known tokens; values are uniform
};

/// Fold-in sampling with phi frozen. The first half of the sweeps is
/// discarded; the rest are averaged.
InferredTopics infer_theta(const LdaModel& model, const TokenSequence& tokens,
                           std::size_t iterations, std::uint64_t seed);

/// Collapsed Gibbs state over word ids. Exposed so tests can check count
/// consistency sweep by sweep.
class GibbsState {
 public:
  GibbsState(std::vector<std::vector<std::uint32_t>> docs, std::size_t vocab_size,
             std::size_t topics, double alpha, double beta, Rng& init);

  void sweep(Rng& rng);

  /// Smoothed proportions from the current assignments, added into `theta`
  /// (|D| x T) and `phi` (T x |V|).
  void accumulate(Matrix& theta, Matrix& phi) const;

  std::size_t topics() const { return topics_; }
  std::size_t vocab_size() const { return vocab_; }
  const std::vector<std::vector<std::uint32_t>>& docs() const { return docs_; }
  const std::vector<std::vector<std::uint32_t>>& assignments() const { return z_; }
  std::uint32_t doc_topic(std::size_t d, std::size_t t) const { return doc_topic_[d * topics_ + t]; }
  std::uint32_t topic_word(std::size_t t, std::size_t w) const { return topic_word_[t * vocab_ + w]; }
  const std::vector<std::uint32_t>& topic_word_counts() const { return topic_word_; }
  const std::vector<std::uint32_t>& topic_counts() const { return topic_counts_; }

 private:
  std::vector<std::vector<std::uint32_t>> docs_;
  std::vector<std::vector<std::uint32_t>> z_;
  std::size_t vocab_;
  std::size_t topics_;
  double alpha_;
  double beta_;
  std::vector<std::uint32_t> doc_topic_;
  std::vector<std::uint32_t> topic_word_;
  std::vector<std::uint32_t> topic_counts_;
  std::vector<double> cumulative_;
};

}  // namespace crowdsent
