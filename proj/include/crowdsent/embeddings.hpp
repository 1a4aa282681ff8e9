#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crowdsent/features.hpp"
#include "crowdsent/matrix.hpp"

namespace crowdsent {

/// Paragraph-vector (PV-DM) settings. The context representation is the mean
/// of the document vector and the surrounding word vectors.
struct PvConfig {
  std::size_t dims = 100;
  std::size_t window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 20;
  double lr_start = 0.025;
  double lr_end = 0.0001;
  std::uint64_t seed = 1;
  /// 1 gives bit-reproducible training; more threads update shared
  /// parameters without locks and are not reproducible.
  std::size_t threads = 1;
};

struct PvModel {
  PvConfig config;
  std::vector<std::string> words;   // sorted; row i of the word matrices
  std::vector<double> noise;        // count^0.75, normalized
  std::vector<double> noise_cdf;    // running sum of `noise`, last entry 1
  Matrix word_vectors;              // |V| x d
  Matrix doc_vectors;               // |D| x d, training documents
  Matrix output_vectors;            // |V| x d
  std::vector<double> epoch_loss;   // mean loss per prediction, per epoch

  std::optional<std::uint32_t> word_id(std::string_view word) const;
  std::uint32_t sample_noise(double u) const;
  std::uint64_t hash() const;
};

/// Vocabulary, noise distribution and seeded initial parameters, no training.
/// Word and document vectors are uniform in (-0.5/d, 0.5/d); output vectors
/// start at zero.
PvModel init_pv(std::span<const TokenSequence> corpus, const PvConfig& config);

/// Throws DataError for an empty corpus and UsageError for dims == 0.
PvModel train_pv(std::span<const TokenSequence> corpus, const PvConfig& config);

struct InferredVector {
  std::vector<double> values;
  bool empty_input = false;  // no known tokens; values are all zero
};

/// Fits a fresh document vector against frozen word and output vectors.
/// One step is one pass over the document's positions.
InferredVector infer_vector(const PvModel& model, const TokenSequence& tokens,
                            std::size_t steps, std::uint64_t seed);

namespace pv {

/// One prediction: the center word from the mean of the document vector and
/// the context word vectors, contrasted against the listed noise words.
struct Example {
  std::uint32_t doc = 0;
  std::vector<std::uint32_t> context;
  std::uint32_t center = 0;
  std::vector<std::uint32_t> negatives;
};

struct Gradients {
  Matrix words;
  Matrix docs;
  Matrix outputs;
};

/// -log s(u_c . h) - sum_k log s(-u_k . h)
double example_loss(const PvModel& model, const Example& example);

/// Adds d(loss)/d(parameters) for `example` into `grads` (sized like the
/// model) and returns the loss.
double accumulate_gradients(const PvModel& model, const Example& example,
                            Gradients& grads);

/// Examples for one document using the model's window; negatives are drawn
/// with `seed`, skipping draws equal to the center word.
std::vector<Example> document_examples(const PvModel& model, std::uint32_t doc,
                                       const TokenSequence& tokens,
                                       std::uint64_t seed);

}  // namespace pv

}  // namespace crowdsent
