#include "crowdsent/topics.hpp"

#include <algorithm>
#include <map>

#include "crowdsent/error.hpp"

namespace crowdsent {

namespace {

// Index of the first cumulative weight exceeding u * total.
std::size_t draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

void normalize_rows(Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    double s = 0.0;
    for (double v : row) s += v;
    for (double& v : row) v /= s;
  }
}

}  // namespace

double LdaConfig::resolved_alpha() const {
  return alpha ? *alpha : 50.0 / static_cast<double>(topics);
}

std::optional<std::uint32_t> LdaModel::word_id(std::string_view word) const {
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return std::nullopt;
  return static_cast<std::uint32_t>(it - words.begin());
}

std::uint64_t LdaModel::hash() const {
  std::uint64_t h = fnv1a("lda");
  for (const auto& w : words) h = fnv1a(w, fnv1a("\x1e", h));
  return fnv1a(std::to_string(topics), h);
}

GibbsState::GibbsState(std::vector<std::vector<std::uint32_t>> docs, std::size_t vocab_size,
                       std::size_t topics, double alpha, double beta, Rng& init)
    : docs_(std::move(docs)),
      vocab_(vocab_size),
      topics_(topics),
      alpha_(alpha),
      beta_(beta),
      doc_topic_(docs_.size() * topics, 0),
      topic_word_(topics * vocab_size, 0),
      topic_counts_(topics, 0),
      cumulative_(topics, 0.0) {
  z_.resize(docs_.size());
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    z_[d].resize(docs_[d].size());
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const auto t = static_cast<std::uint32_t>(init.below(topics_));
      z_[d][i] = t;
      ++doc_topic_[d * topics_ + t];
      ++topic_word_[t * vocab_ + docs_[d][i]];
      ++topic_counts_[t];
    }
  }
}

void GibbsState::sweep(Rng& rng) {
  const double vbeta = static_cast<double>(vocab_) * beta_;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    std::uint32_t* nd = &doc_topic_[d * topics_];
    for (std::size_t i = 0; i < docs_[d].size(); ++i) {
      const std::uint32_t w = docs_[d][i];
      const std::uint32_t old = z_[d][i];
      --nd[old];
      --topic_word_[old * vocab_ + w];
      --topic_counts_[old];

      double running = 0.0;
      for (std::size_t t = 0; t < topics_; ++t) {
        running += (nd[t] + alpha_) * (topic_word_[t * vocab_ + w] + beta_) /
                   (topic_counts_[t] + vbeta);
        cumulative_[t] = running;
      }
      const auto t = static_cast<std::uint32_t>(draw(cumulative_, rng));
      z_[d][i] = t;
      ++nd[t];
      ++topic_word_[t * vocab_ + w];
      ++topic_counts_[t];
    }
  }
}

void GibbsState::accumulate(Matrix& theta, Matrix& phi) const {
  const double talpha = static_cast<double>(topics_) * alpha_;
  const double vbeta = static_cast<double>(vocab_) * beta_;
  for (std::size_t d = 0; d < docs_.size(); ++d) {
    const double len = static_cast<double>(docs_[d].size());
    for (std::size_t t = 0; t < topics_; ++t) {
      theta(d, t) += (doc_topic_[d * topics_ + t] + alpha_) / (len + talpha);
    }
  }
  for (std::size_t t = 0; t < topics_; ++t) {
    for (std::size_t w = 0; w < vocab_; ++w) {
      phi(t, w) += (topic_word_[t * vocab_ + w] + beta_) / (topic_counts_[t] + vbeta);
    }
  }
}

LdaFit fit_lda(std::span<const TokenSequence> corpus, const LdaConfig& config) {
  if (config.topics == 0) throw UsageError("LDA needs at least one topic");
  if (config.sample_every == 0) throw UsageError("LDA sample_every must be >= 1");
  if (corpus.empty()) throw DataError("cannot fit LDA on an empty corpus");
  const double alpha = config.resolved_alpha();
  if (!(alpha > 0.0) || !(config.beta > 0.0)) {
    throw UsageError("LDA alpha and beta must be positive");
  }

  std::map<std::string, std::uint32_t> index;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) index.emplace(t, 0);
  }
  if (index.empty()) throw DataError("LDA corpus has no tokens");

  LdaFit fit;
  LdaModel& m = fit.model;
  m.topics = config.topics;
  m.alpha = alpha;
  m.beta = config.beta;
  m.seed = config.seed;
  for (auto& [w, id] : index) {
    id = static_cast<std::uint32_t>(m.words.size());
    m.words.push_back(w);
  }

  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(corpus.size());
  for (const auto& doc : corpus) {
    auto& ids = docs.emplace_back();
    for (const auto& t : doc) ids.push_back(index.at(t));
  }

  Rng init(derive_seed(config.seed, "lda.init"));
  GibbsState state(std::move(docs), m.words.size(), m.topics, alpha, m.beta, init);
  Rng rng(derive_seed(config.seed, "lda.gibbs"));

  fit.theta = Matrix(corpus.size(), m.topics);
  m.phi = Matrix(m.topics, m.words.size());
  std::size_t samples = 0;
  for (std::size_t s = 1; s <= config.iterations; ++s) {
    state.sweep(rng);
    if (s > config.burn_in && (s - config.burn_in) % config.sample_every == 0) {
      state.accumulate(fit.theta, m.phi);
      ++samples;
    }
  }
  // Too few sweeps to reach a sample: fall back to the final state.
  if (samples == 0) state.accumulate(fit.theta, m.phi);
  normalize_rows(fit.theta);
  normalize_rows(m.phi);

  m.topic_word_counts = state.topic_word_counts();
  m.topic_counts = state.topic_counts();
  return fit;
}

InferredTopics infer_theta(const LdaModel& model, const TokenSequence& tokens,
                           std::size_t iterations, std::uint64_t seed) {
  const std::size_t T = model.topics;
  InferredTopics out;
  std::vector<std::uint32_t> ids;
  for (const auto& t : tokens) {
    if (auto id = model.word_id(t)) ids.push_back(*id);
  }
  if (ids.empty() || T == 0) {
    out.values.assign(T, T ? 1.0 / static_cast<double>(T) : 0.0);
    out.empty_input = true;
    return out;
  }

  Rng rng(derive_seed(seed, "lda.infer"));
  std::vector<std::uint32_t> z(ids.size());
  std::vector<std::uint32_t> nd(T, 0);
  for (auto& t : z) {
    t = static_cast<std::uint32_t>(rng.below(T));
    ++nd[t];
  }

  const double len = static_cast<double>(ids.size());
  const double talpha = static_cast<double>(T) * model.alpha;
  std::vector<double> cumulative(T);
  out.values.assign(T, 0.0);
  std::size_t samples = 0;
  const std::size_t burn_in = iterations / 2;
  for (std::size_t s = 1; s <= iterations; ++s) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --nd[z[i]];
      double running = 0.0;
      for (std::size_t t = 0; t < T; ++t) {
        running += (nd[t] + model.alpha) * model.phi(t, ids[i]);
        cumulative[t] = running;
      }
      z[i] = static_cast<std::uint32_t>(draw(cumulative, rng));
      ++nd[z[i]];
    }
    if (s > burn_in) {
      for (std::size_t t = 0; t < T; ++t) out.values[t] += (nd[t] + model.alpha) / (len + talpha);
      ++samples;
    }
  }
  if (samples == 0) {
    for (std::size_t t = 0; t < T; ++t) out.values[t] = (nd[t] + model.alpha) / (len + talpha);
  }
  double s = 0.0;
  for (double v : out.values) s += v;
  for (double& v : out.values) v /= s;
  return out;
}

}  // namespace crowdsent
