#include "crowdsent/embeddings.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

std::optional<std::uint32_t> PvModel::word_id(std::string_view word) const {
  auto it = std::lower_bound(words.begin(), words.end(), word);
  if (it == words.end() || *it != word) return std::nullopt;
  return static_cast<std::uint32_t>(it - words.begin());
}

std::uint32_t PvModel::sample_noise(double u) const {
  auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), u);
  if (it == noise_cdf.end()) --it;
  return static_cast<std::uint32_t>(it - noise_cdf.begin());
}

std::uint64_t PvModel::hash() const {
  std::uint64_t h = fnv1a("pv");
  for (const auto& w : words) h = fnv1a(w, fnv1a("\x1e", h));
  h = fnv1a(std::to_string(config.dims), h);
  return fnv1a(std::to_string(doc_vectors.rows()), h);
}

namespace {

struct PlainAccess {
  static double load(const double& x) { return x; }
  static void add(double& x, double v) { x += v; }
};

// Relaxed atomics: lock-free shared updates where concurrent writes may be
// lost, without a data race.
struct SharedAccess {
  static double load(const double& x) {
    return std::atomic_ref<double>(const_cast<double&>(x)).load(std::memory_order_relaxed);
  }
  static void add(double& x, double v) {
    std::atomic_ref<double> ref(x);
    ref.store(ref.load(std::memory_order_relaxed) + v, std::memory_order_relaxed);
  }
};

struct Scratch {
  std::vector<double> h;
  std::vector<double> grad_h;
  std::vector<double> g;
};

// Mean of the document vector and the context word vectors.
template <typename Access>
void context_mean(std::span<const double> doc, const Matrix& words,
                  std::span<const std::uint32_t> context, std::vector<double>& h) {
  const std::size_t d = doc.size();
  const double scale = 1.0 / static_cast<double>(context.size() + 1);
  h.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) h[k] = Access::load(doc[k]);
  for (auto c : context) {
    const auto row = words.row(c);
    for (std::size_t k = 0; k < d; ++k) h[k] += Access::load(row[k]);
  }
  for (auto& v : h) v *= scale;
}

// Loss of one prediction plus d(loss)/dh and the per-target coefficients
// g_j = s(u_j . h) - label_j.
template <typename Access>
double forward(const Matrix& outputs, std::uint32_t center,
               std::span<const std::uint32_t> negatives, Scratch& s) {
  const std::size_t d = s.h.size();
  s.grad_h.assign(d, 0.0);
  s.g.clear();
  double loss = 0.0;
  auto visit = [&](std::uint32_t w, bool positive) {
    const auto out = outputs.row(w);
    double score = 0.0;
    for (std::size_t k = 0; k < d; ++k) score += Access::load(out[k]) * s.h[k];
    loss += positive ? softplus(-score) : softplus(score);
    const double g = sigmoid(score) - (positive ? 1.0 : 0.0);
    s.g.push_back(g);
    for (std::size_t k = 0; k < d; ++k) s.grad_h[k] += g * Access::load(out[k]);
  };
  visit(center, true);
  for (auto w : negatives) visit(w, false);
  return loss;
}

// One SGD step on a single prediction. Gradients are taken at the current
// parameters and applied afterwards.
template <typename Access>
double sgd_step(Matrix& words, std::span<double> doc, Matrix& outputs,
                std::span<const std::uint32_t> context, std::uint32_t center,
                std::span<const std::uint32_t> negatives, double lr, Scratch& s) {
  context_mean<Access>(doc, words, context, s.h);
  const double loss = forward<Access>(outputs, center, negatives, s);
  const std::size_t d = s.h.size();
  for (std::size_t j = 0; j <= negatives.size(); ++j) {
    const auto w = j == 0 ? center : negatives[j - 1];
    auto out = outputs.row(w);
    for (std::size_t k = 0; k < d; ++k) Access::add(out[k], -lr * s.g[j] * s.h[k]);
  }
  const double scale = lr / static_cast<double>(context.size() + 1);
  for (std::size_t k = 0; k < d; ++k) Access::add(doc[k], -scale * s.grad_h[k]);
  for (auto c : context) {
    auto row = words.row(c);
    for (std::size_t k = 0; k < d; ++k) Access::add(row[k], -scale * s.grad_h[k]);
  }
  return loss;
}

// Inference step: only the document vector moves.
void doc_step(const PvModel& model, std::span<double> doc,
              std::span<const std::uint32_t> context, std::uint32_t center,
              std::span<const std::uint32_t> negatives, double lr, Scratch& s) {
  context_mean<PlainAccess>(doc, model.word_vectors, context, s.h);
  forward<PlainAccess>(model.output_vectors, center, negatives, s);
  const double scale = lr / static_cast<double>(context.size() + 1);
  for (std::size_t k = 0; k < doc.size(); ++k) doc[k] -= scale * s.grad_h[k];
}

void window_context(std::span<const std::uint32_t> ids, std::size_t t, std::size_t window,
                    std::vector<std::uint32_t>& context) {
  context.clear();
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(ids.size(), t + window + 1);
  for (std::size_t j = lo; j < hi; ++j) {
    if (j != t) context.push_back(ids[j]);
  }
}

void draw_negatives(const PvModel& model, std::uint32_t center, Rng& rng,
                    std::vector<std::uint32_t>& out) {
  out.clear();
  for (std::size_t k = 0; k < model.config.negatives; ++k) {
    const auto w = model.sample_noise(rng.uniform());
    if (w != center) out.push_back(w);
  }
}

std::vector<std::uint32_t> known_ids(const PvModel& model, const TokenSequence& tokens) {
  std::vector<std::uint32_t> ids;
  for (const auto& t : tokens) {
    if (auto id = model.word_id(t)) ids.push_back(*id);
  }
  return ids;
}

double linear_lr(const PvConfig& c, double progress) {
  return c.lr_start - (c.lr_start - c.lr_end) * std::clamp(progress, 0.0, 1.0);
}

template <typename Access>
void train_range(PvModel& model, const std::vector<std::vector<std::uint32_t>>& docs,
                 std::size_t first, std::size_t last, std::size_t epoch,
                 std::size_t positions_per_epoch, std::size_t& done, Rng& rng,
                 double& loss_sum) {
  const auto& c = model.config;
  const double total = static_cast<double>(positions_per_epoch * c.epochs);
  Scratch scratch;
  std::vector<std::uint32_t> context;
  std::vector<std::uint32_t> negatives;
  for (std::size_t d = first; d < last; ++d) {
    const auto& ids = docs[d];
    for (std::size_t t = 0; t < ids.size(); ++t) {
      window_context(ids, t, c.window, context);
      draw_negatives(model, ids[t], rng, negatives);
      const double progress =
          (static_cast<double>(epoch * positions_per_epoch) + static_cast<double>(done)) / total;
      loss_sum += sgd_step<Access>(model.word_vectors, model.doc_vectors.row(d),
                                   model.output_vectors, context, ids[t], negatives,
                                   linear_lr(c, progress), scratch);
      ++done;
    }
  }
}

}  // namespace

PvModel init_pv(std::span<const TokenSequence> corpus, const PvConfig& config) {
  if (corpus.empty()) throw DataError("cannot train paragraph vectors on an empty corpus");
  if (config.dims == 0) throw UsageError("paragraph vector dims must be >= 1");

  std::map<std::string, std::size_t> counts;
  for (const auto& doc : corpus) {
    for (const auto& t : doc) ++counts[t];
  }
  if (counts.empty()) throw DataError("paragraph vector corpus has no tokens");

  PvModel m;
  m.config = config;
  m.words.reserve(counts.size());
  double z = 0.0;
  for (const auto& [w, n] : counts) {
    m.words.push_back(w);
    m.noise.push_back(std::pow(static_cast<double>(n), 0.75));
    z += m.noise.back();
  }
  double running = 0.0;
  for (auto& p : m.noise) {
    p /= z;
    running += p;
    m.noise_cdf.push_back(running);
  }
  m.noise_cdf.back() = 1.0;

  const std::size_t d = config.dims;
  const double r = 0.5 / static_cast<double>(d);
  m.word_vectors = Matrix(m.words.size(), d);
  m.doc_vectors = Matrix(corpus.size(), d);
  m.output_vectors = Matrix(m.words.size(), d);
  Rng word_rng(derive_seed(config.seed, "pv.words"));
  for (auto& v : m.word_vectors.data()) v = word_rng.uniform(-r, r);
  Rng doc_rng(derive_seed(config.seed, "pv.docs"));
  for (auto& v : m.doc_vectors.data()) v = doc_rng.uniform(-r, r);
  return m;
}

PvModel train_pv(std::span<const TokenSequence> corpus, const PvConfig& config) {
  PvModel m = init_pv(corpus, config);
  std::vector<std::vector<std::uint32_t>> docs;
  docs.reserve(corpus.size());
  std::size_t positions = 0;
  for (const auto& doc : corpus) {
    docs.push_back(known_ids(m, doc));
    positions += docs.back().size();
  }

  const std::size_t threads = std::max<std::size_t>(1, std::min(config.threads, docs.size()));
  std::vector<Rng> rngs;
  for (std::size_t t = 0; t < threads; ++t) {
    rngs.emplace_back(derive_seed(config.seed, "pv.negatives." + std::to_string(t)));
  }

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double loss_sum = 0.0;
    if (threads == 1) {
      std::size_t done = 0;
      train_range<PlainAccess>(m, docs, 0, docs.size(), epoch, positions, done, rngs[0],
                               loss_sum);
    } else {
      std::vector<double> losses(threads, 0.0);
      std::vector<std::thread> pool;
      const std::size_t chunk = (docs.size() + threads - 1) / threads;
      for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t first = std::min(docs.size(), t * chunk);
        const std::size_t last = std::min(docs.size(), first + chunk);
        pool.emplace_back([&, t, first, last] {
          // Each worker advances the shared schedule by its own share.
          std::size_t local = 0;
          train_range<SharedAccess>(m, docs, first, last, epoch, positions, local, rngs[t],
                                    losses[t]);
        });
      }
      for (auto& th : pool) th.join();
      for (double l : losses) loss_sum += l;
    }
    m.epoch_loss.push_back(positions ? loss_sum / static_cast<double>(positions) : 0.0);
  }
  return m;
}

InferredVector infer_vector(const PvModel& model, const TokenSequence& tokens,
                            std::size_t steps, std::uint64_t seed) {
  const std::size_t d = model.config.dims;
  InferredVector out;
  const auto ids = known_ids(model, tokens);
  if (ids.empty()) {
    out.values.assign(d, 0.0);
    out.empty_input = true;
    return out;
  }
  const double r = 0.5 / static_cast<double>(d);
  Rng init(derive_seed(seed, "pv.infer.init"));
  out.values.resize(d);
  for (auto& v : out.values) v = init.uniform(-r, r);

  Rng rng(derive_seed(seed, "pv.infer.negatives"));
  Scratch scratch;
  std::vector<std::uint32_t> context;
  std::vector<std::uint32_t> negatives;
  const double total = static_cast<double>(steps * ids.size());
  std::size_t done = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    for (std::size_t t = 0; t < ids.size(); ++t) {
      window_context(ids, t, model.config.window, context);
      draw_negatives(model, ids[t], rng, negatives);
      const double lr = linear_lr(model.config, static_cast<double>(done) / total);
      doc_step(model, out.values, context, ids[t], negatives, lr, scratch);
      ++done;
    }
  }
  return out;
}

namespace pv {

double example_loss(const PvModel& model, const Example& e) {
  Scratch s;
  context_mean<PlainAccess>(model.doc_vectors.row(e.doc), model.word_vectors, e.context, s.h);
  return forward<PlainAccess>(model.output_vectors, e.center, e.negatives, s);
}

double accumulate_gradients(const PvModel& model, const Example& e, Gradients& grads) {
  Scratch s;
  context_mean<PlainAccess>(model.doc_vectors.row(e.doc), model.word_vectors, e.context, s.h);
  const double loss = forward<PlainAccess>(model.output_vectors, e.center, e.negatives, s);
  const std::size_t d = s.h.size();
  for (std::size_t j = 0; j <= e.negatives.size(); ++j) {
    const auto w = j == 0 ? e.center : e.negatives[j - 1];
    auto out = grads.outputs.row(w);
    for (std::size_t k = 0; k < d; ++k) out[k] += s.g[j] * s.h[k];
  }
  const double scale = 1.0 / static_cast<double>(e.context.size() + 1);
  auto doc = grads.docs.row(e.doc);
  for (std::size_t k = 0; k < d; ++k) doc[k] += scale * s.grad_h[k];
  for (auto c : e.context) {
    auto row = grads.words.row(c);
    for (std::size_t k = 0; k < d; ++k) row[k] += scale * s.grad_h[k];
  }
  return loss;
}

std::vector<Example> document_examples(const PvModel& model, std::uint32_t doc,
                                       const TokenSequence& tokens, std::uint64_t seed) {
  const auto ids = known_ids(model, tokens);
  Rng rng(seed);
  std::vector<Example> out;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    Example e;
    e.doc = doc;
    e.center = ids[t];
    window_context(ids, t, model.config.window, e.context);
    draw_negatives(model, ids[t], rng, e.negatives);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace pv

}  // namespace crowdsent
