#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/error.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

struct Forward {
  std::vector<std::vector<double>> h;  // h[0] = 0, h[t] after token t
  std::vector<double> probs;
  double loss = 0.0;
};

void softmax(std::vector<double>& z) {
  const double top = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    s += v;
  }
  for (double& v : z) v /= s;
}

Forward run(const ElmanModel& m, std::span<const std::uint32_t> ids,
            std::optional<std::size_t> label) {
  const std::size_t H = m.config.hidden;
  const std::size_t E = m.config.embedding;
  Forward f;
  f.h.assign(ids.size() + 1, std::vector<double>(H, 0.0));
  for (std::size_t t = 1; t <= ids.size(); ++t) {
    const auto x = m.embeddings.row(ids[t - 1]);
    const auto& prev = f.h[t - 1];
    auto& cur = f.h[t];
    for (std::size_t j = 0; j < H; ++j) {
      double a = m.b_h[j];
      for (std::size_t k = 0; k < E; ++k) a += x[k] * m.w_xh(k, j);
      for (std::size_t k = 0; k < H; ++k) a += prev[k] * m.w_hh(k, j);
      cur[j] = std::tanh(a);
    }
  }
  const auto& last = f.h.back();
  f.probs = m.b_y;
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    for (std::size_t k = 0; k < H; ++k) f.probs[c] += last[k] * m.w_hy(k, c);
  }
  softmax(f.probs);
  if (label) f.loss = -std::log(std::max(f.probs[*label], 1e-300));
  return f;
}

void xavier(Matrix& w, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : w.data()) v = rng.uniform(-r, r);
}

}  // namespace

std::vector<std::uint32_t> ElmanModel::encode(const TokenSequence& tokens) const {
  std::vector<std::uint32_t> ids;
  for (const auto& t : tokens) {
    auto it = std::lower_bound(words.begin(), words.end(), t);
    if (it != words.end() && *it == t) ids.push_back(static_cast<std::uint32_t>(it - words.begin()));
  }
  return ids;
}

namespace elman {

Gradients::Gradients(const ElmanModel& m)
    : embeddings(m.embeddings.rows(), m.embeddings.cols()),
      w_xh(m.w_xh.rows(), m.w_xh.cols()),
      w_hh(m.w_hh.rows(), m.w_hh.cols()),
      w_hy(m.w_hy.rows(), m.w_hy.cols()),
      b_h(m.b_h.size(), 0.0),
      b_y(m.b_y.size(), 0.0) {}

double loss(const ElmanModel& model, std::span<const std::uint32_t> ids, std::size_t label) {
  return run(model, ids, label).loss;
}

double accumulate_gradients(const ElmanModel& m, std::span<const std::uint32_t> ids,
                            std::size_t label, Gradients& g) {
  const std::size_t H = m.config.hidden;
  const std::size_t E = m.config.embedding;
  const Forward f = run(m, ids, label);

  std::vector<double> dy = f.probs;
  dy[label] -= 1.0;
  const auto& last = f.h.back();
  std::vector<double> dh(H, 0.0);
  for (std::size_t c = 0; c < m.num_classes; ++c) {
    g.b_y[c] += dy[c];
    for (std::size_t k = 0; k < H; ++k) {
      g.w_hy(k, c) += last[k] * dy[c];
      dh[k] += m.w_hy(k, c) * dy[c];
    }
  }

  const std::size_t T = ids.size();
  const std::size_t stop = T > m.config.bptt_limit ? T - m.config.bptt_limit : 0;
  std::vector<double> da(H);
  for (std::size_t t = T; t > stop; --t) {
    const auto& cur = f.h[t];
    const auto& prev = f.h[t - 1];
    for (std::size_t j = 0; j < H; ++j) da[j] = dh[j] * (1.0 - cur[j] * cur[j]);
    const auto x = m.embeddings.row(ids[t - 1]);
    auto gx = g.embeddings.row(ids[t - 1]);
    for (std::size_t j = 0; j < H; ++j) g.b_h[j] += da[j];
    for (std::size_t k = 0; k < E; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        g.w_xh(k, j) += x[k] * da[j];
        s += m.w_xh(k, j) * da[j];
      }
      gx[k] += s;
    }
    for (std::size_t k = 0; k < H; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < H; ++j) {
        g.w_hh(k, j) += prev[k] * da[j];
        s += m.w_hh(k, j) * da[j];
      }
      dh[k] = s;
    }
  }
  return f.loss;
}

ElmanModel init(std::span<const TokenSequence> xs, std::size_t num_classes,
                const ElmanConfig& config) {
  if (config.hidden == 0 || config.embedding == 0) {
    throw UsageError("Elman hidden and embedding sizes must be >= 1");
  }
  if (num_classes == 0) throw UsageError("Elman needs at least one class");
  std::set<std::string> vocab;
  for (const auto& x : xs) vocab.insert(x.begin(), x.end());

  ElmanModel m;
  m.config = config;
  m.num_classes = num_classes;
  m.words.assign(vocab.begin(), vocab.end());
  const std::size_t E = config.embedding, H = config.hidden;
  m.embeddings = Matrix(m.words.size(), E);
  m.w_xh = Matrix(E, H);
  m.w_hh = Matrix(H, H);
  m.w_hy = Matrix(H, num_classes);
  m.b_h.assign(H, 0.0);
  m.b_y.assign(num_classes, 0.0);
  Rng rng(derive_seed(config.seed, "elman.init"));
  xavier(m.embeddings, E, E, rng);
  xavier(m.w_xh, E, H, rng);
  xavier(m.w_hh, H, H, rng);
  xavier(m.w_hy, H, num_classes, rng);
  return m;
}

}  // namespace elman

ElmanTraining train_elman(std::span<const TokenSequence> xs,
                          std::span<const std::size_t> labels, std::size_t num_classes,
                          const ElmanConfig& config) {
  if (xs.size() != labels.size()) throw DataError("sequence and label counts differ");
  for (auto c : labels) {
    if (c >= num_classes) throw DataError("label " + std::to_string(c) + " out of range");
  }
  ElmanTraining out;
  out.model = elman::init(xs, num_classes, config);
  ElmanModel& m = out.model;

  std::vector<std::vector<std::uint32_t>> seqs;
  std::vector<std::size_t> usable;
  for (std::size_t n = 0; n < xs.size(); ++n) {
    seqs.push_back(m.encode(xs[n]));
    if (seqs.back().empty()) {
      ++out.skipped;
    } else {
      usable.push_back(n);
    }
  }
  if (usable.empty()) throw DataError("no Elman training sequence has tokens");

  elman::Gradients g(m);
  Rng rng(derive_seed(config.seed, "elman.order"));
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(usable));
    double total = 0.0;
    for (auto n : usable) {
      const auto& ids = seqs[n];
      for (auto* w : {&g.w_xh, &g.w_hh, &g.w_hy}) std::fill(w->data().begin(), w->data().end(), 0.0);
      std::fill(g.b_h.begin(), g.b_h.end(), 0.0);
      std::fill(g.b_y.begin(), g.b_y.end(), 0.0);
      for (auto id : ids) {
        auto r = g.embeddings.row(id);
        std::fill(r.begin(), r.end(), 0.0);
      }
      total += elman::accumulate_gradients(m, ids, labels[n], g);

      // Repeated ids share a gradient row; count each row once in the norm.
      std::vector<std::uint32_t> rows(ids.begin(), ids.end());
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      double sq = 0.0;
      for (auto* w : {&g.w_xh, &g.w_hh, &g.w_hy}) {
        for (double v : w->data()) sq += v * v;
      }
      for (double v : g.b_h) sq += v * v;
      for (double v : g.b_y) sq += v * v;
      for (auto id : rows) {
        for (double v : g.embeddings.row(id)) sq += v * v;
      }
      const double norm = std::sqrt(sq);
      if (!std::isfinite(norm)) throw NumericError("Elman gradient is not finite");
      const double scale = config.lr * (norm > config.clip ? config.clip / norm : 1.0);

      auto step = [scale](std::span<double> p, std::span<const double> d) {
        for (std::size_t i = 0; i < p.size(); ++i) p[i] -= scale * d[i];
      };
      step(m.w_xh.data(), g.w_xh.data());
      step(m.w_hh.data(), g.w_hh.data());
      step(m.w_hy.data(), g.w_hy.data());
      step(m.b_h, g.b_h);
      step(m.b_y, g.b_y);
      for (auto id : rows) step(m.embeddings.row(id), g.embeddings.row(id));
    }
    out.epoch_loss.push_back(total / static_cast<double>(usable.size()));
  }
  return out;
}

Prediction predict(const ElmanModel& model, const TokenSequence& tokens) {
  const auto ids = model.encode(tokens);
  Prediction p;
  p.scores = run(model, ids, std::nullopt).probs;
  p.category = argmax_lowest(p.scores);
  return p;
}

}  // namespace crowdsent
