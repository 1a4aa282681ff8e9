// Acceptance run: one PASS/FAIL line per criterion, each with its runtime
// budget. Exit status is the number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/corpus.hpp"
#include "crowdsent/embeddings.hpp"
#include "crowdsent/evaluation.hpp"
#include "crowdsent/multilabel.hpp"
#include "crowdsent/pipeline.hpp"
#include "crowdsent/prediction.hpp"
#include "crowdsent/rng.hpp"
#include "crowdsent/synth.hpp"
#include "crowdsent/topics.hpp"
#include "support/oracles.hpp"

using namespace crowdsent;
using crowdsent::testing::max_relative_error;
using crowdsent::testing::numeric_gradient;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first failure; later checks still run so the detail is useful.
struct Checker {
  Outcome out;
  void require(bool ok, const std::string& what) {
    if (!ok && out.pass) {
      out.pass = false;
      out.detail = what;
    }
  }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// 1 -------------------------------------------------------------------------

Outcome preprocessing() {
  const std::filesystem::path dir = CROWDSENT_FIXTURES;
  const auto registry = load_registry(dir / "debate_registry.json");
  auto corpus = std::get<std::vector<AnnotatedTweet>>(
      load_corpus(dir / "preprocess_input.jsonl", Schema::annotated, registry));
  Checker c;
  c.require(corpus.size() == 25, "fixture has " + std::to_string(corpus.size()) + " tweets, not 25");
  std::ostringstream got;
  write_jsonl(got, preprocess(std::move(corpus)).first);
  c.require(got.str() == slurp(dir / "preprocess_expected.jsonl"), "cleaned corpus bytes differ");
  c.require(clean_tweet("@michael") == "USER", "@michael");
  c.require(clean_tweet("looooool") == "loool", "looooool");
  if (c.out.pass) c.out.detail = "25 tweets byte-identical";
  return c.out;
}

// 2 -------------------------------------------------------------------------

// Posterior by direct multiplication of probabilities.
std::vector<double> nb_brute_force(const std::vector<std::vector<double>>& docs,
                                   const std::vector<std::size_t>& labels, double s,
                                   const std::vector<double>& probe) {
  const std::size_t D = probe.size();
  std::vector<double> joint(2, 0.0);
  for (std::size_t c = 0; c < 2; ++c) {
    double n_c = 0, total = 0;
    std::vector<double> cnt(D, 0.0);
    for (std::size_t d = 0; d < docs.size(); ++d) {
      if (labels[d] != c) continue;
      ++n_c;
      for (std::size_t i = 0; i < D; ++i) {
        cnt[i] += docs[d][i];
        total += docs[d][i];
      }
    }
    double p = n_c / static_cast<double>(docs.size());
    for (std::size_t i = 0; i < D; ++i) p *= std::pow((cnt[i] + s) / (total + s * D), probe[i]);
    joint[c] = p;
  }
  const double z = joint[0] + joint[1];
  for (double& p : joint) p /= z;
  return joint;
}

Outcome nb_oracle() {
  const std::vector<std::vector<double>> pool{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 1, 0},
                                              {0, 1, 1}, {1, 1, 1}, {0, 0, 0}, {3, 0, 1}};
  const std::vector<std::vector<double>> probes{{2, 0, 0}, {0, 1, 2}, {1, 1, 1}, {0, 0, 0}};
  std::size_t cases = 0;
  double worst = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= pool.size();
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<std::vector<double>> docs;
      for (std::size_t i = 0, c = code; i < n; ++i, c /= pool.size()) {
        docs.push_back(pool[c % pool.size()]);
      }
      std::vector<SparseVector> xs;
      for (const auto& d : docs) xs.push_back(SparseVector::from_dense(d));
      for (std::size_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < n; ++i) labels.push_back((mask >> i) & 1u);
        const auto m = train_naive_bayes(xs, labels, 2, 1.0);
        for (const auto& probe : probes) {
          const auto expect = nb_brute_force(docs, labels, 1.0, probe);
          const auto got = predict(m, SparseVector::from_dense(probe));
          for (std::size_t c = 0; c < 2; ++c) {
            worst = std::max(worst, std::abs(std::exp(got.scores[c]) - expect[c]));
          }
        }
        ++cases;
      }
    }
  }
  Checker c;
  c.require(cases >= 500, "only " + std::to_string(cases) + " cases");
  c.require(worst <= 1e-9, "max |posterior - oracle| = " + fmt(worst));
  c.out.detail = std::to_string(cases) + " corpora, max error " + fmt(worst);
  return c.out;
}

// 3 -------------------------------------------------------------------------

SparseVector dense(std::initializer_list<double> v) {
  std::vector<double> d(v);
  return SparseVector::from_dense(d);
}

// Largest KKT violation beyond tol, 0 when all conditions hold.
double kkt_excess(const SvmBinaryModel& m, std::span<const SparseVector> xs, double tol) {
  double worst = 0.0;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    const double a = m.alphas[t];
    const double yf = m.labels[t] * m.decision(xs[t]);
    double excess = 0.0;
    if (a < 0.0 || a > m.C) {
      excess = 1.0;
    } else if (a == 0.0) {
      excess = (1 - tol) - yf;
    } else if (a == m.C) {
      excess = yf - (1 + tol);
    } else {
      excess = std::abs(yf - 1) - tol;
    }
    worst = std::max(worst, excess);
  }
  return worst;
}

Outcome smo() {
  Checker c;
  double worst = 0.0;
  std::size_t separable = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(seed, "acceptance.smo"));
    const bool sep = seed % 2 == 0;
    separable += sep;
    std::vector<SparseVector> xs;
    std::vector<int> ys;
    for (int i = 0; i < 40; ++i) {
      const int y = i % 2 ? 1 : -1;
      const double shift = sep ? 2.0 : 0.5;
      xs.push_back(dense({rng.uniform(-1, 1) + y * shift, rng.uniform(-1, 1) + y * shift * 0.5}));
      ys.push_back(y);
    }
    SmoConfig cfg;
    cfg.tol = 1e-3;
    cfg.seed = seed;
    const auto m = smo_solve(xs, ys, cfg);
    c.require(m.converged, "seed " + std::to_string(seed) + " did not converge");
    double balance = 0.0;
    for (std::size_t t = 0; t < xs.size(); ++t) balance += m.alphas[t] * m.labels[t];
    c.require(std::abs(balance) <= 1e-6, "sum alpha_i y_i != 0");
    worst = std::max(worst, kkt_excess(m, xs, cfg.tol));
  }
  c.require(worst <= 1e-9, "KKT violated by " + fmt(worst));

  std::vector<SparseVector> xs{dense({-1}), dense({1})};
  std::vector<int> ys{-1, 1};
  SmoConfig cfg;
  cfg.C = 10;
  const auto m = smo_solve(xs, ys, cfg);
  const double lo = m.decision(xs[0]), hi = m.decision(xs[1]);
  c.require(std::abs(lo + 1) <= 1e-3 && std::abs(hi - 1) <= 1e-3,
            "1-D decisions " + fmt(lo) + ", " + fmt(hi));
  if (c.out.pass) {
    c.out.detail = "50 datasets (" + std::to_string(separable) +
                   " separable) satisfy KKT; 1-D decisions " + fmt(lo) + ", " + fmt(hi);
  }
  return c.out;
}

// 4 -------------------------------------------------------------------------

Outcome gradients() {
  Checker c;
  double worst_elman = 0.0, worst_pv = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "acceptance.elman"));
    ElmanConfig cfg;
    cfg.embedding = 2 + rng.below(4);
    cfg.hidden = 2 + rng.below(4);
    cfg.seed = seed;
    const std::size_t classes = 2 + rng.below(3);
    std::vector<TokenSequence> xs{{"p", "q", "r", "s"}};
    auto m = elman::init(xs, classes, cfg);
    for (double& b : m.b_h) b = rng.uniform(-0.5, 0.5);
    for (double& b : m.b_y) b = rng.uniform(-0.5, 0.5);
    std::vector<std::uint32_t> ids;
    const std::size_t len = 2 + rng.below(3);
    for (std::size_t k = 0; k < len; ++k) ids.push_back(static_cast<std::uint32_t>(rng.below(4)));
    const std::size_t label = rng.below(classes);
    elman::Gradients g(m);
    elman::accumulate_gradients(m, ids, label, g);
    const auto f = [&] { return elman::loss(m, ids, label); };
    for (auto [a, p] : {std::pair{&g.embeddings, &m.embeddings}, std::pair{&g.w_xh, &m.w_xh},
                        std::pair{&g.w_hh, &m.w_hh}, std::pair{&g.w_hy, &m.w_hy}}) {
      worst_elman = std::max(worst_elman, max_relative_error(a->data(), numeric_gradient(p->data(), f)));
    }
    worst_elman = std::max(worst_elman, max_relative_error(g.b_h, numeric_gradient(m.b_h, f)));
    worst_elman = std::max(worst_elman, max_relative_error(g.b_y, numeric_gradient(m.b_y, f)));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(derive_seed(seed, "acceptance.pv"));
    const std::size_t d = 2 + rng.below(5);
    std::vector<TokenSequence> corpus;
    for (int doc = 0; doc < 2; ++doc) {
      TokenSequence t;
      const std::size_t len = 3 + rng.below(6);
      for (std::size_t i = 0; i < len; ++i) t.push_back("w" + std::to_string(rng.below(6)));
      corpus.push_back(t);
    }
    PvConfig cfg;
    cfg.dims = d;
    cfg.window = 2;
    cfg.negatives = 3;
    cfg.seed = seed;
    auto m = init_pv(corpus, cfg);
    for (auto* mat : {&m.word_vectors, &m.doc_vectors, &m.output_vectors}) {
      for (auto& v : mat->data()) v = rng.uniform(-1.0, 1.0);
    }
    std::vector<pv::Example> batch;
    for (std::uint32_t doc = 0; doc < 2; ++doc) {
      auto ex = pv::document_examples(m, doc, corpus[doc], seed);
      batch.insert(batch.end(), ex.begin(), ex.end());
    }
    pv::Gradients g{Matrix(m.word_vectors.rows(), d), Matrix(m.doc_vectors.rows(), d),
                    Matrix(m.output_vectors.rows(), d)};
    for (const auto& e : batch) pv::accumulate_gradients(m, e, g);
    const auto total = [&] {
      double l = 0;
      for (const auto& e : batch) l += pv::example_loss(m, e);
      return l;
    };
    worst_pv = std::max(worst_pv, max_relative_error(g.words.data(), numeric_gradient(m.word_vectors.data(), total)));
    worst_pv = std::max(worst_pv, max_relative_error(g.docs.data(), numeric_gradient(m.doc_vectors.data(), total)));
    worst_pv = std::max(worst_pv, max_relative_error(g.outputs.data(), numeric_gradient(m.output_vectors.data(), total)));
  }
  c.require(worst_elman <= 1e-4, "Elman max relative error " + fmt(worst_elman));
  c.require(worst_pv <= 1e-4, "PV max relative error " + fmt(worst_pv));
  if (c.out.pass) {
    c.out.detail = "20+20 configurations; max relative error Elman " + fmt(worst_elman) +
                   ", PV " + fmt(worst_pv);
  }
  return c.out;
}

// 5 -------------------------------------------------------------------------

Outcome elman_capacity() {
  Rng rng(2);
  std::vector<TokenSequence> xs;
  std::vector<std::size_t> ys;
  for (int i = 0; i < 20; ++i) {
    const std::size_t y = i % 2;
    TokenSequence t;
    const std::size_t len = 3 + rng.below(5);
    for (std::size_t k = 0; k < len; ++k) t.push_back((y ? "b" : "a") + std::to_string(rng.below(10)));
    xs.push_back(t);
    ys.push_back(y);
  }
  ElmanConfig cfg;
  cfg.embedding = 16;
  cfg.hidden = 16;
  cfg.epochs = 200;
  cfg.seed = 3;
  const auto r = train_elman(xs, ys, 2, cfg);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) correct += predict(r.model, xs[i]).category == ys[i];
  Checker c;
  c.require(correct == xs.size(), std::to_string(correct) + "/20 correct");
  c.out.detail = std::to_string(correct) + "/20 training examples after 200 epochs";
  return c.out;
}

// 6 -------------------------------------------------------------------------

Outcome lda_recovery() {
  Rng rng(7);
  std::vector<TokenSequence> docs;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    labels.push_back(i % 2);
    TokenSequence t;
    for (int k = 0; k < 30; ++k) t.push_back((i % 2 ? "b" : "a") + std::to_string(rng.below(50)));
    docs.push_back(t);
  }
  LdaConfig cfg;
  cfg.topics = 2;
  const auto fit = fit_lda(docs, cfg);
  Checker c;
  double worst_sum = 0.0;
  for (const Matrix* m : {&fit.theta, &fit.model.phi}) {
    for (std::size_t r = 0; r < m->rows(); ++r) {
      const auto row = m->row(r);
      worst_sum = std::max(worst_sum, std::abs(std::accumulate(row.begin(), row.end(), 0.0) - 1.0));
    }
  }
  std::map<std::pair<std::size_t, int>, int> table;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto row = fit.theta.row(d);
    const auto top = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    ++table[{top, labels[d]}];
  }
  int majority = 0;
  for (std::size_t t = 0; t < 2; ++t) majority += std::max(table[{t, 0}], table[{t, 1}]);
  const double purity = majority / 40.0;
  c.require(purity >= 0.9, "purity " + fmt(purity));
  c.require(worst_sum <= 1e-9, "row sum off by " + fmt(worst_sum));
  c.out.detail = "purity " + fmt(purity) + ", max |row sum - 1| " + fmt(worst_sum);
  return c.out;
}

// 7 -------------------------------------------------------------------------

Outcome rakel_reduction() {
  const LabelSpace space{{"a", "b", "c"}};
  const auto make = [&](std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::pair<std::vector<SparseVector>, std::vector<LabelSet>> d;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t target = rng.below(3);
      const bool positive = rng.bernoulli(0.5);
      std::vector<double> x(8, 0.0);
      x[target] = 1.0 + rng.below(2);
      if (rng.bernoulli(0.85)) x[3 + (positive ? 0 : 1)] = 1.0;
      for (int k = 0; k < 2; ++k) x[5 + rng.below(3)] += 1.0;
      d.first.push_back(SparseVector::from_dense(x));
      d.second.push_back(to_multilabel({space.participants[target],
                                        positive ? Sentiment::positive : Sentiment::negative},
                                       space));
    }
    return d;
  };
  const auto [train_x, train_y] = make(150, 1);
  const auto [test_x, test_y] = make(50, 2);
  Checker c;
  std::size_t matches = 0;
  for (auto kind : {BaseKind::svm, BaseKind::nb}) {
    RakelConfig cfg;
    cfg.k = space.size();
    cfg.m = 1;
    cfg.seed = 11;
    cfg.base.kind = kind;
    const auto model = train_rakel(train_x, train_y, space, cfg);
    std::vector<std::uint32_t> all(space.size());
    std::iota(all.begin(), all.end(), 0u);
    const auto lp = train_lp(train_x, train_y, all, cfg.base, derive_seed(11, "rakel.member.0"));
    for (const auto& x : test_x) matches += predict_rakel(model, x).labels == lp.predict(x);
  }
  c.require(matches == 100, std::to_string(matches) + "/100 predictions equal pure LP");

  // Threshold monotonicity on a trained ensemble's vote ratios.
  RakelConfig cfg;
  cfg.k = 2;
  cfg.seed = 5;
  const auto model = train_rakel(train_x, train_y, space, cfg);
  Rng rng(9);
  std::size_t checks = 0;
  for (const auto& x : test_x) {
    const auto ratios = predict_rakel(model, x).ratios;
    for (int trial = 0; trial < 20; ++trial) {
      const double lo = rng.uniform(), hi = lo + rng.uniform() * (1 - lo);
      const auto a = threshold_labels(ratios, lo), b = threshold_labels(ratios, hi);
      for (std::size_t l = 0; l < a.size(); ++l) c.require(!b[l] || a[l], "monotonicity violated");
      ++checks;
    }
  }
  if (c.out.pass) {
    c.out.detail = "50/50 test points equal LP for svm and nb; " + std::to_string(checks) +
                   " threshold pairs monotone";
  }
  return c.out;
}

// 8 -------------------------------------------------------------------------

Outcome metrics() {
  Checker c;
  const LabelSpace space{{"trump", "cruz"}};
  const std::vector<LabelSet> truth{{true, false, true, false}, {false, true, false, true}};
  std::vector<LabelSet> complement;
  for (auto s : truth) {
    s.flip();
    complement.push_back(s);
  }
  auto one_bit = truth;
  one_bit[1][0] = true;
  c.require(hamming_loss(truth, truth, space) == 0.0, "hamming identical");
  c.require(std::abs(hamming_loss(truth, complement, space) - 1.0) <= 1e-12, "hamming complement");
  c.require(std::abs(hamming_loss(truth, one_bit, space) - 0.125) <= 1e-12, "hamming 0.125");

  const PrfCounts perfect[] = {{1.0, 1.0}}, half[] = {{0.5, 1.0}}, none[] = {{0.0, 0.0}};
  c.require(std::abs(mean_f1(perfect) - 1.0) <= 1e-12, "F1 perfect");
  c.require(std::abs(mean_f1(half) - 2.0 / 3.0) <= 1e-12, "F1 2/3");
  c.require(mean_f1(none) == 0.0, "F1 zero");

  const std::vector<RankedList> top{{"q", {"a", "b"}, {"a", "b"}}};
  const std::vector<RankedList> mid{{"q", {"x", "a", "y", "b"}, {"a", "b"}}};
  const std::vector<RankedList> miss{{"q", {"x", "y"}, {"a"}}};
  c.require(std::abs(mean_average_precision(top) - 1.0) <= 1e-12, "AP perfect");
  c.require(std::abs(mean_average_precision(mid) - 0.5) <= 1e-12, "AP 0.5");
  c.require(mean_average_precision(miss) == 0.0, "AP zero");

  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    std::vector<LabelSet> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      LabelSet s(space.size());
      for (std::size_t l = 0; l < s.size(); ++l) s[l] = rng.bernoulli(0.5);
      a.push_back(s);
      if (rng.bernoulli(0.4)) {
        b.push_back(s);
      } else {
        LabelSet t(space.size());
        for (std::size_t l = 0; l < t.size(); ++l) t[l] = rng.bernoulli(0.5);
        b.push_back(t);
      }
    }
    c.require((hamming_loss(a, b, space) == 0.0) == (a == b), "zero iff equal, trial " +
                                                                  std::to_string(trial));
  }
  if (c.out.pass) c.out.detail = "9 hand examples within 1e-12; 1000 random zero-iff-equal cases";
  return c.out;
}

// 9 -------------------------------------------------------------------------

SynthSpec planted_debate() {
  SynthSpec s;
  s.event_id = "planted-debate";
  s.participants = {"P1", "P2", "P3", "P4"};
  s.rates = {0.8, 0.6, 0.4, 0.2};
  s.signatures = {{"alpha", "aleph"}, {"bravo", "beth"}, {"charlie", "gimel"}, {"delta", "daleth"}};
  s.volumes = {500, 500, 500, 500};
  s.seed = 1;
  return s;
}

Outcome planted_winners() {
  const auto spec = planted_debate();
  const auto registry = spec.registry();
  const auto tweets = generate_synthetic(spec);
  // Alternate tweets between training and evaluation so both halves span the event.
  std::vector<AnnotatedTweet> train;
  std::vector<Tweet> held_out;
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    if (i % 2 == 0) {
      train.push_back(tweets[i]);
    } else {
      held_out.push_back(tweets[i].tweet);
    }
  }
  PipelineConfig cfg;  // defaults: f6 features, RAkEL over SVM
  cfg.seed = 1;
  const auto pipeline = train_pipeline(train, registry, cfg);
  std::vector<TimedPrediction> preds;
  const auto outputs = pipeline.predict_all(held_out);
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    preds.push_back({outputs[i].category, held_out[i].timestamp});
  }
  const auto outcome = rank_outcome(aggregate(preds), registry, RankMode::half_list());
  std::vector<std::string> order;
  std::string shown;
  for (const auto& e : outcome.ranked) {
    order.push_back(e.target);
    shown += (shown.empty() ? "" : " > ") + e.target + " " + fmt(e.raw);
  }
  const std::vector<RankedList> queries{{registry.event_id, outcome.winners(), {"P1", "P2"}}};
  const double f1 = f1_report(queries).value, map = map_report(queries).value;
  Checker c;
  c.require(order == registry.participants, "ranking " + shown);
  c.require(outcome.k == 2, "k = " + std::to_string(outcome.k));
  c.require(f1 == 1.0 && map == 1.0, "F1 " + fmt(f1) + ", MAP " + fmt(map));
  if (c.out.pass) c.out.detail = shown + "; F1 " + fmt(f1) + ", MAP " + fmt(map);
  return c.out;
}

// 10 ------------------------------------------------------------------------

Outcome influence() {
  Checker c;
  double min_shocked = 1.0, max_other = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthSpec s;
    s.event_id = "announcement";
    s.participants = {"P1", "P2", "P3", "P4"};
    s.rates = {0.4, 0.6, 0.5, 0.3};
    s.volumes = std::vector<std::size_t>(20, 2000);
    s.shock = RateShock{"P1", 10 * s.bucket_seconds, 0.7};
    s.seed = seed;
    std::vector<TimedPrediction> preds;
    for (const auto& t : generate_synthetic(s)) {
      preds.push_back({{t.target, t.sentiment}, t.tweet.timestamp});
    }
    for (const auto& r : expert_influence(preds, s.registry())) {
      if (!r.delta) {
        c.require(false, "undefined delta for " + r.target);
        continue;
      }
      if (r.target == "P1") {
        min_shocked = std::min(min_shocked, *r.delta);
      } else {
        max_other = std::max(max_other, std::abs(*r.delta));
      }
    }
  }
  c.require(min_shocked >= 0.2, "shocked delta " + fmt(min_shocked));
  c.require(max_other <= 0.05, "unshocked |delta| " + fmt(max_other));
  if (c.out.pass) {
    c.out.detail = "10 seeds: min shocked delta " + fmt(min_shocked) + ", max unshocked |delta| " +
                   fmt(max_other);
  }
  return c.out;
}

// 11 ------------------------------------------------------------------------

struct RunReports {
  std::string outcome, influence, trends, hamming, bundle;
  Pipeline pipeline;
};

RunReports full_run(const std::filesystem::path& bundle_path) {
  SynthSpec s = planted_debate();
  s.volumes = {200, 200};
  s.shock = RateShock{"P3", s.bucket_seconds, 0.7};
  const auto registry = s.registry();
  const auto tweets = generate_synthetic(s);
  std::vector<AnnotatedTweet> train(tweets.begin(), tweets.begin() + 200);
  std::vector<Tweet> rest;
  for (std::size_t i = 200; i < tweets.size(); ++i) rest.push_back(tweets[i].tweet);

  PipelineConfig cfg;
  cfg.pv.dims = 20;
  cfg.pv.epochs = 5;
  cfg.pv_infer_steps = 20;
  cfg.lda.topics = 5;
  cfg.lda.iterations = 60;
  cfg.lda.burn_in = 30;
  cfg.lda_infer_iterations = 20;
  cfg.seed = 17;
  RunReports r;
  r.pipeline = train_pipeline(train, registry, cfg);
  save_bundle(r.pipeline, bundle_path);
  r.bundle = slurp(bundle_path);

  const auto outputs = r.pipeline.predict_all(rest);
  std::vector<TimedPrediction> preds;
  std::vector<LabelSet> truth, pred;
  const auto space = LabelSpace::from_registry(registry);
  for (std::size_t i = 0; i < rest.size(); ++i) {
    preds.push_back({outputs[i].category, rest[i].timestamp});
    truth.push_back(to_multilabel({tweets[200 + i].target, tweets[200 + i].sentiment}, space));
    pred.push_back(outputs[i].labels);
  }
  r.outcome = rank_outcome(aggregate(preds), registry, RankMode::half_list()).to_json().dump(2);
  r.influence = influence_json(expert_influence(preds, registry), registry).dump(2);
  r.trends = trend_series(preds, Bucketing::hour, registry).to_csv();
  r.hamming = hamming_report(truth, pred, space).to_json().dump(2);
  return r;
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path();
  const auto a = full_run(dir / "crowdsent_acceptance_a.bin");
  const auto b = full_run(dir / "crowdsent_acceptance_b.bin");
  Checker c;
  c.require(a.outcome == b.outcome, "outcome JSON differs");
  c.require(a.influence == b.influence, "influence JSON differs");
  c.require(a.trends == b.trends, "trend CSV differs");
  c.require(a.hamming == b.hamming, "hamming report differs");
  c.require(a.bundle == b.bundle, "bundle bytes differ");

  const auto loaded = load_bundle(dir / "crowdsent_acceptance_a.bin");
  SynthSpec probe_spec = planted_debate();
  probe_spec.volumes = {100};
  probe_spec.seed = 99;
  std::size_t same = 0, probes = 0;
  for (const auto& t : generate_synthetic(probe_spec)) {
    const auto x = a.pipeline.predict(t.tweet), y = loaded.predict(t.tweet);
    same += x.category == y.category && x.labels == y.labels;
    ++probes;
  }
  c.require(probes == 100 && same == probes,
            std::to_string(same) + "/" + std::to_string(probes) + " probe predictions preserved");
  if (c.out.pass) c.out.detail = "4 reports and bundle byte-identical; 100/100 probes preserved";
  return c.out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "preprocessing bit-exactness", 1, preprocessing},
      {2, "naive Bayes oracle equivalence", 10, nb_oracle},
      {3, "SMO correctness", 30, smo},
      {4, "gradient checks", 60, gradients},
      {5, "Elman capacity", 30, elman_capacity},
      {6, "LDA recovery", 30, lda_recovery},
      {7, "RAkEL reduction", 30, rakel_reduction},
      {8, "metric exactness", 5, metrics},
      {9, "planted-winner recovery", 300, planted_winners},
      {10, "expert-influence detection", 60, influence},
      {11, "determinism and persistence", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.pass && secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; over the time budget";
    }
    failures += !o.pass;
    std::printf("criterion %2d %s: %s (%s; %.2fs of %.0fs)\n", c.id, c.name,
                o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs, c.budget_seconds);
    std::fflush(stdout);
  }
  return failures;
}
