#include "crowdsent/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "crowdsent/error.hpp"
#include "crowdsent/evaluation.hpp"
#include "crowdsent/parallel.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

namespace {

bool dense(FeatureBundle b) { return b == FeatureBundle::f5 || b == FeatureBundle::f6; }

std::uint64_t token_seed(std::uint64_t base, const TokenSequence& tokens) {
  std::uint64_t h = fnv1a("tokens");
  for (const auto& t : tokens) h = fnv1a(t, fnv1a("\x1f", h));
  return splitmix64(base ^ h);
}

std::vector<FeatureBlock> dense_blocks(const FeatureExtractor& f) {
  std::vector<FeatureBlock> blocks;
  if (f.pv) blocks.push_back({"doc", 0, f.pv->config.dims});
  if (f.lda) blocks.push_back({"topic", f.pv ? f.pv->config.dims : 0, f.lda->topics});
  return blocks;
}

SparseVector finish_dense(const FeatureExtractor& f, std::vector<double> values) {
  if (!f.shift.empty()) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::max(0.0, values[i] - f.shift[i]);
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite dense feature value");
  }
  return SparseVector::from_dense(values);
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.all_finite()) throw NumericError(std::string(what) + " holds non-finite values");
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string(what) + " holds non-finite values");
  }
}

bool nonnegative_inputs(const PipelineConfig& c) {
  return c.model == ClassifierKind::nb ||
         (c.model == ClassifierKind::rakel && c.rakel.base.kind == BaseKind::nb);
}

void check_model(const ClassifierPayload& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ElmanModel>) {
          require_finite(m.embeddings, "Elman embeddings");
          require_finite(m.w_xh, "Elman input weights");
          require_finite(m.w_hh, "Elman recurrent weights");
          require_finite(m.w_hy, "Elman output weights");
          require_finite(m.b_h, "Elman hidden bias");
          require_finite(m.b_y, "Elman output bias");
        } else if constexpr (std::is_same_v<M, SvmOvrModel>) {
          for (const auto& b : m.members) {
            if (b) require_finite(b->w, "SVM weights");
          }
        }
      },
      model);
}

}  // namespace

TokenSequence prepare_tokens(std::string_view text) { return tokenize(clean_tweet(text)); }

std::size_t FeatureExtractor::dimension() const {
  if (!dense(bundle)) return vocab.dimension(bundle);
  std::size_t d = 0;
  for (const auto& b : dense_blocks(*this)) d += b.dimension;
  return d;
}

SparseVector FeatureExtractor::transform(const TokenSequence& tokens) const {
  if (!dense(bundle)) return assemble_vector(tokens, vocab, bundle, lexicon);
  return finish_dense(*this, raw_dense(tokens));
}

std::vector<double> FeatureExtractor::raw_dense(const TokenSequence& tokens) const {
  if (!pv) throw UsageError("feature extractor has no fitted embedding model");
  std::vector<double> values =
      infer_vector(*pv, tokens, pv_infer_steps, token_seed(derive_seed(infer_seed, "pv"), tokens))
          .values;
  if (bundle == FeatureBundle::f6) {
    if (!lda) throw UsageError("feature extractor has no fitted topic model");
    const auto theta = infer_theta(*lda, tokens, lda_infer_iterations,
                                   token_seed(derive_seed(infer_seed, "lda"), tokens));
    values.insert(values.end(), theta.values.begin(), theta.values.end());
  }
  return values;
}

std::uint64_t FeatureExtractor::hash() const {
  std::uint64_t h = fnv1a(to_string(bundle), fnv1a("features"));
  h = splitmix64(h ^ vocab.hash());
  h = splitmix64(h ^ lexicon.hash());
  if (pv) h = splitmix64(h ^ pv->hash());
  if (lda) h = splitmix64(h ^ lda->hash());
  return h;
}

nlohmann::json FeatureExtractor::registry() const {
  nlohmann::json j =
      dense(bundle) ? registry_json(bundle, dense_blocks(*this))
                    : registry_json(bundle, vocab.registry(bundle));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  j["hash"] = buf;
  return j;
}

FittedFeatures fit_features(std::span<const TokenSequence> corpus, const PipelineConfig& config,
                            PolarityLexicon lexicon, bool nonnegative) {
  if (corpus.empty()) throw DataError("cannot fit features on an empty corpus");
  FittedFeatures out;
  auto& f = out.extractor;
  f.bundle = config.features;
  f.lexicon = std::move(lexicon);
  f.infer_seed = derive_seed(config.seed, "infer");
  if (!dense(config.features)) {
    f.vocab = Vocabulary::fit(corpus, config.min_count);
    for (const auto& doc : corpus) out.train.push_back(f.transform(doc));
    return out;
  }

  f.pv_infer_steps = config.pv_infer_steps;
  f.lda_infer_iterations = config.lda_infer_iterations;
  // Independent stages with their own seeds; running them together does not
  // change either result.
  std::future<LdaFit> topics;
  if (config.features == FeatureBundle::f6) {
    topics = std::async(std::launch::async, [&] { return fit_lda(corpus, config.lda); });
  }
  f.pv = train_pv(corpus, config.pv);
  std::optional<LdaFit> lda;
  if (topics.valid()) lda = topics.get();
  require_finite(f.pv->word_vectors, "PV word vectors");
  require_finite(f.pv->doc_vectors, "PV document vectors");
  require_finite(f.pv->output_vectors, "PV output vectors");

  if (lda) f.lda = std::move(lda->model);
  std::vector<std::vector<double>> rows(corpus.size());
  if (config.infer_training) {
    parallel_for(corpus.size(), config.threads,
                 [&](std::size_t i) { rows[i] = f.raw_dense(corpus[i]); });
  } else {
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const auto v = f.pv->doc_vectors.row(i);
      rows[i].assign(v.begin(), v.end());
      if (lda) {
        const auto t = lda->theta.row(i);
        rows[i].insert(rows[i].end(), t.begin(), t.end());
      }
    }
  }
  if (nonnegative) {
    f.shift.assign(rows.front().size(), 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < r.size(); ++j) f.shift[j] = std::min(f.shift[j], r[j]);
    }
  }
  for (auto& r : rows) out.train.push_back(finish_dense(f, std::move(r)));
  return out;
}

PolarityLexicon load_lexicon(const PipelineConfig& config) {
  if (!config.lexicon) {
    if (config.synonyms) throw UsageError("a synonym table needs a lexicon");
    return {};
  }
  return PolarityLexicon::load(*config.lexicon, config.synonyms);
}

Pipeline train_pipeline(std::span<const AnnotatedTweet> train, const EventRegistry& registry,
                        const PipelineConfig& config) {
  config.validate();
  registry.validate();
  if (train.empty()) throw DataError("no training tweets");
  Pipeline p;
  p.config = config.resolved();
  p.registry = registry;
  const auto& c = p.config;

  std::vector<TokenSequence> tokens;
  std::vector<std::size_t> labels;
  for (const auto& t : train) {
    if (!registry.index_of(t.target)) {
      throw DataError("training target '" + t.target + "' is not in the registry");
    }
    tokens.push_back(prepare_tokens(t.tweet.text));
    labels.push_back(category_index(registry, {t.target, t.sentiment}));
  }
  const std::size_t classes = category_count(registry);

  if (c.model == ClassifierKind::elman) {
    p.features.bundle = c.features;
    p.model = train_elman(tokens, labels, classes, c.elman).model;
    check_model(p.model);
    return p;
  }

  auto fitted = fit_features(tokens, c, load_lexicon(c), nonnegative_inputs(c));
  p.features = std::move(fitted.extractor);
  const auto& xs = fitted.train;
  switch (c.model) {
    case ClassifierKind::nb:
      p.model = train_naive_bayes(xs, labels, classes, c.nb_smoothing);
      break;
    case ClassifierKind::svm:
      p.model = train_svm_ovr(xs, labels, classes, c.smo, c.threads);
      break;
    case ClassifierKind::rakel: {
      const auto space = LabelSpace::from_registry(registry);
      std::vector<LabelSet> ys;
      for (const auto& t : train) ys.push_back(to_multilabel({t.target, t.sentiment}, space));
      p.model = train_rakel(xs, ys, space, c.rakel);
      break;
    }
    case ClassifierKind::elman:
      break;
  }
  check_model(p.model);
  return p;
}

PipelineOutput Pipeline::predict(const Tweet& tweet) const {
  return predict_tokens(prepare_tokens(tweet.text));
}

PipelineOutput Pipeline::predict_tokens(const TokenSequence& tokens) const {
  const auto space = LabelSpace::from_registry(registry);
  PipelineOutput out;
  if (const auto* rakel = std::get_if<RakelModel>(&model)) {
    const auto pred = predict_rakel(*rakel, features.transform(tokens));
    require_finite(pred.ratios, "RAkEL vote ratios");
    out.category = to_pair(pred.ratios, space);
    out.labels = pred.labels;
    return out;
  }
  const Prediction pred = std::visit(
      [&](const auto& m) -> Prediction {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ElmanModel>) {
          return crowdsent::predict(m, tokens);
        } else if constexpr (std::is_same_v<M, RakelModel>) {
          return {};
        } else {
          return crowdsent::predict(m, features.transform(tokens));
        }
      },
      model);
  for (double s : pred.scores) {
    if (std::isnan(s)) throw NumericError("classifier produced a NaN score");
  }
  out.category = category_at(registry, pred.category);
  out.labels = to_multilabel(out.category, space);
  return out;
}

std::vector<PipelineOutput> Pipeline::predict_all(std::span<const Tweet> tweets) const {
  std::vector<PipelineOutput> out(tweets.size());
  // Every prediction is a pure function of its tweet, so the split across
  // threads does not affect results.
  parallel_for(tweets.size(), config.threads,
               [&](std::size_t i) { out[i] = predict(tweets[i]); });
  return out;
}

}  // namespace crowdsent
