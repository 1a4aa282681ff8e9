#include <cereal/archives/portable_binary.hpp>
#include <cereal/types/map.hpp>
#include <cereal/types/optional.hpp>
#include <cereal/types/string.hpp>
#include <cereal/types/utility.hpp>
#include <cereal/types/variant.hpp>
#include <cereal/types/vector.hpp>

#include <fstream>
#include <sstream>

#include "crowdsent/error.hpp"
#include "crowdsent/pipeline.hpp"
#include "crowdsent/rng.hpp"

namespace crowdsent {

// Non-intrusive cereal hooks. Field order is the on-disk order; changing it
// requires a new kBundleVersion.

template <class A>
void save(A& ar, const Matrix& m) {
  ar(static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()), m.data());
}
template <class A>
void load(A& ar, Matrix& m) {
  std::uint64_t rows = 0, cols = 0;
  std::vector<double> data;
  ar(rows, cols, data);
  if (data.size() != rows * cols) throw DataError("bundle matrix shape does not match its data");
  m = Matrix(rows, cols);
  m.data() = std::move(data);
}

template <class A>
void save(A& ar, const Vocabulary& v) {
  ar(v.unigrams(), v.bigrams());
}
template <class A>
void load(A& ar, Vocabulary& v) {
  std::vector<std::string> unigrams;
  std::vector<Vocabulary::Bigram> bigrams;
  ar(unigrams, bigrams);
  v = Vocabulary::from_terms(std::move(unigrams), std::move(bigrams));
}

template <class A>
void save(A& ar, const PolarityLexicon& l) {
  std::map<std::string, double> scores(l.scores().begin(), l.scores().end());
  std::map<std::string, std::vector<std::string>> syns(l.synonyms().begin(), l.synonyms().end());
  ar(scores, syns);
}
template <class A>
void load(A& ar, PolarityLexicon& l) {
  std::map<std::string, double> scores;
  std::map<std::string, std::vector<std::string>> syns;
  ar(scores, syns);
  l = PolarityLexicon{};
  for (auto& [w, s] : scores) l.add(w, s);
  for (auto& [w, s] : syns) l.add_synonyms(w, std::move(s));
}

template <class A>
void serialize(A& ar, PvConfig& c) {
  ar(c.dims, c.window, c.negatives, c.epochs, c.lr_start, c.lr_end, c.seed, c.threads);
}
template <class A>
void serialize(A& ar, PvModel& m) {
  ar(m.config, m.words, m.noise, m.noise_cdf, m.word_vectors, m.doc_vectors, m.output_vectors,
     m.epoch_loss);
}
template <class A>
void serialize(A& ar, LdaConfig& c) {
  ar(c.topics, c.alpha, c.beta, c.iterations, c.burn_in, c.sample_every, c.seed);
}
template <class A>
void serialize(A& ar, LdaModel& m) {
  ar(m.topics, m.alpha, m.beta, m.seed, m.words, m.topic_word_counts, m.topic_counts, m.phi);
}
template <class A>
void serialize(A& ar, SmoConfig& c) {
  ar(c.C, c.tol, c.max_passes, c.seed);
}
template <class A>
void serialize(A& ar, ElmanConfig& c) {
  ar(c.embedding, c.hidden, c.epochs, c.lr, c.bptt_limit, c.clip, c.seed);
}
template <class A>
void serialize(A& ar, BaseConfig& c) {
  ar(c.kind, c.nb_smoothing, c.smo);
}
template <class A>
void serialize(A& ar, RakelConfig& c) {
  ar(c.k, c.m, c.threshold, c.base, c.seed, c.threads);
}

template <class A>
void save(A& ar, const PipelineConfig& c) {
  const auto path = [](const std::optional<std::filesystem::path>& p) {
    return p ? std::optional<std::string>(p->string()) : std::nullopt;
  };
  ar(c.features, c.model, c.seed, c.min_count, c.threads, path(c.lexicon), path(c.synonyms), c.pv,
     c.pv_infer_steps, c.lda, c.lda_infer_iterations, c.infer_training, c.nb_smoothing, c.smo, c.elman, c.rakel);
}
template <class A>
void load(A& ar, PipelineConfig& c) {
  std::optional<std::string> lexicon, synonyms;
  ar(c.features, c.model, c.seed, c.min_count, c.threads, lexicon, synonyms, c.pv,
     c.pv_infer_steps, c.lda, c.lda_infer_iterations, c.infer_training, c.nb_smoothing, c.smo, c.elman, c.rakel);
  if (lexicon) c.lexicon = *lexicon;
  if (synonyms) c.synonyms = *synonyms;
}

template <class A>
void serialize(A& ar, EventRegistry& r) {
  ar(r.event_id, r.participants, r.event_time, r.expert_announcement_time);
}

template <class A>
void serialize(A& ar, FeatureExtractor& f) {
  ar(f.bundle, f.vocab, f.lexicon, f.pv, f.lda, f.pv_infer_steps, f.lda_infer_iterations,
     f.infer_seed, f.shift);
}

template <class A>
void serialize(A& ar, NaiveBayesModel& m) {
  ar(m.dimension, m.smoothing, m.log_priors, m.log_likelihoods);
}
template <class A>
void serialize(A& ar, SvmBinaryModel& m) {
  ar(m.C, m.alphas, m.labels, m.support, m.w, m.bias, m.converged, m.iterations);
}
template <class A>
void serialize(A& ar, SvmOvrModel& m) {
  ar(m.dimension, m.num_classes, m.members);
}
template <class A>
void serialize(A& ar, ElmanModel& m) {
  ar(m.config, m.num_classes, m.words, m.embeddings, m.w_xh, m.w_hh, m.b_h, m.w_hy, m.b_y);
}
template <class A>
void serialize(A& ar, LpClassifier& m) {
  ar(m.labels, m.categories, m.base);
}
template <class A>
void serialize(A& ar, RakelModel& m) {
  ar(m.space_size, m.k, m.threshold, m.seed, m.members);
}

namespace {

constexpr char kMagic[] = "CROWDSENT-BUNDLE";
constexpr std::string_view kCreator = "crowdsent 1.0";

constexpr std::size_t kMagicSize = sizeof kMagic - 1;

struct Header {
  std::uint32_t version = 0;
  std::uint64_t feature_hash = 0;
  std::uint64_t payload_size = 0;
  std::uint64_t payload_checksum = 0;

  template <class A>
  void serialize(A& ar) {
    ar(version, feature_hash, payload_size, payload_checksum);
  }
};

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

void save_bundle(const Pipeline& pipeline, const std::filesystem::path& path) {
  std::ostringstream payload;
  {
    cereal::PortableBinaryOutputArchive ar(payload);
    ar(std::string(kCreator), pipeline.config, pipeline.registry, pipeline.features,
       pipeline.model);
  }
  const std::string bytes = payload.str();
  Header h{kBundleVersion, pipeline.features.hash(), bytes.size(), fnv1a(bytes)};

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write bundle '" + path.string() + "'");
  out.write(kMagic, kMagicSize);
  {
    cereal::PortableBinaryOutputArchive ar(out);
    ar(h);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out.flush()) throw UsageError("failed writing bundle '" + path.string() + "'");
}

Pipeline load_bundle(const std::filesystem::path& path,
                     std::optional<std::uint64_t> expected_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read bundle '" + path.string() + "'");
  const std::string name = "bundle '" + path.string() + "'";

  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  in.seekg(0);
  std::string magic(kMagicSize, '\0');
  in.read(magic.data(), static_cast<std::streamsize>(kMagicSize));
  if (!in || magic != kMagic) throw DataError(name + " is not a model bundle");
  Header h;
  try {
    cereal::PortableBinaryInputArchive ar(in);
    ar(h);
  } catch (const cereal::Exception&) {
    throw DataError(name + " is truncated");
  }
  if (h.version != kBundleVersion) {
    throw DataError(name + " has format version " + std::to_string(h.version) +
                    "; this build reads version " + std::to_string(kBundleVersion));
  }
  const auto offset = static_cast<std::uint64_t>(in.tellg());
  if (h.payload_size > file_size - offset) throw DataError(name + " is truncated");
  std::string bytes(h.payload_size, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::uint64_t>(in.gcount()) != h.payload_size) {
    throw DataError(name + " is truncated");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw DataError(name + " has trailing bytes");
  if (fnv1a(bytes) != h.payload_checksum) throw DataError(name + " is corrupt (checksum)");

  Pipeline p;
  try {
    std::istringstream payload(bytes);
    cereal::PortableBinaryInputArchive ar(payload);
    std::string creator;
    ar(creator, p.config, p.registry, p.features, p.model);
  } catch (const cereal::Exception& e) {
    throw DataError(name + " payload is corrupt: " + e.what());
  } catch (const std::length_error&) {
    throw DataError(name + " payload does not match this build's layout");
  } catch (const std::bad_alloc&) {
    throw DataError(name + " payload does not match this build's layout");
  }
  const auto actual = p.features.hash();
  if (actual != h.feature_hash) {
    throw DataError(name + " feature registry hash mismatch: header " + hex(h.feature_hash) +
                    ", contents " + hex(actual));
  }
  if (expected_hash && *expected_hash != actual) {
    throw DataError(name + " feature registry hash mismatch: expected " + hex(*expected_hash) +
                    ", bundle has " + hex(actual));
  }
  return p;
}

}  // namespace crowdsent
