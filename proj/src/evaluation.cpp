#include "crowdsent/evaluation.hpp"

#include <algorithm>

#include "crowdsent/error.hpp"

namespace crowdsent {

namespace {

void check_distinct(const RankedList& list) {
  std::set<std::string> seen;
  for (const auto& item : list.items) {
    if (!seen.insert(item).second) {
      throw DataError("query '" + list.query_id + "' returns '" + item + "' twice");
    }
  }
}

}  // namespace

LabelSet to_multilabel(const JointCategory& pred, const LabelSpace& space) {
  LabelSet set(space.size(), false);
  const auto& ps = space.participants;
  const auto it = std::find(ps.begin(), ps.end(), pred.target);
  if (it == ps.end()) throw DataError("unknown target '" + pred.target + "'");
  set[static_cast<std::size_t>(it - ps.begin())] = true;
  set[pred.sentiment == Sentiment::positive ? space.positive() : space.negative()] = true;
  return set;
}

double hamming_loss(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                    const LabelSpace& space) {
  if (truth.empty()) throw DataError("hamming loss needs at least one example");
  if (truth.size() != pred.size()) throw DataError("truth and prediction counts differ");
  const std::size_t L = space.size();
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i].size() != L || pred[i].size() != L) {
      throw DataError("labelset " + std::to_string(i) + " does not match the label space");
    }
    std::size_t diff = 0;
    for (std::size_t l = 0; l < L; ++l) diff += truth[i][l] != pred[i][l];
    sum += static_cast<double>(diff) / static_cast<double>(L);
  }
  return sum / static_cast<double>(truth.size());
}

double mean_f1(std::span<const PrfCounts> queries) {
  if (queries.empty()) throw DataError("mean F1 needs at least one query");
  double sum = 0.0;
  for (const auto& q : queries) {
    const double pr = q.precision + q.recall;
    if (pr > 0) sum += 2.0 * q.precision * q.recall / pr;
  }
  return sum / static_cast<double>(queries.size());
}

PrfCounts precision_recall(const RankedList& list) {
  check_distinct(list);
  if (list.relevant.empty()) {
    throw DataError("query '" + list.query_id + "' has no relevant items");
  }
  double hits = 0;
  for (const auto& item : list.items) hits += list.relevant.count(item);
  PrfCounts p;
  p.precision = list.items.empty() ? 0.0 : hits / static_cast<double>(list.items.size());
  p.recall = hits / static_cast<double>(list.relevant.size());
  return p;
}

double average_precision(const RankedList& list) {
  check_distinct(list);
  if (list.relevant.empty()) {
    throw DataError("query '" + list.query_id + "' has no relevant items");
  }
  double hits = 0, sum = 0;
  for (std::size_t k = 0; k < list.items.size(); ++k) {
    if (list.relevant.count(list.items[k])) {
      ++hits;
      sum += hits / static_cast<double>(k + 1);
    }
  }
  return sum / static_cast<double>(list.relevant.size());
}

double mean_average_precision(std::span<const RankedList> queries) {
  if (queries.empty()) throw DataError("MAP needs at least one query");
  double sum = 0.0;
  for (const auto& q : queries) sum += average_precision(q);
  return sum / static_cast<double>(queries.size());
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& q : per_query) per.push_back({{"query", q.query_id}, {"value", q.value}});
  return {{"metric", metric}, {"value", value}, {"per_query", per}};
}

MetricReport f1_report(std::span<const RankedList> queries) {
  MetricReport r{"mean_f1", 0.0, {}};
  std::vector<PrfCounts> counts;
  for (const auto& q : queries) {
    counts.push_back(precision_recall(q));
    const PrfCounts one[] = {counts.back()};
    r.per_query.push_back({q.query_id, mean_f1(one)});
  }
  r.value = mean_f1(counts);
  return r;
}

MetricReport map_report(std::span<const RankedList> queries) {
  MetricReport r{"mean_average_precision", mean_average_precision(queries), {}};
  for (const auto& q : queries) r.per_query.push_back({q.query_id, average_precision(q)});
  return r;
}

MetricReport hamming_report(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                            const LabelSpace& space) {
  return {"hamming_loss", hamming_loss(truth, pred, space), {}};
}

}  // namespace crowdsent
