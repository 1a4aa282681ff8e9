#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "crowdsent/classifiers.hpp"
#include "crowdsent/multilabel.hpp"

namespace crowdsent {

/// Sets exactly the target and sentiment flags. Throws DataError for a target
/// outside the space.
LabelSet to_multilabel(const JointCategory& pred, const LabelSpace& space);

/// Mean over examples of |S_i symmetric-difference Y_i| / |L|.
double hamming_loss(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                    const LabelSpace& space);

struct PrfCounts {
  double precision = 0.0;
  double recall = 0.0;
};

/// Mean of 2PR / (P + R); a query with P + R = 0 contributes 0.
double mean_f1(std::span<const PrfCounts> queries);

struct RankedList {
  std::string query_id;
  std::vector<std::string> items;  // distinct, best first
  std::set<std::string> relevant;
};

/// Precision and recall of the whole returned list.
PrfCounts precision_recall(const RankedList& list);

/// Sum over ranks k of P@k * rel(k), divided by |relevant|. P@k counts only
/// returned items.
double average_precision(const RankedList& list);
double mean_average_precision(std::span<const RankedList> queries);

struct QueryValue {
  std::string query_id;
  double value = 0.0;
};

/// {metric, value, per_query: [{query, value}]}
struct MetricReport {
  std::string metric;
  double value = 0.0;
  std::vector<QueryValue> per_query;

  nlohmann::json to_json() const;
};

MetricReport f1_report(std::span<const RankedList> queries);
MetricReport map_report(std::span<const RankedList> queries);
MetricReport hamming_report(std::span<const LabelSet> truth, std::span<const LabelSet> pred,
                            const LabelSpace& space);

}  // namespace crowdsent
