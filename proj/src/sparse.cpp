#include "crowdsent/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "crowdsent/error.hpp"

namespace crowdsent {

SparseVector SparseVector::from_pairs(std::size_t dimension,
                                      std::vector<Entry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.index < b.index; });
  SparseVector v(dimension);
  v.entries_.reserve(entries.size());
  for (const auto& e : entries) {
    if (e.index >= dimension) {
      throw DataError("feature index " + std::to_string(e.index) +
                      " out of range for dimension " + std::to_string(dimension));
    }
    if (!std::isfinite(e.value)) throw DataError("non-finite feature value");
    if (!v.entries_.empty() && v.entries_.back().index == e.index) {
      v.entries_.back().value += e.value;
    } else {
      v.entries_.push_back(e);
    }
  }
  std::erase_if(v.entries_, [](const Entry& e) { return e.value == 0.0; });
  return v;
}

SparseVector SparseVector::from_dense(std::span<const double> values) {
  SparseVector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) throw DataError("non-finite feature value");
    if (values[i] != 0.0) {
      v.entries_.push_back({static_cast<std::uint32_t>(i), values[i]});
    }
  }
  return v;
}

double SparseVector::at(std::uint32_t index) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry& e, std::uint32_t i) { return e.index < i; });
  return (it != entries_.end() && it->index == index) ? it->value : 0.0;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(dimension_, 0.0);
  for (const auto& e : entries_) out[e.index] = e.value;
  return out;
}

double SparseVector::dot(std::span<const double> dense) const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * dense[e.index];
  return s;
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      s += a->value * b->value;
      ++a;
      ++b;
    }
  }
  return s;
}

double SparseVector::squared_norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return s;
}

SparseVector SparseVector::concat(const SparseVector& other) const {
  SparseVector v(dimension_ + other.dimension_);
  v.entries_ = entries_;
  v.entries_.reserve(entries_.size() + other.entries_.size());
  for (const auto& e : other.entries_) {
    v.entries_.push_back(
        {static_cast<std::uint32_t>(e.index + dimension_), e.value});
  }
  return v;
}

}  // namespace crowdsent
