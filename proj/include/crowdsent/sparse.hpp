#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace crowdsent {

/// Feature vector stored as (index, value) pairs with strictly increasing
/// indices below `dimension`.
class SparseVector {
 public:
  struct Entry {
    std::uint32_t index;
    double value;
    bool operator==(const Entry&) const = default;
  };

  SparseVector() = default;
  explicit SparseVector(std::size_t dimension) : dimension_(dimension) {}

  /// Sorts by index, merges repeated indices by summation and drops zeros.
  /// Throws DataError on out-of-range indices or non-finite values.
  static SparseVector from_pairs(std::size_t dimension,
                                 std::vector<Entry> entries);
  static SparseVector from_dense(std::span<const double> values);

  std::size_t dimension() const { return dimension_; }
  std::span<const Entry> entries() const { return entries_; }
  std::size_t nnz() const { return entries_.size(); }

  /// Value at `index` (zero when absent). O(log nnz).
  double at(std::uint32_t index) const;
  std::vector<double> to_dense() const;

  double dot(std::span<const double> dense) const;
  double dot(const SparseVector& other) const;
  double squared_norm() const;

  /// Appends `other` after this vector's last dimension.
  SparseVector concat(const SparseVector& other) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<Entry> entries_;
};

}  // namespace crowdsent
