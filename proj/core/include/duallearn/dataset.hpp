#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace duallearn {

// One (x, y) pair. Class labels are stored as integral doubles; regression
// targets are arbitrary reals.
struct Sample {
  std::vector<double> features;
  double label = 0.0;
};

// An ordered, immutable collection of samples.
//
// Storage is shared: views produced by `subset` reference the same physical
// samples as their parent, so group-conditional constraint datasets cost one
// index vector rather than a copy.
class Dataset {
 public:
  Dataset() = default;

  // Throws InputError when `samples` is empty or feature dimensions differ.
  Dataset(std::string name, std::vector<Sample> samples);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  std::size_t feature_dim() const noexcept { return feature_dim_; }

  const Sample& operator[](std::size_t i) const;

  // View over the given positions of this dataset, in the given order.
  Dataset subset(std::string name, std::span<const std::size_t> positions) const;

  // Materialized copy of the samples in view order.
  std::vector<Sample> samples() const;

  // True when both datasets reference the same physical samples.
  bool shares_storage_with(const Dataset& other) const noexcept {
    return storage_ == other.storage_;
  }

 private:
  std::string name_;
  std::shared_ptr<const std::vector<Sample>> storage_;
  // Empty means identity view over all of storage_.
  std::shared_ptr<const std::vector<std::size_t>> index_;
  std::size_t feature_dim_ = 0;
};

}  // namespace duallearn
