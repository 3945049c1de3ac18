#include "duallearn/dataset.hpp"

#include "duallearn/error.hpp"

namespace duallearn {

Dataset::Dataset(std::string name, std::vector<Sample> samples) : name_(std::move(name)) {
  if (samples.empty()) throw InputError("core", "dataset '" + name_ + "' is empty");
  feature_dim_ = samples.front().features.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != feature_dim_) {
      throw InputError("core", "dataset '" + name_ + "': sample " + std::to_string(i) +
                                   " has " + std::to_string(samples[i].features.size()) +
                                   " features, expected " + std::to_string(feature_dim_));
    }
  }
  storage_ = std::make_shared<const std::vector<Sample>>(std::move(samples));
}

std::size_t Dataset::size() const noexcept {
  if (!storage_) return 0;
  return index_ ? index_->size() : storage_->size();
}

const Sample& Dataset::operator[](std::size_t i) const {
  return index_ ? (*storage_)[(*index_)[i]] : (*storage_)[i];
}

Dataset Dataset::subset(std::string name, std::span<const std::size_t> positions) const {
  if (positions.empty()) throw InputError("core", "subset '" + name + "' is empty");
  std::vector<std::size_t> physical;
  physical.reserve(positions.size());
  for (std::size_t p : positions) {
    if (p >= size()) throw InputError("core", "subset position out of range");
    physical.push_back(index_ ? (*index_)[p] : p);
  }
  Dataset view;
  view.name_ = std::move(name);
  view.storage_ = storage_;
  view.index_ = std::make_shared<const std::vector<std::size_t>>(std::move(physical));
  view.feature_dim_ = feature_dim_;
  return view;
}

std::vector<Sample> Dataset::samples() const {
  std::vector<Sample> out;
  out.reserve(size());
  for (std::size_t i = 0; i < size(); ++i) out.push_back((*this)[i]);
  return out;
}

}  // namespace duallearn
