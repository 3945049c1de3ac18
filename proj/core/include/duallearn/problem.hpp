#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "duallearn/dataset.hpp"
#include "duallearn/loss.hpp"
#include "duallearn/model.hpp"

namespace duallearn {

// Smooth stand-in for a rate-indicator constraint inside the primal step:
// sigma(slope * (z - shift)).
struct SurrogateConfig {
  double slope = 8.0;
  double shift = 0.5;
  bool enabled_in_primal = true;
};

// Produces the dataset a constraint is measured on from its base dataset and
// the current model. Used for model-dependent distributions such as
// adversarial perturbations; implementations must be deterministic.
class DatasetTransform {
 public:
  virtual ~DatasetTransform() = default;
  virtual Dataset apply(const Model& model, const Dataset& base) const = 0;
  virtual std::string describe() const = 0;
};

// One expectation constraint: risk(loss, dataset) - risk(loss, relative_to) <= threshold.
//
// `relative_to` is empty for ordinary constraints. It expresses requirements
// measured against a second population, e.g. a group's positive rate compared
// with the overall rate.
struct ConstraintSpec {
  std::string name;
  LossSpec loss;
  double threshold = 0.0;
  Dataset dataset;
  std::optional<SurrogateConfig> surrogate;
  std::shared_ptr<const DatasetTransform> transform;
  std::optional<Dataset> relative_to;
};

struct Problem {
  LossSpec objective_loss;
  Dataset objective_dataset;
  std::shared_ptr<const DatasetTransform> objective_transform;
  std::vector<ConstraintSpec> constraints;

  std::size_t m() const noexcept { return constraints.size(); }
  std::size_t feature_dim() const noexcept { return objective_dataset.feature_dim(); }
  // Largest loss bound B across the objective and all constraints.
  double loss_bound() const noexcept;
  // Throws InputError/ConfigError on empty datasets, mismatched feature
  // dimensions, non-finite thresholds or invalid losses.
  void validate() const;
};

// Mean loss over `dataset`, accumulated left to right in dataset order.
double empirical_risk(const Model& model, const LossSpec& loss, const Dataset& dataset);

// Objective risk with the objective transform applied.
double objective_risk(const Model& model, const Problem& problem);

// Constraint risk (minus the relative_to risk, if any) with the transform applied.
double constraint_risk(const Model& model, const ConstraintSpec& constraint);

}  // namespace duallearn
