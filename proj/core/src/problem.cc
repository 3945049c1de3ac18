#include "duallearn/problem.hpp"

#include <algorithm>
#include <cmath>

#include "duallearn/error.hpp"

namespace duallearn {

double Problem::loss_bound() const noexcept {
  double b = objective_loss.bound;
  for (const auto& c : constraints) b = std::max(b, c.loss.bound);
  return b;
}

void Problem::validate() const {
  if (objective_dataset.empty()) throw InputError("core", "objective dataset is empty");
  objective_loss.validate();
  const std::size_t d = objective_dataset.feature_dim();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    const std::string label = "constraint " + std::to_string(i) + (c.name.empty() ? "" : " (" + c.name + ")");
    c.loss.validate();
    if (!std::isfinite(c.threshold)) throw InputError("core", label + ": threshold must be finite");
    if (c.dataset.empty()) throw InputError("core", label + ": dataset is empty");
    if (c.dataset.feature_dim() != d) throw InputError("core", label + ": feature dimension differs from objective");
    if (c.relative_to && (c.relative_to->empty() || c.relative_to->feature_dim() != d)) {
      throw InputError("core", label + ": relative_to dataset is empty or has a different feature dimension");
    }
  }
}

double empirical_risk(const Model& model, const LossSpec& loss, const Dataset& dataset) {
  if (dataset.empty()) throw InputError("core", "empirical risk of an empty dataset");
  if (dataset.feature_dim() != model.arch().input_dim()) {
    throw InputError("core", "dataset '" + dataset.name() + "' has " + std::to_string(dataset.feature_dim()) +
                                 " features, model expects " + std::to_string(model.arch().input_dim()));
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Sample& s = dataset[i];
    sum += eval_loss(loss, model.predict(s.features), s.label);
  }
  return sum / static_cast<double>(dataset.size());
}

double objective_risk(const Model& model, const Problem& problem) {
  if (problem.objective_transform) {
    return empirical_risk(model, problem.objective_loss, problem.objective_transform->apply(model, problem.objective_dataset));
  }
  return empirical_risk(model, problem.objective_loss, problem.objective_dataset);
}

double constraint_risk(const Model& model, const ConstraintSpec& constraint) {
  const auto risk_on = [&](const Dataset& base) {
    if (constraint.transform) return empirical_risk(model, constraint.loss, constraint.transform->apply(model, base));
    return empirical_risk(model, constraint.loss, base);
  };
  double risk = risk_on(constraint.dataset);
  if (constraint.relative_to) risk -= risk_on(*constraint.relative_to);
  return risk;
}

}  // namespace duallearn
