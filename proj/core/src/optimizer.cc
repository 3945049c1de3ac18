#include "duallearn/optimizer.hpp"

#include <cmath>
#include <string>

#include "duallearn/error.hpp"

namespace duallearn {

std::string_view to_string(OptimizerMethod m) { return m == OptimizerMethod::kSgd ? "sgd" : "adam"; }

OptimizerMethod optimizer_method_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerMethod::kSgd;
  if (name == "adam") return OptimizerMethod::kAdam;
  throw ConfigError("models", "unknown optimizer '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) throw ConfigError("models", "step size must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("models", "ADAM betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("models", "ADAM epsilon must be positive");
}

OptimizerState::OptimizerState(OptimizerConfig cfg, std::size_t dimension)
    : config(cfg), first_moment(dimension, 0.0), second_moment(dimension, 0.0) {
  config.validate();
}

void apply_step(OptimizerState& state, std::span<double> params, std::span<const double> gradient) {
  if (gradient.size() != params.size() || state.first_moment.size() != params.size()) {
    throw InputError("models", "gradient length does not match parameters");
  }
  for (double g : gradient) {
    if (!std::isfinite(g)) throw NumericError("models", "non-finite gradient entry");
  }
  const OptimizerConfig& c = state.config;
  ++state.step_count;
  if (c.method == OptimizerMethod::kSgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= c.step_size * gradient[i];
    return;
  }
  const double t = static_cast<double>(state.step_count);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = c.beta1 * m + (1.0 - c.beta1) * gradient[i];
    v = c.beta2 * v + (1.0 - c.beta2) * gradient[i] * gradient[i];
    params[i] -= c.step_size * (m / correction1) / (std::sqrt(v / correction2) + c.epsilon);
  }
}

std::pair<OptimizerState, Model> optimizer_step(OptimizerState state, Model model, std::span<const double> gradient) {
  apply_step(state, model.mutable_params(), gradient);
  return {std::move(state), std::move(model)};
}

}  // namespace duallearn
