#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "duallearn/model.hpp"

namespace duallearn {

enum class OptimizerMethod { kSgd, kAdam };

std::string_view to_string(OptimizerMethod m);
OptimizerMethod optimizer_method_from_string(std::string_view name);

// ADAM defaults follow Kingma & Ba.
struct OptimizerConfig {
  OptimizerMethod method = OptimizerMethod::kAdam;
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

struct OptimizerState {
  OptimizerConfig config;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;

  OptimizerState() = default;
  OptimizerState(OptimizerConfig cfg, std::size_t dimension);
};

// Descent step on `params` in place. Throws NumericError and leaves both
// `state` and `params` untouched when `gradient` holds a non-finite value.
void apply_step(OptimizerState& state, std::span<double> params, std::span<const double> gradient);

std::pair<OptimizerState, Model> optimizer_step(OptimizerState state, Model model, std::span<const double> gradient);

}  // namespace duallearn
