#pragma once

#include <cstddef>
#include <vector>

#include "duallearn/model.hpp"
#include "duallearn/problem.hpp"

namespace duallearn {
class DualState;
}

namespace duallearn::rate {

// 1 if g >= 0, else 0. The boundary counts as the event.
double indicator_rate_loss(double g);

// 1 / (1 + exp(-a x)). Throws ConfigError when a < 1.
double sigmoid_surrogate(double x, double a);

// Returns `problem` with every rate-indicator constraint loss replaced by its
// rate-sigmoid surrogate (when the constraint's surrogate is enabled in the
// primal). Thresholds and datasets are unchanged. Throws ConfigError for a
// rate-indicator constraint without a surrogate configuration.
Problem build_surrogate_lagrangian(const Problem& problem);

// Substitutes surrogates only where one is configured and enabled; other
// constraints are left untouched. Never throws.
Problem apply_available_surrogates(const Problem& problem);

// True if some constraint is a rate-indicator with a surrogate enabled.
bool has_surrogates(const Problem& problem);

// 2 ||mu||_1 (1 - sigma(a tau)): how far a surrogate-Lagrangian minimizer can
// be from minimizing the indicator Lagrangian when every sample keeps a
// margin of at least tau.
double surrogate_gap_bound(const DualState& mu, double tau, double a);

struct MarginViolation {
  std::size_t constraint = 0;
  std::size_t sample = 0;
  double margin = 0.0;
};

struct MarginReport {
  // Smallest |g| over all rate-constraint samples (including relative_to
  // datasets).
  double min_abs_margin_tau = 0.0;
  std::vector<MarginViolation> violations;
};

// Scans every rate-constraint sample and lists those whose |g| < tau_min.
// Throws InputError when the problem has no rate constraints.
MarginReport margin_check(const Model& model, const Problem& problem, double tau_min);

}  // namespace duallearn::rate
