#include "duallearn/rate.hpp"

#include <cmath>
#include <limits>

#include "duallearn/error.hpp"
#include "duallearn/lagrangian.hpp"

namespace duallearn::rate {

double indicator_rate_loss(double g) { return g >= 0.0 ? 1.0 : 0.0; }

double sigmoid_surrogate(double x, double a) {
  if (!(a >= 1.0)) throw ConfigError("rate", "sigmoid slope must be >= 1");
  const double u = a * x;
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

bool has_surrogates(const Problem& problem) {
  for (const auto& c : problem.constraints) {
    if (c.loss.kind == LossKind::kRateIndicator && c.surrogate && c.surrogate->enabled_in_primal) return true;
  }
  return false;
}

Problem apply_available_surrogates(const Problem& problem) {
  Problem out = problem;
  for (ConstraintSpec& c : out.constraints) {
    if (c.loss.kind != LossKind::kRateIndicator || !c.surrogate || !c.surrogate->enabled_in_primal) continue;
    LossSpec smooth = LossSpec::rate_sigmoid(c.surrogate->slope, c.surrogate->shift);
    smooth.lipschitz = c.loss.lipschitz;
    c.loss = smooth;
  }
  return out;
}

Problem build_surrogate_lagrangian(const Problem& problem) {
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const ConstraintSpec& c = problem.constraints[i];
    if (c.loss.kind != LossKind::kRateIndicator) continue;
    if (!c.surrogate) {
      throw ConfigError("rate", "rate constraint " + std::to_string(i) + " has no surrogate configuration");
    }
    if (!(c.surrogate->slope >= 1.0)) throw ConfigError("rate", "sigmoid slope must be >= 1");
  }
  return apply_available_surrogates(problem);
}

double surrogate_gap_bound(const DualState& mu, double tau, double a) {
  if (!(tau >= 0.0)) throw InputError("rate", "margin tau must be nonnegative");
  return 2.0 * mu.l1_norm() * (1.0 - sigmoid_surrogate(tau, a));
}

MarginReport margin_check(const Model& model, const Problem& problem, double tau_min) {
  MarginReport report;
  report.min_abs_margin_tau = std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t ci = 0; ci < problem.constraints.size(); ++ci) {
    const ConstraintSpec& c = problem.constraints[ci];
    if (!c.loss.is_rate()) continue;
    any = true;
    const auto scan = [&](const Dataset& data, std::size_t offset) {
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double g = model.predict(data[i].features).at(0) - c.loss.rate_shift;
        const double margin = std::abs(g);
        report.min_abs_margin_tau = std::min(report.min_abs_margin_tau, margin);
        if (margin < tau_min) report.violations.push_back({ci, offset + i, margin});
      }
    };
    scan(c.dataset, 0);
    // relative_to samples are numbered after the constraint's own samples.
    if (c.relative_to) scan(*c.relative_to, c.dataset.size());
  }
  if (!any) throw InputError("rate", "margin check needs at least one rate constraint");
  return report;
}

}  // namespace duallearn::rate
