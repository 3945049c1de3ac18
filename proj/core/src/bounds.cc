#include "duallearn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "duallearn/error.hpp"

namespace duallearn::bounds {
namespace {

void check_common(std::size_t n, double delta, double bound) {
  if (n < 1) throw InputError("bounds", "sample count N must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw InputError("bounds", "delta must lie in (0, 1)");
  if (!(bound > 0.0) || !std::isfinite(bound)) throw InputError("bounds", "loss bound B must be positive");
}

}  // namespace

double zeta_vc(std::size_t n, double d_vc, double delta, double bound) {
  check_common(n, delta, bound);
  if (!(d_vc >= 0.0)) throw InputError("bounds", "VC dimension must be nonnegative");
  const double nn = static_cast<double>(n);
  // log(4 (2N)^d / delta) expanded to stay finite for large d.
  const double log_term = std::log(4.0) + d_vc * std::log(2.0 * nn) - std::log(delta);
  return bound * std::sqrt((1.0 + log_term) / nn);
}

double zeta_rademacher(std::size_t n, double rademacher, double delta, double bound) {
  check_common(n, delta, bound);
  if (!(rademacher >= 0.0)) throw InputError("bounds", "Rademacher complexity must be nonnegative");
  return 2.0 * bound * rademacher + bound * std::sqrt(std::log(1.0 / delta) / (2.0 * static_cast<double>(n)));
}

RademacherEstimate empirical_rademacher(const std::vector<std::vector<double>>& loss_matrix, std::size_t draws,
                                        std::uint64_t seed) {
  if (loss_matrix.empty() || loss_matrix.front().empty()) throw InputError("bounds", "loss matrix is empty");
  if (draws < 1) throw InputError("bounds", "need at least one draw");
  const std::size_t n = loss_matrix.front().size();
  for (const auto& row : loss_matrix) {
    if (row.size() != n) throw InputError("bounds", "loss matrix rows differ in length");
  }
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> sigma(n);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < draws; ++k) {
    for (double& s : sigma) s = coin(rng) ? 1.0 : -1.0;
    double sup = -std::numeric_limits<double>::infinity();
    for (const auto& row : loss_matrix) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += sigma[j] * row[j];
      sup = std::max(sup, dot / static_cast<double>(n));
    }
    sum += sup;
    sum_sq += sup * sup;
  }
  const double d = static_cast<double>(draws);
  const double mean = sum / d;
  const double var = draws > 1 ? std::max(0.0, (sum_sq - d * mean * mean) / (d - 1.0)) : 0.0;
  return {mean, std::sqrt(var / d), draws};
}

double multiplier_bound(double bound, double xi) {
  if (!(bound > 0.0)) throw InputError("bounds", "loss bound B must be positive");
  if (!(xi > 0.0)) throw InputError("bounds", "no strictly feasible margin: xi must be positive");
  return bound / xi;
}

double measure_xi(const Model& model, const Problem& problem) {
  if (problem.m() == 0) throw InputError("bounds", "strict feasibility is undefined without constraints");
  double xi = std::numeric_limits<double>::infinity();
  for (const auto& c : problem.constraints) xi = std::min(xi, c.threshold - constraint_risk(model, c));
  if (!(xi > 0.0)) {
    throw InputError("bounds", "designated model is not strictly feasible (margin " + std::to_string(xi) + ")");
  }
  return xi;
}

BoundsReport gap_report(std::span<const double> zeta_per_constraint, double Delta, double M, double nu,
                        std::span<const double> thresholds) {
  if (!(Delta >= 0.0 && M >= 0.0 && nu >= 0.0)) throw InputError("bounds", "gap inputs must be nonnegative");
  for (double z : zeta_per_constraint) {
    if (!(z >= 0.0)) throw InputError("bounds", "zeta values must be nonnegative");
  }
  if (!thresholds.empty() && thresholds.size() != zeta_per_constraint.size()) {
    throw InputError("bounds", "one threshold per zeta is required");
  }
  BoundsReport r;
  r.M = M;
  r.nu = nu;
  r.Delta = Delta;
  r.zeta_per_constraint.assign(zeta_per_constraint.begin(), zeta_per_constraint.end());
  r.zeta_bar = zeta_per_constraint.empty() ? 0.0
                                           : *std::max_element(zeta_per_constraint.begin(), zeta_per_constraint.end());
  r.gap_estimate = (1.0 + Delta) * (M * nu + r.zeta_bar);
  for (std::size_t i = 0; i < thresholds.size(); ++i) r.feasibility_margins.push_back(thresholds[i] + zeta_per_constraint[i]);
  return r;
}

BoundsReport make_report(const ReportInputs& in) {
  if (!(in.delta > 0.0 && in.delta < 1.0)) throw InputError("bounds", "delta must lie in (0, 1)");
  const double cap = in.xi > 0.0 ? multiplier_bound(in.B, in.xi) : 0.0;
  const double Delta = std::max(in.observed_mu_l1, cap);
  BoundsReport r = gap_report(in.zeta_per_constraint, Delta, in.M, in.nu, in.thresholds);
  r.B = in.B;
  r.xi = in.xi;
  r.delta = in.delta;
  r.Delta_cap = cap;
  return r;
}

}  // namespace duallearn::bounds
