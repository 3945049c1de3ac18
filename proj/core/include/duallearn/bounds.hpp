#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "duallearn/model.hpp"
#include "duallearn/problem.hpp"

namespace duallearn::bounds {

// Uniform-convergence radius from a VC-dimension bound:
//   B * sqrt((1 + log(4 (2N)^d_vc / delta)) / N).
double zeta_vc(std::size_t n, double d_vc, double delta, double bound);

// Uniform-convergence radius from a Rademacher-complexity bound:
//   2 B R_N + B * sqrt(log(1 / delta) / (2N)).
double zeta_rademacher(std::size_t n, double rademacher, double delta, double bound);

struct RademacherEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t draws = 0;
};

// Monte-Carlo estimate of E_sigma[ sup_a (1/N) sigma'a ] over the rows of
// `loss_matrix` (each row is one achievable loss vector of length N).
RademacherEstimate empirical_rademacher(const std::vector<std::vector<double>>& loss_matrix, std::size_t draws,
                                        std::uint64_t seed);

// B / xi, an upper bound on the l1 norm of the optimal multipliers.
double multiplier_bound(double bound, double xi);

// Strict-feasibility margin of a designated model: min_i (c_i - risk_i).
// Throws InputError when the model is not strictly feasible.
double measure_xi(const Model& model, const Problem& problem);

struct BoundsReport {
  double B = 0.0;
  double M = 0.0;
  double nu = 0.0;
  double xi = 0.0;
  double delta = 0.0;
  std::vector<double> zeta_per_constraint;
  double zeta_bar = 0.0;
  // Cap on Delta from B / xi (0 when xi is unknown).
  double Delta_cap = 0.0;
  // Delta used in the gap.
  double Delta = 0.0;
  double gap_estimate = 0.0;
  // c_i + zeta_i, when thresholds were supplied.
  std::vector<double> feasibility_margins;
};

// gap = (1 + Delta) (M nu + max_i zeta_i). Fields not derivable from the
// arguments (B, xi, delta) are left at zero.
BoundsReport gap_report(std::span<const double> zeta_per_constraint, double Delta, double M, double nu,
                        std::span<const double> thresholds = {});

struct ReportInputs {
  double B = 1.0;
  double M = 1.0;
  double nu = 0.0;
  double xi = 0.0;
  double delta = 0.05;
  std::vector<double> zeta_per_constraint;
  // l1 norm of the multipliers a run actually reached, if known.
  double observed_mu_l1 = 0.0;
  std::vector<double> thresholds;
};

// Full report: Delta = max(observed ||mu||_1, B / xi).
BoundsReport make_report(const ReportInputs& in);

}  // namespace duallearn::bounds
