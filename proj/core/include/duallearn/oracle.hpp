#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "duallearn/model.hpp"
#include "duallearn/problem.hpp"

// Brute-force ground truth for small problems: exact enumeration of the
// empirical constrained problem and of its dual, plus a closed-form
// pathological instance on which empirical constrained risk minimization
// fails almost surely.
namespace duallearn::oracle {

// One realization of the three coupled distributions of the pathological
// instance. Sample n of every dataset shares tau[n].
//   d0: ([tau, -tau], -1) or ([0, alpha], 1), each with probability 1/2
//   d1: ([-1, tau], 1)
//   d2: ([-tau, 1], 1)
// with tau ~ U[-1/2, 1/2] and alpha ~ U[0, 1/4], fresh per sample index.
struct Example1Data {
  Dataset d0;
  Dataset d1;
  Dataset d2;
  std::vector<double> tau;

  double tau_bar() const;
};

Example1Data example1_sample(std::size_t n, std::uint64_t seed);

// J(theta) = E|y theta'x| under d0 = |theta1 - theta2| / 8 + |theta2| / 16.
double example1_population_objective(std::array<double, 2> theta);

// Problem plus the finite candidate set Theta it is solved over.
struct EnumerableProblem {
  Problem problem;
  std::vector<Model> candidates;
  // Constraints are relaxed to risk <= c + xi_relax.
  double xi_relax = 0.0;
};

// The empirical version of the pathological instance over Theta = {[1,1], [1,0]}
// for a linear model without bias.
//
// The signed constraint losses y theta'x are mapped onto bounded
// linear-score losses (offset 2, B = 4) with thresholds shifted by the same
// offset, and the objective |y theta'x| is an absolute loss on the
// sign-folded features y x with target 0. Slacks are unchanged by the shift.
EnumerableProblem example1_problem(const Example1Data& data);

struct EcrmResult {
  bool feasible = false;
  std::size_t index = 0;
  // Objective risk of the selected candidate; +inf when infeasible.
  double value = 0.0;
  std::optional<Model> theta;
};

// argmin of the objective risk over candidates whose slacks are all
// <= xi_relax. Ties go to the lowest index.
EcrmResult ecrm_enumerate(const EnumerableProblem& ep);

// Axis-aligned multiplier grid over [0, upper_i], `points_per_axis` points each.
struct MuGrid {
  std::vector<double> upper;
  std::size_t points_per_axis = 200;

  // [0, 2 B / xi]^m when xi > 0, else [0, 50]^m.
  static MuGrid standard(std::size_t m, double bound, std::optional<double> xi, std::size_t points = 200);
};

struct DualEnumResult {
  double D_hat = 0.0;
  std::vector<double> mu_star;
  std::size_t theta_dagger = 0;
  // The maximizing grid point touches the upper edge of some axis; the grid
  // may be too small.
  bool boundary_max = false;
};

// max over the grid of the exact enumeration dual function.
DualEnumResult dual_enumerate(const EnumerableProblem& ep, const MuGrid& grid);

struct Example1Trial {
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double tau_bar = 0.0;
  bool feasible = false;
  std::array<double, 2> theta_hat{};
  double population_J = 0.0;
};

// Trial k uses seed base_seed + k. Results are in trial order regardless of
// `workers`.
std::vector<Example1Trial> run_example1_trials(std::size_t n, std::size_t trials, std::uint64_t base_seed,
                                               std::size_t workers = 1);

}  // namespace duallearn::oracle
