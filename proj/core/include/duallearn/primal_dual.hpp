#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "duallearn/lagrangian.hpp"
#include "duallearn/model.hpp"
#include "duallearn/problem.hpp"

namespace duallearn {

enum class DualMethod { kProjectedAscent, kProjectedAdam };

struct DualMethodConfig {
  DualMethod method = DualMethod::kProjectedAscent;
  // ADAM settings for kProjectedAdam; the step size is TrainConfig::dual_step.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  std::size_t iterations = 1;
  // eta for projected ascent, the ADAM step size for projected-adam.
  double dual_step = 1e-2;
  DualMethodConfig dual_method;
  InnerSolverConfig inner;
  std::uint64_t seed = 0;
  // Keep every k-th theta; 0 picks 1 for models up to 1e5 parameters and
  // skips snapshots entirely above that.
  std::size_t snapshot_stride = 0;

  void validate() const;
};

struct TrainRecord {
  std::size_t t = 0;
  double objective = 0.0;
  std::vector<double> slacks;
  // Multipliers the iterate was computed against (mu^(t)).
  std::vector<double> mu;
  double lagrangian = 0.0;
  std::optional<std::vector<double>> theta;
  double inner_start = 0.0;
  double inner_best = 0.0;
};

struct TrainTrace {
  Architecture arch;
  std::size_t snapshot_stride = 1;
  std::vector<TrainRecord> records;

  std::size_t m() const noexcept { return records.empty() ? 0 : records.front().slacks.size(); }
  // (1/T) sum_t mu^(t)' s^(t).
  double ergodic_complementary_slackness() const;
  // (1/T) sum_t s_i^(t), per constraint.
  std::vector<double> ergodic_slacks() const;
};

struct TrainResult {
  TrainTrace trace;
  Model model;
  DualState dual;
};

// mu_i' = max(0, mu_i + eta * s_i).
DualState dual_update(const DualState& dual, std::span<const double> slack, double eta);

// Projected dual ascent: each iteration minimizes the empirical Lagrangian at
// the current multipliers, measures slacks at the minimizer, then steps the
// multipliers. mu starts at zero. Runs exactly `iterations` steps.
TrainResult train(const Problem& problem, const TrainConfig& config, const Model& init);

// Same loop with one epoch of primal optimization per dual update and the
// primal optimizer state carried across iterations.
TrainResult train_alternating(const Problem& problem, const TrainConfig& config, const Model& init);

// Uniform mixture over the recorded iterates theta^(0..T-1).
struct RandomizedSolution {
  std::vector<Model> support;
};

// Throws InputError for empty or strided traces.
RandomizedSolution randomized_solution(const TrainTrace& trace);

double evaluate_randomized(const RandomizedSolution& solution, const LossSpec& loss, const Dataset& dataset);

struct Hyperparams {
  double eta = 0.0;
  std::size_t iterations = 0;
};

// eta = 2 zeta_bar / (m B^2), T = ceil(U0 / (2 eta M nu)) + 1.
Hyperparams recommend_hyperparams(double bound, std::size_t m, double zeta_bar, double u0, double lipschitz,
                                  double nu);

// Floor on the ergodic complementary slackness of projected ascent: -eta m B^2 / 2.
double complementary_slackness_floor(double eta, std::size_t m, double bound);

}  // namespace duallearn
