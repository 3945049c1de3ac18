#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "duallearn/model.hpp"
#include "duallearn/optimizer.hpp"
#include "duallearn/problem.hpp"

namespace duallearn {

// Nonnegative multipliers, one per constraint.
class DualState {
 public:
  DualState() = default;
  // Throws InputError on negative or non-finite entries.
  explicit DualState(std::vector<double> mu);
  static DualState zeros(std::size_t m) { return DualState(std::vector<double>(m, 0.0)); }

  std::span<const double> mu() const noexcept { return mu_; }
  std::size_t size() const noexcept { return mu_.size(); }
  double operator[](std::size_t i) const { return mu_[i]; }
  double l1_norm() const noexcept;

  friend bool operator==(const DualState&, const DualState&) = default;

 private:
  std::vector<double> mu_;
};

// Objective risk and constraint slacks of one model; the Lagrangian at any
// multiplier follows from these without touching the data again.
struct LagrangianTerms {
  double objective = 0.0;
  std::vector<double> slacks;

  // objective + sum_i mu_i * slack_i, accumulated in constraint order.
  double lagrangian(const DualState& dual) const;
};

LagrangianTerms evaluate_terms(const Model& model, const Problem& problem);

double empirical_lagrangian(const Model& model, const DualState& dual, const Problem& problem);

// s_i = constraint risk - c_i.
std::vector<double> slacks(const Model& model, const Problem& problem);

struct GradientInnerConfig {
  std::size_t epochs = 1;
  // 0 means full batch.
  std::size_t batch_size = 0;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
};

struct EnumerationInnerConfig {
  std::vector<Model> candidates;
};

struct InnerSolverConfig {
  std::variant<GradientInnerConfig, EnumerationInnerConfig> method;
  // Aspirational for gradient solves: reported against, never certified.
  double target_rho = 0.0;
  bool warm_start = true;

  bool is_enumeration() const noexcept { return std::holds_alternative<EnumerationInnerConfig>(method); }
  void validate() const;
};

struct DualFunctionResult {
  // Lagrangian of `minimizer` at the requested multipliers.
  double value = 0.0;
  Model minimizer;
  LagrangianTerms terms;
  // Lowest Lagrangian seen during the solve (start point and every epoch end).
  double best_visited = 0.0;
  double start_value = 0.0;
  // Set for enumeration solves.
  std::optional<std::size_t> candidate_index;
  bool within_target_rho = true;
};

// Approximate minimizer of the empirical Lagrangian over theta, reused across
// outer iterations so optimizer moments and batch shuffling persist.
//
// Gradient solves run on the problem with rate-indicator constraints replaced
// by their configured surrogates; values and slacks are always measured on
// the original problem.
class InnerSolver {
 public:
  InnerSolver(const Problem& problem, InnerSolverConfig config);

  DualFunctionResult minimize(const DualState& dual, const Model& start);

  const InnerSolverConfig& config() const noexcept { return config_; }

 private:
  struct Cursor {
    std::vector<std::size_t> order;
    std::size_t next = 0;
  };

  DualFunctionResult minimize_enumeration(const DualState& dual);
  DualFunctionResult minimize_gradient(const DualState& dual, const Model& start);
  Dataset draw_batch(const Dataset& data, std::size_t cursor, std::size_t batch_size);

  Problem problem_;
  Problem primal_;
  InnerSolverConfig config_;
  std::optional<OptimizerState> optimizer_;
  std::mt19937_64 rng_;
  std::vector<Cursor> cursors_;
  std::vector<LagrangianTerms> candidate_terms_;
};

// Empirical dual function d(mu) = min_theta L(theta, mu) via a fresh inner
// solver. For enumeration the minimizer is the exact argmin (ties go to the
// lowest index).
DualFunctionResult dual_function(const DualState& dual, const Problem& problem, const InnerSolverConfig& solver,
                                 const Model& init);

}  // namespace duallearn
