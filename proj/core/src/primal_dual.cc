#include "duallearn/primal_dual.hpp"

#include <cmath>
#include <string>

#include "duallearn/error.hpp"

namespace duallearn {
namespace {

constexpr std::size_t kFullSnapshotLimit = 100000;

void require_valid_problem(const Problem& problem) {
  try {
    problem.validate();
  } catch (const Error& e) {
    throw InputError("primaldual", std::string("invalid problem: ") + e.what());
  }
}

// Re-raises the in-flight library error with the iteration index attached,
// keeping its type.
[[noreturn]] void rethrow_with_iteration(std::size_t t) {
  const std::string prefix = "iteration " + std::to_string(t) + ": ";
  try {
    throw;
  } catch (const SurrogateRequiredError& e) {
    throw SurrogateRequiredError(e.module(), prefix + e.what());
  } catch (const NumericError& e) {
    throw NumericError(e.module(), prefix + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(e.module(), prefix + e.what());
  } catch (const InputError& e) {
    throw InputError(e.module(), prefix + e.what());
  } catch (const ParseError& e) {
    throw ParseError(e.module(), prefix + e.what());
  } catch (const Error& e) {
    throw Error(e.module(), prefix + e.what());
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (iterations < 1) throw ConfigError("primaldual", "iterations must be at least 1");
  if (!(dual_step > 0.0) || !std::isfinite(dual_step)) throw ConfigError("primaldual", "dual step must be positive");
  inner.validate();
}

double TrainTrace::ergodic_complementary_slackness() const {
  if (records.empty()) return 0.0;
  double total = 0.0;
  for (const auto& r : records) {
    for (std::size_t i = 0; i < r.slacks.size(); ++i) total += r.mu[i] * r.slacks[i];
  }
  return total / static_cast<double>(records.size());
}

std::vector<double> TrainTrace::ergodic_slacks() const {
  std::vector<double> mean(m(), 0.0);
  for (const auto& r : records) {
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.slacks[i];
  }
  for (double& v : mean) v /= static_cast<double>(records.size());
  return mean;
}

DualState dual_update(const DualState& dual, std::span<const double> slack, double eta) {
  if (slack.size() != dual.size()) throw InputError("primaldual", "slack and multiplier lengths differ");
  if (!(eta > 0.0)) throw ConfigError("primaldual", "dual step must be positive");
  std::vector<double> next(dual.size());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] = std::max(0.0, dual[i] + eta * slack[i]);
  return DualState(std::move(next));
}

namespace {

TrainResult run(const Problem& problem, TrainConfig config, const Model& init) {
  config.validate();
  require_valid_problem(problem);
  if (auto* g = std::get_if<GradientInnerConfig>(&config.inner.method)) g->seed = config.seed;

  const std::size_t m = problem.m();
  std::size_t stride = config.snapshot_stride;
  if (stride == 0) stride = init.params().size() <= kFullSnapshotLimit ? 1 : 0;

  InnerSolver inner(problem, config.inner);
  std::optional<OptimizerState> dual_adam;
  if (config.dual_method.method == DualMethod::kProjectedAdam && m > 0) {
    dual_adam.emplace(OptimizerConfig{.method = OptimizerMethod::kAdam,
                                      .step_size = config.dual_step,
                                      .beta1 = config.dual_method.beta1,
                                      .beta2 = config.dual_method.beta2,
                                      .epsilon = config.dual_method.epsilon},
                      m);
  }

  TrainResult result{.trace = {.arch = init.arch(), .snapshot_stride = stride, .records = {}},
                     .model = init,
                     .dual = DualState::zeros(m)};
  result.trace.records.reserve(config.iterations);
  for (std::size_t t = 0; t < config.iterations; ++t) {
    const Model& start = config.inner.warm_start ? result.model : init;
    DualFunctionResult step = [&] {
      try {
        return inner.minimize(result.dual, start);
      } catch (const Error&) {
        rethrow_with_iteration(t);
      }
    }();
    TrainRecord rec{.t = t,
                    .objective = step.terms.objective,
                    .slacks = step.terms.slacks,
                    .mu = std::vector<double>(result.dual.mu().begin(), result.dual.mu().end()),
                    .lagrangian = step.value,
                    .theta = std::nullopt,
                    .inner_start = step.start_value,
                    .inner_best = step.best_visited};
    if (stride != 0 && t % stride == 0) {
      rec.theta = std::vector<double>(step.minimizer.params().begin(), step.minimizer.params().end());
    }
    result.model = std::move(step.minimizer);

    if (m > 0) {
      if (dual_adam) {
        // Ascent on mu is descent on -s, then projection onto mu >= 0.
        std::vector<double> mu(result.dual.mu().begin(), result.dual.mu().end());
        std::vector<double> neg(m);
        for (std::size_t i = 0; i < m; ++i) neg[i] = -rec.slacks[i];
        apply_step(*dual_adam, mu, neg);
        for (double& v : mu) v = std::max(0.0, v);
        result.dual = DualState(std::move(mu));
      } else {
        result.dual = dual_update(result.dual, rec.slacks, config.dual_step);
      }
    }
    result.trace.records.push_back(std::move(rec));
  }
  return result;
}

}  // namespace

TrainResult train(const Problem& problem, const TrainConfig& config, const Model& init) {
  return run(problem, config, init);
}

TrainResult train_alternating(const Problem& problem, const TrainConfig& config, const Model& init) {
  TrainConfig alt = config;
  if (auto* g = std::get_if<GradientInnerConfig>(&alt.inner.method)) g->epochs = 1;
  alt.inner.warm_start = true;
  return run(problem, alt, init);
}

RandomizedSolution randomized_solution(const TrainTrace& trace) {
  if (trace.records.empty()) throw InputError("primaldual", "randomized solution of an empty trace");
  if (trace.snapshot_stride != 1) {
    throw InputError("primaldual", "randomized solution needs every iterate; this trace is strided");
  }
  RandomizedSolution sol;
  sol.support.reserve(trace.records.size());
  for (const auto& r : trace.records) {
    if (!r.theta) throw InputError("primaldual", "trace record " + std::to_string(r.t) + " has no theta snapshot");
    sol.support.emplace_back(trace.arch, *r.theta);
  }
  return sol;
}

double evaluate_randomized(const RandomizedSolution& solution, const LossSpec& loss, const Dataset& dataset) {
  if (solution.support.empty()) throw InputError("primaldual", "randomized solution has empty support");
  double total = 0.0;
  for (const auto& model : solution.support) total += empirical_risk(model, loss, dataset);
  return total / static_cast<double>(solution.support.size());
}

Hyperparams recommend_hyperparams(double bound, std::size_t m, double zeta_bar, double u0, double lipschitz,
                                  double nu) {
  if (m == 0) throw ConfigError("primaldual", "step-size prescription is undefined without constraints");
  if (!(bound > 0 && zeta_bar > 0 && u0 > 0 && lipschitz > 0 && nu > 0)) {
    throw InputError("primaldual", "hyperparameter prescription needs positive inputs");
  }
  const double eta = 2.0 * zeta_bar / (static_cast<double>(m) * bound * bound);
  const double steps = std::ceil(u0 / (2.0 * eta * lipschitz * nu));
  return {eta, static_cast<std::size_t>(steps) + 1};
}

double complementary_slackness_floor(double eta, std::size_t m, double bound) {
  return -eta * static_cast<double>(m) * bound * bound / 2.0;
}

}  // namespace duallearn
