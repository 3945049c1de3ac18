#include "duallearn/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "duallearn/error.hpp"
#include "duallearn/rate.hpp"

namespace duallearn {

DualState::DualState(std::vector<double> mu) : mu_(std::move(mu)) {
  for (double v : mu_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("lagrangian", "multipliers must be finite and nonnegative");
  }
}

double DualState::l1_norm() const noexcept {
  double s = 0.0;
  for (double v : mu_) s += v;
  return s;
}

double LagrangianTerms::lagrangian(const DualState& dual) const {
  if (dual.size() != slacks.size()) {
    throw InputError("lagrangian", "problem has " + std::to_string(slacks.size()) + " constraints but " +
                                       std::to_string(dual.size()) + " multipliers were given");
  }
  double value = objective;
  for (std::size_t i = 0; i < slacks.size(); ++i) value += dual[i] * slacks[i];
  return value;
}

LagrangianTerms evaluate_terms(const Model& model, const Problem& problem) {
  LagrangianTerms terms;
  terms.objective = objective_risk(model, problem);
  terms.slacks = slacks(model, problem);
  return terms;
}

double empirical_lagrangian(const Model& model, const DualState& dual, const Problem& problem) {
  if (dual.size() != problem.m()) {
    throw InputError("lagrangian", "multiplier count does not match the number of constraints");
  }
  return evaluate_terms(model, problem).lagrangian(dual);
}

std::vector<double> slacks(const Model& model, const Problem& problem) {
  std::vector<double> s;
  s.reserve(problem.m());
  for (const auto& c : problem.constraints) s.push_back(constraint_risk(model, c) - c.threshold);
  return s;
}

void InnerSolverConfig::validate() const {
  if (!(target_rho >= 0.0)) throw ConfigError("lagrangian", "target_rho must be nonnegative");
  if (const auto* g = std::get_if<GradientInnerConfig>(&method)) {
    if (g->epochs < 1) throw ConfigError("lagrangian", "gradient inner solver needs at least one epoch");
    g->optimizer.validate();
  } else if (std::get<EnumerationInnerConfig>(method).candidates.empty()) {
    throw ConfigError("lagrangian", "enumeration inner solver needs at least one candidate");
  }
}

InnerSolver::InnerSolver(const Problem& problem, InnerSolverConfig config)
    : problem_(problem), config_(std::move(config)) {
  problem_.validate();
  config_.validate();
  if (const auto* g = std::get_if<GradientInnerConfig>(&config_.method)) {
    primal_ = rate::apply_available_surrogates(problem_);
    const auto check = [](const LossSpec& loss, const std::string& where) {
      if (!loss.differentiable()) {
        throw SurrogateRequiredError("lagrangian", where + " uses a " + std::string(to_string(loss.kind)) +
                                                       " loss; gradient inner solves need a smooth surrogate");
      }
    };
    check(primal_.objective_loss, "objective");
    for (std::size_t i = 0; i < primal_.m(); ++i) check(primal_.constraints[i].loss, "constraint " + std::to_string(i));
    rng_.seed(g->seed);
    // Cursor 0: objective; then per constraint its dataset and, if any, relative_to.
    cursors_.resize(1 + 2 * problem_.m());
  } else {
    const auto& cands = std::get<EnumerationInnerConfig>(config_.method).candidates;
    for (const auto& c : cands) {
      if (c.arch().input_dim() != problem_.feature_dim()) {
        throw InputError("lagrangian", "enumeration candidate input dimension does not match the problem");
      }
    }
  }
}

DualFunctionResult InnerSolver::minimize(const DualState& dual, const Model& start) {
  if (dual.size() != problem_.m()) {
    throw InputError("lagrangian", "multiplier count does not match the number of constraints");
  }
  return config_.is_enumeration() ? minimize_enumeration(dual) : minimize_gradient(dual, start);
}

DualFunctionResult InnerSolver::minimize_enumeration(const DualState& dual) {
  const auto& cands = std::get<EnumerationInnerConfig>(config_.method).candidates;
  if (candidate_terms_.empty()) {
    candidate_terms_.reserve(cands.size());
    for (const auto& c : cands) candidate_terms_.push_back(evaluate_terms(c, problem_));
  }
  std::size_t best = 0;
  double best_value = candidate_terms_[0].lagrangian(dual);
  for (std::size_t j = 1; j < cands.size(); ++j) {
    const double v = candidate_terms_[j].lagrangian(dual);
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  return DualFunctionResult{
      .value = best_value,
      .minimizer = cands[best],
      .terms = candidate_terms_[best],
      .best_visited = best_value,
      .start_value = best_value,
      .candidate_index = best,
      .within_target_rho = true,
  };
}

Dataset InnerSolver::draw_batch(const Dataset& data, std::size_t cursor, std::size_t batch_size) {
  if (batch_size == 0 || batch_size >= data.size()) return data;
  Cursor& c = cursors_[cursor];
  if (c.order.size() != data.size()) {
    c.order.resize(data.size());
    std::iota(c.order.begin(), c.order.end(), std::size_t{0});
    std::shuffle(c.order.begin(), c.order.end(), rng_);
    c.next = 0;
  }
  std::vector<std::size_t> picks;
  picks.reserve(batch_size);
  while (picks.size() < batch_size) {
    if (c.next == c.order.size()) {
      std::shuffle(c.order.begin(), c.order.end(), rng_);
      c.next = 0;
    }
    picks.push_back(c.order[c.next++]);
  }
  return data.subset(data.name(), picks);
}

DualFunctionResult InnerSolver::minimize_gradient(const DualState& dual, const Model& start) {
  const auto& cfg = std::get<GradientInnerConfig>(config_.method);
  if (start.arch().input_dim() != problem_.feature_dim()) {
    throw InputError("lagrangian", "model input dimension does not match the problem");
  }
  if (!optimizer_ || !config_.warm_start || optimizer_->first_moment.size() != start.params().size()) {
    optimizer_.emplace(cfg.optimizer, start.params().size());
  }
  Model model = start;
  const double start_value = empirical_lagrangian(model, dual, problem_);
  double best = start_value;

  const std::size_t n0 = primal_.objective_dataset.size();
  const std::size_t bs = cfg.batch_size == 0 ? n0 : std::min(cfg.batch_size, n0);
  const std::size_t steps = (n0 + bs - 1) / bs;
  const std::size_t batch = cfg.batch_size;

  LagrangianTerms terms;
  std::vector<WeightedLoss> parts;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t step = 0; step < steps; ++step) {
      parts.clear();
      const auto add = [&](double weight, const LossSpec& loss, const Dataset& base,
                           const std::shared_ptr<const DatasetTransform>& transform, std::size_t cursor) {
        Dataset b = draw_batch(base, cursor, batch);
        if (transform) b = transform->apply(model, b);
        parts.push_back({weight, loss, std::move(b)});
      };
      add(1.0, primal_.objective_loss, primal_.objective_dataset, primal_.objective_transform, 0);
      for (std::size_t i = 0; i < primal_.m(); ++i) {
        if (dual[i] == 0.0) continue;
        const ConstraintSpec& c = primal_.constraints[i];
        add(dual[i], c.loss, c.dataset, c.transform, 1 + 2 * i);
        if (c.relative_to) add(-dual[i], c.loss, *c.relative_to, c.transform, 2 + 2 * i);
      }
      const std::vector<double> g = grad_params(model, parts);
      apply_step(*optimizer_, model.mutable_params(), g);
    }
    terms = evaluate_terms(model, problem_);
    best = std::min(best, terms.lagrangian(dual));
  }
  for (double v : model.params()) {
    if (!std::isfinite(v)) throw NumericError("lagrangian", "inner solve diverged to non-finite parameters");
  }
  const double value = terms.lagrangian(dual);
  return DualFunctionResult{
      .value = value,
      .minimizer = std::move(model),
      .terms = std::move(terms),
      .best_visited = best,
      .start_value = start_value,
      .candidate_index = std::nullopt,
      .within_target_rho = value - best <= config_.target_rho,
  };
}

DualFunctionResult dual_function(const DualState& dual, const Problem& problem, const InnerSolverConfig& solver,
                                 const Model& init) {
  InnerSolver inner(problem, solver);
  return inner.minimize(dual, init);
}

}  // namespace duallearn
