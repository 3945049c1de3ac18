#include "duallearn/robust.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <random>
#include <sstream>

#include "duallearn/error.hpp"

namespace duallearn::robust {

std::string_view to_string(AttackKind kind) { return kind == AttackKind::kFgsm ? "fgsm" : "pgd"; }

AttackKind attack_kind_from_string(std::string_view name) {
  if (name == "fgsm") return AttackKind::kFgsm;
  if (name == "pgd") return AttackKind::kPgd;
  throw ConfigError("robust", "unknown attack kind '" + std::string(name) + "'");
}

AttackConfig AttackConfig::fgsm(double epsilon) {
  return {.kind = AttackKind::kFgsm, .epsilon = epsilon, .steps = 1, .step_size = epsilon, .restarts = 1};
}

AttackConfig AttackConfig::pgd_training(double epsilon) {
  return {.kind = AttackKind::kPgd, .epsilon = epsilon, .steps = 5, .step_size = epsilon / 3.0, .restarts = 1};
}

AttackConfig AttackConfig::pgd_evaluation(double epsilon, std::uint64_t seed) {
  return {.kind = AttackKind::kPgd,
          .epsilon = epsilon,
          .steps = 50,
          .step_size = epsilon / 30.0,
          .restarts = 10,
          .clamp_box = std::nullopt,
          .seed = seed};
}

void AttackConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("robust", "epsilon must be finite and >= 0");
  if (steps < 1 || restarts < 1) throw ConfigError("robust", "steps and restarts must be positive");
  if (epsilon > 0.0 && !(step_size > 0.0)) throw ConfigError("robust", "step size must be positive");
  if (kind == AttackKind::kFgsm && (steps != 1 || step_size != epsilon || restarts != 1)) {
    throw ConfigError("robust", "fgsm is one step of size epsilon without restarts");
  }
  if (clamp_box) {
    for (const auto& [lo, hi] : *clamp_box) {
      if (!(lo <= hi)) throw ConfigError("robust", "clamp box needs lo <= hi");
    }
  }
}

Sample perturb(const Model& model, const LossSpec& loss, const Sample& sample, const AttackConfig& cfg,
               std::uint64_t sample_index) {
  if (!loss.differentiable()) {
    throw SurrogateRequiredError("robust", "attacks need a differentiable loss, got " +
                                               std::string(to_string(loss.kind)));
  }
  cfg.validate();
  const std::size_t d = sample.features.size();
  if (cfg.clamp_box && cfg.clamp_box->size() != d) {
    throw InputError("robust", "clamp box has " + std::to_string(cfg.clamp_box->size()) + " ranges for " +
                                   std::to_string(d) + " features");
  }
  if (cfg.epsilon == 0.0) return sample;

  const std::vector<double>& clean = sample.features;
  const auto project = [&](std::vector<double>& x) {
    for (std::size_t j = 0; j < d; ++j) {
      x[j] = std::clamp(x[j], clean[j] - cfg.epsilon, clean[j] + cfg.epsilon);
      if (cfg.clamp_box) x[j] = std::clamp(x[j], (*cfg.clamp_box)[j].first, (*cfg.clamp_box)[j].second);
    }
  };

  Sample best = sample;
  double best_loss = eval_loss(loss, model.predict(clean), sample.label);
  std::mt19937_64 rng(cfg.seed ^ sample_index);
  std::uniform_real_distribution<double> start_dist(-cfg.epsilon, cfg.epsilon);

  Sample cur{.features = clean, .label = sample.label};
  std::vector<double> g(d);
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    cur.features = clean;
    if (r > 0) {
      for (std::size_t j = 0; j < d; ++j) cur.features[j] += start_dist(rng);
    }
    project(cur.features);
    for (std::size_t step = 0; step < cfg.steps; ++step) {
      std::fill(g.begin(), g.end(), 0.0);
      model.accumulate_gradient(loss, cur, 1.0, {}, g);
      for (std::size_t j = 0; j < d; ++j) {
        const double sign = g[j] > 0 ? 1.0 : (g[j] < 0 ? -1.0 : 0.0);
        cur.features[j] += cfg.step_size * sign;
      }
      project(cur.features);
#ifndef NDEBUG
      for (std::size_t j = 0; j < d; ++j) {
        assert(std::abs(cur.features[j] - clean[j]) <= cfg.epsilon * (1.0 + 1e-12) + 1e-12);
      }
#endif
    }
    const double value = eval_loss(loss, model.predict(cur.features), cur.label);
    if (value > best_loss) {
      best_loss = value;
      best = cur;
    }
  }
  return best;
}

Dataset perturb_dataset(const Model& model, const LossSpec& loss, const Dataset& base, const AttackConfig& cfg) {
  std::vector<Sample> out;
  out.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out.push_back(perturb(model, loss, base[i], cfg, i));
  return Dataset(base.name() + "@" + std::string(to_string(cfg.kind)), std::move(out));
}

AdversarialTransform::AdversarialTransform(LossSpec attack_loss, AttackConfig cfg)
    : loss_(std::move(attack_loss)), cfg_(std::move(cfg)) {
  cfg_.validate();
  if (!loss_.differentiable()) {
    throw SurrogateRequiredError("robust", "attacks need a differentiable loss, got " +
                                               std::string(to_string(loss_.kind)));
  }
}

Dataset AdversarialTransform::apply(const Model& model, const Dataset& base) const {
  if (cfg_.epsilon == 0.0) return base;
  return perturb_dataset(model, loss_, base, cfg_);
}

std::string AdversarialTransform::describe() const {
  std::ostringstream os;
  os << to_string(cfg_.kind) << " eps=" << cfg_.epsilon << " steps=" << cfg_.steps << " step=" << cfg_.step_size
     << " restarts=" << cfg_.restarts << " seed=" << cfg_.seed << " projection=ball-then-box";
  return os.str();
}

ConstraintSpec adversarial_constraint(const Dataset& base, const LossSpec& loss, double threshold_c,
                                      const AttackConfig& cfg) {
  if (!std::isfinite(threshold_c)) throw InputError("robust", "constraint threshold must be finite");
  ConstraintSpec c;
  c.name = "adversarial(" + std::string(to_string(cfg.kind)) + ")";
  c.loss = loss;
  c.threshold = threshold_c;
  c.dataset = base;
  c.transform = std::make_shared<AdversarialTransform>(loss, cfg);
  return c;
}

}  // namespace duallearn::robust
