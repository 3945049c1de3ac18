#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "duallearn/model.hpp"
#include "duallearn/problem.hpp"

namespace duallearn::robust {

enum class AttackKind { kFgsm, kPgd };

std::string_view to_string(AttackKind kind);
AttackKind attack_kind_from_string(std::string_view name);

// l-infinity bounded attack. Candidates are the clean sample plus one PGD run
// per restart; the first restart starts at zero perturbation, later ones
// uniformly in the epsilon-ball. The candidate with the largest loss wins
// (earliest on ties), so an attack never lowers the loss.
//
// Each PGD step moves by step_size * sign(grad_x loss), projects onto the
// epsilon-ball around the clean input, then clamps to `clamp_box`.
struct AttackConfig {
  AttackKind kind = AttackKind::kPgd;
  double epsilon = 0.0;
  std::size_t steps = 1;
  double step_size = 0.0;
  std::size_t restarts = 1;
  // Per-feature [lo, hi]; empty means unbounded.
  std::optional<std::vector<std::pair<double, double>>> clamp_box;
  std::uint64_t seed = 0;

  static AttackConfig fgsm(double epsilon);
  // 5 steps of epsilon / 3, no random restarts.
  static AttackConfig pgd_training(double epsilon);
  // 50 steps of epsilon / 30, worst of 10 restarts.
  static AttackConfig pgd_evaluation(double epsilon, std::uint64_t seed = 0);

  void validate() const;
};

// Attacked copy of `sample`; the label is unchanged. Restart draws come from
// an RNG seeded with cfg.seed ^ sample_index.
Sample perturb(const Model& model, const LossSpec& loss, const Sample& sample, const AttackConfig& cfg,
               std::uint64_t sample_index = 0);

Dataset perturb_dataset(const Model& model, const LossSpec& loss, const Dataset& base, const AttackConfig& cfg);

// Regenerates the attacked dataset against whatever model it is handed.
class AdversarialTransform final : public DatasetTransform {
 public:
  AdversarialTransform(LossSpec attack_loss, AttackConfig cfg);
  Dataset apply(const Model& model, const Dataset& base) const override;
  std::string describe() const override;
  const AttackConfig& config() const noexcept { return cfg_; }

 private:
  LossSpec loss_;
  AttackConfig cfg_;
};

// Constraint on the attacked distribution: risk(loss, attack(base)) <= c,
// where the attack is recomputed for every evaluation.
ConstraintSpec adversarial_constraint(const Dataset& base, const LossSpec& loss, double threshold_c,
                                      const AttackConfig& cfg);

}  // namespace duallearn::robust
