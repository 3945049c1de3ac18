#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace duallearn {

enum class LossKind {
  kZeroOne,
  kClampedCrossEntropy,
  kSquared,
  kHinge,
  kAbsolute,
  // clamp(offset - y * z, 0, B): a bounded margin loss, linear in the score.
  kLinearScore,
  // 1(z - shift >= 0)
  kRateIndicator,
  // 1 / (1 + exp(-a (z - shift)))
  kRateSigmoid,
};

std::string_view to_string(LossKind kind);
// Throws ConfigError for names that are not a LossKind.
LossKind loss_kind_from_string(std::string_view name);

// A [0, B]-valued loss. Every evaluation saturates at `bound`, so losses that
// are unbounded in their raw form (squared, hinge, absolute) are clipped and
// have zero gradient past the clip point.
//
// Prediction conventions:
//  * zero-one and cross-entropy accept k = 1 (the output is P(y = 1), labels
//    in {0, 1}) or k >= 2 (the output is a score vector, labels in [0, k)).
//    Cross-entropy applies a softmax to k >= 2 scores.
//  * every other kind takes a scalar prediction.
struct LossSpec {
  LossKind kind = LossKind::kSquared;
  double bound = 1.0;
  std::optional<double> lipschitz;
  double clamp_p_min = 1e-6;
  double score_offset = 0.0;
  double rate_shift = 0.0;
  double sigmoid_slope = 1.0;

  static LossSpec zero_one();
  // B = -log(p_min).
  static LossSpec cross_entropy(double p_min = 1e-6);
  static LossSpec squared(double bound);
  static LossSpec hinge(double bound);
  static LossSpec absolute(double bound);
  static LossSpec linear_score(double offset, double bound);
  static LossSpec rate_indicator(double shift);
  static LossSpec rate_sigmoid(double slope, double shift);

  bool differentiable() const noexcept;
  bool is_rate() const noexcept {
    return kind == LossKind::kRateIndicator || kind == LossKind::kRateSigmoid;
  }
  // Throws ConfigError when parameters are out of range.
  void validate() const;
};

double eval_loss(const LossSpec& loss, std::span<const double> prediction, double label);

// Returns the loss and writes d(loss)/d(prediction) into `grad`, which must
// have the prediction's size. Throws SurrogateRequiredError for kinds without
// a gradient.
double loss_and_gradient(const LossSpec& loss, std::span<const double> prediction, double label,
                         std::span<double> grad);

}  // namespace duallearn
