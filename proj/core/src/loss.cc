#include "duallearn/loss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "duallearn/error.hpp"

namespace duallearn {
namespace {

constexpr std::array<std::pair<LossKind, std::string_view>, 8> kNames = {{
    {LossKind::kZeroOne, "zero-one"},
    {LossKind::kClampedCrossEntropy, "clamped-cross-entropy"},
    {LossKind::kSquared, "squared"},
    {LossKind::kHinge, "hinge"},
    {LossKind::kAbsolute, "absolute"},
    {LossKind::kLinearScore, "linear-score"},
    {LossKind::kRateIndicator, "rate-indicator"},
    {LossKind::kRateSigmoid, "rate-sigmoid"},
}};

void require_scalar(const LossSpec& loss, std::span<const double> prediction) {
  if (prediction.size() != 1) {
    throw InputError("core", std::string(to_string(loss.kind)) + " loss expects a scalar prediction, got " +
                                 std::to_string(prediction.size()) + " outputs");
  }
}

std::size_t class_index(std::span<const double> prediction, double label) {
  const std::size_t classes = prediction.size() == 1 ? 2 : prediction.size();
  if (prediction.empty()) throw InputError("core", "empty prediction");
  if (!(label >= 0.0) || label != std::floor(label) || label >= static_cast<double>(classes)) {
    throw InputError("core", "label " + std::to_string(label) + " is not a class index below " +
                                 std::to_string(classes));
  }
  return static_cast<std::size_t>(label);
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t predicted_class(std::span<const double> prediction) {
  if (prediction.size() == 1) return prediction[0] >= 0.5 ? 1 : 0;
  return static_cast<std::size_t>(
      std::distance(prediction.begin(), std::max_element(prediction.begin(), prediction.end())));
}

// Shared evaluation. `grad` is empty when only the value is wanted.
double evaluate(const LossSpec& loss, std::span<const double> z, double y, std::span<double> grad) {
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  const double b = loss.bound;

  switch (loss.kind) {
    case LossKind::kZeroOne: {
      const std::size_t cls = class_index(z, y);
      return predicted_class(z) == cls ? 0.0 : 1.0;
    }
    case LossKind::kClampedCrossEntropy: {
      const std::size_t cls = class_index(z, y);
      const double lo = loss.clamp_p_min;
      const double hi = 1.0 - loss.clamp_p_min;
      if (z.size() == 1) {
        const double p = cls == 1 ? z[0] : 1.0 - z[0];
        const double pc = std::clamp(p, lo, hi);
        if (want_grad && p > lo && p < hi) grad[0] = cls == 1 ? -1.0 / p : 1.0 / p;
        return -std::log(pc);
      }
      const double zmax = *std::max_element(z.begin(), z.end());
      double norm = 0.0;
      for (double v : z) norm += std::exp(v - zmax);
      const double p = std::exp(z[cls] - zmax) / norm;
      const double pc = std::clamp(p, lo, hi);
      if (want_grad && p > lo && p < hi) {
        for (std::size_t j = 0; j < z.size(); ++j) grad[j] = std::exp(z[j] - zmax) / norm;
        grad[cls] -= 1.0;
      }
      return -std::log(pc);
    }
    case LossKind::kSquared: {
      require_scalar(loss, z);
      const double r = z[0] - y;
      const double v = r * r;
      if (v >= b) return b;
      if (want_grad) grad[0] = 2.0 * r;
      return v;
    }
    case LossKind::kHinge: {
      require_scalar(loss, z);
      const double sign = y > 0 ? 1.0 : -1.0;
      const double v = 1.0 - sign * z[0];
      if (v <= 0.0) return 0.0;
      if (v >= b) return b;
      if (want_grad) grad[0] = -sign;
      return v;
    }
    case LossKind::kAbsolute: {
      require_scalar(loss, z);
      const double r = z[0] - y;
      const double v = std::abs(r);
      if (v >= b) return b;
      if (want_grad) grad[0] = r > 0 ? 1.0 : (r < 0 ? -1.0 : 0.0);
      return v;
    }
    case LossKind::kLinearScore: {
      require_scalar(loss, z);
      const double v = loss.score_offset - y * z[0];
      if (v <= 0.0) return 0.0;
      if (v >= b) return b;
      if (want_grad) grad[0] = -y;
      return v;
    }
    case LossKind::kRateIndicator:
      require_scalar(loss, z);
      return z[0] - loss.rate_shift >= 0.0 ? 1.0 : 0.0;
    case LossKind::kRateSigmoid: {
      require_scalar(loss, z);
      const double s = sigmoid(loss.sigmoid_slope * (z[0] - loss.rate_shift));
      if (want_grad) grad[0] = loss.sigmoid_slope * s * (1.0 - s);
      return s;
    }
  }
  throw ConfigError("core", "unknown loss kind " + std::to_string(static_cast<int>(loss.kind)));
}

}  // namespace

std::string_view to_string(LossKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw ConfigError("core", "unknown loss kind '" + std::string(name) + "'");
}

LossSpec LossSpec::zero_one() { return {.kind = LossKind::kZeroOne, .bound = 1.0}; }

LossSpec LossSpec::cross_entropy(double p_min) {
  LossSpec s{.kind = LossKind::kClampedCrossEntropy, .clamp_p_min = p_min};
  s.validate();
  s.bound = -std::log(p_min);
  return s;
}

LossSpec LossSpec::squared(double bound) { return {.kind = LossKind::kSquared, .bound = bound}; }
LossSpec LossSpec::hinge(double bound) { return {.kind = LossKind::kHinge, .bound = bound}; }
LossSpec LossSpec::absolute(double bound) { return {.kind = LossKind::kAbsolute, .bound = bound}; }

LossSpec LossSpec::linear_score(double offset, double bound) {
  return {.kind = LossKind::kLinearScore, .bound = bound, .score_offset = offset};
}

LossSpec LossSpec::rate_indicator(double shift) {
  return {.kind = LossKind::kRateIndicator, .bound = 1.0, .rate_shift = shift};
}

LossSpec LossSpec::rate_sigmoid(double slope, double shift) {
  return {.kind = LossKind::kRateSigmoid, .bound = 1.0, .rate_shift = shift, .sigmoid_slope = slope};
}

bool LossSpec::differentiable() const noexcept {
  return kind != LossKind::kZeroOne && kind != LossKind::kRateIndicator;
}

void LossSpec::validate() const {
  if (!(bound > 0.0) || !std::isfinite(bound)) throw ConfigError("core", "loss bound must be positive and finite");
  if (lipschitz && !(*lipschitz > 0.0)) throw ConfigError("core", "Lipschitz constant must be positive");
  switch (kind) {
    case LossKind::kClampedCrossEntropy:
      if (!(clamp_p_min > 0.0 && clamp_p_min < 0.5)) {
        throw ConfigError("core", "clamp_p_min must lie in (0, 1/2)");
      }
      break;
    case LossKind::kRateSigmoid:
      if (!(sigmoid_slope >= 1.0)) throw ConfigError("core", "sigmoid slope must be >= 1");
      break;
    case LossKind::kZeroOne:
    case LossKind::kSquared:
    case LossKind::kHinge:
    case LossKind::kAbsolute:
    case LossKind::kLinearScore:
    case LossKind::kRateIndicator:
      break;
    default:
      throw ConfigError("core", "unknown loss kind");
  }
}

double eval_loss(const LossSpec& loss, std::span<const double> prediction, double label) {
  return evaluate(loss, prediction, label, {});
}

double loss_and_gradient(const LossSpec& loss, std::span<const double> prediction, double label,
                         std::span<double> grad) {
  if (!loss.differentiable()) {
    throw SurrogateRequiredError("core", std::string(to_string(loss.kind)) +
                                             " loss has no gradient; substitute a smooth surrogate");
  }
  if (grad.size() != prediction.size()) throw InputError("core", "gradient buffer size mismatch");
  return evaluate(loss, prediction, label, grad);
}

}  // namespace duallearn
