#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "duallearn/loss.hpp"
#include "duallearn/model.hpp"

namespace duallearn::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdRelTol = 1e-5;
// Gradients smaller than this are compared in absolute terms.
inline constexpr double kFdScaleFloor = 1e-4;

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), kFdScaleFloor});
}

// Central difference of f along each coordinate of x.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h = kFdStep) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

// True when f has a kink within h of x along some coordinate: the one-sided
// differences disagree by far more than curvature can explain.
inline bool near_kink(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
                      double h = kFdStep) {
  const double f0 = f(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    const double right = (fp - f0) / h;
    const double left = (f0 - fm) / h;
    if (std::abs(right - left) > 1e-2 * std::max(1.0, std::abs(right) + std::abs(left))) return true;
  }
  return false;
}

struct GradCase {
  std::string label;
  Architecture arch;
  LossSpec loss;
};

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Random (architecture, differentiable loss) pair. Bounds are set high enough
// that no clipping occurs at the sampled points.
inline GradCase random_grad_case(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_arch(0, 4);
  std::uniform_int_distribution<std::size_t> width(1, 4);
  const std::size_t in = width(rng);
  const int a = pick_arch(rng);
  const Activation hidden_choices[] = {Activation::kTanh, Activation::kRelu, Activation::kSigmoid};
  const Activation hidden = hidden_choices[std::uniform_int_distribution<int>(0, 2)(rng)];
  constexpr double kBig = 1e6;

  if (a == 0) {
    return {"logistic+cross-entropy", Architecture::logistic(in), LossSpec::cross_entropy(1e-12)};
  }
  if (a == 1) {
    const std::size_t k = 2 + width(rng) % 3;
    return {"linear-softmax+cross-entropy", Architecture::linear(in, k), LossSpec::cross_entropy(1e-12)};
  }
  if (a == 2) {
    return {"mlp-sigmoid-out+cross-entropy", Architecture::mlp({in, width(rng), 1}, hidden, Activation::kSigmoid),
            LossSpec::cross_entropy(1e-12)};
  }
  const LossSpec scalar_losses[] = {LossSpec::squared(kBig), LossSpec::hinge(kBig), LossSpec::absolute(kBig),
                                    LossSpec::linear_score(0.5, kBig), LossSpec::rate_sigmoid(8.0, 0.5)};
  const LossSpec loss = scalar_losses[std::uniform_int_distribution<int>(0, 4)(rng)];
  const std::string name(to_string(loss.kind));
  if (a == 3) return {"linear+" + name, Architecture::linear(in, 1), loss};
  return {"mlp+" + name, Architecture::mlp({in, width(rng), width(rng), 1}, hidden), loss};
}

inline double random_label(const GradCase& c, std::mt19937_64& rng) {
  if (c.loss.kind == LossKind::kClampedCrossEntropy) {
    const std::size_t classes = c.arch.output_dim() == 1 ? 2 : c.arch.output_dim();
    return static_cast<double>(std::uniform_int_distribution<std::size_t>(0, classes - 1)(rng));
  }
  if (c.loss.kind == LossKind::kHinge || c.loss.kind == LossKind::kLinearScore) {
    return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
  }
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

}  // namespace duallearn::testing
