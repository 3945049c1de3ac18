#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "duallearn/dataset.hpp"
#include "duallearn/loss.hpp"

namespace duallearn {

enum class Activation { kIdentity, kTanh, kRelu, kSigmoid };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

// Layered architecture descriptor. Linear and logistic models are single
// layers; an mlp stacks affine layers with a hidden activation and applies
// `output_activation` to the last one.
class Architecture {
 public:
  enum class Kind { kLinear, kLogistic, kMlp };

  static Architecture linear(std::size_t inputs, std::size_t outputs, bool bias = true);
  static Architecture logistic(std::size_t inputs);
  // `widths` = {input, hidden..., output}; at least two entries.
  static Architecture mlp(std::vector<std::size_t> widths, Activation hidden = Activation::kTanh,
                          Activation output = Activation::kIdentity);

  Kind kind() const noexcept { return kind_; }
  std::size_t input_dim() const noexcept { return widths_.front(); }
  std::size_t output_dim() const noexcept { return widths_.back(); }
  std::size_t layer_count() const noexcept { return widths_.size() - 1; }
  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  Activation hidden_activation() const noexcept { return hidden_; }
  Activation output_activation() const noexcept { return output_; }
  bool has_bias() const noexcept { return bias_; }
  std::size_t param_count() const noexcept;

  // One-line descriptor, e.g. "mlp 2,16,1 tanh sigmoid" or "linear 3,1 nobias".
  std::string describe() const;
  static Architecture parse(std::string_view descriptor);

  friend bool operator==(const Architecture&, const Architecture&) = default;

 private:
  Kind kind_ = Kind::kLinear;
  std::vector<std::size_t> widths_{1, 1};
  Activation hidden_ = Activation::kIdentity;
  Activation output_ = Activation::kIdentity;
  bool bias_ = true;
};

// Parameter vector theta plus its architecture. Layer l stores its weight
// matrix row-major (outputs x inputs) followed by its bias.
class Model {
 public:
  // Throws InputError when the parameter count is wrong or a value is not finite.
  Model(Architecture arch, std::vector<double> params);

  static Model zeros(const Architecture& arch);
  // Linear and logistic models start at zero; mlp weights are Glorot-uniform
  // from `seed`, biases zero.
  static Model initialize(const Architecture& arch, std::uint64_t seed);

  const Architecture& arch() const noexcept { return arch_; }
  std::span<const double> params() const noexcept { return params_; }
  std::span<double> mutable_params() noexcept { return params_; }

  std::vector<double> predict(std::span<const double> features) const;

  // Adds scale * d loss / d theta into `grad_params` (may be empty to skip)
  // and, when `grad_input` is non-empty, adds scale * d loss / d x into it.
  // Returns the loss value at this sample.
  double accumulate_gradient(const LossSpec& loss, const Sample& sample, double scale,
                             std::span<double> grad_params, std::span<double> grad_input = {}) const;

  friend bool operator==(const Model&, const Model&) = default;

 private:
  Architecture arch_;
  std::vector<double> params_;
};

struct WeightedLoss {
  double weight = 1.0;
  LossSpec loss;
  Dataset batch;
};

// Gradient of sum_j weight_j * empirical_risk(model, loss_j, batch_j).
std::vector<double> grad_params(const Model& model, std::span<const WeightedLoss> terms);

// Gradient of eval_loss(loss, predict(model, x), y) with respect to x.
std::vector<double> grad_input(const Model& model, const LossSpec& loss, const Sample& sample);

// Text format: a "duallearn-model 1" line, an "arch <descriptor>" line, a
// "params <count>" line, then one parameter per line.
void save_model(const Model& model, std::ostream& out);
Model load_model(std::istream& in);
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

}  // namespace duallearn
