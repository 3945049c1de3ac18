#include "duallearn/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "duallearn/error.hpp"

namespace duallearn {
namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kIdentity:
      return x;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kRelu:
      return x > 0 ? x : 0.0;
    case Activation::kSigmoid:
      return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  }
  return x;
}

// Derivative expressed through the pre-activation `x` and output `y`.
double activate_derivative(Activation a, double x, double y) {
  switch (a) {
    case Activation::kIdentity:
      return 1.0;
    case Activation::kTanh:
      return 1.0 - y * y;
    case Activation::kRelu:
      return x > 0 ? 1.0 : 0.0;
    case Activation::kSigmoid:
      return y * (1.0 - y);
  }
  return 1.0;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::size_t parse_size(const std::string& s) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("models", "bad integer '" + s + "'");
  return v;
}

// Per-layer activations from a forward pass. activations[0] is the input.
struct ForwardPass {
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> activations;
};

}  // namespace

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kIdentity:
      return "identity";
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "identity";
}

Activation activation_from_string(std::string_view name) {
  for (Activation a : {Activation::kIdentity, Activation::kTanh, Activation::kRelu, Activation::kSigmoid}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("models", "unknown activation '" + std::string(name) + "'");
}

Architecture Architecture::linear(std::size_t inputs, std::size_t outputs, bool bias) {
  if (inputs == 0 || outputs == 0) throw ConfigError("models", "linear layer needs positive dimensions");
  Architecture a;
  a.kind_ = Kind::kLinear;
  a.widths_ = {inputs, outputs};
  a.bias_ = bias;
  return a;
}

Architecture Architecture::logistic(std::size_t inputs) {
  if (inputs == 0) throw ConfigError("models", "logistic model needs a positive input dimension");
  Architecture a;
  a.kind_ = Kind::kLogistic;
  a.widths_ = {inputs, 1};
  a.output_ = Activation::kSigmoid;
  return a;
}

Architecture Architecture::mlp(std::vector<std::size_t> widths, Activation hidden, Activation output) {
  if (widths.size() < 2) throw ConfigError("models", "mlp needs at least input and output widths");
  for (std::size_t w : widths) {
    if (w == 0) throw ConfigError("models", "mlp layer widths must be positive");
  }
  Architecture a;
  a.kind_ = Kind::kMlp;
  a.widths_ = std::move(widths);
  a.hidden_ = hidden;
  a.output_ = output;
  return a;
}

std::size_t Architecture::param_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    n += widths_[l] * widths_[l + 1] + (bias_ ? widths_[l + 1] : 0);
  }
  return n;
}

std::string Architecture::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::kLinear:
      os << "linear " << widths_[0] << ',' << widths_[1] << (bias_ ? " bias" : " nobias");
      break;
    case Kind::kLogistic:
      os << "logistic " << widths_[0];
      break;
    case Kind::kMlp:
      os << "mlp ";
      for (std::size_t i = 0; i < widths_.size(); ++i) os << (i ? "," : "") << widths_[i];
      os << ' ' << to_string(hidden_) << ' ' << to_string(output_);
      break;
  }
  return os.str();
}

Architecture Architecture::parse(std::string_view descriptor) {
  const auto tokens = split(descriptor, ' ');
  const auto bad = [&] { return ParseError("models", "bad architecture descriptor '" + std::string(descriptor) + "'"); };
  if (tokens.empty()) throw bad();
  if (tokens[0] == "linear" && tokens.size() == 3) {
    const auto dims = split(tokens[1], ',');
    if (dims.size() != 2 || (tokens[2] != "bias" && tokens[2] != "nobias")) throw bad();
    return linear(parse_size(dims[0]), parse_size(dims[1]), tokens[2] == "bias");
  }
  if (tokens[0] == "logistic" && tokens.size() == 2) return logistic(parse_size(tokens[1]));
  if (tokens[0] == "mlp" && tokens.size() == 4) {
    std::vector<std::size_t> widths;
    for (const auto& w : split(tokens[1], ',')) widths.push_back(parse_size(w));
    return mlp(std::move(widths), activation_from_string(tokens[2]), activation_from_string(tokens[3]));
  }
  throw bad();
}

Model::Model(Architecture arch, std::vector<double> params) : arch_(std::move(arch)), params_(std::move(params)) {
  if (params_.size() != arch_.param_count()) {
    throw InputError("models", "architecture '" + arch_.describe() + "' needs " +
                                   std::to_string(arch_.param_count()) + " parameters, got " +
                                   std::to_string(params_.size()));
  }
  for (double v : params_) {
    if (!std::isfinite(v)) throw InputError("models", "model parameters must be finite");
  }
}

Model Model::zeros(const Architecture& arch) { return Model(arch, std::vector<double>(arch.param_count(), 0.0)); }

Model Model::initialize(const Architecture& arch, std::uint64_t seed) {
  if (arch.kind() != Architecture::Kind::kMlp) return zeros(arch);
  std::vector<double> params;
  params.reserve(arch.param_count());
  std::mt19937_64 rng(seed);
  const auto& w = arch.widths();
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w[l] + w[l + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (std::size_t i = 0; i < w[l] * w[l + 1]; ++i) params.push_back(dist(rng));
    if (arch.has_bias()) params.insert(params.end(), w[l + 1], 0.0);
  }
  return Model(arch, std::move(params));
}

namespace {

ForwardPass forward(const Architecture& arch, std::span<const double> params, std::span<const double> x) {
  if (x.size() != arch.input_dim()) {
    throw InputError("models", "model expects " + std::to_string(arch.input_dim()) + " features, got " +
                                   std::to_string(x.size()));
  }
  const auto& w = arch.widths();
  ForwardPass fp;
  fp.activations.emplace_back(x.begin(), x.end());
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::size_t in = w[l];
    const std::size_t out = w[l + 1];
    const Activation act = l + 2 == w.size() ? arch.output_activation() : arch.hidden_activation();
    const std::vector<double>& a = fp.activations.back();
    std::vector<double> z(out, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      double acc = 0.0;
      const double* row = params.data() + offset + r * in;
      for (std::size_t c = 0; c < in; ++c) acc += row[c] * a[c];
      z[r] = acc;
    }
    offset += in * out;
    if (arch.has_bias()) {
      for (std::size_t r = 0; r < out; ++r) z[r] += params[offset + r];
      offset += out;
    }
    std::vector<double> y(out);
    for (std::size_t r = 0; r < out; ++r) y[r] = activate(act, z[r]);
    fp.pre.push_back(std::move(z));
    fp.activations.push_back(std::move(y));
  }
  return fp;
}

}  // namespace

std::vector<double> Model::predict(std::span<const double> features) const {
  return std::move(forward(arch_, params_, features).activations.back());
}

double Model::accumulate_gradient(const LossSpec& loss, const Sample& sample, double scale,
                                  std::span<double> grad_params, std::span<double> grad_input) const {
  if (!grad_params.empty() && grad_params.size() != params_.size()) {
    throw InputError("models", "parameter gradient buffer has wrong size");
  }
  if (!grad_input.empty() && grad_input.size() != arch_.input_dim()) {
    throw InputError("models", "input gradient buffer has wrong size");
  }
  ForwardPass fp = forward(arch_, params_, sample.features);
  const std::vector<double>& out = fp.activations.back();
  std::vector<double> delta(out.size());
  const double value = loss_and_gradient(loss, out, sample.label, delta);

  const auto& w = arch_.widths();
  const std::size_t layers = w.size() - 1;
  // Walk layers backwards; `offset` points at the start of layer l's block.
  std::size_t offset = params_.size();
  for (std::size_t l = layers; l-- > 0;) {
    const std::size_t in = w[l];
    const std::size_t out_w = w[l + 1];
    const Activation act = l + 1 == layers ? arch_.output_activation() : arch_.hidden_activation();
    for (std::size_t r = 0; r < out_w; ++r) delta[r] *= activate_derivative(act, fp.pre[l][r], fp.activations[l + 1][r]);

    const std::size_t block = in * out_w + (arch_.has_bias() ? out_w : 0);
    offset -= block;
    const std::vector<double>& a = fp.activations[l];
    if (!grad_params.empty()) {
      for (std::size_t r = 0; r < out_w; ++r) {
        const double d = scale * delta[r];
        if (d == 0.0) continue;
        double* row = grad_params.data() + offset + r * in;
        for (std::size_t c = 0; c < in; ++c) row[c] += d * a[c];
        if (arch_.has_bias()) grad_params[offset + in * out_w + r] += d;
      }
    }
    if (l == 0 && grad_input.empty()) break;
    std::vector<double> back(in, 0.0);
    for (std::size_t r = 0; r < out_w; ++r) {
      if (delta[r] == 0.0) continue;
      const double* row = params_.data() + offset + r * in;
      for (std::size_t c = 0; c < in; ++c) back[c] += row[c] * delta[r];
    }
    delta = std::move(back);
  }
  if (!grad_input.empty()) {
    for (std::size_t c = 0; c < grad_input.size(); ++c) grad_input[c] += scale * delta[c];
  }
  return value;
}

std::vector<double> grad_params(const Model& model, std::span<const WeightedLoss> terms) {
  std::vector<double> grad(model.params().size(), 0.0);
  for (const WeightedLoss& term : terms) {
    if (!std::isfinite(term.weight)) throw InputError("models", "gradient weights must be finite");
    if (!term.loss.differentiable()) {
      throw SurrogateRequiredError("models", std::string(to_string(term.loss.kind)) +
                                                 " loss has no gradient; substitute a smooth surrogate");
    }
    if (term.batch.empty()) throw InputError("models", "gradient batch is empty");
    if (term.weight == 0.0) continue;
    const double scale = term.weight / static_cast<double>(term.batch.size());
    for (std::size_t i = 0; i < term.batch.size(); ++i) {
      model.accumulate_gradient(term.loss, term.batch[i], scale, grad);
    }
  }
  return grad;
}

std::vector<double> grad_input(const Model& model, const LossSpec& loss, const Sample& sample) {
  std::vector<double> grad(model.arch().input_dim(), 0.0);
  model.accumulate_gradient(loss, sample, 1.0, {}, grad);
  return grad;
}

void save_model(const Model& model, std::ostream& out) {
  out << "duallearn-model 1\n";
  out << "arch " << model.arch().describe() << '\n';
  out << "params " << model.params().size() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (double v : model.params()) out << v << '\n';
}

Model load_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "duallearn-model 1") {
    throw ParseError("models", "missing 'duallearn-model 1' header");
  }
  if (!std::getline(in, line) || line.rfind("arch ", 0) != 0) throw ParseError("models", "missing arch line");
  Architecture arch = Architecture::parse(std::string_view(line).substr(5));
  if (!std::getline(in, line) || line.rfind("params ", 0) != 0) throw ParseError("models", "missing params line");
  const std::size_t count = parse_size(line.substr(7));
  std::vector<double> params;
  params.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw ParseError("models", "model file ends after " + std::to_string(i) + " parameters");
    double v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw ParseError("models", "bad parameter on line " + std::to_string(i + 4) + ": '" + line + "'");
    }
    params.push_back(v);
  }
  return Model(std::move(arch), std::move(params));
}

void save_model(const Model& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("models", "cannot write " + path);
  save_model(model, out);
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("models", "cannot open " + path);
  return load_model(in);
}

}  // namespace duallearn
