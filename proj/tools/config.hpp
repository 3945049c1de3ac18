#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace duallearn::cli {

// Schema violation; the message starts with the offending key path.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LossConfig {
  std::string kind = "clamped-cross-entropy";
  // Derived as -log(p_min) for clamped-cross-entropy.
  double bound = 1.0;
  double p_min = 1e-6;
  double offset = 0.0;
  double shift = 0.5;
  double slope = 8.0;
};

struct CsvConfig {
  std::string path;
  std::string label = "label";
  std::optional<std::string> group;
  std::vector<std::string> features;
};

struct GaussiansConfig {
  std::size_t dim = 2;
  std::vector<std::vector<double>> means = {{-1.0, 0.0}, {1.0, 0.0}};
  double sigma = 1.0;
  std::size_t n = 2000;
  // Defaults to the run seed.
  std::optional<std::uint64_t> seed;
};

struct ConstraintConfig {
  std::string name;
  // "loss", "adversarial" or "group-rate".
  std::string type = "loss";
  LossConfig loss;
  double threshold = 0.0;
  // For group-rate: one group name, or "*" for one constraint per group.
  std::string group = "*";
};

struct Example1Config {
  std::size_t n = 100;
  std::size_t trials = 1000;
};

struct ProblemConfig {
  // "csv" or "two-gaussians".
  std::string source = "two-gaussians";
  CsvConfig csv;
  GaussiansConfig two_gaussians;
  LossConfig objective;
  // Train the objective on attacked samples (adversarial training).
  bool adversarial_objective = false;
  std::vector<ConstraintConfig> constraints;
  Example1Config example1;
};

struct ModelConfig {
  std::string arch = "logistic 2";
  std::uint64_t init_seed = 0;
  // Saved model to start from (train) or evaluate (eval).
  std::optional<std::string> path;
  // Run directory whose trace is evaluated as a randomized solution (eval).
  std::optional<std::string> trace;
};

struct InnerConfig {
  std::size_t epochs = 1;
  std::size_t batch_size = 128;
  std::string optimizer = "adam";
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  bool warm_start = true;
  double target_rho = 0.0;
};

struct DualConfig {
  std::string method = "projected-ascent";
  double step = 1e-2;
  std::size_t iterations = 100;
  bool alternating = false;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t snapshot_stride = 0;
};

struct AttackSection {
  std::string kind = "pgd";
  double epsilon = 0.0;
  std::size_t steps = 5;
  // Defaults to epsilon / 3 when absent.
  std::optional<double> step_size;
  std::size_t restarts = 1;
  std::optional<std::vector<double>> clamp;
  std::size_t eval_steps = 50;
  std::optional<double> eval_step_size;
  std::size_t eval_restarts = 10;
  // Defaults to the run seed.
  std::optional<std::uint64_t> seed;
};

struct SurrogateSection {
  double slope = 8.0;
  double shift = 0.5;
  bool enabled = true;
};

struct BoundsSection {
  double B = 1.0;
  double M = 1.0;
  double nu = 0.0;
  double xi = 0.0;
  double delta = 0.05;
  std::size_t m = 1;
  // "given", "vc" or "rademacher".
  std::string zeta_method = "vc";
  std::vector<double> zetas;
  std::size_t n = 1000;
  double d_vc = 1.0;
  double rademacher = 0.0;
  double observed_mu_l1 = 0.0;
  std::vector<double> thresholds;
};

struct OutputSection {
  std::optional<std::string> dir;
};

struct RunConfig {
  std::uint64_t seed = 0;
  ProblemConfig problem;
  ModelConfig model;
  InnerConfig inner;
  DualConfig dual;
  AttackSection attack;
  SurrogateSection surrogate;
  BoundsSection bounds;
  OutputSection output;
};

// Parses a config tree. Unknown keys and type mismatches raise SchemaError
// naming the key path.
RunConfig parse_config(const nlohmann::json& j);

// Full config with every defaulted value filled in.
nlohmann::json to_json(const RunConfig& cfg);

// Fills seeds left to default with the run seed.
void resolve_seeds(RunConfig& cfg);

// Applies "a.b.c=value" where value is JSON (bare words are taken as strings).
void apply_override(nlohmann::json& tree, const std::string& assignment);

}  // namespace duallearn::cli
