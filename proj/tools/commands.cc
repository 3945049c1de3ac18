#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "duallearn/bounds.hpp"
#include "duallearn/data.hpp"
#include "duallearn/error.hpp"
#include "duallearn/oracle.hpp"
#include "duallearn/primal_dual.hpp"
#include "duallearn/rate.hpp"
#include "duallearn/robust.hpp"
#include "duallearn/trace_io.hpp"

namespace duallearn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

LossSpec to_loss(const LossConfig& l) {
  LossSpec s{.kind = loss_kind_from_string(l.kind), .bound = l.bound};
  s.clamp_p_min = l.p_min;
  s.score_offset = l.offset;
  s.rate_shift = l.shift;
  s.sigmoid_slope = l.slope;
  s.validate();
  return s;
}

robust::AttackConfig attack_config(const AttackSection& a, std::size_t dim, bool evaluation) {
  robust::AttackConfig c;
  if (evaluation) {
    c.kind = robust::AttackKind::kPgd;
    c.steps = a.eval_steps;
    c.step_size = *a.eval_step_size;
    c.restarts = a.eval_restarts;
  } else {
    c.kind = robust::attack_kind_from_string(a.kind);
    c.steps = a.steps;
    c.step_size = *a.step_size;
    c.restarts = a.restarts;
  }
  c.epsilon = a.epsilon;
  c.seed = a.seed.value_or(0);
  if (a.clamp) c.clamp_box = std::vector<std::pair<double, double>>(dim, {(*a.clamp)[0], (*a.clamp)[1]});
  return c;
}

struct Setup {
  Dataset data;
  std::vector<std::string> group_labels;
  std::map<std::string, Dataset> groups;
  Problem problem;
};

Setup build(const RunConfig& cfg) {
  const ProblemConfig& p = cfg.problem;
  Setup s;
  if (p.source == "csv") {
    data::LoadedData loaded = data::load_csv(fs::path(p.csv.path), {p.csv.label, p.csv.group, p.csv.features});
    s.data = std::move(loaded.dataset);
    s.group_labels = std::move(loaded.groups);
    if (!s.group_labels.empty()) s.groups = data::group_split(s.data, s.group_labels);
  } else {
    const auto& g = p.two_gaussians;
    s.data = data::synth_two_gaussians(g.dim, g.means, g.sigma, g.n, g.seed.value_or(cfg.seed));
  }

  const std::size_t dim = s.data.feature_dim();
  const robust::AttackConfig train_attack = attack_config(cfg.attack, dim, false);
  s.problem.objective_loss = to_loss(p.objective);
  s.problem.objective_dataset = s.data;
  if (p.adversarial_objective) {
    s.problem.objective_transform = std::make_shared<robust::AdversarialTransform>(s.problem.objective_loss, train_attack);
  }

  const SurrogateConfig surrogate{cfg.surrogate.slope, cfg.surrogate.shift, cfg.surrogate.enabled};
  for (const ConstraintConfig& c : p.constraints) {
    if (c.type == "loss") {
      s.problem.constraints.push_back({.name = c.name, .loss = to_loss(c.loss), .threshold = c.threshold, .dataset = s.data});
    } else if (c.type == "adversarial") {
      ConstraintSpec spec = robust::adversarial_constraint(s.data, to_loss(c.loss), c.threshold, train_attack);
      spec.name = c.name;
      s.problem.constraints.push_back(std::move(spec));
    } else {
      if (s.groups.empty()) throw InputError("data", "constraint '" + c.name + "' needs a dataset with a group column");
      const auto add = [&](const std::string& name, const Dataset& group) {
        s.problem.constraints.push_back({.name = name,
                                         .loss = LossSpec::rate_indicator(cfg.surrogate.shift),
                                         .threshold = c.threshold,
                                         .dataset = group,
                                         .surrogate = surrogate,
                                         .transform = nullptr,
                                         .relative_to = s.data});
      };
      if (c.group == "*") {
        for (const auto& [g, ds] : s.groups) add(c.name + "[" + g + "]", ds);
      } else {
        auto it = s.groups.find(c.group);
        if (it == s.groups.end()) throw InputError("data", "no rows for group '" + c.group + "'");
        add(c.name, it->second);
      }
    }
  }
  s.problem.validate();
  return s;
}

bool is_classification(const LossSpec& loss) {
  return loss.kind == LossKind::kClampedCrossEntropy || loss.kind == LossKind::kZeroOne;
}

json metrics(const Model& model, const Setup& s, const RunConfig& cfg) {
  const LossSpec& obj = s.problem.objective_loss;
  json out;
  out["objective_risk"] = empirical_risk(model, obj, s.data);
  if (is_classification(obj)) out["accuracy"] = 1.0 - empirical_risk(model, LossSpec::zero_one(), s.data);

  json cons = json::array();
  for (const ConstraintSpec& c : s.problem.constraints) {
    const double risk = constraint_risk(model, c);
    cons.push_back({{"name", c.name}, {"risk", risk}, {"threshold", c.threshold}, {"slack", risk - c.threshold}});
  }
  out["constraints"] = std::move(cons);

  if (cfg.attack.epsilon > 0.0) {
    const Dataset attacked =
        robust::perturb_dataset(model, obj, s.data, attack_config(cfg.attack, s.data.feature_dim(), true));
    json adv = {{"objective_risk", empirical_risk(model, obj, attacked)}};
    if (is_classification(obj)) adv["accuracy"] = 1.0 - empirical_risk(model, LossSpec::zero_one(), attacked);
    out["adversarial"] = std::move(adv);
  }

  if (!s.groups.empty()) {
    const LossSpec rate = LossSpec::rate_indicator(cfg.surrogate.shift);
    json rates = {{"overall", empirical_risk(model, rate, s.data)}};
    for (const auto& [g, ds] : s.groups) rates[g] = empirical_risk(model, rate, ds);
    out["positive_rates"] = std::move(rates);
  }
  return out;
}

// Mean of same-shaped metric records; non-numeric leaves come from the first.
json average(const std::vector<json>& records) {
  const json& first = records.front();
  if (first.is_number()) {
    double total = 0.0;
    for (const auto& r : records) total += r.get<double>();
    return total / static_cast<double>(records.size());
  }
  if (first.is_object()) {
    json out = json::object();
    for (auto it = first.begin(); it != first.end(); ++it) {
      std::vector<json> column;
      column.reserve(records.size());
      for (const auto& r : records) column.push_back(r.at(it.key()));
      out[it.key()] = average(column);
    }
    return out;
  }
  if (first.is_array()) {
    json out = json::array();
    for (std::size_t i = 0; i < first.size(); ++i) {
      std::vector<json> column;
      column.reserve(records.size());
      for (const auto& r : records) column.push_back(r.at(i));
      out.push_back(average(column));
    }
    return out;
  }
  return first;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cli", "cannot write " + path.string());
  out << text;
  if (!out) throw InputError("cli", "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_jsonl(const fs::path& path, const std::vector<json>& lines) {
  std::string text;
  for (const auto& l : lines) text += l.dump() + "\n";
  write_text(path, text);
}

void prepare(const RunConfig& cfg, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cli", "cannot create run directory " + dir.string() + ": " + ec.message());
  write_json(dir / "config.resolved.json", to_json(cfg));
  write_text(dir / "seed.txt", std::to_string(cfg.seed) + "\n");
}

TrainConfig train_config(const RunConfig& cfg) {
  const InnerConfig& in = cfg.inner;
  GradientInnerConfig g{.epochs = in.epochs,
                        .batch_size = in.batch_size,
                        .optimizer = {.method = optimizer_method_from_string(in.optimizer),
                                      .step_size = in.step_size,
                                      .beta1 = in.beta1,
                                      .beta2 = in.beta2,
                                      .epsilon = in.epsilon},
                        .seed = cfg.seed};
  return TrainConfig{
      .iterations = cfg.dual.iterations,
      .dual_step = cfg.dual.step,
      .dual_method = {.method = cfg.dual.method == "projected-adam" ? DualMethod::kProjectedAdam
                                                                    : DualMethod::kProjectedAscent,
                      .beta1 = cfg.dual.beta1,
                      .beta2 = cfg.dual.beta2,
                      .epsilon = cfg.dual.epsilon},
      .inner = {.method = g, .target_rho = in.target_rho, .warm_start = in.warm_start},
      .seed = cfg.seed,
      .snapshot_stride = cfg.dual.snapshot_stride,
  };
}

json report_json(const bounds::BoundsReport& r) {
  return {{"B", r.B},
          {"M", r.M},
          {"nu", r.nu},
          {"xi", r.xi},
          {"delta", r.delta},
          {"zeta_per_constraint", r.zeta_per_constraint},
          {"zeta_bar", r.zeta_bar},
          {"Delta_cap", r.Delta_cap},
          {"Delta", r.Delta},
          {"gap_estimate", r.gap_estimate},
          {"feasibility_margins", r.feasibility_margins}};
}

}  // namespace

fs::path resolve_run_dir(const std::string& command, const RunConfig& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  if (cfg.output.dir) return *cfg.output.dir;
  const std::string leaf = command + "-" + std::to_string(cfg.seed);
  if (const char* root = std::getenv("DUALLEARN_OUT"); root && *root) return fs::path(root) / leaf;
  return fs::path("runs") / leaf;
}

void run_train(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  const Setup s = build(cfg);
  const Architecture arch = Architecture::parse(cfg.model.arch);
  const Model init = cfg.model.path ? load_model(*cfg.model.path) : Model::initialize(arch, cfg.model.init_seed);
  if (init.arch() != arch) {
    throw InputError("models", "model.path holds a '" + init.arch().describe() + "' model, config says '" +
                                   arch.describe() + "'");
  }
  if (arch.input_dim() != s.problem.feature_dim()) {
    throw InputError("models", "model takes " + std::to_string(arch.input_dim()) + " features, data has " +
                                   std::to_string(s.problem.feature_dim()));
  }

  const TrainConfig tc = train_config(cfg);
  const TrainResult result = cfg.dual.alternating ? train_alternating(s.problem, tc, init) : train(s.problem, tc, init);
  write_trace(result.trace, dir);
  save_model(result.model, (dir / "model.txt").string());

  const TrainRecord& last = result.trace.records.back();
  json summary = {
      {"command", "train"},
      {"iterations", result.trace.records.size()},
      {"m", s.problem.m()},
      {"constraint_names", json::array()},
      {"final_iterate",
       {{"objective", last.objective},
        {"slacks", last.slacks},
        {"mu", last.mu},
        {"lagrangian", last.lagrangian}}},
      {"final_mu", std::vector<double>(result.dual.mu().begin(), result.dual.mu().end())},
      {"ergodic",
       {{"complementary_slackness", result.trace.ergodic_complementary_slackness()},
        {"slacks", result.trace.ergodic_slacks()}}},
      {"complementary_slackness_floor", nullptr},
      {"model", "model.txt"},
      {"metrics", metrics(result.model, s, cfg)},
  };
  for (const auto& c : s.problem.constraints) summary["constraint_names"].push_back(c.name);
  if (cfg.dual.method == "projected-ascent" && s.problem.m() > 0) {
    summary["complementary_slackness_floor"] =
        complementary_slackness_floor(cfg.dual.step, s.problem.m(), s.problem.loss_bound());
  }
  write_json(dir / "summary.json", summary);
}

void run_eval(const RunConfig& cfg, const fs::path& dir) {
  if (!cfg.model.path && !cfg.model.trace) throw ConfigError("cli", "eval needs model.path or model.trace");
  prepare(cfg, dir);
  const Setup s = build(cfg);

  json source;
  std::vector<Model> support;
  if (cfg.model.path) {
    support.push_back(load_model(*cfg.model.path));
    source = {{"kind", "model"}, {"path", *cfg.model.path}};
  } else {
    RandomizedSolution sol = randomized_solution(read_trace(*cfg.model.trace));
    support = std::move(sol.support);
    source = {{"kind", "randomized"}, {"trace", *cfg.model.trace}};
  }
  source["support_size"] = support.size();

  std::vector<json> per_model;
  per_model.reserve(support.size());
  for (std::size_t k = 0; k < support.size(); ++k) {
    json rec = metrics(support[k], s, cfg);
    rec["index"] = k;
    per_model.push_back(std::move(rec));
  }
  write_jsonl(dir / kTraceFileName, per_model);
  json mean = average(per_model);
  mean.erase("index");
  write_json(dir / "summary.json", {{"command", "eval"}, {"source", source}, {"metrics", mean}});
}

void run_example1(const RunConfig& cfg, const fs::path& dir, std::size_t workers) {
  prepare(cfg, dir);
  const auto& e = cfg.problem.example1;
  const auto trials = oracle::run_example1_trials(e.n, e.trials, cfg.seed, workers);

  std::vector<json> lines;
  lines.reserve(trials.size());
  std::size_t eighth = 0, sixteenth = 0, feasible = 0;
  for (const auto& t : trials) {
    lines.push_back({{"seed", t.seed},
                     {"n", t.n},
                     {"tau_bar", t.tau_bar},
                     {"feasible", t.feasible},
                     {"theta_hat", t.feasible ? json(t.theta_hat) : json(nullptr)},
                     {"population_J", t.feasible ? json(t.population_J) : json(nullptr)}});
    if (!t.feasible) continue;
    ++feasible;
    if (t.population_J == 0.125) ++eighth;
    if (t.population_J == 0.0625) ++sixteenth;
  }
  write_jsonl(dir / kTraceFileName, lines);
  const double total = static_cast<double>(trials.size());
  write_json(dir / "summary.json", {{"command", "example1"},
                                    {"n", e.n},
                                    {"trials", e.trials},
                                    {"base_seed", cfg.seed},
                                    {"count_J_eighth", eighth},
                                    {"count_J_sixteenth", sixteenth},
                                    {"count_feasible", feasible},
                                    {"fraction_J_eighth", eighth / total},
                                    {"fraction_J_sixteenth", sixteenth / total},
                                    {"fraction_feasible", feasible / total}});
}

void run_bounds(const RunConfig& cfg, const fs::path& dir) {
  prepare(cfg, dir);
  const BoundsSection& b = cfg.bounds;
  bounds::ReportInputs in{.B = b.B,
                          .M = b.M,
                          .nu = b.nu,
                          .xi = b.xi,
                          .delta = b.delta,
                          .zeta_per_constraint = b.zetas,
                          .observed_mu_l1 = b.observed_mu_l1,
                          .thresholds = b.thresholds};
  if (b.zeta_method == "vc") {
    in.zeta_per_constraint.assign(b.m, bounds::zeta_vc(b.n, b.d_vc, b.delta, b.B));
  } else if (b.zeta_method == "rademacher") {
    in.zeta_per_constraint.assign(b.m, bounds::zeta_rademacher(b.n, b.rademacher, b.delta, b.B));
  }
  const json report = report_json(bounds::make_report(in));
  write_jsonl(dir / kTraceFileName, {report});
  write_json(dir / "summary.json", {{"command", "bounds"}, {"zeta_method", b.zeta_method}, {"report", report}});
}

}  // namespace duallearn::cli
