#include "config.hpp"

#include <cmath>
#include <concepts>
#include <limits>
#include <set>

namespace duallearn::cli {
namespace {

using nlohmann::json;

std::string type_name(const json& j) {
  if (j.is_number_unsigned() || j.is_number_integer()) return "integer";
  return j.type_name();
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw SchemaError(path + ": " + msg); }

void convert(const json& j, const std::string& path, double& out) {
  if (!j.is_number()) fail(path, "expected a number, got " + type_name(j));
  out = j.get<double>();
  if (!std::isfinite(out)) fail(path, "must be finite");
}

template <std::unsigned_integral T>
  requires(!std::same_as<T, bool>)
void convert(const json& j, const std::string& path, T& out) {
  if (j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0)) {
    const auto v = j.get<std::uint64_t>();
    if (v > std::numeric_limits<T>::max()) fail(path, "out of range");
    out = static_cast<T>(v);
    return;
  }
  if (j.is_number_integer()) fail(path, "must be nonnegative");
  fail(path, "expected an integer, got " + type_name(j));
}

void convert(const json& j, const std::string& path, bool& out) {
  if (!j.is_boolean()) fail(path, "expected a boolean, got " + type_name(j));
  out = j.get<bool>();
}

void convert(const json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) fail(path, "expected a string, got " + type_name(j));
  out = j.get<std::string>();
}

template <class T>
void convert(const json& j, const std::string& path, std::vector<T>& out) {
  if (!j.is_array()) fail(path, "expected an array, got " + type_name(j));
  out.clear();
  out.resize(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) convert(j[i], path + "[" + std::to_string(i) + "]", out[i]);
}

template <class T>
void convert(const json& j, const std::string& path, std::optional<T>& out) {
  if (j.is_null()) {
    out.reset();
    return;
  }
  T v{};
  convert(j, path, v);
  out = std::move(v);
}

// An object in the config tree. Every key must be consumed by a read() before
// finish(), which rejects the rest.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "(root)" : path_, "expected an object, got " + type_name(j_));
  }

  std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) convert(*it, key_path(key), out);
  }

  // Absent or null yields an empty object.
  Node child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return Node(empty(), key_path(key));
    return Node(*it, key_path(key));
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void reject(const std::string& key, const std::string& why) const {
    if (has(key)) fail(key_path(key), why);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(key_path(it.key()), "unknown key");
    }
  }

 private:
  static const json& empty() {
    static const json e = json::object();
    return e;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void one_of(const std::string& path, const std::string& value, std::initializer_list<const char*> allowed) {
  std::string list;
  for (const char* a : allowed) {
    if (value == a) return;
    if (!list.empty()) list += ", ";
    list += a;
  }
  fail(path, "'" + value + "' is not one of " + list);
}

void positive(const std::string& path, double v) {
  if (!(v > 0.0)) fail(path, "must be positive");
}

void at_least_one(const std::string& path, std::size_t v) {
  if (v < 1) fail(path, "must be at least 1");
}

const std::initializer_list<const char*> kLossKinds = {
    "zero-one", "clamped-cross-entropy", "squared",        "hinge",
    "absolute", "linear-score",          "rate-indicator", "rate-sigmoid"};

LossConfig parse_loss(Node n) {
  LossConfig l;
  n.read("kind", l.kind);
  one_of(n.key_path("kind"), l.kind, kLossKinds);
  n.read("p_min", l.p_min);
  n.read("offset", l.offset);
  n.read("shift", l.shift);
  n.read("slope", l.slope);
  if (l.kind == "clamped-cross-entropy") {
    if (!(l.p_min > 0.0 && l.p_min < 0.5)) fail(n.key_path("p_min"), "must lie in (0, 1/2)");
    l.bound = -std::log(l.p_min);
    if (n.has("bound")) {
      double given = 0.0;
      n.read("bound", given);
      if (std::abs(given - l.bound) > 1e-12 * l.bound) fail(n.key_path("bound"), "is -log(p_min) for this loss");
    }
  } else {
    n.read("bound", l.bound);
    positive(n.key_path("bound"), l.bound);
  }
  if (l.kind == "rate-sigmoid" && !(l.slope >= 1.0)) fail(n.key_path("slope"), "must be at least 1");
  n.finish();
  return l;
}

ConstraintConfig parse_constraint(Node n, std::size_t index) {
  ConstraintConfig c;
  n.read("type", c.type);
  one_of(n.key_path("type"), c.type, {"loss", "adversarial", "group-rate"});
  n.read("threshold", c.threshold);
  if (!n.has("threshold")) fail(n.key_path("threshold"), "is required");
  if (c.type == "group-rate") {
    n.reject("loss", "group-rate constraints use the indicator of the surrogate shift");
    n.read("group", c.group);
    if (c.group.empty()) fail(n.key_path("group"), "must not be empty");
    c.name = c.group == "*" ? "rate" : "rate[" + c.group + "]";
  } else {
    n.reject("group", "only group-rate constraints take a group");
    c.loss = parse_loss(n.child("loss"));
    c.name = "c" + std::to_string(index);
  }
  n.read("name", c.name);
  n.finish();
  return c;
}

ProblemConfig parse_problem(Node n) {
  ProblemConfig p;
  n.read("source", p.source);
  one_of(n.key_path("source"), p.source, {"csv", "two-gaussians"});
  {
    Node c = n.child("csv");
    c.read("path", p.csv.path);
    c.read("label", p.csv.label);
    c.read("group", p.csv.group);
    c.read("features", p.csv.features);
    if (p.source == "csv" && p.csv.path.empty()) fail(c.key_path("path"), "is required for source csv");
    c.finish();
  }
  {
    Node g = n.child("two_gaussians");
    auto& t = p.two_gaussians;
    g.read("dim", t.dim);
    g.read("means", t.means);
    g.read("sigma", t.sigma);
    g.read("n", t.n);
    g.read("seed", t.seed);
    at_least_one(g.key_path("dim"), t.dim);
    if (t.means.size() != 2) fail(g.key_path("means"), "needs exactly two class means");
    for (std::size_t i = 0; i < 2; ++i) {
      if (t.means[i].size() != t.dim) {
        fail(g.key_path("means") + "[" + std::to_string(i) + "]", "length differs from dim");
      }
    }
    positive(g.key_path("sigma"), t.sigma);
    at_least_one(g.key_path("n"), t.n);
    g.finish();
  }
  p.objective = parse_loss(n.child("objective"));
  n.read("adversarial_objective", p.adversarial_objective);
  if (const json* cs = n.raw("constraints")) {
    const std::string path = n.key_path("constraints");
    if (!cs->is_array()) fail(path, "expected an array, got " + type_name(*cs));
    for (std::size_t i = 0; i < cs->size(); ++i) {
      p.constraints.push_back(parse_constraint(Node((*cs)[i], path + "[" + std::to_string(i) + "]"), i));
    }
  }
  {
    Node e = n.child("example1");
    e.read("n", p.example1.n);
    e.read("trials", p.example1.trials);
    at_least_one(e.key_path("n"), p.example1.n);
    at_least_one(e.key_path("trials"), p.example1.trials);
    e.finish();
  }
  n.finish();
  return p;
}

ModelConfig parse_model(Node n) {
  ModelConfig m;
  n.read("arch", m.arch);
  n.read("init_seed", m.init_seed);
  n.read("path", m.path);
  n.read("trace", m.trace);
  if (m.path && m.trace) fail(n.key_path("trace"), "model.path and model.trace are exclusive");
  n.finish();
  return m;
}

InnerConfig parse_inner(Node n) {
  InnerConfig c;
  n.read("epochs", c.epochs);
  n.read("batch_size", c.batch_size);
  n.read("optimizer", c.optimizer);
  n.read("step_size", c.step_size);
  n.read("beta1", c.beta1);
  n.read("beta2", c.beta2);
  n.read("epsilon", c.epsilon);
  n.read("warm_start", c.warm_start);
  n.read("target_rho", c.target_rho);
  at_least_one(n.key_path("epochs"), c.epochs);
  one_of(n.key_path("optimizer"), c.optimizer, {"sgd", "adam"});
  positive(n.key_path("step_size"), c.step_size);
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0)) fail(n.key_path("beta1"), "must lie in [0, 1)");
  if (!(c.beta2 >= 0.0 && c.beta2 < 1.0)) fail(n.key_path("beta2"), "must lie in [0, 1)");
  positive(n.key_path("epsilon"), c.epsilon);
  if (!(c.target_rho >= 0.0)) fail(n.key_path("target_rho"), "must be nonnegative");
  n.finish();
  return c;
}

DualConfig parse_dual(Node n) {
  DualConfig d;
  n.read("method", d.method);
  n.read("step", d.step);
  n.read("iterations", d.iterations);
  n.read("alternating", d.alternating);
  n.read("beta1", d.beta1);
  n.read("beta2", d.beta2);
  n.read("epsilon", d.epsilon);
  n.read("snapshot_stride", d.snapshot_stride);
  one_of(n.key_path("method"), d.method, {"projected-ascent", "projected-adam"});
  positive(n.key_path("step"), d.step);
  at_least_one(n.key_path("iterations"), d.iterations);
  if (!(d.beta1 >= 0.0 && d.beta1 < 1.0)) fail(n.key_path("beta1"), "must lie in [0, 1)");
  if (!(d.beta2 >= 0.0 && d.beta2 < 1.0)) fail(n.key_path("beta2"), "must lie in [0, 1)");
  positive(n.key_path("epsilon"), d.epsilon);
  n.finish();
  return d;
}

AttackSection parse_attack(Node n) {
  AttackSection a;
  n.read("kind", a.kind);
  n.read("epsilon", a.epsilon);
  n.read("steps", a.steps);
  n.read("step_size", a.step_size);
  n.read("restarts", a.restarts);
  n.read("clamp", a.clamp);
  n.read("eval_steps", a.eval_steps);
  n.read("eval_step_size", a.eval_step_size);
  n.read("eval_restarts", a.eval_restarts);
  n.read("seed", a.seed);
  one_of(n.key_path("kind"), a.kind, {"fgsm", "pgd"});
  if (!(a.epsilon >= 0.0)) fail(n.key_path("epsilon"), "must be nonnegative");
  at_least_one(n.key_path("steps"), a.steps);
  at_least_one(n.key_path("restarts"), a.restarts);
  at_least_one(n.key_path("eval_steps"), a.eval_steps);
  at_least_one(n.key_path("eval_restarts"), a.eval_restarts);
  if (a.step_size) positive(n.key_path("step_size"), *a.step_size);
  if (a.eval_step_size) positive(n.key_path("eval_step_size"), *a.eval_step_size);
  if (a.clamp && (a.clamp->size() != 2 || !((*a.clamp)[0] < (*a.clamp)[1]))) {
    fail(n.key_path("clamp"), "expected [lo, hi] with lo < hi");
  }
  if (a.kind == "fgsm") {
    if (n.has("steps") && a.steps != 1) fail(n.key_path("steps"), "fgsm takes exactly one step");
    a.steps = 1;
    if (a.step_size && *a.step_size != a.epsilon) fail(n.key_path("step_size"), "fgsm steps by epsilon");
  }
  if (!a.step_size) a.step_size = a.kind == "fgsm" ? a.epsilon : a.epsilon / 3.0;
  if (!a.eval_step_size) a.eval_step_size = a.epsilon / 30.0;
  n.finish();
  return a;
}

SurrogateSection parse_surrogate(Node n) {
  SurrogateSection s;
  n.read("slope", s.slope);
  n.read("shift", s.shift);
  n.read("enabled", s.enabled);
  if (!(s.slope >= 1.0)) fail(n.key_path("slope"), "must be at least 1");
  n.finish();
  return s;
}

BoundsSection parse_bounds(Node n) {
  BoundsSection b;
  n.read("B", b.B);
  n.read("M", b.M);
  n.read("nu", b.nu);
  n.read("xi", b.xi);
  n.read("delta", b.delta);
  n.read("m", b.m);
  n.read("zeta_method", b.zeta_method);
  n.read("zetas", b.zetas);
  n.read("n", b.n);
  n.read("d_vc", b.d_vc);
  n.read("rademacher", b.rademacher);
  n.read("observed_mu_l1", b.observed_mu_l1);
  n.read("thresholds", b.thresholds);
  positive(n.key_path("B"), b.B);
  if (!(b.M >= 0.0)) fail(n.key_path("M"), "must be nonnegative");
  if (!(b.nu >= 0.0)) fail(n.key_path("nu"), "must be nonnegative");
  if (!(b.xi >= 0.0)) fail(n.key_path("xi"), "must be nonnegative (0 means unknown)");
  if (!(b.delta > 0.0 && b.delta < 1.0)) fail(n.key_path("delta"), "must lie in (0, 1)");
  one_of(n.key_path("zeta_method"), b.zeta_method, {"given", "vc", "rademacher"});
  if (b.zeta_method == "given") {
    if (b.zetas.empty()) fail(n.key_path("zetas"), "is required when zeta_method is given");
    if (n.has("m") && b.m != b.zetas.size()) fail(n.key_path("m"), "differs from the number of zetas");
    b.m = b.zetas.size();
  } else {
    n.reject("zetas", "only used when zeta_method is given");
    at_least_one(n.key_path("m"), b.m);
    at_least_one(n.key_path("n"), b.n);
  }
  if (!b.thresholds.empty() && b.thresholds.size() != b.m) {
    fail(n.key_path("thresholds"), "needs one entry per constraint");
  }
  if (!(b.observed_mu_l1 >= 0.0)) fail(n.key_path("observed_mu_l1"), "must be nonnegative");
  n.finish();
  return b;
}

json loss_json(const LossConfig& l) {
  return {{"kind", l.kind},     {"bound", l.bound}, {"p_min", l.p_min},
          {"offset", l.offset}, {"shift", l.shift}, {"slope", l.slope}};
}

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

RunConfig parse_config(const json& j) {
  Node root(j, "");
  RunConfig cfg;
  root.read("seed", cfg.seed);
  cfg.problem = parse_problem(root.child("problem"));
  cfg.model = parse_model(root.child("model"));
  cfg.inner = parse_inner(root.child("inner"));
  cfg.dual = parse_dual(root.child("dual"));
  cfg.attack = parse_attack(root.child("attack"));
  cfg.surrogate = parse_surrogate(root.child("surrogate"));
  cfg.bounds = parse_bounds(root.child("bounds"));
  {
    Node o = root.child("output");
    o.read("dir", cfg.output.dir);
    o.finish();
  }
  root.finish();
  return cfg;
}

void resolve_seeds(RunConfig& cfg) {
  if (!cfg.problem.two_gaussians.seed) cfg.problem.two_gaussians.seed = cfg.seed;
  if (!cfg.attack.seed) cfg.attack.seed = cfg.seed;
}

json to_json(const RunConfig& cfg) {
  const auto& p = cfg.problem;
  json constraints = json::array();
  for (const auto& c : p.constraints) {
    json e = {{"name", c.name}, {"type", c.type}, {"threshold", c.threshold}};
    if (c.type == "group-rate") {
      e["group"] = c.group;
    } else {
      e["loss"] = loss_json(c.loss);
    }
    constraints.push_back(std::move(e));
  }
  json problem = {
      {"source", p.source},
      {"csv", {{"path", p.csv.path}, {"label", p.csv.label}, {"group", opt(p.csv.group)}, {"features", p.csv.features}}},
      {"two_gaussians",
       {{"dim", p.two_gaussians.dim},
        {"means", p.two_gaussians.means},
        {"sigma", p.two_gaussians.sigma},
        {"n", p.two_gaussians.n},
        {"seed", opt(p.two_gaussians.seed)}}},
      {"objective", loss_json(p.objective)},
      {"adversarial_objective", p.adversarial_objective},
      {"constraints", std::move(constraints)},
      {"example1", {{"n", p.example1.n}, {"trials", p.example1.trials}}},
  };
  const auto& a = cfg.attack;
  const auto& b = cfg.bounds;
  json bounds = {{"B", b.B},
                 {"M", b.M},
                 {"nu", b.nu},
                 {"xi", b.xi},
                 {"delta", b.delta},
                 {"m", b.m},
                 {"zeta_method", b.zeta_method},
                 {"n", b.n},
                 {"d_vc", b.d_vc},
                 {"rademacher", b.rademacher},
                 {"observed_mu_l1", b.observed_mu_l1},
                 {"thresholds", b.thresholds}};
  if (b.zeta_method == "given") bounds["zetas"] = b.zetas;
  return {
      {"seed", cfg.seed},
      {"problem", std::move(problem)},
      {"model",
       {{"arch", cfg.model.arch},
        {"init_seed", cfg.model.init_seed},
        {"path", opt(cfg.model.path)},
        {"trace", opt(cfg.model.trace)}}},
      {"inner",
       {{"epochs", cfg.inner.epochs},
        {"batch_size", cfg.inner.batch_size},
        {"optimizer", cfg.inner.optimizer},
        {"step_size", cfg.inner.step_size},
        {"beta1", cfg.inner.beta1},
        {"beta2", cfg.inner.beta2},
        {"epsilon", cfg.inner.epsilon},
        {"warm_start", cfg.inner.warm_start},
        {"target_rho", cfg.inner.target_rho}}},
      {"dual",
       {{"method", cfg.dual.method},
        {"step", cfg.dual.step},
        {"iterations", cfg.dual.iterations},
        {"alternating", cfg.dual.alternating},
        {"beta1", cfg.dual.beta1},
        {"beta2", cfg.dual.beta2},
        {"epsilon", cfg.dual.epsilon},
        {"snapshot_stride", cfg.dual.snapshot_stride}}},
      {"attack",
       {{"kind", a.kind},
        {"epsilon", a.epsilon},
        {"steps", a.steps},
        {"step_size", opt(a.step_size)},
        {"restarts", a.restarts},
        {"clamp", opt(a.clamp)},
        {"eval_steps", a.eval_steps},
        {"eval_step_size", opt(a.eval_step_size)},
        {"eval_restarts", a.eval_restarts},
        {"seed", opt(a.seed)}}},
      {"surrogate", {{"slope", cfg.surrogate.slope}, {"shift", cfg.surrogate.shift}, {"enabled", cfg.surrogate.enabled}}},
      {"bounds", std::move(bounds)},
      {"output", {{"dir", opt(cfg.output.dir)}}},
  };
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw SchemaError(assignment + ": expected key.path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw SchemaError(path + ": empty key segment");
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw SchemaError(path.substr(0, start ? start - 1 : 0) + ": not an object");
    if (dot == std::string::npos) {
      (*node)[key] = std::move(value);
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

}  // namespace duallearn::cli
