// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "duallearn/bounds.hpp"
#include "duallearn/data.hpp"
#include "duallearn/lagrangian.hpp"
#include "duallearn/oracle.hpp"
#include "duallearn/primal_dual.hpp"
#include "duallearn/rate.hpp"
#include "duallearn/robust.hpp"
#include "gradcheck.hpp"
#include "random_instances.hpp"
#include "toy_problems.hpp"

#ifndef DUALLEARN_FIXTURE_DIR
#error "DUALLEARN_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace {

using namespace duallearn;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Every projected-ascent run made by the suite, for the ergodic checks.
struct RegisteredRun {
  std::string label;
  TrainTrace trace;
  double eta = 0.0;
  double bound = 0.0;
  // Set for convex toys with a measured strict-feasibility margin.
  std::optional<double> xi;
};
std::vector<RegisteredRun> g_runs;

TrainResult train_registered(const std::string& label, const Problem& problem, const TrainConfig& cfg,
                             const Model& init, bool alternating, std::optional<double> xi = std::nullopt) {
  TrainResult r = alternating ? train_alternating(problem, cfg, init) : train(problem, cfg, init);
  if (cfg.dual_method.method == DualMethod::kProjectedAscent) {
    g_runs.push_back({label, r.trace, cfg.dual_step, problem.loss_bound(), xi});
  }
  return r;
}

// 1. ECRM pathology.
Outcome example1_pathology() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto trials = oracle::run_example1_trials(n, 1000, 1000 * n, 1);
    std::size_t at_eighth = 0;
    for (const auto& t : trials) at_eighth += t.feasible && t.population_J == 1.0 / 8.0;
    ok = ok && at_eighth >= 999;
    detail += fmt("N=%zu: %zu/1000 at J=1/8; ", n, at_eighth);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < 30.0;
  return {ok, detail + fmt("%.2fs (limit 30s)", secs)};
}

// 2. Closed-form population objective.
Outcome closed_form() {
  const double a = oracle::example1_population_objective({1.0, 1.0});
  const double b = oracle::example1_population_objective({1.0, 0.0});
  return {a == 1.0 / 16.0 && b == 1.0 / 8.0, fmt("J([1,1])=%.17g J([1,0])=%.17g", a, b)};
}

// 3. Weak duality and concavity of the enumeration dual.
Outcome weak_duality() {
  std::mt19937_64 rng(2024);
  std::size_t violations = 0;
  std::size_t feasible = 0;
  double min_gap = INFINITY;
  for (int i = 0; i < 500; ++i) {
    const auto ep = testing::random_enumerable(rng);
    const auto p = oracle::ecrm_enumerate(ep);
    const auto d = oracle::dual_enumerate(ep, oracle::MuGrid::standard(ep.problem.m(), ep.problem.loss_bound(),
                                                                        std::nullopt, 41));
    if (!(d.D_hat <= p.value)) ++violations;
    if (p.feasible) {
      ++feasible;
      min_gap = std::min(min_gap, p.value - d.D_hat);
    }
  }

  std::size_t concavity_fail = 0;
  double worst = INFINITY;
  std::uniform_real_distribution<double> mu_dist(0.0, 10.0);
  std::uniform_real_distribution<double> lam_dist(0.0, 1.0);
  for (int block = 0; block < 100; ++block) {
    const auto ep = testing::random_enumerable(rng);
    const InnerSolverConfig solver{.method = EnumerationInnerConfig{ep.candidates}};
    const std::size_t m = ep.problem.m();
    for (int k = 0; k < 100; ++k) {
      std::vector<double> a(m), b(m), mix(m);
      const double lam = lam_dist(rng);
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = mu_dist(rng);
        b[i] = mu_dist(rng);
        mix[i] = lam * a[i] + (1.0 - lam) * b[i];
      }
      const auto d = [&](const std::vector<double>& mu) {
        return dual_function(DualState(mu), ep.problem, solver, ep.candidates[0]).value;
      };
      const double lhs = d(mix);
      const double rhs = lam * d(a) + (1.0 - lam) * d(b);
      worst = std::min(worst, lhs - rhs);
      if (lhs < rhs - 1e-10) ++concavity_fail;
    }
  }
  return {violations == 0 && concavity_fail == 0,
          fmt("weak duality violations %zu/500 (%zu feasible, min P-D %.3g); concavity failures %zu/10000 "
              "(min slack %.3g)",
              violations, feasible, min_gap, concavity_fail, worst)};
}

// 4. Primal-dual training on the convex toy.
Outcome convex_convergence() {
  const auto t0 = Clock::now();
  const auto toy = testing::convex_toy();
  TrainConfig cfg;
  cfg.iterations = 500;
  cfg.dual_step = toy.eta;
  cfg.inner.method = EnumerationInnerConfig{toy.grid};
  const auto r = train_registered("convex toy (prescribed step)", toy.ep.problem, cfg, toy.grid.front(), false, toy.xi);
  const auto& last = r.trace.records.back();
  const double gap = std::abs(last.lagrangian - toy.d_star);
  const double slack = last.slacks[0];
  double worst_upper = -INFINITY;
  for (const auto& rec : r.trace.records) worst_upper = std::max(worst_upper, rec.lagrangian - toy.d_star);
  const double secs = seconds_since(t0);
  const bool ok = gap <= 1e-2 && slack <= 1e-2 && worst_upper <= 1e-9 && secs < 10.0;
  return {ok, fmt("eta=%.4f |L-D*|=%.3g final slack=%.3g max(L-D*)=%.3g D*=%.6f (analytic %.6f) %.2fs", toy.eta,
                  gap, slack, worst_upper, toy.d_star, toy.analytic_optimum, secs)};
}

// Additional convex-toy runs for the ergodic checks.
void convex_runs_for_invariants() {
  const auto toy = testing::convex_toy();
  for (double eta : {0.01, 0.5, 2.0}) {
    TrainConfig cfg;
    cfg.iterations = 300;
    cfg.dual_step = eta;
    cfg.inner.method = EnumerationInnerConfig{toy.grid};
    train_registered(fmt("convex toy eta=%g", eta), toy.ep.problem, cfg, toy.grid.front(), false, toy.xi);
  }
  // Example-1 instance with the enumeration solver.
  const auto ep = oracle::example1_problem(oracle::example1_sample(200, 3));
  TrainConfig cfg;
  cfg.iterations = 200;
  cfg.dual_step = 0.1;
  cfg.inner.method = EnumerationInnerConfig{ep.candidates};
  train_registered("example-1 enumeration", ep.problem, cfg, ep.candidates[0], false);
}

// 5. Ergodic invariants over every projected-ascent run made by the suite.
Outcome ergodic_invariants() {
  std::size_t cs_fail = 0, slack_fail = 0, slack_checked = 0;
  std::string worst;
  double worst_margin = INFINITY;
  for (const auto& run : g_runs) {
    const std::size_t m = run.trace.m();
    if (m == 0) continue;
    const double cs = run.trace.ergodic_complementary_slackness();
    const double floor = complementary_slackness_floor(run.eta, m, run.bound);
    if (!(cs >= floor - 1e-9)) {
      ++cs_fail;
      worst += fmt("[%s cs %.3g < %.3g] ", run.label.c_str(), cs, floor);
    }
    worst_margin = std::min(worst_margin, cs - floor);
    if (run.xi) {
      ++slack_checked;
      const double c = bounds::multiplier_bound(run.bound, *run.xi);
      const double limit = 2.0 * c / (run.eta * static_cast<double>(run.trace.records.size()));
      // The randomized solution's slack is the mean of the iterate slacks.
      const auto ergodic = run.trace.ergodic_slacks();
      for (std::size_t i = 0; i < m; ++i) {
        if (!(ergodic[i] <= limit)) {
          ++slack_fail;
          worst += fmt("[%s ergodic slack %.3g > %.3g] ", run.label.c_str(), ergodic[i], limit);
        }
      }
    }
  }
  return {cs_fail == 0 && slack_fail == 0 && slack_checked > 0,
          fmt("%zu runs: complementary-slackness failures %zu (min margin over floor %.3g); ergodic-slack "
              "failures %zu of %zu convex-toy runs %s",
              g_runs.size(), cs_fail, worst_margin, slack_fail, slack_checked, worst.c_str())};
}

// 6. Robust trade-off on two Gaussians.
struct RobustSetup {
  double epsilon = 0.0;
  double threshold = 0.0;
  std::size_t budget_epochs = 0;
};

Outcome robust_tradeoff() {
  const auto t0 = Clock::now();
  const RobustSetup setup{.epsilon = 0.5, .threshold = 0.72, .budget_epochs = 60};
  const std::vector<std::vector<double>> means = {{-0.8, -0.4}, {0.8, 0.4}};
  const LossSpec loss = LossSpec::cross_entropy(1e-6);
  const auto arch = Architecture::logistic(2);
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset base = data::synth_two_gaussians(2, means, 1.0, 2000, seed);
    const auto attack = robust::AttackConfig::pgd_training(setup.epsilon);
    const GradientInnerConfig inner{.epochs = 1, .batch_size = 128, .optimizer = {.step_size = 0.05}};

    Problem constrained;
    constrained.objective_loss = loss;
    constrained.objective_dataset = base;
    constrained.constraints.push_back(robust::adversarial_constraint(base, loss, setup.threshold, attack));
    TrainConfig cfg;
    cfg.iterations = setup.budget_epochs;
    cfg.dual_step = 0.5;
    cfg.seed = seed;
    cfg.inner.method = inner;
    const auto con = train_registered(fmt("robust constrained seed %llu", static_cast<unsigned long long>(seed)),
                                      constrained, cfg, Model::zeros(arch), true);

    Problem adversarial;
    adversarial.objective_loss = loss;
    adversarial.objective_dataset = base;
    adversarial.objective_transform = std::make_shared<robust::AdversarialTransform>(loss, attack);
    TrainConfig base_cfg = cfg;
    const auto adv = train(adversarial, base_cfg, Model::zeros(arch));

    const auto eval_attack = robust::AttackConfig::pgd_evaluation(setup.epsilon, 1000 + seed);
    const double con_adv = empirical_risk(con.model, loss, robust::perturb_dataset(con.model, loss, base, eval_attack));
    const double con_nom = empirical_risk(con.model, loss, base);
    const double adv_nom = empirical_risk(adv.model, loss, base);
    const double adv_adv = empirical_risk(adv.model, loss, robust::perturb_dataset(adv.model, loss, base, eval_attack));
    const bool win = con_adv <= setup.threshold + 0.05 && con_nom < adv_nom;
    wins += win;
    detail += fmt("[seed %llu: adv %.3f nom %.4f mu %.3f vs baseline adv %.3f nom %.4f %s] ",
                  static_cast<unsigned long long>(seed), con_adv, con_nom, con.dual[0], adv_adv, adv_nom,
                  win ? "ok" : "miss");
  }
  const double secs = seconds_since(t0);
  return {wins >= 4 && secs < 300.0,
          fmt("eps=%.2f c=%.2f: %d/5 seeds; ", setup.epsilon, setup.threshold, wins) + detail +
              fmt("%.1fs (limit 300s)", secs)};
}

// 7. Fairness rate constraints on the COMPAS-style fixture.
double accuracy(const Model& m, const Dataset& d) {
  return 1.0 - empirical_risk(m, LossSpec::zero_one(), d);
}

double positive_rate(const Model& m, const Dataset& d) {
  return empirical_risk(m, LossSpec::rate_indicator(0.5), d);
}

Outcome fairness() {
  const auto t0 = Clock::now();
  const auto loaded = data::load_csv(std::string(DUALLEARN_FIXTURE_DIR) + "/compas_style.csv",
                                     {.label = "two_year_recid", .group = "race"});
  const Dataset& all = loaded.dataset;
  const auto groups = data::group_split(all, loaded.groups);
  const auto arch = Architecture::logistic(all.feature_dim());
  const LossSpec loss = LossSpec::cross_entropy(1e-6);
  const GradientInnerConfig inner{.epochs = 1, .batch_size = 128, .optimizer = {.step_size = 0.02}};
  constexpr std::size_t kIterations = 1000;

  Problem erm;
  erm.objective_loss = loss;
  erm.objective_dataset = all;
  Problem fair = erm;
  for (const auto& [name, part] : groups) {
    fair.constraints.push_back({.name = "rate[" + name + "] <= overall + 0.01",
                                .loss = LossSpec::rate_indicator(0.5),
                                .threshold = 0.01,
                                .dataset = part,
                                .surrogate = SurrogateConfig{.slope = 8.0, .shift = 0.5},
                                .relative_to = all});
  }
  TrainConfig cfg;
  cfg.iterations = kIterations;
  cfg.dual_step = 1e-3;
  cfg.dual_method.method = DualMethod::kProjectedAdam;
  cfg.seed = 7;
  cfg.inner.method = inner;
  const auto baseline = train_alternating(erm, cfg, Model::zeros(arch));
  const auto constrained = train_alternating(fair, cfg, Model::zeros(arch));

  const double base_acc = accuracy(baseline.model, all);
  const double acc = accuracy(constrained.model, all);
  const double overall = positive_rate(constrained.model, all);
  double worst_excess = -INFINITY;
  std::string rates;
  for (const auto& [name, part] : groups) {
    const double r = positive_rate(constrained.model, part);
    worst_excess = std::max(worst_excess, r - overall);
    rates += fmt("%s %.3f (baseline %.3f); ", name.c_str(), r, positive_rate(baseline.model, part));
  }
  const double secs = seconds_since(t0);
  const bool ok = worst_excess <= 0.01 + 0.02 && std::abs(acc - base_acc) <= 0.03 && secs < 120.0;
  return {ok, fmt("accuracy %.4f vs baseline %.4f; overall rate %.3f (baseline %.3f); max group excess %.4f "
                  "(limit 0.03); ",
                  acc, base_acc, overall, positive_rate(baseline.model, all), worst_excess) +
                  rates + fmt("%.1fs (limit 120s)", secs)};
}

// 8. Randomized gradient checks.
Outcome gradient_suite() {
  std::mt19937_64 rng(8);
  int passed = 0;
  double worst = 0.0;
  std::string failures;
  for (int i = 0; i < 100; ++i) {
    // Redraw until the instance sits away from activation and loss kinks.
    while (true) {
      const auto c = testing::random_grad_case(rng);
      const Model model = Model::initialize(c.arch, rng());
      std::vector<double> theta(model.params().begin(), model.params().end());
      if (c.arch.kind() != Architecture::Kind::kMlp) theta = testing::random_vector(theta.size(), rng);
      const Sample s{testing::random_vector(c.arch.input_dim(), rng), testing::random_label(c, rng)};
      const Dataset one("one", {s});
      const auto risk = [&](const std::vector<double>& p) { return eval_loss(c.loss, Model(c.arch, p).predict(s.features), s.label); };
      const auto input_loss = [&](const std::vector<double>& x) {
        return eval_loss(c.loss, Model(c.arch, theta).predict(x), s.label);
      };
      if (testing::near_kink(risk, theta) || testing::near_kink(input_loss, s.features)) continue;

      const Model m(c.arch, theta);
      const std::vector<WeightedLoss> terms = {{1.0, c.loss, one}};
      const auto gp = grad_params(m, terms);
      const auto gx = grad_input(m, c.loss, s);
      const auto fp = testing::central_difference(risk, theta);
      const auto fx = testing::central_difference(input_loss, s.features);
      double err = 0.0;
      for (std::size_t k = 0; k < gp.size(); ++k) err = std::max(err, testing::relative_error(gp[k], fp[k]));
      for (std::size_t k = 0; k < gx.size(); ++k) err = std::max(err, testing::relative_error(gx[k], fx[k]));
      worst = std::max(worst, err);
      if (err <= testing::kFdRelTol) {
        ++passed;
      } else {
        failures += fmt("[%s %s err %.2e] ", c.label.c_str(), c.arch.describe().c_str(), err);
      }
      break;
    }
  }
  return {passed == 100, fmt("%d/100 within %.0e (worst %.2e) ", passed, testing::kFdRelTol, worst) + failures};
}

// 9. Bounds calculators.
Outcome bounds_calculators() {
  std::FILE* f = std::fopen((std::string(DUALLEARN_FIXTURE_DIR) + "/bounds_reference.csv").c_str(), "r");
  if (!f) return {false, "missing bounds_reference.csv"};
  char line[4096];
  if (!std::fgets(line, sizeof line, f)) {
    std::fclose(f);
    return {false, "empty bounds_reference.csv"};
  }
  std::size_t rows = 0, mismatches = 0;
  double worst = 0.0;
  while (std::fgets(line, sizeof line, f)) {
    std::vector<double> r;
    for (char* tok = std::strtok(line, ","); tok; tok = std::strtok(nullptr, ",")) r.push_back(std::strtod(tok, nullptr));
    if (r.size() != 16) continue;
    ++rows;
    const auto n = static_cast<std::size_t>(r[0]);
    const std::vector<double> z = {r[6], r[7], r[8]};
    const double got[] = {bounds::zeta_vc(n, r[1], r[2], r[3]), bounds::zeta_rademacher(n, r[4], r[2], r[3]),
                          bounds::multiplier_bound(r[3], r[5]), bounds::gap_report(z, r[11], r[9], r[10]).gap_estimate};
    for (int k = 0; k < 4; ++k) {
      const double e = std::abs(got[k] - r[12 + k]);
      worst = std::max(worst, e);
      if (!(e <= 1e-10)) ++mismatches;
    }
  }
  std::fclose(f);
  const auto two_row = bounds::empirical_rademacher({{1.0}, {-1.0}}, 1000, 5);
  const auto single = bounds::empirical_rademacher({{0.4, -0.9, 1.3, 0.2, -0.6}}, 100000, 6);
  const bool single_ok = std::abs(single.value) <= 3.0 * single.standard_error;
  return {rows == 50 && mismatches == 0 && two_row.value == 1.0 && single_ok,
          fmt("%zu fixture rows, %zu mismatches (worst abs err %.2e); two-row N=1 estimate %.17g; single-row "
              "estimate %.3g vs 3*stderr %.3g",
              rows, mismatches, worst, two_row.value, single.value, 3.0 * single.standard_error)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion ids on the command line restrict the run.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // Criterion 5 audits the runs made by the others, so it goes last.
  const std::vector<Criterion> order = {
      {1, "example-1 pathology", example1_pathology},
      {2, "closed-form population objective", closed_form},
      {3, "weak duality and dual concavity", weak_duality},
      {4, "primal-dual training on convex toy", convex_convergence},
      {6, "robust trade-off", robust_tradeoff},
      {7, "fairness rate constraints", fairness},
      {8, "gradient suite", gradient_suite},
      {9, "bounds calculators", bounds_calculators},
      {5, "ergodic invariants", [] {
         convex_runs_for_invariants();
         return ergodic_invariants();
       }},
  };
  std::map<int, std::pair<std::string, Outcome>> results;
  for (const auto& c : order) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::fprintf(stderr, "running criterion %d (%s)...\n", c.id, c.name);
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    results[c.id] = {c.name, o};
  }
  int failed = 0;
  for (const auto& [id, r] : results) {
    std::printf("%s criterion %d (%s): %s\n", r.second.pass ? "PASS" : "FAIL", id, r.first.c_str(),
                r.second.detail.c_str());
    failed += !r.second.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
