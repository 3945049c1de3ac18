#include "duallearn/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "duallearn/error.hpp"
#include "duallearn/lagrangian.hpp"

namespace duallearn::oracle {

double Example1Data::tau_bar() const {
  double s = 0.0;
  for (double t : tau) s += t;
  return s / static_cast<double>(tau.size());
}

Example1Data example1_sample(std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("oracle", "example draw needs N >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> tau_dist(-0.5, 0.5);
  std::uniform_real_distribution<double> alpha_dist(0.0, 0.25);
  std::bernoulli_distribution branch(0.5);
  std::vector<Sample> s0, s1, s2;
  std::vector<double> taus;
  s0.reserve(n);
  s1.reserve(n);
  s2.reserve(n);
  taus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double tau = tau_dist(rng);
    const double alpha = alpha_dist(rng);
    if (branch(rng)) {
      s0.push_back({{tau, -tau}, -1.0});
    } else {
      s0.push_back({{0.0, alpha}, 1.0});
    }
    s1.push_back({{-1.0, tau}, 1.0});
    s2.push_back({{-tau, 1.0}, 1.0});
    taus.push_back(tau);
  }
  return {Dataset("example1/d0", std::move(s0)), Dataset("example1/d1", std::move(s1)),
          Dataset("example1/d2", std::move(s2)), std::move(taus)};
}

double example1_population_objective(std::array<double, 2> theta) {
  // E|tau| = 1/4 for tau ~ U[-1/2, 1/2]; E[alpha] = 1/8 for alpha ~ U[0, 1/4].
  return 0.5 * 0.25 * std::abs(theta[0] - theta[1]) + 0.5 * 0.125 * std::abs(theta[1]);
}

EnumerableProblem example1_problem(const Example1Data& data) {
  constexpr double kOffset = 2.0;
  constexpr double kBound = 4.0;

  std::vector<Sample> folded;
  folded.reserve(data.d0.size());
  for (std::size_t i = 0; i < data.d0.size(); ++i) {
    const Sample& s = data.d0[i];
    folded.push_back({{s.label * s.features[0], s.label * s.features[1]}, 0.0});
  }
  // linear-score computes offset - label * z; label -y turns it into offset + y z.
  const auto negate_labels = [](const Dataset& d) {
    std::vector<Sample> out = d.samples();
    for (Sample& s : out) s.label = -s.label;
    return Dataset(d.name(), std::move(out));
  };

  EnumerableProblem ep;
  ep.problem.objective_loss = LossSpec::absolute(1.0);
  ep.problem.objective_dataset = Dataset("example1/d0-folded", std::move(folded));
  ConstraintSpec c1{.name = "E_d1[y theta'x] <= -1",
                    .loss = LossSpec::linear_score(kOffset, kBound),
                    .threshold = kOffset - 1.0,
                    .dataset = negate_labels(data.d1)};
  ConstraintSpec c2{.name = "E_d2[y theta'x] <= 1",
                    .loss = LossSpec::linear_score(kOffset, kBound),
                    .threshold = kOffset + 1.0,
                    .dataset = negate_labels(data.d2)};
  ep.problem.constraints = {std::move(c1), std::move(c2)};
  const auto arch = Architecture::linear(2, 1, /*bias=*/false);
  ep.candidates = {Model(arch, {1.0, 1.0}), Model(arch, {1.0, 0.0})};
  return ep;
}

EcrmResult ecrm_enumerate(const EnumerableProblem& ep) {
  if (ep.candidates.empty()) throw InputError("oracle", "no candidates to enumerate");
  EcrmResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < ep.candidates.size(); ++j) {
    const LagrangianTerms terms = evaluate_terms(ep.candidates[j], ep.problem);
    const bool ok = std::all_of(terms.slacks.begin(), terms.slacks.end(),
                                [&](double s) { return s <= ep.xi_relax; });
    if (ok && (!best.feasible || terms.objective < best.value)) {
      best.feasible = true;
      best.index = j;
      best.value = terms.objective;
    }
  }
  if (best.feasible) best.theta = ep.candidates[best.index];
  return best;
}

MuGrid MuGrid::standard(std::size_t m, double bound, std::optional<double> xi, std::size_t points) {
  const double upper = xi && *xi > 0.0 ? 2.0 * bound / *xi : 50.0;
  return {std::vector<double>(m, upper), points};
}

DualEnumResult dual_enumerate(const EnumerableProblem& ep, const MuGrid& grid) {
  if (ep.candidates.empty()) throw InputError("oracle", "no candidates to enumerate");
  const std::size_t m = ep.problem.m();
  if (grid.upper.size() != m) throw InputError("oracle", "multiplier grid dimension does not match constraints");
  if (m > 0 && grid.points_per_axis < 2) throw InputError("oracle", "multiplier grid needs at least 2 points per axis");

  std::vector<LagrangianTerms> terms;
  terms.reserve(ep.candidates.size());
  for (const auto& c : ep.candidates) terms.push_back(evaluate_terms(c, ep.problem));

  const auto dual_at = [&](const DualState& mu, std::size_t& arg) {
    double best = terms[0].lagrangian(mu);
    arg = 0;
    for (std::size_t j = 1; j < terms.size(); ++j) {
      const double v = terms[j].lagrangian(mu);
      if (v < best) {
        best = v;
        arg = j;
      }
    }
    return best;
  };

  DualEnumResult result;
  std::vector<std::size_t> idx(m, 0);
  std::vector<double> mu(m, 0.0);
  bool first = true;
  while (true) {
    for (std::size_t i = 0; i < m; ++i) {
      mu[i] = grid.upper[i] * static_cast<double>(idx[i]) / static_cast<double>(grid.points_per_axis - 1);
    }
    std::size_t arg = 0;
    const double d = dual_at(DualState(mu), arg);
    if (first || d > result.D_hat) {
      first = false;
      result.D_hat = d;
      result.mu_star = mu;
      result.theta_dagger = arg;
      result.boundary_max = false;
      for (std::size_t i = 0; i < m; ++i) {
        if (idx[i] + 1 == grid.points_per_axis && grid.upper[i] > 0.0) result.boundary_max = true;
      }
    }
    std::size_t axis = 0;
    while (axis < m && ++idx[axis] == grid.points_per_axis) idx[axis++] = 0;
    if (axis == m) break;
  }
  return result;
}

std::vector<Example1Trial> run_example1_trials(std::size_t n, std::size_t trials, std::uint64_t base_seed,
                                               std::size_t workers) {
  std::vector<Example1Trial> out(trials);
  const auto run_one = [&](std::size_t k) {
    const std::uint64_t seed = base_seed + k;
    const Example1Data data = example1_sample(n, seed);
    const EcrmResult r = ecrm_enumerate(example1_problem(data));
    Example1Trial t{.seed = seed, .n = n, .tau_bar = data.tau_bar(), .feasible = r.feasible};
    if (r.feasible) {
      t.theta_hat = {r.theta->params()[0], r.theta->params()[1]};
      t.population_J = example1_population_objective(t.theta_hat);
    } else {
      t.population_J = std::numeric_limits<double>::infinity();
    }
    out[k] = t;
  };
  workers = std::max<std::size_t>(1, std::min(workers, trials));
  if (workers == 1) {
    for (std::size_t k = 0; k < trials; ++k) run_one(k);
    return out;
  }
  // Static striping keeps every trial's output slot owned by one thread.
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < trials; k += workers) run_one(k);
    });
  }
  for (auto& th : pool) th.join();
  return out;
}

}  // namespace duallearn::oracle
