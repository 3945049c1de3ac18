#pragma once

#include <random>
#include <vector>

#include "duallearn/oracle.hpp"

namespace duallearn::testing {

// Small random enumerable problem: 2 to 5 linear candidates on R^2, 1 to 3
// constraints, absolute losses with B = 4, thresholds spread so that some
// instances are infeasible.
inline oracle::EnumerableProblem random_enumerable(std::mt19937_64& rng, std::size_t min_constraints = 1) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> n_cand(2, 5);
  std::uniform_int_distribution<std::size_t> n_con(min_constraints, 3);
  std::uniform_int_distribution<std::size_t> n_samples(1, 8);
  const auto make_set = [&](const char* name) {
    std::vector<Sample> s(n_samples(rng));
    for (auto& x : s) x = {{u(rng), u(rng)}, u(rng)};
    return Dataset(name, std::move(s));
  };
  oracle::EnumerableProblem ep;
  ep.problem.objective_loss = LossSpec::absolute(4.0);
  ep.problem.objective_dataset = make_set("objective");
  const std::size_t m = n_con(rng);
  for (std::size_t i = 0; i < m; ++i) {
    ep.problem.constraints.push_back({.name = "c" + std::to_string(i),
                                      .loss = LossSpec::absolute(4.0),
                                      .threshold = 0.2 + 0.8 * (u(rng) + 1.0) / 2.0,
                                      .dataset = make_set("constraint")});
  }
  const auto arch = Architecture::linear(2, 1, false);
  const std::size_t k = n_cand(rng);
  for (std::size_t j = 0; j < k; ++j) ep.candidates.emplace_back(arch, std::vector<double>{u(rng), u(rng)});
  return ep;
}

}  // namespace duallearn::testing
