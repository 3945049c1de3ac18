#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "duallearn/error.hpp"
#include "duallearn/lagrangian.hpp"
#include "duallearn/oracle.hpp"
#include "problem_fixtures.hpp"

namespace duallearn {
namespace {

using testing::identity_problem;

TEST(DualState, RejectsNegativeAndNonFinite) {
  EXPECT_THROW(DualState({-0.1}), InputError);
  EXPECT_THROW(DualState({NAN}), InputError);
  EXPECT_EQ(DualState({1.0, 2.5}).l1_norm(), 3.5);
}

TEST(Lagrangian, ZeroMultipliersGiveObjectiveRisk) {
  const auto [model, problem] = identity_problem({0.2}, {{0.5}}, {0.2});
  EXPECT_EQ(empirical_lagrangian(model, DualState::zeros(1), problem), objective_risk(model, problem));
}

TEST(Lagrangian, Substitution) {
  const auto [model, problem] = identity_problem({0.2}, {{0.5}}, {0.2});
  EXPECT_NEAR(empirical_lagrangian(model, DualState({2.0}), problem), 0.8, 1e-15);
}

TEST(Lagrangian, MatchesIndependentReevaluation) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t m = 1 + rng() % 4;
    std::vector<double> obj_losses(1 + rng() % 10);
    for (double& v : obj_losses) v = u(rng);
    std::vector<std::vector<double>> con_losses(m);
    std::vector<double> c(m), mu(m);
    for (std::size_t i = 0; i < m; ++i) {
      con_losses[i].resize(1 + rng() % 10);
      for (double& v : con_losses[i]) v = u(rng);
      c[i] = u(rng);
      mu[i] = 5.0 * u(rng);
    }
    const auto [model, problem] = identity_problem(obj_losses, con_losses, c);
    // Direct evaluation: mean objective loss + sum mu_i (mean constraint loss - c_i).
    double expect = 0.0;
    for (double v : obj_losses) expect += v;
    expect /= static_cast<double>(obj_losses.size());
    for (std::size_t i = 0; i < m; ++i) {
      double r = 0.0;
      for (double v : con_losses[i]) r += v;
      expect += mu[i] * (r / static_cast<double>(con_losses[i].size()) - c[i]);
    }
    EXPECT_NEAR(empirical_lagrangian(model, DualState(mu), problem), expect, 1e-12);
  }
}

TEST(Lagrangian, AffineInMultipliers) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const auto [model, problem] = identity_problem({0.1, 0.7}, {{0.3, 0.9}, {0.05}, {0.5, 0.5, 0.2}}, {0.4, 0.1, 0.3});
  const double base = empirical_lagrangian(model, DualState::zeros(3), problem);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> a(3), b(3), ab(3);
    const double alpha = u(rng), beta = u(rng);
    for (int i = 0; i < 3; ++i) {
      a[i] = u(rng);
      b[i] = u(rng);
      ab[i] = alpha * a[i] + beta * b[i];
    }
    const double la = empirical_lagrangian(model, DualState(a), problem) - base;
    const double lb = empirical_lagrangian(model, DualState(b), problem) - base;
    const double lab = empirical_lagrangian(model, DualState(ab), problem) - base;
    EXPECT_NEAR(lab, alpha * la + beta * lb, 1e-12);
  }
}

TEST(Lagrangian, ConsistentWithSlacks) {
  const auto [model, problem] = identity_problem({0.3}, {{0.2, 0.6}, {0.9}}, {0.25, 0.5});
  const DualState mu({1.5, 0.25});
  const auto s = slacks(model, problem);
  EXPECT_NEAR(empirical_lagrangian(model, mu, problem), objective_risk(model, problem) + 1.5 * s[0] + 0.25 * s[1],
              1e-12);
}

TEST(Slacks, AtBoundaryIsZero) {
  const auto [model, problem] = identity_problem({0.3}, {{0.25}}, {0.25});
  EXPECT_EQ(slacks(model, problem)[0], 0.0);
}

TEST(Slacks, Substitution) {
  const auto [model, problem] = identity_problem({0.3}, {{0.5}}, {0.2});
  EXPECT_NEAR(slacks(model, problem)[0], 0.3, 1e-15);
}

TEST(Slacks, ZeroOneCountsExactly) {
  // Identity model, threshold 0.5: predictions >= 0.5 are class 1.
  const std::vector<double> x = {0.9, 0.2, 0.6, 0.4, 0.7, 0.1, 0.55, 0.3, 0.8, 0.49};
  const std::vector<double> y = {1, 1, 0, 0, 1, 0, 0, 1, 1, 0};
  // Manual count of mistakes: 0.2->0 vs 1, 0.6->1 vs 0, 0.55->1 vs 0, 0.3->0 vs 1.
  const std::size_t mistakes = 4;
  std::vector<Sample> s;
  for (std::size_t i = 0; i < x.size(); ++i) s.push_back({{x[i]}, y[i]});
  Problem p;
  p.objective_loss = LossSpec::zero_one();
  p.objective_dataset = Dataset("d", s);
  p.constraints.push_back({.name = "err", .loss = LossSpec::zero_one(), .threshold = 0.1, .dataset = Dataset("d", s)});
  const Model id(Architecture::linear(1, 1, false), {1.0});
  EXPECT_EQ(slacks(id, p)[0], static_cast<double>(mistakes) / 10.0 - 0.1);
}

InnerSolverConfig enumerate(std::vector<Model> candidates) {
  return {.method = EnumerationInnerConfig{std::move(candidates)}};
}

TEST(DualFunction, ZeroMultipliersReduceToErm) {
  Problem p;
  p.objective_loss = LossSpec::squared(10.0);
  p.objective_dataset = Dataset("d", {{{1.0}, 1.0}, {{1.0}, 2.0}});
  const auto arch = Architecture::linear(1, 1, false);
  const std::vector<Model> cands = {Model(arch, {0.0}), Model(arch, {1.4})};
  const auto r = dual_function(DualState::zeros(0), p, enumerate(cands), cands[0]);
  EXPECT_EQ(r.candidate_index, 1u);
  EXPECT_EQ(r.minimizer, cands[1]);
  EXPECT_EQ(r.value, objective_risk(cands[1], p));
}

TEST(DualFunction, Example1HandComparison) {
  const auto data = oracle::example1_sample(20, 12);
  const auto ep = oracle::example1_problem(data);
  // Hand evaluation of the Lagrangian on the drawn samples.
  double obj11 = 0.0, obj10 = 0.0, s1_11 = 0.0, s1_10 = 0.0, s2_11 = 0.0, s2_10 = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const Sample& a = data.d0[i];
    obj11 += std::abs(a.label * (a.features[0] + a.features[1]));
    obj10 += std::abs(a.label * a.features[0]);
    s1_11 += data.d1[i].features[0] + data.d1[i].features[1];
    s1_10 += data.d1[i].features[0];
    s2_11 += data.d2[i].features[0] + data.d2[i].features[1];
    s2_10 += data.d2[i].features[0];
  }
  for (double* v : {&obj11, &obj10, &s1_11, &s1_10, &s2_11, &s2_10}) *v /= 20.0;
  for (const std::vector<double>& mu : {std::vector<double>{0.0, 0.0}, {0.5, 0.1}, {3.0, 0.0}, {0.0, 4.0}}) {
    const double l11 = obj11 + mu[0] * (s1_11 + 1.0) + mu[1] * (s2_11 - 1.0);
    const double l10 = obj10 + mu[0] * (s1_10 + 1.0) + mu[1] * (s2_10 - 1.0);
    ASSERT_GT(std::abs(l11 - l10), 1e-9);
    const auto r = dual_function(DualState(mu), ep.problem, enumerate(ep.candidates), ep.candidates[0]);
    EXPECT_EQ(*r.candidate_index, l11 < l10 ? 0u : 1u);
    EXPECT_NEAR(r.value, std::min(l11, l10), 1e-12);
  }
}

TEST(DualFunction, TiesGoToIndexZero) {
  Problem p;
  p.objective_loss = LossSpec::squared(10.0);
  p.objective_dataset = Dataset("d", {{{1.0}, 0.0}});
  const auto arch = Architecture::linear(1, 1, false);
  const std::vector<Model> cands = {Model(arch, {-1.0}), Model(arch, {1.0})};
  const auto r = dual_function(DualState::zeros(0), p, enumerate(cands), cands[1]);
  EXPECT_EQ(r.candidate_index, 0u);
}

TEST(InnerSolver, GradientSolverRejectsIndicatorWithoutSurrogate) {
  Problem p;
  p.objective_loss = LossSpec::squared(10.0);
  p.objective_dataset = Dataset("d", {{{1.0}, 0.0}});
  p.constraints.push_back(
      {.name = "rate", .loss = LossSpec::rate_indicator(0.5), .threshold = 0.5, .dataset = p.objective_dataset});
  EXPECT_THROW(InnerSolver(p, InnerSolverConfig{}), SurrogateRequiredError);
  p.constraints[0].surrogate = SurrogateConfig{};
  EXPECT_NO_THROW(InnerSolver(p, InnerSolverConfig{}));
}

}  // namespace
}  // namespace duallearn
