// Copyright 2026 The disprod Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "disprod/autodiff/gradient.hpp"
#include "disprod/envs/catalog.hpp"
#include "disprod/errors.hpp"
#include "disprod/optimizer/planner.hpp"
#include "test_util.hpp"

namespace {

using namespace disprod;
using envs::Rng;
using opt::PlannerConfig;
using opt::PolicyParams;

// s' = s + a, R = -(s^2 + a^2), a in [-1, 1].
class ScalarLq final : public envs::ModelBase<ScalarLq> {
 public:
  static envs::ModelInfo make_info() {
    envs::ModelInfo info;
    info.name = "scalar_lq";
    info.dims = {1, 1, 1};
    info.state_kinds = {envs::VarKind::kContinuous};
    info.action_kinds = {envs::VarKind::kContinuous};
    info.state_names = {"s"};
    info.action_names = {"a"};
    info.action_bounds = {{-1.0, 1.0}};
    return info;
  }
  ScalarLq() : ModelBase(make_info()) {}

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    out[0] = s[0] + a[0] + eps[0] * 0.0;
  }
  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X> a) const {
    return -(s[0] * s[0] + a[0] * a[0]);
  }
  std::vector<double> initial_state(Rng&) const override { return {0.5}; }
};

// Squares the state every step; overflows from a large start.
class Blowup final : public envs::ModelBase<Blowup> {
 public:
  static envs::ModelInfo make_info() {
    envs::ModelInfo info = ScalarLq::make_info();
    info.name = "blowup";
    return info;
  }
  Blowup() : ModelBase(make_info()) {}

  template <class X>
  void dynamics(std::span<const X> s, std::span<const X> a, std::span<const X> eps,
                std::span<X> out) const {
    out[0] = s[0] * s[0] * 1e20 + a[0] + eps[0];
  }
  template <class X>
  X reward_fn(std::span<const X> s, std::span<const X>) const {
    return -s[0];
  }
  std::vector<double> initial_state(Rng&) const override { return {1e30}; }
};

PlannerConfig small_config(int depth, int restarts) {
  PlannerConfig c;
  c.depth = depth;
  c.restarts = restarts;
  return c;
}

void expect_admissible(const envs::Model& m, const PolicyParams& p) {
  for (int r = 0; r < p.restarts; ++r) {
    for (int t = 0; t < p.depth; ++t) {
      for (int j = 0; j < p.n_a; ++j) {
        const auto& b = m.info().action_bounds[j];
        ASSERT_GE(p.mean(r, t, j), b.lo);
        ASSERT_LE(p.mean(r, t, j), b.hi);
        ASSERT_GE(p.var(r, t, j), 0.0);
        ASSERT_LE(p.var(r, t, j), opt::max_variance(p.mean(r, t, j), b));
        ASSERT_LE(p.var(r, t, j), b.range() * b.range() / 12.0);
      }
    }
  }
}

TEST(InitPolicy, VarianceFormula) {
  const envs::Bounds b{-1.0, 1.0};
  EXPECT_DOUBLE_EQ(opt::max_variance(0.0, b), 1.0 / 12.0);
  EXPECT_NEAR(opt::max_variance(0.9, b), 0.01 / 12.0, 1e-17);
  EXPECT_NEAR(opt::max_variance(0.9, b), 8.333e-4, 1e-7);
  EXPECT_EQ(opt::max_variance(1.0, b), 0.0);
}

TEST(InitPolicy, FreshRowsAreUniformWithMaximalVariance) {
  const auto m = envs::make_env("dubins");
  Rng rng(1);
  const auto p = opt::init_policy(*m, small_config(30, 50), {}, rng);
  expect_admissible(*m, p);
  double sum = 0.0;
  for (int r = 0; r < p.restarts; ++r) {
    for (int t = 0; t < p.depth; ++t) {
      for (int j = 0; j < 2; ++j) {
        EXPECT_EQ(p.var(r, t, j), opt::max_variance(p.mean(r, t, j), m->info().action_bounds[j]));
      }
      sum += p.mean(r, t, 0);
    }
  }
  EXPECT_NEAR(sum / (50 * 30), 0.0, 0.01);
}

TEST(InitPolicy, ExactlyOneRowIsSeeded) {
  const auto m = envs::make_env("cartpole");
  const PlannerConfig cfg = small_config(25, 200);
  opt::SavedActions saved;
  saved.n_a = 1;
  for (int t = 0; t < 24; ++t) {
    saved.means.push_back(0.5 - 0.03 * t);
    saved.vars.push_back(0.001);
  }
  Rng rng(2);
  const auto p = opt::init_policy(*m, cfg, saved, rng);
  int matching = 0;
  for (int r = 0; r < cfg.restarts; ++r) {
    bool all = true;
    for (int t = 0; t < 24; ++t) all = all && p.mean(r, t, 0) == saved.means[t];
    matching += all;
  }
  EXPECT_EQ(matching, 1);
  EXPECT_EQ(p.var(0, 3, 0), 0.001);
  expect_admissible(*m, p);
}

TEST(SafeUpdate, ZeroGradientKeepsRow) {
  const auto m = envs::make_env("pendulum");
  Rng rng(3);
  auto p = opt::init_policy(*m, small_config(5, 3), {}, rng);
  const auto before = p.data;
  opt::AdamState adam(p);
  const std::vector<double> grads(p.data.size(), 0.0);
  const std::vector<double> q{1.0, 2.0, 3.0};
  std::vector<char> frozen(3, 0);
  int calls = 0;
  const auto upd = opt::safe_update(*m, p, adam, grads, 0.1, q, [&](std::span<const double>) {
    ++calls;
    return 2.0;
  }, frozen);
  EXPECT_EQ(p.data, before);
  // Only the first row would have improved, and its candidate equals the row.
  EXPECT_EQ(upd.q_after[1], 2.0);
  EXPECT_EQ(upd.q_after[2], 3.0);
  EXPECT_EQ(calls, 3);
}

TEST(SafeUpdate, RejectedCandidateRestoresRowAndAdamState) {
  const auto m = envs::make_env("pendulum");
  Rng rng(4);
  auto p = opt::init_policy(*m, small_config(5, 2), {}, rng);
  const auto before = p.data;
  opt::AdamState adam(p);
  std::vector<double> grads(p.data.size());
  for (double& g : grads) g = testutil::uniform(rng, -1, 1);
  const std::vector<double> q{0.0, 0.0};
  std::vector<char> frozen(2, 0);
  const auto upd = opt::safe_update(*m, p, adam, grads, 0.1, q,
                                    [](std::span<const double>) { return -1.0; }, frozen);
  EXPECT_EQ(p.data, before);
  EXPECT_EQ(upd.q_after, q);
  EXPECT_EQ(adam.t, (std::vector<int>{0, 0}));
  for (double x : adam.m) EXPECT_EQ(x, 0.0);
  for (double x : adam.v) EXPECT_EQ(x, 0.0);
  EXPECT_EQ(upd.accepted, (std::vector<char>{0, 0}));
}

TEST(SafeUpdate, OutwardGradientAtBoundClipsMeanAndZeroesVariance) {
  const auto m = envs::make_env("cartpole");
  PolicyParams p(1, 1, 1);
  p.mean(0, 0, 0) = 1.0;
  p.var(0, 0, 0) = 0.0;
  opt::AdamState adam(p);
  const std::vector<double> grads{5.0, 3.0};
  const std::vector<double> q{0.0};
  std::vector<char> frozen(1, 0);
  const auto upd = opt::safe_update(*m, p, adam, grads, 0.1, q,
                                    [](std::span<const double>) { return 1.0; }, frozen);
  EXPECT_TRUE(upd.accepted[0]);
  EXPECT_EQ(p.mean(0, 0, 0), 1.0);
  EXPECT_EQ(p.var(0, 0, 0), 0.0);
}

TEST(SafeUpdate, NonFiniteGradientFreezesRow) {
  const auto m = envs::make_env("pendulum");
  Rng rng(5);
  auto p = opt::init_policy(*m, small_config(3, 2), {}, rng);
  const auto before = p.data;
  opt::AdamState adam(p);
  std::vector<double> grads(p.data.size(), 0.1);
  grads[2] = std::nan("");
  std::vector<char> frozen(2, 0);
  const std::vector<double> q{0.0, 0.0};
  const auto upd = opt::safe_update(*m, p, adam, grads, 0.1, q,
                                    [](std::span<const double>) { return 1.0; }, frozen);
  EXPECT_EQ(upd.newly_frozen, 1);
  EXPECT_EQ(frozen, (std::vector<char>{1, 0}));
  EXPECT_TRUE(std::equal(before.begin(), before.begin() + 6, p.data.begin()));
  EXPECT_TRUE(upd.accepted[1]);
}

TEST(SafeUpdate, BoundsHoldUnderRandomSteps) {
  for (const std::string name : {"dubins", "mountain_car_highdim", "cartpole"}) {
    const auto m = envs::make_env(name, testutil::default_params(name));
    Rng rng(6);
    auto p = opt::init_policy(*m, small_config(4, 5), {}, rng);
    opt::AdamState adam(p);
    std::vector<char> frozen(5, 0);
    std::vector<double> grads(p.data.size());
    std::vector<double> q(5, 0.0);
    for (int i = 0; i < 1000; ++i) {
      const double scale = std::pow(10.0, testutil::uniform(rng, -3, 3));
      for (double& g : grads) g = scale * testutil::uniform(rng, -1, 1);
      const auto upd = opt::safe_update(
          *m, p, adam, grads, testutil::uniform(rng, 0.0, 2.0), q,
          [&](std::span<const double>) { return testutil::uniform(rng, -1, 1); }, frozen);
      std::fill(q.begin(), q.end(), 0.0);
      expect_admissible(*m, p);
      (void)upd;
    }
  }
}

TEST(Converged, Examples) {
  const auto m = envs::make_env("cartpole");  // bounds [-1, 1]
  PolicyParams a(2, 3, 1);
  for (int r = 0; r < 2; ++r) {
    for (int t = 0; t < 3; ++t) a.var(r, t, 0) = 0.0;
  }
  EXPECT_TRUE(opt::converged(*m, a, a, 0.1));

  PolicyParams one = a;
  one.mean(1, 2, 0) = 0.4;  // 0.2 normalized
  EXPECT_FALSE(opt::converged(*m, a, one, 0.1));

  PolicyParams all = a;
  for (int r = 0; r < 2; ++r) {
    for (int t = 0; t < 3; ++t) {
      all.mean(r, t, 0) = 0.2;
      all.var(r, t, 0) = 0.1 * 4 / 12;
    }
  }
  EXPECT_TRUE(opt::converged(*m, a, all, 0.1));
  EXPECT_FALSE(opt::converged(*m, a, all, 0.0999));
}

TEST(SelectBestRow, TiesSplitEvenly) {
  const std::vector<double> q{-3.0, 7.5, 7.5, 1.0};
  int first = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const int pick = opt::select_best_row(q, rng);
    ASSERT_TRUE(pick == 1 || pick == 2);
    first += pick == 1;
  }
  EXPECT_NEAR(first / 1000.0, 0.5, 0.05);
}

TEST(SelectBestRow, SkipsNonFinite) {
  const double inf = std::numeric_limits<double>::infinity();
  Rng rng(1);
  EXPECT_EQ(opt::select_best_row(std::vector<double>{-inf, 2.0, std::nan("")}, rng), 1);
}

// Rows evolve independently: permuting the initial rows permutes the result.
TEST(OptimizePolicy, RestartPermutationIndependence) {
  const auto m = envs::make_env("pendulum", {.alpha = 1.0});
  const PlannerConfig cfg = small_config(10, 6);
  Rng rng(7);
  const auto init = opt::init_policy(*m, cfg, {}, rng);
  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  PolicyParams permuted = init;
  for (int r = 0; r < 6; ++r) {
    std::copy(init.row(perm[r]).begin(), init.row(perm[r]).end(), permuted.row(r).begin());
  }
  const std::vector<double> s0{2.5, 0.0};
  PolicyParams a = init, b = permuted;
  std::vector<double> qa, qb;
  opt::optimize_policy(*m, s0, cfg, a, qa);
  opt::optimize_policy(*m, s0, cfg, b, qb);
  for (int r = 0; r < 6; ++r) {
    EXPECT_EQ(qb[r], qa[perm[r]]);
    EXPECT_TRUE(std::equal(b.row(r).begin(), b.row(r).end(), a.row(perm[r]).begin()));
  }
}

TEST(PlanOneStep, MonotoneRowValues) {
  const auto m = envs::make_env("cartpole", {.alpha = 2.0});
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto s = m->initial_state(rng);
    const auto res = opt::plan_one_step(*m, s, small_config(25, 20), {}, rng);
    const auto& h = res.diagnostics.q_history;
    ASSERT_GE(h.size(), 2u);
    for (std::size_t i = 1; i < h.size(); ++i) {
      for (std::size_t r = 0; r < h[i].size(); ++r) EXPECT_GE(h[i][r], h[i - 1][r]);
    }
    EXPECT_EQ(res.diagnostics.best_q, h.back()[res.diagnostics.best_row]);
    EXPECT_EQ(*std::max_element(h.back().begin(), h.back().end()), res.diagnostics.best_q);
  }
}

TEST(PlanOneStep, ZeroStepReturnsBestInitialRow) {
  const auto m = envs::make_env("pendulum", {.alpha = 1.0});
  PlannerConfig cfg = small_config(15, 30);
  cfg.max_steps = 1;
  cfg.step_size = 0.0;
  const std::vector<double> s0{3.0, 0.0};
  Rng rng(8), replay(8);
  const auto res = opt::plan_one_step(*m, s0, cfg, {}, rng);
  const auto init = opt::init_policy(*m, cfg, {}, replay);
  std::vector<double> q(cfg.restarts);
  for (int r = 0; r < cfg.restarts; ++r) q[r] = opt::row_value(*m, s0, cfg, init.row(r));
  const int best = static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
  EXPECT_EQ(res.action[0], init.mean(best, 0, 0));
  EXPECT_EQ(res.diagnostics.best_q, q[best]);
  EXPECT_EQ(res.diagnostics.accepted_updates, 0);
}

TEST(PlanOneStep, SavedActionsAreTheShiftedBestRow) {
  const auto m = envs::make_env("dubins");
  const PlannerConfig cfg = small_config(12, 8);
  Rng rng(9), replay(9);
  const std::vector<double> s0 = m->initial_state(rng);
  replay = rng;
  const auto res = opt::plan_one_step(*m, s0, cfg, {}, rng);
  auto params = opt::init_policy(*m, cfg, {}, replay);
  std::vector<double> q;
  opt::optimize_policy(*m, s0, cfg, params, q);
  const int best = opt::select_best_row(q, replay);
  ASSERT_EQ(best, res.diagnostics.best_row);
  ASSERT_EQ(res.saved.steps(), cfg.depth - 1);
  for (int t = 0; t + 1 < cfg.depth; ++t) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_EQ(res.saved.means[t * 2 + j], params.mean(best, t + 1, j));
      EXPECT_EQ(res.saved.vars[t * 2 + j], params.var(best, t + 1, j));
    }
  }
  EXPECT_EQ(res.action, (std::vector<double>{params.mean(best, 0, 0), params.mean(best, 0, 1)}));
  EXPECT_EQ(res.diagnostics.best_trace.marginals.size(), 13u);
  // The next call's first row continues from the saved plan.
  Rng next(10);
  const auto seeded = opt::init_policy(*m, cfg, res.saved, next);
  for (int t = 0; t + 1 < cfg.depth; ++t) EXPECT_EQ(seeded.mean(0, t, 0), res.saved.means[t * 2]);
}

// Finite-horizon Riccati recursion with P_D = 0 gives u*(s0).
TEST(PlanOneStep, LinearQuadraticOptimum) {
  const ScalarLq m;
  const int depth = 20;
  double p = 0.0;
  for (int t = depth - 1; t >= 1; --t) p = 1.0 + p / (1.0 + p);
  const double u_star = -p / (1.0 + p) * 0.5;
  EXPECT_NEAR(u_star, -0.309, 1e-3);

  PlannerConfig cfg = small_config(depth, 8);
  cfg.max_steps = 3000;
  cfg.step_size = 0.002;
  cfg.conv_tol = 1e-12;
  Rng rng(11);
  const auto res = opt::plan_one_step(m, std::vector<double>{0.5}, cfg, {}, rng);
  EXPECT_NEAR(res.action[0], u_star, 1e-2);
}

TEST(PlanOneStep, AllRowsFrozenIsDegraded) {
  const Blowup m;
  Rng rng(12);
  const auto res = opt::plan_one_step(m, std::vector<double>{1e30}, small_config(6, 4), {}, rng);
  EXPECT_TRUE(res.diagnostics.degraded);
  EXPECT_EQ(res.diagnostics.frozen_rows, 4);
  ASSERT_EQ(res.action.size(), 1u);
  EXPECT_GE(res.action[0], -1.0);
  EXPECT_LE(res.action[0], 1.0);
}

TEST(GradPolicyLoss, RejectsOutOfBoundsRow) {
  const auto m = envs::make_env("cartpole");
  auto loss = [](std::span<const ad::Var> x) { return x[0] * x[0]; };
  EXPECT_THROW(opt::grad_policy_loss(*m, 1, loss, std::vector<double>{1.5, 0.0}), ArgumentError);
  EXPECT_THROW(opt::grad_policy_loss(*m, 1, loss, std::vector<double>{0.5, 0.1}), ArgumentError);
  const auto g = opt::grad_policy_loss(*m, 1, loss, std::vector<double>{0.5, 0.01});
  EXPECT_EQ(g, (std::vector<double>{1.0, 0.0}));
}

TEST(GradPolicyLoss, DepthTwoPendulumMatchesFiniteDifferences) {
  const auto m = envs::make_env("pendulum", {.alpha = 1.0});
  const std::vector<double> s0{1.0, -0.5};
  const auto row = testutil::random_row(*m, 2, 13);
  auto q = [&](auto x) {
    using S = std::decay_t<decltype(x[0])>;
    return prop::rollout_value<S>(*m, s0, testutil::marginals_of<S>(x, 2, 1), 1.0,
                                  prop::PropagationMode::kComplete);
  };
  const auto g = opt::grad_policy_loss(*m, 2, q, row);
  const auto fd = ad::central_difference(q, std::span<const double>(row), 1e-5);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_LT(testutil::rel_err(g[i], fd[i]), 1e-4);
}

TEST(Config, Validation) {
  PlannerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.depth = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.conv_tol = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = {};
  c.max_steps = 0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(RunEpisode, ZeroCap) {
  const auto m = envs::make_env("cartpole");
  Rng rng(14);
  const auto ep = opt::run_episode(*m, small_config(5, 2), 0, rng);
  EXPECT_EQ(ep.steps, 0);
  EXPECT_EQ(ep.total_reward, 0.0);
  EXPECT_FALSE(ep.success);
  EXPECT_EQ(ep.trajectory.size(), 1u);
}

TEST(RunEpisode, ShortCartPoleEpisodeIsReproducible) {
  const auto m = envs::make_env("cartpole", {.alpha = 1.0});
  Rng a(15), b(15);
  const auto x = opt::run_episode(*m, small_config(10, 5), 15, a);
  const auto y = opt::run_episode(*m, small_config(10, 5), 15, b);
  EXPECT_EQ(x.total_reward, y.total_reward);
  EXPECT_EQ(x.trajectory, y.trajectory);
  EXPECT_EQ(x.steps, 15);
  EXPECT_EQ(x.trajectory.size(), 16u);
  for (const auto& act : x.actions) {
    EXPECT_GE(act[0], -1.0);
    EXPECT_LE(act[0], 1.0);
  }
}

}  // namespace
