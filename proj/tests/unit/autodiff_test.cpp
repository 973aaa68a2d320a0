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

#include <cmath>
#include <vector>

#include "disprod/autodiff/gradient.hpp"
#include "disprod/autodiff/hyperdual.hpp"
#include "disprod/autodiff/partials.hpp"
#include "disprod/envs/catalog.hpp"
#include "disprod/envs/pendulum.hpp"
#include "disprod/errors.hpp"
#include "test_util.hpp"

namespace {

using namespace disprod;
using ad::HyperDual;
using ad::Var;
using testutil::rel_err;
using HD = HyperDual<double>;

TEST(HyperDual, ProductRule) {
  const HD f{2.0, 3.0, 5.0};
  const HD g{7.0, 11.0, 13.0};
  const HD h = f * g;
  EXPECT_DOUBLE_EQ(h.v, 14.0);
  EXPECT_DOUBLE_EQ(h.d1, 3.0 * 7.0 + 2.0 * 11.0);
  EXPECT_DOUBLE_EQ(h.d2, 5.0 * 7.0 + 2.0 * 3.0 * 11.0 + 2.0 * 13.0);
}

TEST(HyperDual, SeededCompositionGivesExactDerivatives) {
  // f(z) = exp(sin z) / (1 + z^2)
  const double z = 0.7;
  const HD x = HD::seeded(z);
  const HD y = ad::exp(ad::sin(x)) / (x * x + 1.0);
  const double s = std::sin(z), c = std::cos(z), e = std::exp(s), q = 1.0 + z * z;
  const double f = e / q;
  const double num1 = c * e;
  const double df = num1 / q - e * 2.0 * z / (q * q);
  const double dnum1 = (-s + c * c) * e;
  const double d2f = dnum1 / q - 2.0 * num1 * 2.0 * z / (q * q) - e * 2.0 / (q * q) +
                     e * 2.0 * z * 2.0 * 2.0 * z / (q * q * q);
  EXPECT_NEAR(y.v, f, 1e-15);
  EXPECT_NEAR(y.d1, df, 1e-14);
  EXPECT_NEAR(y.d2, d2f, 1e-13);
}

TEST(HyperDual, ElementaryFunctionsMatchFiniteDifferences) {
  const double h = 1e-4;
  auto check = [&](auto fn, double z) {
    const HD y = fn(HD::seeded(z));
    const double fp = fn(HD(z + h)).v, fm = fn(HD(z - h)).v, f0 = fn(HD(z)).v;
    EXPECT_LT(rel_err(y.d1, (fp - fm) / (2 * h)), 1e-7) << z;
    EXPECT_LT(rel_err(y.d2, (fp - 2 * f0 + fm) / (h * h)), 1e-5) << z;
  };
  for (double z : {-1.3, 0.2, 0.9, 2.4}) {
    check([](HD x) { return ad::tanh(x); }, z);
    check([](HD x) { return ad::sigmoid(x * 3.0); }, z);
    check([](HD x) { return ad::softplus(x * 2.0); }, z);
    check([](HD x) { return ad::cos(x) * ad::sin(x); }, z);
    check([](HD x) { return ad::pow(x * x + 1.0, 1.5); }, z);
    check([](HD x) { return ad::log(x * x + 0.5); }, z);
    check([](HD x) { return ad::sqrt(x * x + 0.25); }, z);
    check([](HD x) { return ad::smooth_clamp(x, -0.5, 0.5, 4.0); }, z);
  }
}

TEST(HyperDual, DomainGuardsRaise) {
  EXPECT_THROW(ad::log(HD::seeded(0.0)), DomainError);
  EXPECT_THROW(ad::log(HD::seeded(-1.0)), DomainError);
  EXPECT_THROW(HD(1.0) / HD::seeded(0.0), DomainError);
  EXPECT_THROW(ad::sqrt(HD::seeded(-1e-3)), DomainError);
}

TEST(EvalPartials, IdentityMap) {
  const ad::Dims dims{3, 0, 0};
  auto f = [](std::span<const HD> s, std::span<const HD>, std::span<const HD>, std::span<HD> out) {
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i];
  };
  const std::vector<double> s{0.3, -1.2, 4.0};
  const auto b = ad::eval_partials<double>(f, dims, std::span<const double>(s), {}, {});
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(b.value[j], s[j]);
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(b.j_s(j, k), j == k ? 1.0 : 0.0);
      EXPECT_EQ(b.h_s(j, k), 0.0);
    }
  }
}

TEST(EvalPartials, DimensionMismatchIsArgumentError) {
  const auto m = envs::make_env("pendulum");
  const std::vector<double> s{0.0, 0.0, 0.0}, a{0.0}, e{0.0};
  EXPECT_THROW(envs::eval_partials<double>(*m, std::span<const double>(s), a, e), ArgumentError);
}

TEST(EvalPartials, NonFiniteNamesCoordinate) {
  const ad::Dims dims{1, 1, 0};
  auto f = [](std::span<const HD> s, std::span<const HD> a, std::span<const HD>,
              std::span<HD> out) { out[0] = s[0] + ad::log(a[0]); };
  const std::vector<double> s{1.0}, a{-1.0};
  try {
    ad::eval_partials<double>(f, dims, std::span<const double>(s), std::span<const double>(a), {});
    FAIL() << "expected PropagationError";
  } catch (const PropagationError& e) {
    EXPECT_NE(std::string(e.what()).find("state[0]"), std::string::npos) << e.what();
  }
}

TEST(EvalPartials, PendulumNoiseColumnAtOrigin) {
  const envs::Pendulum p(1.0, envs::PendulumNoise::kAdditive);
  const std::vector<double> s{0.0, 0.0}, a{0.0}, e{0.0};
  const auto b = envs::eval_partials<double>(p, std::span<const double>(s), a, e);
  EXPECT_DOUBLE_EQ(b.j_eps(0, 0), 0.05);
  EXPECT_DOUBLE_EQ(b.j_eps(1, 0), 0.0);
  EXPECT_NEAR(b.value[0], 0.0, 1e-15);
  EXPECT_NEAR(b.value[1], 0.0, 1e-15);
}

TEST(EvalPartials, PendulumClosedFormsAtFixedPoint) {
  const envs::Pendulum p(1.0, envs::PendulumNoise::kAdditive);
  const double dt = envs::Pendulum::kDt, c1 = envs::Pendulum::kC1;
  EXPECT_DOUBLE_EQ(c1, 14.715);
  EXPECT_DOUBLE_EQ(envs::Pendulum::kC2, 3.0);
  const std::vector<double> s{0.3, 0.1}, a{0.5}, e{0.0};
  const auto b = envs::eval_partials<double>(p, std::span<const double>(s), a, e);
  EXPECT_NEAR(b.h_s(1, 0), c1 * std::sin(0.3 + M_PI) * dt, 1e-14);
  EXPECT_NEAR(b.j_s(0, 0), 1.0 - c1 * std::cos(0.3 + M_PI) * dt * dt, 1e-14);

  const std::vector<double> s0{0.0, 0.0};
  const auto b0 = envs::eval_partials<double>(p, std::span<const double>(s0), a, e);
  EXPECT_NEAR(b0.j_s(0, 0), 1.0 + c1 * dt * dt, 1e-14);
}

void expect_bundles_equal(const ad::PartialsBundle<double>& x, const ad::PartialsBundle<double>& y,
                          double tol) {
  auto cmp = [&](const ad::Mat<double>& a, const ad::Mat<double>& b) {
    ASSERT_EQ(a.data.size(), b.data.size());
    for (std::size_t i = 0; i < a.data.size(); ++i) EXPECT_NEAR(a.data[i], b.data[i], tol);
  };
  for (std::size_t j = 0; j < x.value.size(); ++j) EXPECT_NEAR(x.value[j], y.value[j], tol);
  cmp(x.j_s, y.j_s);
  cmp(x.j_a, y.j_a);
  cmp(x.j_eps, y.j_eps);
  cmp(x.h_s, y.h_s);
  cmp(x.h_a, y.h_a);
  cmp(x.h_eps, y.h_eps);
}

TEST(EvalPartials, PendulumAnalyticAgreesEverywhere) {
  envs::Rng rng(7);
  for (auto noise : {envs::PendulumNoise::kAdditive, envs::PendulumNoise::kExp}) {
    for (int i = 0; i < 100; ++i) {
      const envs::Pendulum p(testutil::uniform(rng, 0.0, 3.0), noise);
      const auto pt = testutil::random_point(p, rng);
      const auto autodiff = envs::eval_partials<double>(p, std::span<const double>(pt.s), pt.a,
                                                        pt.eps);
      const auto analytic = envs::pendulum_analytic_partials(p, pt.s, pt.a, pt.eps);
      expect_bundles_equal(autodiff, analytic, 1e-10);
    }
  }
}

TEST(EvalPartials, AdditivePendulumHasZeroActionAndNoiseCurvature) {
  envs::Rng rng(8);
  const envs::Pendulum p(1.0, envs::PendulumNoise::kAdditive);
  for (int i = 0; i < 20; ++i) {
    const auto pt = testutil::random_point(p, rng);
    const auto b = envs::pendulum_analytic_partials(p, pt.s, pt.a, pt.eps);
    EXPECT_EQ(b.h_a(0, 0), 0.0);
    EXPECT_EQ(b.h_a(1, 0), 0.0);
    EXPECT_EQ(b.h_eps(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(b.j_eps(0, 0), envs::Pendulum::kDt);
    EXPECT_EQ(b.j_eps(1, 0), 0.0);
  }
}

// Central differences of every transition output w.r.t. every coordinate.
TEST(EvalPartials, AgreesWithFiniteDifferencesOnCatalog) {
  const double h = 1e-4;
  for (const std::string& name : envs::env_names()) {
    const auto m = envs::make_env(name, testutil::default_params(name));
    const auto& d = m->dims();
    envs::Rng rng(11);
    double worst1 = 0.0, worst2 = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto pt = testutil::random_point(*m, rng);
      const auto b = envs::eval_partials<double>(*m, std::span<const double>(pt.s), pt.a, pt.eps);
      std::vector<double> z = pt.s;
      z.insert(z.end(), pt.a.begin(), pt.a.end());
      z.insert(z.end(), pt.eps.begin(), pt.eps.end());
      auto eval = [&](const std::vector<double>& zz) {
        std::vector<double> out(d.n_s);
        const std::span<const double> zs(zz);
        m->transition(zs.subspan(0, d.n_s), zs.subspan(d.n_s, d.n_a),
                      zs.subspan(d.n_s + d.n_a, d.n_eps), out);
        return out;
      };
      const auto f0 = eval(z);
      for (std::size_t k = 0; k < d.total(); ++k) {
        auto zp = z, zm = z;
        zp[k] += h;
        zm[k] -= h;
        const auto fp = eval(zp), fm = eval(zm);
        for (std::size_t j = 0; j < d.n_s; ++j) {
          const double fd1 = (fp[j] - fm[j]) / (2 * h);
          const double fd2 = (fp[j] - 2 * f0[j] + fm[j]) / (h * h);
          double an1, an2;
          if (k < d.n_s) {
            an1 = b.j_s(j, k), an2 = b.h_s(j, k);
          } else if (k < d.n_s + d.n_a) {
            an1 = b.j_a(j, k - d.n_s), an2 = b.h_a(j, k - d.n_s);
          } else {
            an1 = b.j_eps(j, k - d.n_s - d.n_a), an2 = b.h_eps(j, k - d.n_s - d.n_a);
          }
          worst1 = std::max(worst1, rel_err(an1, fd1));
          worst2 = std::max(worst2, rel_err(an2, fd2));
        }
      }
    }
    EXPECT_LT(worst1, 1e-5) << name;
    EXPECT_LT(worst2, 1e-3) << name;
  }
}

TEST(EvalPartials, MaskSkipsColumnsButKeepsValue) {
  const auto m = envs::make_env("simple_env", testutil::default_params("simple_env"));
  envs::Rng rng(3);
  const auto pt = testutil::random_point(*m, rng);
  const std::vector<char> mask{0, 1, 0, 0, 1};
  const auto full = envs::eval_partials<double>(*m, std::span<const double>(pt.s), pt.a, pt.eps);
  const auto part = envs::eval_partials<double>(*m, std::span<const double>(pt.s), pt.a, pt.eps,
                                                std::span<const char>(mask));
  EXPECT_EQ(full.value, part.value);
  EXPECT_EQ(part.j_s(0, 0), 0.0);
  EXPECT_EQ(part.j_s(1, 1), full.j_s(1, 1));
  EXPECT_EQ(part.h_eps(0, 0), full.h_eps(0, 0));
  const std::vector<char> none(5, 0);
  const auto value_only = envs::eval_partials<double>(
      *m, std::span<const double>(pt.s), pt.a, pt.eps, std::span<const char>(none));
  EXPECT_EQ(full.value, value_only.value);
}

TEST(Gradient, StationaryPoint) {
  auto loss = [](auto x) {
    using S = std::decay_t<decltype(x[0])>;
    S acc(0.0);
    for (const auto& xi : x) acc += xi * xi;
    return acc;
  };
  const std::vector<double> x(6, 0.0);
  for (double g : ad::gradient(loss, std::span<const double>(x))) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, LinearLossGivesCoefficients) {
  const std::vector<double> c{1.5, -2.0, 0.25, 7.0};
  auto loss = [&](auto x) {
    using S = std::decay_t<decltype(x[0])>;
    S acc(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * c[i];
    return acc;
  };
  const std::vector<double> x{0.3, 0.1, -4.0, 2.0};
  EXPECT_EQ(ad::gradient(loss, std::span<const double>(x)), c);
}

TEST(Gradient, CubicPolynomialsMatchHandGradient) {
  envs::Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(4), a(4), b(4);
    for (int i = 0; i < 4; ++i) {
      x[i] = testutil::uniform(rng, -2, 2);
      a[i] = testutil::uniform(rng, -1, 1);
      b[i] = testutil::uniform(rng, -1, 1);
    }
    // L = sum a_i x_i^3 + b_i x_i^2 + x_0 x_1 x_2 + x_3
    auto loss = [&](auto v) {
      using S = std::decay_t<decltype(v[0])>;
      S acc = v[0] * v[1] * v[2] + v[3];
      for (int i = 0; i < 4; ++i) acc += v[i] * v[i] * v[i] * a[i] + v[i] * v[i] * b[i];
      return acc;
    };
    std::vector<double> hand(4);
    for (int i = 0; i < 4; ++i) hand[i] = 3 * a[i] * x[i] * x[i] + 2 * b[i] * x[i];
    hand[0] += x[1] * x[2];
    hand[1] += x[0] * x[2];
    hand[2] += x[0] * x[1];
    hand[3] += 1.0;
    const auto g = ad::gradient(loss, std::span<const double>(x));
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(g[i], hand[i], 1e-10);
  }
}

TEST(Gradient, NonFiniteLossRaises) {
  auto loss = [](auto x) { return x[0] / (x[0] - x[0]); };
  const std::vector<double> x{1.0};
  EXPECT_THROW(ad::gradient(loss, std::span<const double>(x)), PropagationError);
}

TEST(CheckGradient, QuadraticIsTight) {
  auto loss = [](auto x) { return x[0] * x[0] * 3.0 + x[0] * x[1] - x[1] * x[1] * 0.5; };
  const std::vector<double> x{0.4, -1.1};
  EXPECT_LT(ad::check_gradient(loss, std::span<const double>(x), 1e-5), 1e-8);
}

TEST(CheckGradient, HardStepIsFlagged) {
  // d/dx of a hard step is 0 almost everywhere; FD across the jump is huge.
  auto loss = [](auto x) {
    using S = std::decay_t<decltype(x[0])>;
    return ad::primal(x[0]) >= 0.0 ? S(1.0) + x[0] * 0.0 : S(0.0);
  };
  const std::vector<double> x{1e-6};
  EXPECT_GT(ad::check_gradient(loss, std::span<const double>(x), 1e-5), 0.5);
}

TEST(CheckGradient, RejectsNonPositiveStep) {
  auto loss = [](auto x) { return x[0]; };
  const std::vector<double> x{1.0};
  EXPECT_THROW(ad::check_gradient(loss, std::span<const double>(x), 0.0), ArgumentError);
}

TEST(Tape, NestedSessionsAreRejected) {
  ad::TapeSession outer;
  EXPECT_THROW(ad::TapeSession inner, ArgumentError);
}

}  // namespace
