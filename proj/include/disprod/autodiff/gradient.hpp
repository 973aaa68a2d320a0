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

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "disprod/autodiff/tape.hpp"
#include "disprod/errors.hpp"

namespace disprod::ad {

// Owns the thread-local tape for the duration of one gradient evaluation.
class TapeSession {
 public:
  TapeSession();
  ~TapeSession();
  TapeSession(const TapeSession&) = delete;
  TapeSession& operator=(const TapeSession&) = delete;
};

// Exact gradient of a scalar loss by one reverse sweep. `loss` is invoked
// with std::span<const Var> and must return a Var. Returns the loss value.
template <class F>
double value_and_gradient(F&& loss, std::span<const double> x, std::span<double> grad) {
  if (grad.size() != x.size()) throw ArgumentError("value_and_gradient: gradient size mismatch");
  TapeSession session;
  std::vector<Var> inputs;
  inputs.reserve(x.size());
  for (double xi : x) inputs.push_back(Var::input(xi));
  const Var y = loss(std::span<const Var>(inputs));
  if (!std::isfinite(y.value)) throw PropagationError("loss is not finite at evaluation point");
  std::fill(grad.begin(), grad.end(), 0.0);
  if (y.is_constant()) return y.value;
  const auto& adj = active_tape().backward(y.index);
  for (std::size_t i = 0; i < x.size(); ++i) grad[i] = adj[inputs[i].index];
  return y.value;
}

template <class F>
std::vector<double> gradient(F&& loss, std::span<const double> x) {
  std::vector<double> g(x.size());
  value_and_gradient(loss, x, g);
  return g;
}

// Central finite difference of a loss callable on std::span<const double>.
template <class F>
std::vector<double> central_difference(F&& loss, std::span<const double> x, double step) {
  std::vector<double> xp(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = xp[i];
    xp[i] = orig + step;
    const double fp = loss(std::span<const double>(xp));
    xp[i] = orig - step;
    const double fm = loss(std::span<const double>(xp));
    xp[i] = orig;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

// max_i |analytic_i - fd_i| / max(1, |fd_i|). `loss` must be callable on both
// std::span<const double> and std::span<const Var>.
template <class F>
double check_gradient(F&& loss, std::span<const double> x, double fd_step) {
  if (!(fd_step > 0.0)) throw ArgumentError("check_gradient: fd_step must be positive");
  const std::vector<double> analytic = gradient(loss, x);
  const std::vector<double> fd = central_difference(loss, x, fd_step);
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(analytic[i] - fd[i]) / std::max(1.0, std::abs(fd[i])));
  }
  return worst;
}

}  // namespace disprod::ad
