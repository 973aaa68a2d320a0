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

// Jacobians and diagonal Hessians of a transition T(s, a, eps) and of a
// reward R(s, a), collected one seeded hyper-dual pass per input coordinate.
// Mixed second partials are never formed.

#include <cmath>
#include <concepts>
#include <cstddef>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "disprod/autodiff/hyperdual.hpp"
#include "disprod/errors.hpp"

namespace disprod::ad {

// Dense row-major matrix; just enough for the partials bundle.
template <class S>
struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<S> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, S(0.0)) {}

  S& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

struct Dims {
  std::size_t n_s = 0;
  std::size_t n_a = 0;
  std::size_t n_eps = 0;

  std::size_t total() const { return n_s + n_a + n_eps; }
};

template <class S>
struct PartialsBundle {
  std::vector<S> value;  // T at the evaluation point
  Mat<S> j_s, j_a, j_eps;
  Mat<S> h_s, h_a, h_eps;

  explicit PartialsBundle(const Dims& d = {})
      : value(d.n_s, S(0.0)),
        j_s(d.n_s, d.n_s),
        j_a(d.n_s, d.n_a),
        j_eps(d.n_s, d.n_eps),
        h_s(d.n_s, d.n_s),
        h_a(d.n_s, d.n_a),
        h_eps(d.n_s, d.n_eps) {}
};

template <class S>
struct RewardPartials {
  S value{};
  std::vector<S> g_s, g_a;  // gradient
  std::vector<S> h_s, h_a;  // diagonal Hessian
};

namespace detail {

inline std::string coordinate_name(std::size_t k, const Dims& d) {
  if (k < d.n_s) return "state[" + std::to_string(k) + "]";
  k -= d.n_s;
  if (k < d.n_a) return "action[" + std::to_string(k) + "]";
  return "noise[" + std::to_string(k - d.n_a) + "]";
}

template <class S>
bool finite(const HyperDual<S>& x) {
  return std::isfinite(primal(x.v)) && std::isfinite(primal(x.d1)) && std::isfinite(primal(x.d2));
}

// Records primal-only results during the first seeded pass and replays them in
// later ones (Var only).
template <class S>
class MemoScope {
 public:
  MemoScope() = default;
  MemoScope(const MemoScope&) = delete;
  MemoScope& operator=(const MemoScope&) = delete;
  ~MemoScope() {
    if constexpr (std::same_as<S, Var>) {
      if (started_) active_memo().off();
    }
  }

  void begin_pass() {
    if constexpr (std::same_as<S, Var>) {
      PrimalMemo& memo = active_memo();
      if (!started_) {
        if (memo.mode() != PrimalMemo::Mode::kOff) throw std::logic_error("nested partials pass");
        memo.record();
        started_ = true;
      } else {
        memo.replay();
      }
    }
  }

 private:
  bool started_ = false;
};

template <class S>
void lift(std::span<const S> in, std::span<HyperDual<S>> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = HyperDual<S>{in[i], S(0.0), S(0.0)};
}

}  // namespace detail

// F is callable as f(span<const HyperDual<S>> s, a, eps, span<HyperDual<S>> out).
// When `active` is non-empty, only coordinates k with active[k] != 0 get a
// seeded pass; the other columns are left at zero.
template <class S, class F>
PartialsBundle<S> eval_partials(F&& f, const Dims& dims, std::span<const S> s,
                                std::span<const S> a, std::span<const S> eps,
                                std::span<const char> active = {}) {
  if (s.size() != dims.n_s || a.size() != dims.n_a || eps.size() != dims.n_eps) {
    throw ArgumentError("eval_partials: point dimensions (" + std::to_string(s.size()) + ", " +
                        std::to_string(a.size()) + ", " + std::to_string(eps.size()) +
                        ") do not match model (" + std::to_string(dims.n_s) + ", " +
                        std::to_string(dims.n_a) + ", " + std::to_string(dims.n_eps) + ")");
  }
  using H = HyperDual<S>;
  std::vector<H> z(dims.total());
  detail::lift<S>(s, std::span<H>(z).subspan(0, dims.n_s));
  detail::lift<S>(a, std::span<H>(z).subspan(dims.n_s, dims.n_a));
  detail::lift<S>(eps, std::span<H>(z).subspan(dims.n_s + dims.n_a, dims.n_eps));
  std::vector<H> out(dims.n_s);

  PartialsBundle<S> bundle(dims);
  detail::MemoScope<S> memo;
  auto run = [&]() {
    memo.begin_pass();
    const std::span<const H> zs(z);
    f(zs.subspan(0, dims.n_s), zs.subspan(dims.n_s, dims.n_a),
      zs.subspan(dims.n_s + dims.n_a, dims.n_eps), std::span<H>(out));
  };

  if (!active.empty() && active.size() != dims.total()) {
    throw ArgumentError("eval_partials: mask size does not match the number of coordinates");
  }
  bool have_value = false;
  for (std::size_t k = 0; k < dims.total(); ++k) {
    if (!active.empty() && !active[k]) continue;
    z[k].d1 = S(1.0);
    try {
      run();
    } catch (const DomainError& e) {
      throw PropagationError("partials w.r.t. " + detail::coordinate_name(k, dims) + ": " +
                             e.what());
    }
    z[k].d1 = S(0.0);

    Mat<S>* jac;
    Mat<S>* hess;
    std::size_t col;
    if (k < dims.n_s) {
      jac = &bundle.j_s, hess = &bundle.h_s, col = k;
    } else if (k < dims.n_s + dims.n_a) {
      jac = &bundle.j_a, hess = &bundle.h_a, col = k - dims.n_s;
    } else {
      jac = &bundle.j_eps, hess = &bundle.h_eps, col = k - dims.n_s - dims.n_a;
    }
    for (std::size_t j = 0; j < dims.n_s; ++j) {
      if (!detail::finite(out[j])) {
        throw PropagationError("non-finite partial of output " + std::to_string(j) + " w.r.t. " +
                               detail::coordinate_name(k, dims));
      }
      if (!have_value) bundle.value[j] = out[j].v;
      (*jac)(j, col) = out[j].d1;
      (*hess)(j, col) = out[j].d2;
    }
    have_value = true;
  }
  if (!have_value) {
    try {
      run();
    } catch (const DomainError& e) {
      throw PropagationError(std::string("transition: ") + e.what());
    }
    for (std::size_t j = 0; j < dims.n_s; ++j) {
      if (!std::isfinite(primal(out[j].v))) {
        throw PropagationError("non-finite transition output " + std::to_string(j));
      }
      bundle.value[j] = out[j].v;
    }
  }
  return bundle;
}

// R is callable as r(span<const HyperDual<S>> s, a) -> HyperDual<S>.
template <class S, class R>
RewardPartials<S> eval_reward_partials(R&& r, std::span<const S> s, std::span<const S> a,
                                       std::span<const char> active = {}) {
  using H = HyperDual<S>;
  const std::size_t ns = s.size();
  const std::size_t na = a.size();
  std::vector<H> z(ns + na);
  detail::lift<S>(s, std::span<H>(z).subspan(0, ns));
  detail::lift<S>(a, std::span<H>(z).subspan(ns, na));

  RewardPartials<S> out;
  out.g_s.assign(ns, S(0.0));
  out.h_s.assign(ns, S(0.0));
  out.g_a.assign(na, S(0.0));
  out.h_a.assign(na, S(0.0));
  const Dims dims{ns, na, 0};

  detail::MemoScope<S> memo;
  auto eval = [&]() {
    memo.begin_pass();
    const std::span<const H> zs(z);
    return r(zs.subspan(0, ns), zs.subspan(ns, na));
  };
  if (!active.empty() && active.size() != ns + na) {
    throw ArgumentError("eval_reward_partials: mask size does not match the number of coordinates");
  }
  bool have_value = false;
  for (std::size_t k = 0; k < ns + na; ++k) {
    if (!active.empty() && !active[k]) continue;
    z[k].d1 = S(1.0);
    H y;
    try {
      y = eval();
    } catch (const DomainError& e) {
      throw PropagationError("reward partials w.r.t. " + detail::coordinate_name(k, dims) + ": " +
                             e.what());
    }
    z[k].d1 = S(0.0);
    if (!detail::finite(y)) {
      throw PropagationError("non-finite reward partial w.r.t. " +
                             detail::coordinate_name(k, dims));
    }
    if (!have_value) out.value = y.v;
    have_value = true;
    if (k < ns) {
      out.g_s[k] = y.d1;
      out.h_s[k] = y.d2;
    } else {
      out.g_a[k - ns] = y.d1;
      out.h_a[k - ns] = y.d2;
    }
  }
  if (!have_value) {
    H y;
    try {
      y = eval();
    } catch (const DomainError& e) {
      throw PropagationError(std::string("reward: ") + e.what());
    }
    if (!std::isfinite(primal(y.v))) throw PropagationError("non-finite reward");
    out.value = y.v;
  }
  return out;
}

}  // namespace disprod::ad
