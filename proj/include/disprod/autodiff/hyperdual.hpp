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

// Hyper-dual numbers: value, first and pure second derivative along one
// seeded input coordinate. Seeding coordinate k with (z_k, 1, 0) and every
// other input with (z_j, 0, 0) yields (f, df/dz_k, d2f/dz_k^2) exactly for any
// composition of the functions below.
//
// The component type S is double for plain evaluation or ad::Var when the
// partials themselves must be differentiated (policy gradients through the
// propagated moments).

#include <cmath>
#include <concepts>
#include <string>
#include <utility>

#include "disprod/autodiff/tape.hpp"
#include "disprod/errors.hpp"

namespace disprod::ad {

// Smallest magnitude accepted for a divisor, and smallest argument accepted by
// log and sqrt, when derivatives are being carried.
inline constexpr double kDomainEpsilon = 1e-12;

inline double primal(double x) { return x; }
inline double primal(const Var& x) { return x.value; }

template <class S>
struct HyperDual {
  S v{};
  S d1{};
  S d2{};

  HyperDual() = default;
  HyperDual(double c) : v(c), d1(0.0), d2(0.0) {}  // NOLINT(google-explicit-constructor)
  explicit HyperDual(const S& value)
    requires(!std::same_as<S, double>)
      : v(value), d1(0.0), d2(0.0) {}
  HyperDual(S value, S first, S second) : v(value), d1(first), d2(second) {}

  static HyperDual seeded(const S& value) { return {value, S(1.0), S(0.0)}; }
};

template <class S>
double primal(const HyperDual<S>& x) {
  return primal(x.v);
}

// ---- scalar helpers shared by double and Var --------------------------------

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double softplus(double x) {
  // log(1 + e^x) without overflow.
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

inline Var sigmoid(const Var& a) {
  const double s = sigmoid(a.value);
  return detail::unary(s, a, s * (1.0 - s));
}

inline Var softplus(const Var& a) { return detail::unary(softplus(a.value), a, sigmoid(a.value)); }

using std::cos;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sqrt;
using std::tanh;

// ---- hyper-dual arithmetic --------------------------------------------------

namespace detail {

// Evaluates a quantity that depends on primal values only. For Var it goes
// through the active PrimalMemo, so repeated seeded passes share tape nodes.
template <class S, class F>
S primal_only(F&& f) {
  if constexpr (std::same_as<S, Var>) {
    return active_memo()(std::forward<F>(f));
  } else {
    return f();
  }
}

// True when both tangents are exact constant zeros (Var only). The tangent
// arithmetic would then fold to constant zeros anyway, so it can be skipped.
template <class S>
bool tangent_free(const HyperDual<S>& a) {
  if constexpr (std::same_as<S, Var>) {
    return a.d1.is_constant() && a.d1.value == 0.0 && a.d2.is_constant() && a.d2.value == 0.0;
  } else {
    return false;
  }
}

// f applied to a, given f, f' and f'' evaluated at a.v.
template <class S>
HyperDual<S> chain(const HyperDual<S>& a, const S& f, const S& df, const S& d2f) {
  if (tangent_free(a)) return {f, S(0.0), S(0.0)};
  return {f, df * a.d1, d2f * (a.d1 * a.d1) + df * a.d2};
}

[[noreturn]] inline void domain_fail(const char* what, double x) {
  throw DomainError(std::string(what) + " outside guarded domain at " + std::to_string(x));
}

}  // namespace detail

template <class S>
HyperDual<S> operator+(const HyperDual<S>& a, const HyperDual<S>& b) {
  return {detail::primal_only<S>([&] { return a.v + b.v; }), a.d1 + b.d1, a.d2 + b.d2};
}
template <class S>
HyperDual<S> operator-(const HyperDual<S>& a, const HyperDual<S>& b) {
  return {detail::primal_only<S>([&] { return a.v - b.v; }), a.d1 - b.d1, a.d2 - b.d2};
}
template <class S>
HyperDual<S> operator-(const HyperDual<S>& a) {
  return {detail::primal_only<S>([&] { return -a.v; }), -a.d1, -a.d2};
}
template <class S>
HyperDual<S> operator*(const HyperDual<S>& a, const HyperDual<S>& b) {
  if (detail::tangent_free(a) && detail::tangent_free(b)) {
    return {detail::primal_only<S>([&] { return a.v * b.v; }), S(0.0), S(0.0)};
  }
  return {detail::primal_only<S>([&] { return a.v * b.v; }), a.d1 * b.v + a.v * b.d1,
          a.d2 * b.v + S(2.0) * (a.d1 * b.d1) + a.v * b.d2};
}

template <class S>
HyperDual<S> reciprocal(const HyperDual<S>& b) {
  if (std::abs(primal(b.v)) < kDomainEpsilon) detail::domain_fail("division", primal(b.v));
  const S inv = detail::primal_only<S>([&] { return S(1.0) / b.v; });
  const S minus_inv2 = detail::primal_only<S>([&] { return -(inv * inv); });
  const S d2 = detail::primal_only<S>([&] { return S(-2.0) * minus_inv2 * inv; });
  return detail::chain(b, inv, minus_inv2, d2);
}

template <class S>
HyperDual<S> operator/(const HyperDual<S>& a, const HyperDual<S>& b) {
  return a * reciprocal(b);
}

// Mixed operations with plain constants.
template <class S>
HyperDual<S> operator+(const HyperDual<S>& a, double c) {
  return {detail::primal_only<S>([&] { return a.v + S(c); }), a.d1, a.d2};
}
template <class S>
HyperDual<S> operator+(double c, const HyperDual<S>& a) {
  return a + c;
}
template <class S>
HyperDual<S> operator-(const HyperDual<S>& a, double c) {
  return {detail::primal_only<S>([&] { return a.v - S(c); }), a.d1, a.d2};
}
template <class S>
HyperDual<S> operator-(double c, const HyperDual<S>& a) {
  return {detail::primal_only<S>([&] { return S(c) - a.v; }), -a.d1, -a.d2};
}
template <class S>
HyperDual<S> operator*(const HyperDual<S>& a, double c) {
  if (c == 0.0) return HyperDual<S>(0.0);
  return {detail::primal_only<S>([&] { return a.v * S(c); }), a.d1 * S(c), a.d2 * S(c)};
}
template <class S>
HyperDual<S> operator*(double c, const HyperDual<S>& a) {
  return a * c;
}
template <class S>
HyperDual<S> operator/(const HyperDual<S>& a, double c) {
  if (std::abs(c) < kDomainEpsilon) detail::domain_fail("division", c);
  return a * (1.0 / c);
}
template <class S>
HyperDual<S> operator/(double c, const HyperDual<S>& a) {
  return c * reciprocal(a);
}

template <class S, class T>
HyperDual<S>& operator+=(HyperDual<S>& a, const T& b) {
  return a = a + b;
}
template <class S, class T>
HyperDual<S>& operator-=(HyperDual<S>& a, const T& b) {
  return a = a - b;
}
template <class S, class T>
HyperDual<S>& operator*=(HyperDual<S>& a, const T& b) {
  return a = a * b;
}

// ---- elementary functions ---------------------------------------------------

template <class S>
HyperDual<S> sin(const HyperDual<S>& a) {
  using std::cos, std::sin;
  const S s = detail::primal_only<S>([&] { return sin(a.v); });
  const S c = detail::primal_only<S>([&] { return cos(a.v); });
  return detail::chain(a, s, c, detail::primal_only<S>([&] { return -s; }));
}

template <class S>
HyperDual<S> cos(const HyperDual<S>& a) {
  using std::cos, std::sin;
  const S s = detail::primal_only<S>([&] { return sin(a.v); });
  const S c = detail::primal_only<S>([&] { return cos(a.v); });
  return detail::chain(a, c, detail::primal_only<S>([&] { return -s; }),
                       detail::primal_only<S>([&] { return -c; }));
}

template <class S>
HyperDual<S> exp(const HyperDual<S>& a) {
  using std::exp;
  const S e = detail::primal_only<S>([&] { return exp(a.v); });
  return detail::chain(a, e, e, e);
}

template <class S>
HyperDual<S> log(const HyperDual<S>& a) {
  using std::log;
  if (primal(a.v) < kDomainEpsilon) detail::domain_fail("log", primal(a.v));
  const S inv = detail::primal_only<S>([&] { return S(1.0) / a.v; });
  return detail::chain(a, detail::primal_only<S>([&] { return log(a.v); }), inv,
                       detail::primal_only<S>([&] { return -(inv * inv); }));
}

template <class S>
HyperDual<S> sqrt(const HyperDual<S>& a) {
  using std::sqrt;
  if (primal(a.v) < kDomainEpsilon) detail::domain_fail("sqrt", primal(a.v));
  const S r = detail::primal_only<S>([&] { return sqrt(a.v); });
  const S d = detail::primal_only<S>([&] { return S(0.5) / r; });
  return detail::chain(a, r, d, detail::primal_only<S>([&] { return -(d / (S(2.0) * a.v)); }));
}

template <class S>
HyperDual<S> tanh(const HyperDual<S>& a) {
  using std::tanh;
  const S t = detail::primal_only<S>([&] { return tanh(a.v); });
  const S d = detail::primal_only<S>([&] { return S(1.0) - t * t; });
  return detail::chain(a, t, d, detail::primal_only<S>([&] { return S(-2.0) * t * d; }));
}

template <class S>
HyperDual<S> sigmoid(const HyperDual<S>& a) {
  const S s = detail::primal_only<S>([&] { return sigmoid(a.v); });
  const S d = detail::primal_only<S>([&] { return s * (S(1.0) - s); });
  return detail::chain(a, s, d, detail::primal_only<S>([&] { return d * (S(1.0) - S(2.0) * s); }));
}

template <class S>
HyperDual<S> softplus(const HyperDual<S>& a) {
  const S s = detail::primal_only<S>([&] { return sigmoid(a.v); });
  return detail::chain(a, detail::primal_only<S>([&] { return softplus(a.v); }), s,
                       detail::primal_only<S>([&] { return s * (S(1.0) - s); }));
}

// x^p for constant p. Non-integer p requires x > 0.
template <class S>
HyperDual<S> pow(const HyperDual<S>& a, double p) {
  using std::pow;
  if (p != std::floor(p) && primal(a.v) < kDomainEpsilon) detail::domain_fail("pow", primal(a.v));
  return detail::chain(a, detail::primal_only<S>([&] { return pow(a.v, p); }),
                       detail::primal_only<S>([&] { return S(p) * pow(a.v, p - 1.0); }),
                       detail::primal_only<S>([&] { return S(p * (p - 1.0)) * pow(a.v, p - 2.0); }));
}

// ---- scalar-generic helpers used by environment code ------------------------

template <class X>
X square(const X& x) {
  return x * x;
}

// sigmoid(10 * beta * (x - target)): smooth stand-in for x >= target.
template <class X>
X smooth_ge(const X& x, double target, double beta) {
  return sigmoid((x - target) * (10.0 * beta));
}

// Smooth clamp of x to [lo, hi]; sharpness k in 1/units.
template <class X>
X smooth_clamp(const X& x, double lo, double hi, double k) {
  return lo + (softplus((x - lo) * k) - softplus((x - hi) * k)) * (1.0 / k);
}

}  // namespace disprod::ad
