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

// Reverse-mode scalar for exact gradients of policy losses.
//
// A Var is a value plus an index into the thread-local tape. Index -1 marks a
// constant; operations whose operands are all constants produce constants and
// never touch the tape. Multiplying by an exact constant zero also yields a
// constant, which keeps the unseeded tangent parts of hyper-dual passes off
// the tape entirely.

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace disprod::ad {

class Tape {
 public:
  struct Node {
    std::int32_t lhs;
    std::int32_t rhs;
    double dlhs;
    double drhs;
  };

  std::int32_t push(std::int32_t lhs, double dlhs, std::int32_t rhs, double drhs) {
    nodes_.push_back({lhs, rhs, dlhs, drhs});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }
  std::int32_t push_input() { return push(-1, 0.0, -1, 0.0); }

  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  // Adjoints of every node with respect to `output`.
  const std::vector<double>& backward(std::int32_t output);

 private:
  std::vector<Node> nodes_;
  std::vector<double> adjoints_;
};

namespace detail {
inline thread_local Tape tape;
}  // namespace detail

inline Tape& active_tape() { return detail::tape; }

struct Var {
  double value = 0.0;
  std::int32_t index = -1;

  Var() = default;
  Var(double v) : value(v) {}  // NOLINT(google-explicit-constructor)
  Var(double v, std::int32_t i) : value(v), index(i) {}

  bool is_constant() const { return index < 0; }

  static Var input(double v) { return {v, active_tape().push_input()}; }
};

// Replays primal-only results across the seeded passes of one partials
// evaluation. Every pass computes the same values and derivative
// coefficients; only the tangents differ. The first pass records each
// primal-only Var and later passes reuse it instead of pushing new nodes.
class PrimalMemo {
 public:
  enum class Mode { kOff, kRecord, kReplay };

  template <class F>
  Var operator()(F&& f) {
    if (mode_ == Mode::kReplay) {
      if (cursor_ >= values_.size()) throw std::logic_error("primal memo replay overran record");
      return values_[cursor_++];
    }
    const Var v = f();
    if (mode_ == Mode::kRecord) values_.push_back(v);
    return v;
  }

  void record() {
    mode_ = Mode::kRecord;
    values_.clear();
  }
  void replay() {
    mode_ = Mode::kReplay;
    cursor_ = 0;
  }
  void off() {
    mode_ = Mode::kOff;
    values_.clear();
  }
  Mode mode() const { return mode_; }

 private:
  Mode mode_ = Mode::kOff;
  std::vector<Var> values_;
  std::size_t cursor_ = 0;
};

namespace detail {
inline thread_local PrimalMemo memo;
}  // namespace detail

inline PrimalMemo& active_memo() { return detail::memo; }

namespace detail {

inline Var unary(double value, const Var& a, double da) {
  if (a.is_constant()) return Var(value);
  return {value, active_tape().push(a.index, da, -1, 0.0)};
}

inline Var binary(double value, const Var& a, double da, const Var& b, double db) {
  if (a.is_constant()) return unary(value, b, db);
  if (b.is_constant()) return unary(value, a, da);
  return {value, active_tape().push(a.index, da, b.index, db)};
}

}  // namespace detail

inline Var operator+(const Var& a, const Var& b) {
  if (b.is_constant() && b.value == 0.0) return a;
  if (a.is_constant() && a.value == 0.0) return b;
  return detail::binary(a.value + b.value, a, 1.0, b, 1.0);
}
inline Var operator-(const Var& a, const Var& b) {
  if (b.is_constant() && b.value == 0.0) return a;
  return detail::binary(a.value - b.value, a, 1.0, b, -1.0);
}
inline Var operator-(const Var& a) { return detail::unary(-a.value, a, -1.0); }
inline Var operator*(const Var& a, const Var& b) {
  if ((a.is_constant() && a.value == 0.0) || (b.is_constant() && b.value == 0.0)) {
    return Var(0.0);
  }
  return detail::binary(a.value * b.value, a, b.value, b, a.value);
}
inline Var operator/(const Var& a, const Var& b) {
  if (a.is_constant() && a.value == 0.0) return Var(0.0);
  const double inv = 1.0 / b.value;
  return detail::binary(a.value * inv, a, inv, b, -a.value * inv * inv);
}

inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }
inline Var& operator/=(Var& a, const Var& b) { return a = a / b; }

inline Var sin(const Var& a) { return detail::unary(std::sin(a.value), a, std::cos(a.value)); }
inline Var cos(const Var& a) { return detail::unary(std::cos(a.value), a, -std::sin(a.value)); }
inline Var exp(const Var& a) {
  const double e = std::exp(a.value);
  return detail::unary(e, a, e);
}
inline Var log(const Var& a) { return detail::unary(std::log(a.value), a, 1.0 / a.value); }
inline Var sqrt(const Var& a) {
  const double r = std::sqrt(a.value);
  return detail::unary(r, a, 0.5 / r);
}
inline Var tanh(const Var& a) {
  const double t = std::tanh(a.value);
  return detail::unary(t, a, 1.0 - t * t);
}
inline Var pow(const Var& a, double p) {
  return detail::unary(std::pow(a.value, p), a, p * std::pow(a.value, p - 1.0));
}

}  // namespace disprod::ad
