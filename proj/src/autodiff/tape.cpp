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

#include "disprod/autodiff/tape.hpp"

#include <algorithm>

#include "disprod/autodiff/gradient.hpp"

namespace disprod::ad {

namespace {
thread_local bool session_open = false;
}  // namespace

const std::vector<double>& Tape::backward(std::int32_t output) {
  adjoints_.assign(static_cast<std::size_t>(output) + 1, 0.0);
  adjoints_[output] = 1.0;
  for (std::int32_t i = output; i >= 0; --i) {
    const double adj = adjoints_[i];
    if (adj == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.lhs >= 0) adjoints_[n.lhs] += adj * n.dlhs;
    if (n.rhs >= 0) adjoints_[n.rhs] += adj * n.drhs;
  }
  adjoints_.resize(nodes_.size(), 0.0);
  return adjoints_;
}

TapeSession::TapeSession() {
  if (session_open) throw ArgumentError("nested gradient evaluation on one thread");
  session_open = true;
  active_tape().clear();
}

TapeSession::~TapeSession() {
  active_tape().clear();
  session_open = false;
}

}  // namespace disprod::ad
