// Copyright 2026 The GameStock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Exhaustive reference for the three-player action game, written without the
// library's payoff or solver code.

#pragma once

#include <algorithm>
#include <set>
#include <vector>

#include "gamestock/game.hpp"

namespace gamestock::testing {

// Utility written out term by term.
inline double oracle_utility(int p, const ActionProfile& a, double r, const GameSpec& s) {
  double follow = 0.0;
  for (int q = 0; q < 3; ++q) {
    if (q != p) follow += s.beta[p][q] * a[q];
  }
  return a[p] * r + s.lambda_follow * a[p] * follow;
}

inline std::vector<ActionProfile> all_profiles() {
  std::vector<ActionProfile> out;
  for (int x = -1; x <= 1; ++x)
    for (int y = -1; y <= 1; ++y)
      for (int z = -1; z <= 1; ++z) out.push_back({x, y, z});
  return out;
}

// Every unilateral deviation checked explicitly.
inline std::set<ActionProfile> oracle_equilibria(double r, const GameSpec& s) {
  std::set<ActionProfile> out;
  for (const auto& a : all_profiles()) {
    bool stable = true;
    for (int p = 0; p < 3 && stable; ++p) {
      for (int alt = -1; alt <= 1; ++alt) {
        if (alt == a[p]) continue;
        auto b = a;
        b[p] = alt;
        if (oracle_utility(p, b, r, s) > oracle_utility(p, a, r, s)) stable = false;
      }
    }
    if (stable) out.insert(a);
  }
  return out;
}

inline double oracle_regret(const ActionProfile& a, double r, const GameSpec& s) {
  double total = 0.0;
  for (int p = 0; p < 3; ++p) {
    double best = -1e300;
    for (int alt = -1; alt <= 1; ++alt) {
      auto b = a;
      b[p] = alt;
      best = std::max(best, oracle_utility(p, b, r, s));
    }
    total += best - oracle_utility(p, a, r, s);
  }
  return total;
}

inline double oracle_min_regret(double r, const GameSpec& s) {
  double best = 1e300;
  for (const auto& a : all_profiles()) best = std::min(best, oracle_regret(a, r, s));
  return best;
}

}  // namespace gamestock::testing
