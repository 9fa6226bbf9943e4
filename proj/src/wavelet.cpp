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

#include "gamestock/wavelet.hpp"

namespace gamestock::wavelet {

namespace {

// Orthonormal Daubechies scaling filters (sum = sqrt(2), unit norm).
constexpr std::array<double, 2> kDb1 = {0.7071067811865476, 0.7071067811865476};
constexpr std::array<double, 4> kDb2 = {0.48296291314453416, 0.8365163037378079,
                                        0.2241438680420134, -0.12940952255126037};
constexpr std::array<double, 6> kDb3 = {0.33267055295008263, 0.8068915093110925,
                                        0.45987750211849154, -0.13501102001025458,
                                        -0.08544127388202666, 0.03522629188570953};
constexpr std::array<double, 8> kDb4 = {0.2303778133088965,   0.7148465705529157,
                                        0.6308807679298589,   -0.027983769416859854,
                                        -0.18703481171909309, 0.030841381835560764,
                                        0.0328830116668852,   -0.010597401785069032};

}  // namespace

std::span<const double> daubechies(std::string_view name) {
  if (name == "db1" || name == "haar") return kDb1;
  if (name == "db2") return kDb2;
  if (name == "db3") return kDb3;
  if (name == "db4") return kDb4;
  throw Error("unknown wavelet '" + std::string(name) + "' (expected db1, db2, db3 or db4)");
}

Boundary parse_boundary(std::string_view name) {
  if (name == "periodization") return Boundary::kPeriodization;
  if (name == "symmetric") return Boundary::kSymmetric;
  throw Error("unknown wavelet boundary '" + std::string(name) + "'");
}

std::string_view boundary_name(Boundary b) {
  return b == Boundary::kPeriodization ? "periodization" : "symmetric";
}

}  // namespace gamestock::wavelet
