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

// Multilevel discrete wavelet analysis/synthesis with Daubechies filters.
//
// Signals are column-major L x D matrices: each column is one indicator
// channel, decomposed independently. Filters are applied by correlation,
//
//   cA[k] = sum_n h[n] x[2k + n + s],   cD[k] = sum_n g[n] x[2k + n + s],
//
// with g[n] = (-1)^n h[K-1-n]. For Haar this gives cA = (x0 + x1)/sqrt(2) and
// cD = (x0 - x1)/sqrt(2). The offset s matches PyWavelets for both boundary
// modes, so coefficients agree with pywt.wavedec for even-length sub-bands.
//
// Periodization on an odd-length sub-band transforms the first n-1 samples
// and carries the last sample unfiltered into the approximation band. The
// level stays orthonormal, so the coefficient count equals the input length
// and energy is preserved for every input length.

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gamestock/common.hpp"

namespace gamestock::wavelet {

enum class Boundary { kPeriodization, kSymmetric };

Boundary parse_boundary(std::string_view name);
std::string_view boundary_name(Boundary b);

// Low-pass reconstruction filter h of the named Daubechies wavelet
// (db1..db4). Throws Error for unknown names.
std::span<const double> daubechies(std::string_view name);

template <typename Scalar>
using Signal = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
struct Coeffs {
  Signal<Scalar> approx;               // cA at the deepest level
  std::vector<Signal<Scalar>> detail;  // detail[k-1] = cD_k, k = 1 (finest) .. level
  std::vector<Eigen::Index> input_lengths;  // length entering each level
  std::string wavelet;
  int level = 0;
  Boundary boundary = Boundary::kPeriodization;

  Eigen::Index channels() const { return approx.cols(); }
};

// Deepest level whose every sub-band split still sees at least two samples.
inline int max_level(Eigen::Index length, Boundary boundary, Eigen::Index filter_length) {
  int level = 0;
  for (;;) {
    if (length < 2) return level;
    Eigen::Index next = boundary == Boundary::kPeriodization
                            ? length / 2 + (length % 2)
                            : (length + filter_length - 1) / 2;
    if (boundary == Boundary::kSymmetric && next >= length) return level;
    length = next;
    ++level;
  }
}

namespace detail {

inline Eigen::Index wrap(Eigen::Index i, Eigen::Index n) {
  i %= n;
  return i < 0 ? i + n : i;
}

inline Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
  for (;;) {
    if (i < 0) {
      i = -i - 1;
    } else if (i >= n) {
      i = 2 * n - i - 1;
    } else {
      return i;
    }
  }
}

inline double high_tap(std::span<const double> h, Eigen::Index n) {
  const auto k = static_cast<Eigen::Index>(h.size());
  const double v = h[static_cast<std::size_t>(k - 1 - n)];
  return n % 2 == 0 ? v : -v;
}

template <typename Scalar>
void analyze_level(const Signal<Scalar>& x, std::span<const double> h, Boundary boundary,
                   Signal<Scalar>& approx, Signal<Scalar>& detail) {
  const auto taps = static_cast<Eigen::Index>(h.size());
  const auto n = x.rows();
  const auto d = x.cols();
  if (boundary == Boundary::kPeriodization) {
    const auto even = n - n % 2;
    const auto half = even / 2;
    const auto shift = -(taps / 2 - 1);
    approx.setZero(half + n % 2, d);
    detail.setZero(half, d);
    for (Eigen::Index k = 0; k < half; ++k) {
      for (Eigen::Index t = 0; t < taps; ++t) {
        const auto src = wrap(2 * k + t + shift, even);
        const double lo = h[static_cast<std::size_t>(t)];
        const double hi = high_tap(h, t);
        approx.row(k) += lo * x.row(src);
        detail.row(k) += hi * x.row(src);
      }
    }
    if (n % 2 == 1) approx.row(half) = x.row(n - 1);
  } else {
    const auto out = (n + taps - 1) / 2;
    const auto shift = -(taps - 2);
    approx.setZero(out, d);
    detail.setZero(out, d);
    for (Eigen::Index k = 0; k < out; ++k) {
      for (Eigen::Index t = 0; t < taps; ++t) {
        const auto src = reflect(2 * k + t + shift, n);
        approx.row(k) += h[static_cast<std::size_t>(t)] * x.row(src);
        detail.row(k) += high_tap(h, t) * x.row(src);
      }
    }
  }
}

template <typename Scalar>
Signal<Scalar> synthesize_level(const Signal<Scalar>& approx, const Signal<Scalar>& detail,
                                Eigen::Index length, std::span<const double> h,
                                Boundary boundary) {
  const auto taps = static_cast<Eigen::Index>(h.size());
  const auto d = approx.cols();
  if (boundary == Boundary::kPeriodization) {
    const auto even = length - length % 2;
    const auto half = even / 2;
    const auto shift = -(taps / 2 - 1);
    Signal<Scalar> x = Signal<Scalar>::Zero(length, d);
    for (Eigen::Index k = 0; k < half; ++k) {
      for (Eigen::Index t = 0; t < taps; ++t) {
        const auto dst = wrap(2 * k + t + shift, even);
        x.row(dst) += h[static_cast<std::size_t>(t)] * approx.row(k) + high_tap(h, t) * detail.row(k);
      }
    }
    if (length % 2 == 1) x.row(length - 1) = approx.row(half);
    return x;
  }
  const auto m = approx.rows();
  Signal<Scalar> full = Signal<Scalar>::Zero(2 * m + taps, d);
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index t = 0; t < taps; ++t) {
      full.row(2 * k + t) += h[static_cast<std::size_t>(t)] * approx.row(k) + high_tap(h, t) * detail.row(k);
    }
  }
  return full.middleRows(taps - 2, length);
}

}  // namespace detail

// Cascade analysis: the approximation band of each level feeds the next.
template <typename Derived>
Coeffs<typename Derived::Scalar> decompose(const Eigen::MatrixBase<Derived>& window,
                                           std::string_view wavelet, int level,
                                           Boundary boundary = Boundary::kPeriodization) {
  using Scalar = typename Derived::Scalar;
  const auto h = daubechies(wavelet);
  if (level < 1) throw Error("wavelet level must be at least 1");
  if (window.rows() < static_cast<Eigen::Index>(h.size())) {
    throw Error("window of length " + std::to_string(window.rows()) +
                " is shorter than the " + std::string(wavelet) + " filter (" +
                std::to_string(h.size()) + " taps)");
  }
  const int deepest = max_level(window.rows(), boundary, static_cast<Eigen::Index>(h.size()));
  if (level > deepest) {
    throw Error("wavelet level " + std::to_string(level) + " too deep for length " +
                std::to_string(window.rows()) + "; max level is " + std::to_string(deepest));
  }
  Coeffs<Scalar> out;
  out.wavelet = std::string(wavelet);
  out.level = level;
  out.boundary = boundary;
  Signal<Scalar> current = window;
  for (int k = 0; k < level; ++k) {
    Signal<Scalar> approx;
    Signal<Scalar> det;
    out.input_lengths.push_back(current.rows());
    detail::analyze_level(current, h, boundary, approx, det);
    out.detail.push_back(std::move(det));
    current = std::move(approx);
  }
  out.approx = std::move(current);
  return out;
}

// Synthesis bank; exact inverse of decompose for both boundary modes.
template <typename Scalar>
Signal<Scalar> reconstruct(const Coeffs<Scalar>& coeffs) {
  const auto h = daubechies(coeffs.wavelet);
  Signal<Scalar> current = coeffs.approx;
  for (int k = coeffs.level; k >= 1; --k) {
    current = detail::synthesize_level(current, coeffs.detail[static_cast<std::size_t>(k - 1)],
                                       coeffs.input_lengths[static_cast<std::size_t>(k - 1)], h,
                                       coeffs.boundary);
  }
  return current;
}

template <typename Scalar>
Scalar energy(const Coeffs<Scalar>& coeffs) {
  Scalar e = coeffs.approx.squaredNorm();
  for (const auto& d : coeffs.detail) e += d.squaredNorm();
  return e;
}

template <typename Scalar>
Eigen::Index coefficient_count(const Coeffs<Scalar>& coeffs) {
  Eigen::Index n = coeffs.approx.rows();
  for (const auto& d : coeffs.detail) n += d.rows();
  return n;
}

}  // namespace gamestock::wavelet
