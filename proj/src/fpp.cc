// Copyright 2026 The bfce Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "bfce/fpp.h"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "bfce/error.h"

namespace bfce {
namespace {

void ValidateMk(uint64_t m, uint32_t k) {
  if (m < 1 || k < 1 || k > m) {
    throw Error(ErrorCode::kInvalidParameters,
                "fpp requires 1 <= k <= m (k=" + std::to_string(k) +
                    ", m=" + std::to_string(m) + ")");
  }
}

BigInt Factorial(uint32_t n) {
  BigInt f = 1;
  for (uint32_t i = 2; i <= n; ++i) f *= i;
  return f;
}

BigInt Binomial(uint32_t n, uint32_t r) {
  if (r > n) return 0;
  BigInt c = 1;
  for (uint32_t j = 1; j <= r; ++j) {
    c *= n - r + j;
    c /= j;
  }
  return c;
}

double RatioToDouble(const BigInt& num, const BigInt& den) {
  using Wide = boost::multiprecision::cpp_bin_float_100;
  return static_cast<double>(Wide(num) / Wide(den));
}

}  // namespace

double ApproxFpp(uint64_t m, uint32_t k, uint64_t n) {
  ValidateMk(m, k);
  const double x = static_cast<double>(k) * static_cast<double>(n) / static_cast<double>(m);
  return std::pow(-std::expm1(-x), static_cast<double>(k));
}

std::vector<std::vector<BigInt>> StirlingSecondKindTable(uint32_t max_n, uint32_t max_i) {
  std::vector<std::vector<BigInt>> s(max_n + 1, std::vector<BigInt>(max_i + 1, 0));
  s[0][0] = 1;
  for (uint32_t n = 0; n < max_n; ++n) {
    for (uint32_t i = 1; i <= max_i; ++i) {
      s[n + 1][i] = i * s[n][i] + s[n][i - 1];
    }
  }
  return s;
}

BigInt StirlingSecondKindExplicit(uint32_t n, uint32_t i) {
  BigInt sum = 0;
  for (uint32_t j = 0; j <= i; ++j) {
    BigInt term = Binomial(i, j) * boost::multiprecision::pow(BigInt(j), n);
    if ((i - j) % 2 == 0) {
      sum += term;
    } else {
      sum -= term;
    }
  }
  return sum / Factorial(i);
}

double ExactFpp(uint64_t m, uint32_t k, uint64_t n) {
  ValidateMk(m, k);
  if (m > kExactMaxM || n > kExactMaxKn / k) {
    throw Error(ErrorCode::kOutOfRange,
                "exact fpp limited to m <= " + std::to_string(kExactMaxM) +
                    " and k*n <= " + std::to_string(kExactMaxKn) + "; use ApproxFpp");
  }
  const auto kn = static_cast<uint32_t>(k * n);
  const auto mm = static_cast<uint32_t>(m);
  const auto stirling = StirlingSecondKindTable(kn, mm);

  BigInt num = 0;
  BigInt i_factorial = 1;
  for (uint32_t i = 1; i <= mm; ++i) {
    i_factorial *= i;
    if (stirling[kn][i] == 0) continue;
    num += boost::multiprecision::pow(BigInt(i), k) * i_factorial * Binomial(mm, i) *
           stirling[kn][i];
  }
  const BigInt den = boost::multiprecision::pow(BigInt(mm), k * static_cast<uint32_t>(n + 1));
  return std::clamp(RatioToDouble(num, den), 0.0, 1.0);
}

FppModel::FppModel(FppVariant variant, uint64_t m, uint32_t k)
    : variant_(variant), m_(m), k_(k) {
  ValidateMk(m, k);
}

double FppModel::At(const FillingState& state) const {
  switch (variant_) {
    case FppVariant::kApproximate:
      return ApproxFpp(m_, k_, state.s);
    case FppVariant::kExact:
      return ExactFpp(m_, k_, state.s);
    case FppVariant::kFillRatio:
      return std::pow(static_cast<double>(state.ones) / static_cast<double>(m_), k_);
  }
  return 0.0;
}

}  // namespace bfce
