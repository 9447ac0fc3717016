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

#ifndef BFCE_FPP_H_
#define BFCE_FPP_H_

#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "bfce/filter.h"

namespace bfce {

using BigInt = boost::multiprecision::cpp_int;

// Limits under which ExactFpp evaluates the closed form exactly.
inline constexpr uint64_t kExactMaxM = 64;
inline constexpr uint64_t kExactMaxKn = 256;

// (1 - exp(-k n / m))^k
double ApproxFpp(uint64_t m, uint32_t k, uint64_t n);

// Exact false-positive probability after n insertions under ideal independent
// hashing:
//   m^-(k(n+1)) * sum_{i=1..m} i^k * i! * C(m, i) * S2(k n, i)
// evaluated in exact integer arithmetic and rounded to binary64 once.
// Throws Error(kOutOfRange) when m > kExactMaxM or k n > kExactMaxKn, and
// Error(kInvalidParameters) unless 1 <= k <= m.
double ExactFpp(uint64_t m, uint32_t k, uint64_t n);

// Rows 0..max_n of the Stirling numbers of the second kind, S2(n, i) for
// i <= max_i, by S2(n+1, i) = i S2(n, i) + S2(n, i-1).
std::vector<std::vector<BigInt>> StirlingSecondKindTable(uint32_t max_n, uint32_t max_i);

// The explicit alternating-sum form (1/i!) sum_j (-1)^(i-j) C(i, j) j^n.
// Kept as an independent cross-check of the table.
BigInt StirlingSecondKindExplicit(uint32_t n, uint32_t i);

enum class FppVariant : uint8_t {
  kApproximate,  // ApproxFpp with n = s
  kExact,        // ExactFpp with n = s
  kFillRatio,    // (ones / m)^k
};

class FppModel {
 public:
  FppModel(FppVariant variant, uint64_t m, uint32_t k);

  FppVariant variant() const { return variant_; }
  uint64_t m() const { return m_; }
  uint32_t k() const { return k_; }

  // False-positive probability of a filter in the given filling state.
  double At(const FillingState& state) const;

  friend bool operator==(const FppModel&, const FppModel&) = default;

 private:
  FppVariant variant_;
  uint64_t m_;
  uint32_t k_;
};

inline double FppAtState(const FppModel& model, const FillingState& state) {
  return model.At(state);
}

}  // namespace bfce

#endif  // BFCE_FPP_H_
