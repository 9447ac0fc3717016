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

#include "bfce/sizing.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bfce/error.h"
#include "bfce/estimator.h"
#include "bfce/fpp.h"

namespace bfce {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void RequireCapacity(uint64_t s_max) {
  if (s_max < 1) throw Error(ErrorCode::kInvalidParameters, "s_max must be >= 1");
}

}  // namespace

FilterSize ClassicalSize(uint64_t s_max, double target_fpp) {
  RequireCapacity(s_max);
  if (!(target_fpp > 0.0 && target_fpp < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "target fpp must lie in (0, 1)");
  }
  const double n = static_cast<double>(s_max);
  const double m_real = -n * std::log(target_fpp) / (kLn2 * kLn2);
  const uint64_t m = std::max<uint64_t>(1, static_cast<uint64_t>(std::floor(m_real)));
  const double k_real = static_cast<double>(m) / n * kLn2;
  uint64_t k = std::max<uint64_t>(1, static_cast<uint64_t>(std::floor(k_real)));
  k = std::min<uint64_t>(k, m);
  return {m, static_cast<uint32_t>(k)};
}

double CumulativeCountingError(uint64_t m, uint32_t k, uint64_t s_max) {
  double sum = 0.0;
  for (uint64_t s = 1; s <= s_max; ++s) {
    const double t = ApproxFpp(m, k, s);
    if (t >= 1.0) return std::numeric_limits<double>::infinity();
    sum += t / (1.0 - t);
  }
  return sum;
}

uint32_t KOptScanLimit(uint64_t m, uint64_t s_max) {
  RequireCapacity(s_max);
  const double classical = static_cast<double>(m) / static_cast<double>(s_max) * kLn2;
  const double hi = std::ceil(2.0 * classical) + 8.0;
  return static_cast<uint32_t>(std::min<double>(static_cast<double>(m), hi));
}

uint32_t KOptCumulative(uint64_t m, uint64_t s_max) {
  if (m < 1) throw Error(ErrorCode::kInvalidParameters, "m must be >= 1");
  const uint32_t k_hi = KOptScanLimit(m, s_max);
  uint32_t best_k = 1;
  double best = CumulativeCountingError(m, 1, s_max);
  for (uint32_t k = 2; k <= k_hi; ++k) {
    const double e = CumulativeCountingError(m, k, s_max);
    if (e < best) {
      best = e;
      best_k = k;
    }
  }
  return best_k;
}

double MeanErrorUpperBound(uint64_t m, uint32_t k, uint64_t s_max) {
  const double t = ApproxFpp(m, k, s_max);
  if (t >= kDegenerateFppThreshold) {
    throw Error(ErrorCode::kDegenerateFpp, "fpp at s_max is numerically 1");
  }
  return static_cast<double>(s_max) * t / (1.0 - t);
}

FilterSize SizeForErrorBudget(uint64_t s_max, double target_mean_error) {
  RequireCapacity(s_max);
  if (!(target_mean_error > 0.0)) {
    throw Error(ErrorCode::kInvalidParameters, "error budget must be positive");
  }
  auto error_at = [&](uint64_t m) {
    return CumulativeCountingError(m, KOptCumulative(m, s_max), s_max);
  };

  // Find an upper bracket; the error vanishes as m grows.
  uint64_t hi = std::max<uint64_t>(1, s_max);
  while (error_at(hi) > target_mean_error) {
    if (hi > (std::numeric_limits<uint64_t>::max() >> 2)) {
      throw Error(ErrorCode::kOutOfRange, "error budget not reachable");
    }
    hi *= 2;
  }
  uint64_t lo = 0;  // error_at(lo) > budget, or lo is below the legal range
  while (hi - lo > 1) {
    const uint64_t mid = lo + (hi - lo) / 2;
    if (error_at(mid) <= target_mean_error) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return {hi, KOptCumulative(hi, s_max)};
}

}  // namespace bfce
