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

#ifndef BFCE_SIZING_H_
#define BFCE_SIZING_H_

#include <cstdint>

namespace bfce {

struct FilterSize {
  uint64_t m;
  uint32_t k;

  friend bool operator==(const FilterSize&, const FilterSize&) = default;
};

// Classical sizing for a target false-positive probability at capacity s_max:
//   m = floor(-s_max ln(t) / ln(2)^2),  k = floor((m / s_max) ln 2),
// both clamped to at least 1 (and k to at most m). Flooring both reproduces
// the commonly quoted (162945, 6) for s_max = 17000, t = 0.01.
// Throws Error(kInvalidParameters) unless s_max >= 1 and 0 < t < 1.
FilterSize ClassicalSize(uint64_t s_max, double target_fpp);

// sum_{s=0..s_max} t_s / (1 - t_s) with t_s = ApproxFpp(m, k, s): the mean
// counting error accumulated while filling one by one up to s_max.
// Returns +inf once some t_s rounds to 1.
double CumulativeCountingError(uint64_t m, uint32_t k, uint64_t s_max);

// Upper end of the k scan used by KOptCumulative.
uint32_t KOptScanLimit(uint64_t m, uint64_t s_max);

// argmin over k in [1, KOptScanLimit] of CumulativeCountingError; ties go to
// the smaller k.
uint32_t KOptCumulative(uint64_t m, uint64_t s_max);

// s_max * t / (1 - t) with t = ApproxFpp(m, k, s_max). Bounds the cumulative
// error from above because t_s is nondecreasing in s and t_0 = 0.
// Throws Error(kDegenerateFpp) when t is numerically 1.
double MeanErrorUpperBound(uint64_t m, uint32_t k, uint64_t s_max);

// Smallest m whose cumulative counting error, at k = KOptCumulative(m, s_max),
// is within the budget. Throws Error(kInvalidParameters) unless budget > 0.
FilterSize SizeForErrorBudget(uint64_t s_max, double target_mean_error);

}  // namespace bfce

#endif  // BFCE_SIZING_H_
