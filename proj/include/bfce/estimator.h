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

#ifndef BFCE_ESTIMATOR_H_
#define BFCE_ESTIMATOR_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bfce/filter.h"
#include "bfce/fpp.h"

namespace bfce {

// Increments whose false-positive probability reaches this are rejected.
inline constexpr double kDegenerateFppThreshold = 1.0 - 0x1p-40;

// Running sums of the per-transition counting error:
//   mean = sum_{r=start..s-1} t_r / (1 - t_r)
//   var  = sum_{r=start..s-1} t_r / (1 - t_r)^2
// where t_r is the model's false-positive probability in filling state r.
class CorrectionAccumulator {
 public:
  // start is 1 for one-by-one filling and b for batch-start filling.
  explicit CorrectionAccumulator(FppModel model, uint64_t start = 1,
                                 CorrectionSums sums = {});

  // Call exactly once per counter increment with the state before it.
  // Throws Error(kDegenerateFpp) if t >= kDegenerateFppThreshold; the sums
  // are left untouched in that case.
  void OnCounterIncrement(const FillingState& before);

  double sum_mean() const { return sums_.mean; }
  double sum_var() const { return sums_.var; }
  const CorrectionSums& sums() const { return sums_; }
  uint64_t start() const { return start_; }
  const FppModel& model() const { return model_; }

  friend bool operator==(const CorrectionAccumulator&,
                         const CorrectionAccumulator&) = default;

 private:
  FppModel model_;
  uint64_t start_;
  CorrectionSums sums_;
};

enum class EstimateMethod : uint8_t { kCorrected, kSwamidass, kPapapetrou };

struct CardinalityEstimate {
  double mean = 0.0;
  std::optional<double> std_dev;  // only the corrected method provides one
  uint64_t counter = 0;
  EstimateMethod method = EstimateMethod::kCorrected;
};

// mean = s + sum_mean, std_dev = sqrt(sum_var).
CardinalityEstimate CorrectedEstimate(const CountingBloomFilter& filter,
                                      const CorrectionAccumulator& acc);

// -(m / k) ln(1 - B / m). Throws Error(kSaturatedFilter) when B == m and
// Error(kInvalidParameters) when B > m.
double EstimateSwamidass(uint64_t m, uint32_t k, uint64_t ones);

// ln(1 - B / m) / (k ln(1 - 1 / m)), the maximum-likelihood count.
// Requires m >= 2; same errors as EstimateSwamidass.
double EstimatePapapetrou(uint64_t m, uint32_t k, uint64_t ones);

// P(X = r) = (1 - t) t^r, the law of the number of false positives between
// two counter increments. Requires 0 <= t < 1.
double ErrorDistributionPmf(double t, uint64_t r);

// A filter together with its correction accumulator, kept in lockstep.
class CardinalityCounter {
 public:
  CardinalityCounter(uint64_t m, uint32_t k, uint64_t seed,
                     FppVariant variant = FppVariant::kApproximate);

  // Returns true iff the counter was incremented.
  bool Add(std::string_view element) { return Add(filter_.family().Hash(element)); }
  bool Add(uint64_t id) { return Add(AsBytes(EncodeId(id))); }
  bool Add(const HashPair& h);

  // Batch-start filling of an empty counter; the accumulator restarts at b.
  uint64_t AddBatchInitial(std::span<const std::string> elements);

  CardinalityEstimate Estimate() const { return CorrectedEstimate(filter_, acc_); }
  CardinalityEstimate Swamidass() const;
  CardinalityEstimate Papapetrou() const;

  const CountingBloomFilter& filter() const { return filter_; }
  const CorrectionAccumulator& accumulator() const { return acc_; }

  std::string Serialize() const { return filter_.Serialize(acc_.sums()); }
  static CardinalityCounter Deserialize(std::string_view data,
                                        FppVariant variant = FppVariant::kApproximate);

  friend bool operator==(const CardinalityCounter&, const CardinalityCounter&) = default;

 private:
  CardinalityCounter(CountingBloomFilter filter, CorrectionAccumulator acc)
      : filter_(std::move(filter)), acc_(std::move(acc)) {}

  CountingBloomFilter filter_;
  CorrectionAccumulator acc_;
};

}  // namespace bfce

#endif  // BFCE_ESTIMATOR_H_
