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

#include "bfce/estimator.h"

#include <cmath>

#include "bfce/error.h"

namespace bfce {
namespace {

void ValidateOnes(uint64_t m, uint32_t k, uint64_t ones) {
  if (m < 1 || k < 1) {
    throw Error(ErrorCode::kInvalidParameters, "estimator requires m >= 1 and k >= 1");
  }
  if (ones > m) {
    throw Error(ErrorCode::kInvalidParameters, "more set bits than filter bits");
  }
  if (ones == m) {
    throw Error(ErrorCode::kSaturatedFilter, "all bits set; estimate is unbounded");
  }
}

uint64_t AccumulatorStart(const CountingBloomFilter& f) {
  return f.mode() == FillingMode::kBatchStart ? f.batch_size() : 1;
}

}  // namespace

CorrectionAccumulator::CorrectionAccumulator(FppModel model, uint64_t start,
                                             CorrectionSums sums)
    : model_(model), start_(start), sums_(sums) {}

void CorrectionAccumulator::OnCounterIncrement(const FillingState& before) {
  if (before.s < start_) return;
  const double t = model_.At(before);
  if (t >= kDegenerateFppThreshold) {
    throw Error(ErrorCode::kDegenerateFpp,
                "false-positive probability " + std::to_string(t) + " at s=" +
                    std::to_string(before.s) + " is outside the model's range");
  }
  const double q = 1.0 - t;
  sums_.mean += t / q;
  sums_.var += t / (q * q);
}

CardinalityEstimate CorrectedEstimate(const CountingBloomFilter& filter,
                                      const CorrectionAccumulator& acc) {
  return {static_cast<double>(filter.s()) + acc.sum_mean(), std::sqrt(acc.sum_var()),
          filter.s(), EstimateMethod::kCorrected};
}

double EstimateSwamidass(uint64_t m, uint32_t k, uint64_t ones) {
  ValidateOnes(m, k, ones);
  const double md = static_cast<double>(m);
  if (ones == 0) return 0.0;
  return -(md / k) * std::log1p(-static_cast<double>(ones) / md);
}

double EstimatePapapetrou(uint64_t m, uint32_t k, uint64_t ones) {
  if (m < 2) throw Error(ErrorCode::kInvalidParameters, "papapetrou estimator requires m >= 2");
  ValidateOnes(m, k, ones);
  const double md = static_cast<double>(m);
  if (ones == 0) return 0.0;
  return std::log1p(-static_cast<double>(ones) / md) / (k * std::log1p(-1.0 / md));
}

double ErrorDistributionPmf(double t, uint64_t r) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "pmf requires 0 <= t < 1");
  }
  if (r == 0) return 1.0 - t;
  return (1.0 - t) * std::pow(t, static_cast<double>(r));
}

CardinalityCounter::CardinalityCounter(uint64_t m, uint32_t k, uint64_t seed,
                                       FppVariant variant)
    : filter_(m, k, seed), acc_(FppModel(variant, m, k), 1) {}

bool CardinalityCounter::Add(const HashPair& h) {
  if (filter_.Check(h)) return false;
  // Update the sums first so a degenerate-fpp rejection leaves no trace.
  acc_.OnCounterIncrement(filter_.state());
  return filter_.InsertCounting(h);
}

uint64_t CardinalityCounter::AddBatchInitial(std::span<const std::string> elements) {
  const uint64_t b = filter_.InsertBatchInitial(elements);
  acc_ = CorrectionAccumulator(acc_.model(), b);
  return b;
}

CardinalityEstimate CardinalityCounter::Swamidass() const {
  return {EstimateSwamidass(filter_.m(), filter_.k(), filter_.ones()), std::nullopt,
          filter_.s(), EstimateMethod::kSwamidass};
}

CardinalityEstimate CardinalityCounter::Papapetrou() const {
  return {EstimatePapapetrou(filter_.m(), filter_.k(), filter_.ones()), std::nullopt,
          filter_.s(), EstimateMethod::kPapapetrou};
}

CardinalityCounter CardinalityCounter::Deserialize(std::string_view data,
                                                   FppVariant variant) {
  auto restored = CountingBloomFilter::Deserialize(data);
  const uint64_t start = AccumulatorStart(restored.filter);
  FppModel model(variant, restored.filter.m(), restored.filter.k());
  return CardinalityCounter(std::move(restored.filter),
                            CorrectionAccumulator(model, start, restored.sums));
}

}  // namespace bfce
