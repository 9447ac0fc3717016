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

#ifndef BFCE_SIM_H_
#define BFCE_SIM_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "bfce/fpp.h"

namespace bfce {

// Synthetic stream description. p_smax == 1 selects an endless stream of
// distinct identifiers; p_smax in (0, 1) samples uniformly with replacement
// from a universe of round(s_max / (1 - p_smax)) identifiers.
struct UniverseSpec {
  uint64_t s_max = 17000;
  double p_smax = 1.0;

  bool replacement() const { return p_smax < 1.0; }
  // 0 for the distinct (no-replacement) stream.
  uint64_t universe_size() const;
  // Throws Error(kInvalidParameters) unless s_max >= 1 and 0 < p_smax <= 1.
  void Validate() const;
};

// Deterministic, lazily generated stream of 8-byte element identifiers.
class ElementStream {
 public:
  ElementStream(const UniverseSpec& spec, uint64_t seed);

  uint64_t Next();
  // Number of elements produced so far.
  uint64_t position() const { return position_; }
  uint64_t universe_size() const { return universe_size_; }

 private:
  uint64_t Bounded(uint64_t bound);

  std::mt19937_64 rng_;
  uint64_t key_;
  uint64_t universe_size_;
  uint64_t position_ = 0;
};

struct TrialConfig {
  uint64_t m = 0;
  uint32_t k = 0;
  UniverseSpec universe;
  std::vector<uint64_t> checkpoints;  // strictly increasing, >= 1
  uint64_t stop_s = 0;                // >= checkpoints.back()
  FppVariant variant = FppVariant::kApproximate;

  void Validate() const;
};

// State of one filter the first time its counter reached a checkpoint.
struct CheckpointRecord {
  uint64_t s = 0;
  uint64_t true_n = 0;           // exact distinct count consumed so far
  double corrected_mean = 0.0;
  double corrected_std = 0.0;
  double papapetrou = 0.0;
  uint64_t stream_position = 0;  // elements consumed so far

  friend bool operator==(const CheckpointRecord&, const CheckpointRecord&) = default;
};

// Streams elements through one counter until s == stop_s. The filter and the
// stream are both seeded from `seed`. Throws Error(kStreamExhausted) when the
// universe or the filter runs out before stop_s.
std::vector<CheckpointRecord> RunTrial(const TrialConfig& config, uint64_t seed);

// Error statistics of one estimator against the true n_s, with
// error = n_s - estimate.
struct ErrorStats {
  double mbe = 0.0;
  double mbe_std = 0.0;  // sample standard deviation of the error
  double mae = 0.0;
  double mae_std = 0.0;  // sample standard deviation of |error|
  double rmse = 0.0;
};

struct CheckpointMetrics {
  uint64_t s = 0;
  uint64_t trials = 0;
  ErrorStats corrected;
  ErrorStats papapetrou;
  double mean_true_n = 0.0;
  double std_true_n = 0.0;
  double predicted_std = 0.0;  // mean over trials of sqrt(V(N_s))
  double mean_stream_len = 0.0;
};

struct TrialMetrics {
  uint64_t trials = 0;
  std::vector<CheckpointMetrics> rows;
};

// Reduces per-trial records (all with the same checkpoints) in trial order.
TrialMetrics AggregateTrials(std::span<const std::vector<CheckpointRecord>> trials);

// Trial i uses seed base_seed + i. threads == 0 picks the hardware
// concurrency. The result does not depend on the thread count.
TrialMetrics RunExperiment(const TrialConfig& config, uint64_t trials,
                           uint64_t base_seed, unsigned threads = 0);

struct BatchResult {
  uint64_t trials = 0;
  uint64_t b = 0;
  uint64_t stop_s = 0;
  double batch_mean_error = 0.0;       // mean of n_s - s, batch-start arm
  double batch_error_std = 0.0;
  double batch_predicted = 0.0;        // accumulator mean, averaged
  double one_by_one_mean_error = 0.0;  // same for the one-by-one arm
  double one_by_one_error_std = 0.0;
  double one_by_one_predicted = 0.0;
};

// Each trial fills two counters with the same hash seed from the same stream:
// one starts with the first b distinct elements inserted at once, the other
// is filled one by one throughout.
BatchResult RunBatchExperiment(uint64_t m, uint32_t k, uint64_t b, uint64_t trials,
                               uint64_t stop_s, uint64_t base_seed,
                               unsigned threads = 0,
                               const UniverseSpec& universe = {});

// Distinct-stream experiment past the design capacity. Requires
// ApproxFpp(m, k, max(s_values)) < 0.5.
TrialMetrics OverloadSweep(uint64_t m, uint32_t k, uint64_t trials,
                           std::vector<uint64_t> s_values, uint64_t base_seed,
                           unsigned threads = 0);

// step, 2 step, ... below stop_s, then stop_s itself.
std::vector<uint64_t> DefaultCheckpoints(uint64_t stop_s, uint64_t step = 500);

// binary64 with 17 significant digits.
std::string FormatDouble(double v);

inline constexpr const char* kMetricsCsvHeader =
    "estimator,s,trials,mbe,mbe_std,mae,mae_std,rmse,mean_true_n,std_true_n,"
    "predicted_std,mean_stream_len";

// One row per (checkpoint, estimator), corrected first; LF line endings.
void WriteMetricsCsv(const TrialMetrics& metrics, std::ostream& out);

}  // namespace bfce

#endif  // BFCE_SIM_H_
