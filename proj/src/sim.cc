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

#include "bfce/sim.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>
#include <thread>
#include <unordered_set>

#include "bfce/error.h"
#include "bfce/estimator.h"
#include "bfce/hashing.h"

namespace bfce {
namespace {

constexpr uint64_t kStreamSalt = 0x5bd1e9955bd1e995ULL;

// Runs fn(i) for i in [0, n) on up to `threads` workers. Rethrows the
// exception of the lowest failing index so failures are deterministic.
template <typename Fn>
void ParallelFor(uint64_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<uint64_t>(threads, n));
  std::vector<std::exception_ptr> errors(n);
  auto run = [&](uint64_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (uint64_t i = 0; i < n; ++i) run(i);
  } else {
    std::atomic<uint64_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (uint64_t i = next++; i < n; i = next++) run(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Moments {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator
};

Moments ComputeMoments(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

ErrorStats ComputeErrorStats(std::span<const double> errors) {
  std::vector<double> abs_errors(errors.size());
  double sq = 0.0;
  for (size_t i = 0; i < errors.size(); ++i) {
    abs_errors[i] = std::fabs(errors[i]);
    sq += errors[i] * errors[i];
  }
  const Moments e = ComputeMoments(errors);
  const Moments a = ComputeMoments(abs_errors);
  return {e.mean, e.std, a.mean, a.std, std::sqrt(sq / static_cast<double>(errors.size()))};
}

// Exact distinct-count tracker.
class DistinctSet {
 public:
  explicit DistinctSet(uint64_t expected) { seen_.reserve(expected); }
  void Insert(uint64_t id) { seen_.insert(id); }
  uint64_t size() const { return seen_.size(); }

 private:
  std::unordered_set<uint64_t> seen_;
};

uint64_t ReserveHint(const TrialConfig& c) {
  const uint64_t guess = c.stop_s + c.stop_s / 4 + 64;
  const uint64_t universe = c.universe.universe_size();
  return universe ? std::min(guess, universe) : guess;
}

void ThrowIfStuck(const CountingBloomFilter& f, const ElementStream& stream,
                  const DistinctSet& seen, uint64_t stop_s) {
  if (f.ones() == f.m()) {
    throw Error(ErrorCode::kStreamExhausted,
                "filter saturated at s=" + std::to_string(f.s()) + " before stop_s=" +
                    std::to_string(stop_s));
  }
  if (stream.universe_size() != 0 && seen.size() == stream.universe_size()) {
    throw Error(ErrorCode::kStreamExhausted,
                "universe exhausted at s=" + std::to_string(f.s()) + " before stop_s=" +
                    std::to_string(stop_s));
  }
}

}  // namespace

uint64_t UniverseSpec::universe_size() const {
  if (!replacement()) return 0;
  return static_cast<uint64_t>(std::llround(static_cast<double>(s_max) / (1.0 - p_smax)));
}

void UniverseSpec::Validate() const {
  if (s_max < 1) throw Error(ErrorCode::kInvalidParameters, "s_max must be >= 1");
  if (!(p_smax > 0.0 && p_smax <= 1.0)) {
    throw Error(ErrorCode::kInvalidParameters, "p_smax must lie in (0, 1]");
  }
}

ElementStream::ElementStream(const UniverseSpec& spec, uint64_t seed)
    : rng_(Mix64(seed ^ kStreamSalt)),
      key_(Mix64(seed + kStreamSalt)),
      universe_size_(spec.universe_size()) {
  spec.Validate();
}

uint64_t ElementStream::Bounded(uint64_t bound) {
  // Lemire's multiply-and-reject; exact and independent of the library.
  using u128 = unsigned __int128;
  u128 product = static_cast<u128>(rng_()) * bound;
  auto low = static_cast<uint64_t>(product);
  if (low < bound) {
    const uint64_t threshold = -bound % bound;
    while (low < threshold) {
      product = static_cast<u128>(rng_()) * bound;
      low = static_cast<uint64_t>(product);
    }
  }
  return static_cast<uint64_t>(product >> 64);
}

uint64_t ElementStream::Next() {
  const uint64_t j = universe_size_ == 0 ? position_ : Bounded(universe_size_);
  ++position_;
  // Mix64 is a bijection, so distinct j give distinct identifiers.
  return Mix64(key_ + j);
}

void TrialConfig::Validate() const {
  universe.Validate();
  if (m < 2 || k < 1 || k > m) {
    throw Error(ErrorCode::kInvalidParameters, "trial requires 1 <= k <= m and m >= 2");
  }
  if (checkpoints.empty()) throw Error(ErrorCode::kInvalidParameters, "no checkpoints");
  for (size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 1 || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw Error(ErrorCode::kInvalidParameters,
                  "checkpoints must be strictly increasing and >= 1");
    }
  }
  if (stop_s < checkpoints.back()) {
    throw Error(ErrorCode::kInvalidParameters, "stop_s below the last checkpoint");
  }
  if (universe.replacement() && stop_s >= universe.universe_size()) {
    throw Error(ErrorCode::kInvalidParameters,
                "stop_s=" + std::to_string(stop_s) + " is not below the universe size " +
                    std::to_string(universe.universe_size()));
  }
}

std::vector<CheckpointRecord> RunTrial(const TrialConfig& config, uint64_t seed) {
  config.Validate();
  CardinalityCounter counter(config.m, config.k, seed, config.variant);
  ElementStream stream(config.universe, seed);
  DistinctSet seen(ReserveHint(config));

  std::vector<CheckpointRecord> records;
  records.reserve(config.checkpoints.size());
  size_t next_checkpoint = 0;

  while (counter.filter().s() < config.stop_s) {
    const uint64_t id = stream.Next();
    seen.Insert(id);
    if (!counter.Add(id)) {
      ThrowIfStuck(counter.filter(), stream, seen, config.stop_s);
      continue;
    }
    const uint64_t s = counter.filter().s();
    if (next_checkpoint < config.checkpoints.size() &&
        s == config.checkpoints[next_checkpoint]) {
      const CardinalityEstimate est = counter.Estimate();
      records.push_back({s, seen.size(), est.mean, est.std_dev.value_or(0.0),
                         counter.Papapetrou().mean, stream.position()});
      ++next_checkpoint;
    }
  }
  return records;
}

TrialMetrics AggregateTrials(std::span<const std::vector<CheckpointRecord>> trials) {
  if (trials.empty()) throw Error(ErrorCode::kInvalidParameters, "no trials to aggregate");
  const size_t rows = trials.front().size();
  for (const auto& t : trials) {
    if (t.size() != rows) {
      throw Error(ErrorCode::kInvalidParameters, "trials disagree on checkpoints");
    }
  }

  TrialMetrics out;
  out.trials = trials.size();
  out.rows.reserve(rows);
  std::vector<double> corrected(trials.size()), baseline(trials.size()),
      true_n(trials.size()), predicted(trials.size()), length(trials.size());
  for (size_t r = 0; r < rows; ++r) {
    for (size_t i = 0; i < trials.size(); ++i) {
      const CheckpointRecord& rec = trials[i][r];
      if (rec.s != trials.front()[r].s) {
        throw Error(ErrorCode::kInvalidParameters, "trials disagree on checkpoints");
      }
      const double n = static_cast<double>(rec.true_n);
      corrected[i] = n - rec.corrected_mean;
      baseline[i] = n - rec.papapetrou;
      true_n[i] = n;
      predicted[i] = rec.corrected_std;
      length[i] = static_cast<double>(rec.stream_position);
    }
    CheckpointMetrics row;
    row.s = trials.front()[r].s;
    row.trials = trials.size();
    row.corrected = ComputeErrorStats(corrected);
    row.papapetrou = ComputeErrorStats(baseline);
    const Moments n = ComputeMoments(true_n);
    row.mean_true_n = n.mean;
    row.std_true_n = n.std;
    row.predicted_std = ComputeMoments(predicted).mean;
    row.mean_stream_len = ComputeMoments(length).mean;
    out.rows.push_back(row);
  }
  return out;
}

TrialMetrics RunExperiment(const TrialConfig& config, uint64_t trials, uint64_t base_seed,
                           unsigned threads) {
  if (trials < 2) throw Error(ErrorCode::kInvalidParameters, "at least 2 trials required");
  config.Validate();
  std::vector<std::vector<CheckpointRecord>> results(trials);
  ParallelFor(trials, threads,
              [&](uint64_t i) { results[i] = RunTrial(config, base_seed + i); });
  return AggregateTrials(results);
}

BatchResult RunBatchExperiment(uint64_t m, uint32_t k, uint64_t b, uint64_t trials,
                               uint64_t stop_s, uint64_t base_seed, unsigned threads,
                               const UniverseSpec& universe) {
  if (trials < 1) throw Error(ErrorCode::kInvalidParameters, "at least 1 trial required");
  if (b >= stop_s) throw Error(ErrorCode::kInvalidParameters, "batch size must be below stop_s");
  TrialConfig config{m, k, universe, {stop_s}, stop_s, FppVariant::kApproximate};
  config.Validate();

  struct ArmResult {
    double error = 0.0;
    double predicted = 0.0;
  };
  std::vector<ArmResult> batch(trials), single(trials);

  ParallelFor(trials, threads, [&](uint64_t i) {
    const uint64_t seed = base_seed + i;

    // Batch-start arm.
    {
      CardinalityCounter counter(m, k, seed);
      ElementStream stream(universe, seed);
      DistinctSet seen(ReserveHint(config));
      std::vector<std::string> first;
      first.reserve(b);
      while (seen.size() < b) {
        const uint64_t id = stream.Next();
        const uint64_t before = seen.size();
        seen.Insert(id);
        if (seen.size() > before) {
          const EncodedId bytes = EncodeId(id);
          first.emplace_back(bytes.data(), bytes.size());
        }
      }
      counter.AddBatchInitial(first);
      while (counter.filter().s() < stop_s) {
        const uint64_t id = stream.Next();
        seen.Insert(id);
        if (!counter.Add(id)) ThrowIfStuck(counter.filter(), stream, seen, stop_s);
      }
      batch[i] = {static_cast<double>(seen.size()) - static_cast<double>(stop_s),
                  counter.accumulator().sum_mean()};
    }

    // One-by-one arm on the same stream and hash seed.
    {
      CardinalityCounter counter(m, k, seed);
      ElementStream stream(universe, seed);
      DistinctSet seen(ReserveHint(config));
      while (counter.filter().s() < stop_s) {
        const uint64_t id = stream.Next();
        seen.Insert(id);
        if (!counter.Add(id)) ThrowIfStuck(counter.filter(), stream, seen, stop_s);
      }
      single[i] = {static_cast<double>(seen.size()) - static_cast<double>(stop_s),
                   counter.accumulator().sum_mean()};
    }
  });

  auto summarize = [](const std::vector<ArmResult>& arm, double& mean, double& std,
                      double& predicted) {
    std::vector<double> errors, preds;
    for (const auto& a : arm) {
      errors.push_back(a.error);
      preds.push_back(a.predicted);
    }
    const Moments e = ComputeMoments(errors);
    mean = e.mean;
    std = e.std;
    predicted = ComputeMoments(preds).mean;
  };
  BatchResult out;
  out.trials = trials;
  out.b = b;
  out.stop_s = stop_s;
  summarize(batch, out.batch_mean_error, out.batch_error_std, out.batch_predicted);
  summarize(single, out.one_by_one_mean_error, out.one_by_one_error_std,
            out.one_by_one_predicted);
  return out;
}

TrialMetrics OverloadSweep(uint64_t m, uint32_t k, uint64_t trials,
                           std::vector<uint64_t> s_values, uint64_t base_seed,
                           unsigned threads) {
  std::sort(s_values.begin(), s_values.end());
  s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());
  if (s_values.empty()) throw Error(ErrorCode::kInvalidParameters, "no s values");
  const uint64_t max_s = s_values.back();
  if (ApproxFpp(m, k, max_s) >= 0.5) {
    throw Error(ErrorCode::kInvalidParameters,
                "overload sweep limited to approximate fpp < 0.5 at the largest s");
  }
  TrialConfig config{m, k, UniverseSpec{max_s, 1.0}, std::move(s_values), max_s,
                     FppVariant::kApproximate};
  return RunExperiment(config, trials, base_seed, threads);
}

std::vector<uint64_t> DefaultCheckpoints(uint64_t stop_s, uint64_t step) {
  if (step < 1) throw Error(ErrorCode::kInvalidParameters, "checkpoint step must be >= 1");
  std::vector<uint64_t> out;
  for (uint64_t s = step; s < stop_s; s += step) out.push_back(s);
  if (stop_s >= 1) out.push_back(stop_s);
  return out;
}

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void WriteMetricsCsv(const TrialMetrics& metrics, std::ostream& out) {
  out << kMetricsCsvHeader << '\n';
  for (const auto& row : metrics.rows) {
    auto emit = [&](const char* name, const ErrorStats& e) {
      out << name << ',' << row.s << ',' << row.trials << ',' << FormatDouble(e.mbe) << ','
          << FormatDouble(e.mbe_std) << ',' << FormatDouble(e.mae) << ','
          << FormatDouble(e.mae_std) << ',' << FormatDouble(e.rmse) << ','
          << FormatDouble(row.mean_true_n) << ',' << FormatDouble(row.std_true_n) << ','
          << FormatDouble(row.predicted_std) << ',' << FormatDouble(row.mean_stream_len)
          << '\n';
    };
    emit("corrected", row.corrected);
    emit("papapetrou", row.papapetrou);
  }
}

}  // namespace bfce
