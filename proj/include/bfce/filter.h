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

#ifndef BFCE_FILTER_H_
#define BFCE_FILTER_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bfce/hashing.h"

namespace bfce {

enum class FillingMode : uint8_t {
  kOneByOne = 0,
  kBatchStart = 1,
};

// Snapshot of the quantities the false-positive models depend on.
struct FillingState {
  uint64_t m = 0;
  uint32_t k = 0;
  uint64_t s = 0;     // negative-check counter
  uint64_t ones = 0;  // bits set to 1
};

// Running correction sums persisted alongside the filter.
struct CorrectionSums {
  double mean = 0.0;
  double var = 0.0;

  friend bool operator==(const CorrectionSums&, const CorrectionSums&) = default;
};

// Bloom filter fused with a counter s of negative membership checks.
//
// Bits are packed 8 per byte, bit j lives in byte j / 8 at position j % 8.
// Bits only flip 0 -> 1 and s only increases. A filter instance is
// single-writer; concurrent Check() calls are fine while no writer is active.
class CountingBloomFilter {
 public:
  // Throws Error(kInvalidParameters) unless 1 <= k <= m.
  CountingBloomFilter(uint64_t m, uint32_t k, uint64_t seed);

  uint64_t m() const { return family_.m(); }
  uint32_t k() const { return family_.k(); }
  uint64_t seed() const { return family_.seed(); }
  uint64_t s() const { return s_; }
  uint64_t ones() const { return ones_; }
  FillingMode mode() const { return mode_; }
  // Batch size b when mode() == kBatchStart, otherwise 0.
  uint64_t batch_size() const { return batch_size_; }
  const HashFamily& family() const { return family_; }
  std::span<const uint8_t> bytes() const { return bits_; }
  FillingState state() const { return {m(), k(), s_, ones_}; }

  bool TestBit(uint64_t j) const { return (bits_[j >> 3] >> (j & 7)) & 1U; }

  bool Check(std::string_view element) const { return Check(family_.Hash(element)); }
  bool Check(const HashPair& h) const;

  // Sets the element's bits and increments s iff Check() was negative.
  // Returns whether the counter was incremented.
  bool InsertCounting(std::string_view element) {
    return InsertCounting(family_.Hash(element));
  }
  bool InsertCounting(const HashPair& h);

  // Inserts every distinct element (exact byte comparison) of an empty
  // filter at once: s becomes the distinct count b, mode becomes
  // batch-start(b). Throws Error(kFilterNotEmpty) when s > 0 or ones > 0.
  uint64_t InsertBatchInitial(std::span<const std::string> elements);

  // Sets bits without touching s. Breaks the counter invariants; for tests.
  void InsertUncountedForTesting(std::string_view element);

  // (ones / m)^k
  double FillRatioFpp() const;

  // Population count recomputed from the bit array.
  uint64_t RecountOnes() const;

  std::string Serialize(const CorrectionSums& sums = {}) const;

  struct Restored;
  // Throws Error(kMalformedInput) on bad magic, version, truncation, trailing
  // bytes, or internally inconsistent state.
  static Restored Deserialize(std::string_view data);

  friend bool operator==(const CountingBloomFilter&,
                         const CountingBloomFilter&) = default;

 private:
  void SetBits(const HashPair& h);

  HashFamily family_;
  std::vector<uint8_t> bits_;
  uint64_t s_ = 0;
  uint64_t ones_ = 0;
  FillingMode mode_ = FillingMode::kOneByOne;
  uint64_t batch_size_ = 0;
};

struct CountingBloomFilter::Restored {
  CountingBloomFilter filter;
  CorrectionSums sums;
};

// Wire format constants.
inline constexpr char kSerialMagic[4] = {'B', 'F', 'C', 'E'};
inline constexpr uint16_t kSerialVersion = 1;
inline constexpr size_t kSerialHeaderSize = 4 + 2 + 8 + 4 + 8 + 1 + 8 + 8 + 8 + 8;

}  // namespace bfce

#endif  // BFCE_FILTER_H_
