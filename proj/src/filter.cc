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

#include "bfce/filter.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <unordered_set>

#include "bfce/error.h"

namespace bfce {
namespace {

class Writer {
 public:
  explicit Writer(std::string& out) : out_(out) {}

  template <typename T>
  void Le(T value) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((static_cast<uint64_t>(value) >> (8 * i)) & 0xff));
    }
  }
  void F64(double value) { Le(std::bit_cast<uint64_t>(value)); }
  void Raw(const void* p, size_t n) { out_.append(static_cast<const char*>(p), n); }

 private:
  std::string& out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}

  template <typename T>
  T Le() {
    Need(sizeof(T));
    uint64_t v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  double F64() { return std::bit_cast<double>(Le<uint64_t>()); }
  std::string_view Raw(size_t n) {
    Need(n);
    auto v = in_.substr(pos_, n);
    pos_ += n;
    return v;
  }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  void Need(size_t n) const {
    if (in_.size() - pos_ < n) {
      throw Error(ErrorCode::kMalformedInput, "truncated filter state");
    }
  }

  std::string_view in_;
  size_t pos_ = 0;
};

uint64_t ByteCount(uint64_t m) { return (m + 7) / 8; }

}  // namespace

CountingBloomFilter::CountingBloomFilter(uint64_t m, uint32_t k, uint64_t seed)
    : family_(seed, k, m), bits_(ByteCount(m), 0) {}

bool CountingBloomFilter::Check(const HashPair& h) const {
  bool all = true;
  family_.ForEachIndex(h, [&](uint64_t j) { all = all && TestBit(j); });
  return all;
}

void CountingBloomFilter::SetBits(const HashPair& h) {
  family_.ForEachIndex(h, [&](uint64_t j) {
    uint8_t& byte = bits_[j >> 3];
    const uint8_t mask = static_cast<uint8_t>(1U << (j & 7));
    if (!(byte & mask)) {
      byte |= mask;
      ++ones_;
    }
  });
}

bool CountingBloomFilter::InsertCounting(const HashPair& h) {
  if (Check(h)) return false;
  SetBits(h);
  ++s_;
  return true;
}

uint64_t CountingBloomFilter::InsertBatchInitial(std::span<const std::string> elements) {
  if (s_ > 0 || ones_ > 0) {
    throw Error(ErrorCode::kFilterNotEmpty,
                "batch insertion requires an empty filter (s=" + std::to_string(s_) +
                    ", ones=" + std::to_string(ones_) + ")");
  }
  std::unordered_set<std::string_view> seen;
  seen.reserve(elements.size());
  uint64_t distinct = 0;
  for (const auto& e : elements) {
    if (!seen.insert(e).second) continue;
    SetBits(family_.Hash(e));
    ++distinct;
  }
  s_ = distinct;
  mode_ = FillingMode::kBatchStart;
  batch_size_ = distinct;
  return distinct;
}

void CountingBloomFilter::InsertUncountedForTesting(std::string_view element) {
  SetBits(family_.Hash(element));
}

double CountingBloomFilter::FillRatioFpp() const {
  return std::pow(static_cast<double>(ones_) / static_cast<double>(m()), k());
}

uint64_t CountingBloomFilter::RecountOnes() const {
  uint64_t n = 0;
  for (uint8_t b : bits_) n += std::popcount(b);
  return n;
}

std::string CountingBloomFilter::Serialize(const CorrectionSums& sums) const {
  std::string out;
  out.reserve(kSerialHeaderSize + bits_.size());
  Writer w(out);
  w.Raw(kSerialMagic, sizeof(kSerialMagic));
  w.Le<uint16_t>(kSerialVersion);
  w.Le<uint64_t>(m());
  w.Le<uint32_t>(k());
  w.Le<uint64_t>(seed());
  w.Le<uint8_t>(static_cast<uint8_t>(mode_));
  w.Le<uint64_t>(batch_size_);
  w.Le<uint64_t>(s_);
  w.F64(sums.mean);
  w.F64(sums.var);
  w.Raw(bits_.data(), bits_.size());
  return out;
}

CountingBloomFilter::Restored CountingBloomFilter::Deserialize(std::string_view data) {
  Reader r(data);
  if (r.Raw(4) != std::string_view(kSerialMagic, 4)) {
    throw Error(ErrorCode::kMalformedInput, "bad magic");
  }
  const auto version = r.Le<uint16_t>();
  if (version != kSerialVersion) {
    throw Error(ErrorCode::kMalformedInput, "unsupported version " + std::to_string(version));
  }
  const auto m = r.Le<uint64_t>();
  const auto k = r.Le<uint32_t>();
  const auto seed = r.Le<uint64_t>();
  const auto mode_byte = r.Le<uint8_t>();
  const auto b = r.Le<uint64_t>();
  const auto s = r.Le<uint64_t>();
  const double mean = r.F64();
  const double var = r.F64();

  if (m < 1 || k < 1 || k > m) {
    throw Error(ErrorCode::kMalformedInput, "invalid m/k");
  }
  if (mode_byte > 1) throw Error(ErrorCode::kMalformedInput, "unknown filling mode");
  const auto mode = static_cast<FillingMode>(mode_byte);
  if (mode == FillingMode::kOneByOne && b != 0) {
    throw Error(ErrorCode::kMalformedInput, "batch size set in one-by-one mode");
  }
  if (mode == FillingMode::kBatchStart && b > s) {
    throw Error(ErrorCode::kMalformedInput, "batch size exceeds counter");
  }
  if (!(mean >= 0.0) || !(var >= 0.0) || !std::isfinite(mean) || !std::isfinite(var)) {
    throw Error(ErrorCode::kMalformedInput, "invalid accumulator values");
  }
  if (r.remaining() != ByteCount(m)) {
    throw Error(ErrorCode::kMalformedInput, r.remaining() < ByteCount(m)
                                                ? "truncated bit array"
                                                : "trailing bytes after bit array");
  }
  const auto raw = r.Raw(ByteCount(m));

  CountingBloomFilter f(m, k, seed);
  std::memcpy(f.bits_.data(), raw.data(), raw.size());
  if (m % 8 != 0 && (f.bits_.back() >> (m % 8)) != 0) {
    throw Error(ErrorCode::kMalformedInput, "padding bits set");
  }
  f.s_ = s;
  f.ones_ = f.RecountOnes();
  f.mode_ = mode;
  f.batch_size_ = b;
  // Each counted insertion sets at most k bits.
  if (f.ones_ > s * static_cast<unsigned __int128>(k) || (s > 0 && f.ones_ == 0)) {
    throw Error(ErrorCode::kMalformedInput, "bit population inconsistent with counter");
  }
  return {std::move(f), {mean, var}};
}

}  // namespace bfce
