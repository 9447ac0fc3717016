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

#ifndef BFCE_HASHING_H_
#define BFCE_HASHING_H_

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace bfce {

// Seeded 64-bit hash of an arbitrary byte string (MurmurHash64A layout).
uint64_t Hash64(std::string_view bytes, uint64_t seed);

// Bijective 64-bit mixer (SplitMix64 finalizer).
constexpr uint64_t Mix64(uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Numeric identifiers are hashed as their 8-byte little-endian encoding.
using EncodedId = std::array<char, 8>;

constexpr EncodedId EncodeId(uint64_t id) {
  EncodedId out{};
  for (int i = 0; i < 8; ++i) out[i] = static_cast<char>((id >> (8 * i)) & 0xff);
  return out;
}

inline std::string_view AsBytes(const EncodedId& id) {
  return {id.data(), id.size()};
}

// The two base hashes of an element; h2 is always odd.
struct HashPair {
  uint64_t h1;
  uint64_t h2;
};

// Family of k index functions into [0, m), derived by double hashing:
//   index_i = (h1 + i * h2) mod m, i = 0..k-1, with 64-bit wrapping arithmetic.
class HashFamily {
 public:
  // Throws Error(kInvalidParameters) unless 1 <= k <= m.
  HashFamily(uint64_t seed, uint32_t k, uint64_t m);

  uint64_t seed() const { return seed_; }
  uint32_t k() const { return k_; }
  uint64_t m() const { return m_; }

  HashPair Hash(std::string_view element) const;

  uint64_t Index(const HashPair& h, uint32_t i) const {
    return (h.h1 + static_cast<uint64_t>(i) * h.h2) % m_;
  }

  template <typename Fn>
  void ForEachIndex(const HashPair& h, Fn&& fn) const {
    uint64_t acc = h.h1;
    for (uint32_t i = 0; i < k_; ++i, acc += h.h2) fn(acc % m_);
  }

  std::vector<uint64_t> Indices(std::string_view element) const;

  friend bool operator==(const HashFamily&, const HashFamily&) = default;

 private:
  uint64_t seed_;
  uint32_t k_;
  uint64_t m_;
};

}  // namespace bfce

#endif  // BFCE_HASHING_H_
