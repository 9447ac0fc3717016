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

#include "bfce/hashing.h"

#include <cstring>
#include <string>

#include "bfce/error.h"

namespace bfce {
namespace {

constexpr uint64_t kMul = 0xc6a4a7935bd1e995ULL;
constexpr int kShift = 47;

// Seed offset for the second base hash.
constexpr uint64_t kSecondSeed = 0x9e3779b97f4a7c15ULL;

uint64_t LoadLe64(const unsigned char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

uint64_t Hash64(std::string_view bytes, uint64_t seed) {
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const size_t len = bytes.size();
  uint64_t h = Mix64(seed) ^ (len * kMul);

  const size_t blocks = len / 8;
  for (size_t b = 0; b < blocks; ++b) {
    uint64_t k = LoadLe64(data + 8 * b);
    k *= kMul;
    k ^= k >> kShift;
    k *= kMul;
    h ^= k;
    h *= kMul;
  }

  const unsigned char* tail = data + 8 * blocks;
  switch (len & 7) {
    case 7: h ^= static_cast<uint64_t>(tail[6]) << 48; [[fallthrough]];
    case 6: h ^= static_cast<uint64_t>(tail[5]) << 40; [[fallthrough]];
    case 5: h ^= static_cast<uint64_t>(tail[4]) << 32; [[fallthrough]];
    case 4: h ^= static_cast<uint64_t>(tail[3]) << 24; [[fallthrough]];
    case 3: h ^= static_cast<uint64_t>(tail[2]) << 16; [[fallthrough]];
    case 2: h ^= static_cast<uint64_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      h ^= static_cast<uint64_t>(tail[0]);
      h *= kMul;
  }

  h ^= h >> kShift;
  h *= kMul;
  h ^= h >> kShift;
  return h;
}

HashFamily::HashFamily(uint64_t seed, uint32_t k, uint64_t m)
    : seed_(seed), k_(k), m_(m) {
  if (m < 1 || k < 1 || k > m) {
    throw Error(ErrorCode::kInvalidParameters,
                "hash family requires 1 <= k <= m (k=" + std::to_string(k) +
                    ", m=" + std::to_string(m) + ")");
  }
}

HashPair HashFamily::Hash(std::string_view element) const {
  return {Hash64(element, seed_), Hash64(element, seed_ + kSecondSeed) | 1};
}

std::vector<uint64_t> HashFamily::Indices(std::string_view element) const {
  std::vector<uint64_t> out;
  out.reserve(k_);
  ForEachIndex(Hash(element), [&](uint64_t idx) { out.push_back(idx); });
  return out;
}

}  // namespace bfce
