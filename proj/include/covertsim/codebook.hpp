//
// Copyright 2026 The covertsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include "covertsim/numerics.hpp"

#include <bit>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace covertsim {

enum class Scheme { kDuc, kCmimo };

constexpr std::string_view to_string(Scheme s) {
  return s == Scheme::kDuc ? "DUC" : "CMIMO";
}

/// Ordered list of 2^B codewords. Codeword index b carries the bit pattern
/// whose big-endian integer value is b (first bit is the most significant).
///
/// For DUC codebooks the codewords are the M x M diagonal data matrices, so
/// `cols` equals M; for C-MIMO they are M x T space-time blocks.
struct Codebook {
  Scheme scheme = Scheme::kDuc;
  int bits = 0;
  int antennas = 0;
  int cols = 0;
  std::vector<ComplexMatrix> codewords;

  std::size_t size() const { return codewords.size(); }
  bool empty() const { return codewords.empty(); }
  const ComplexMatrix& operator[](std::size_t i) const { return codewords[i]; }
};

/// Big-endian bit pattern for codeword index `value` (bits[0] is the MSB).
inline std::vector<int> index_to_bits(std::uint32_t value, int bits) {
  std::vector<int> out(static_cast<std::size_t>(bits));
  for (int k = 0; k < bits; ++k) {
    out[static_cast<std::size_t>(k)] = (value >> (bits - 1 - k)) & 1U;
  }
  return out;
}

inline std::uint32_t bits_to_index(const std::vector<int>& bits) {
  std::uint32_t v = 0;
  for (int b : bits) v = (v << 1) | static_cast<std::uint32_t>(b & 1);
  return v;
}

/// Hamming distance between the bit patterns of two codeword indices.
inline int bit_errors_between(std::uint32_t a, std::uint32_t b) {
  return std::popcount(a ^ b);
}

}  // namespace covertsim
