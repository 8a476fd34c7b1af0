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

// Chaos-MIMO Gaussian encoder.
//
// Each of the B = M*T symbols is produced by seeding a pair of Bernoulli
// shift maps from the previous chaos value and two bits, iterating Ns times,
// picking state Ns or Ns+1 depending on two more bits, and pushing the
// result through a folded-cosine/sine whitening and the Box-Muller transform.
//
// Bit convention: bits are 0-based, bits[0..B-1]. A 1-based subscript p from
// the published recursion maps to bits[(p - 1) mod B], so b_{k-1} for k = 1
// reads the last bit of the block.

#pragma once

#include "covertsim/codebook.hpp"
#include "covertsim/numerics.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace covertsim {

/// Pre-shared chaos key: initial complex state and transition length.
struct ChaosKey {
  Complex c0{0.5, 0.5};
  int transitions = 100;

  void validate() const {
    if (!(c0.real() > 0.0 && c0.real() < 1.0 && c0.imag() > 0.0 &&
          c0.imag() < 1.0)) {
      throw ParameterError("ChaosKey: c0 parts must lie in (0, 1)");
    }
    if (transitions < 1) {
      throw ParameterError("ChaosKey: transition length must be >= 1");
    }
  }

  static ChaosKey random(RandomStream& stream, int transitions = 100) {
    auto open_unit = [&stream] {
      double u = 0.0;
      while (u == 0.0) u = stream.uniform();
      return u;
    };
    const double re = open_unit();
    const double im = open_unit();
    return ChaosKey{{re, im}, transitions};
  }
};

/// Modulus of the doubling map; 1 - 1e-16 rounds to the largest double < 1.
inline constexpr double kChaosModulus = 1.0 - 1e-16;

/// Bit-controlled fold used to seed each chaos sequence.
inline double gamma_map(double a, int bit) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw ParameterError("gamma_map: a must lie in [0, 1]");
  }
  if (bit == 0) return a;
  return a > 0.5 ? 1.0 - a : a + 0.5;
}

/// Applies the doubling map x -> 2x mod (1 - 1e-16) `steps` times to the real
/// and imaginary parts independently.
inline Complex bernoulli_shift(Complex z, int steps) {
  double re = z.real();
  double im = z.imag();
  if (!(re >= 0.0 && re < 1.0 && im >= 0.0 && im < 1.0)) {
    throw ParameterError("bernoulli_shift: state parts must lie in [0, 1)");
  }
  for (int s = 0; s < steps; ++s) {
    re = std::fmod(2.0 * re, kChaosModulus);
    im = std::fmod(2.0 * im, kChaosModulus);
  }
  return {re, im};
}

/// sqrt(-log cx) * exp(j 2 pi cy).
inline Complex box_muller(double cx, double cy) {
  if (cx == 0.0) {
    throw std::domain_error("box_muller: cx = 0 (log singularity)");
  }
  if (!(cx > 0.0 && cx <= 1.0) || !(cy >= 0.0 && cy < 1.0)) {
    throw ParameterError("box_muller: need cx in (0,1], cy in [0,1)");
  }
  const double r = std::sqrt(-std::log(cx));
  const double angle = 2.0 * std::numbers::pi * cy;
  return {r * std::cos(angle), r * std::sin(angle)};
}

namespace detail {

// Whitening of the chaos value into the two Box-Muller uniforms. The
// endpoints cx = 0 and cy = 1 are measure-zero; cx = 0 is sent to 1 (zero
// amplitude) and cy = 1 wraps to 0 (same angle).
inline Complex chaos_symbol(Complex c) {
  const double pi = std::numbers::pi;
  double cx = std::acos(std::cos(37.0 * pi * (c.real() + c.imag()))) / pi;
  double cy = std::asin(std::sin(43.0 * pi * (c.real() - c.imag()))) / pi + 0.5;
  if (cx <= 0.0) cx = 1.0;
  if (cx > 1.0) cx = 1.0;
  if (cy >= 1.0) cy -= 1.0;
  if (cy < 0.0) cy = 0.0;
  return box_muller(cx, cy);
}

inline double wrap_unit(double x) {
  const double r = std::fmod(x, 1.0);
  return r < 0.0 ? r + 1.0 : r;
}

}  // namespace detail

/// Chaos symbols of one block plus the final chaos value c_B, which seeds
/// the next block of a frame.
struct ChaosBlock {
  std::vector<Complex> symbols;  // s_1..s_B, unit variance
  Complex final_state;
};

inline ChaosBlock cmimo_chaos_block(std::span<const int> bits,
                                    const ChaosKey& key) {
  key.validate();
  const int b_len = static_cast<int>(bits.size());
  if (b_len == 0) throw ParameterError("cmimo_symbols: empty bit block");
  auto bit = [&](int zero_based) {
    const int idx = ((zero_based % b_len) + b_len) % b_len;
    return bits[static_cast<std::size_t>(idx)] & 1;
  };

  ChaosBlock out;
  out.symbols.reserve(static_cast<std::size_t>(b_len));
  Complex c_prev = key.c0;
  for (int k = 1; k <= b_len; ++k) {
    const double re0 =
        detail::wrap_unit(gamma_map(c_prev.real(), bit(k - 2)));
    const double im0 =
        detail::wrap_unit(gamma_map(c_prev.imag(), bit(k - 1)));
    const Complex z_ns = bernoulli_shift({re0, im0}, key.transitions);
    const Complex z_ns1 = bernoulli_shift(z_ns, 1);
    const Complex pick_re = bit(k - 1 + b_len / 2) ? z_ns1 : z_ns;
    const Complex pick_im = bit(k + b_len / 2) ? z_ns1 : z_ns;
    const Complex c_k{pick_re.real(), pick_im.imag()};
    out.symbols.push_back(detail::chaos_symbol(c_k));
    c_prev = c_k;
  }
  out.final_state = c_prev;
  return out;
}

/// Raw chaos symbols s_1..s_B (unit variance, before the 1/sqrt(M) scaling).
inline std::vector<Complex> cmimo_symbols(std::span<const int> bits,
                                          const ChaosKey& key) {
  return cmimo_chaos_block(bits, key).symbols;
}

/// Key for the block that follows one carrying `bits` under `key`. A state
/// part that collapsed to exactly 0 would freeze the doubling map, so it is
/// nudged back into (0, 1).
inline ChaosKey cmimo_next_key(std::span<const int> bits, const ChaosKey& key) {
  Complex c = cmimo_chaos_block(bits, key).final_state;
  auto interior = [](double v) { return v > 0.0 && v < 1.0 ? v : 0.5; };
  return ChaosKey{{interior(c.real()), interior(c.imag())}, key.transitions};
}

/// M x T C-MIMO codeword; symbol s_k lands at row (k-1) mod M, column
/// (k-1) / M, scaled by 1/sqrt(M).
inline ComplexMatrix cmimo_encode(std::span<const int> bits,
                                  const ChaosKey& key, int antennas,
                                  int slots) {
  if (antennas < 1 || slots < 1) {
    throw ParameterError("cmimo_encode: M and T must be positive");
  }
  if (static_cast<int>(bits.size()) != antennas * slots) {
    throw ParameterError("cmimo_encode: bit block length must equal M*T");
  }
  const std::vector<Complex> s = cmimo_symbols(bits, key);
  const double scale = 1.0 / std::sqrt(static_cast<double>(antennas));
  ComplexMatrix out(antennas, slots);
  for (int k = 0; k < antennas * slots; ++k) {
    out(k % antennas, k / antennas) = scale * s[static_cast<std::size_t>(k)];
  }
  return out;
}

inline constexpr int kMaxEnumerationBits = 16;

/// All 2^(M*T) codewords for a key, indexed by the big-endian bit value.
inline Codebook cmimo_codebook(const ChaosKey& key, int antennas, int slots) {
  if (antennas < 1 || slots < 1) {
    throw ParameterError("cmimo_codebook: M and T must be positive");
  }
  const int b = antennas * slots;
  if (b > kMaxEnumerationBits) {
    throw CapacityError("cmimo_codebook: B = " + std::to_string(b) +
                        " exceeds enumeration guard of 16 bits");
  }
  Codebook cb{Scheme::kCmimo, b, antennas, slots, {}};
  const std::uint32_t count = 1U << b;
  cb.codewords.reserve(count);
  for (std::uint32_t v = 0; v < count; ++v) {
    const std::vector<int> pattern = index_to_bits(v, b);
    cb.codewords.push_back(cmimo_encode(pattern, key, antennas, slots));
  }
  return cb;
}

/// Frame-level C-MIMO: the chaos state runs across blocks, so block i is
/// keyed by the final chaos value of block i-1 under the bits sent (or, at a
/// receiver, decided) there. Block 0 uses the pre-shared key.
class CmimoChain {
 public:
  CmimoChain(ChaosKey key0, int antennas, int slots)
      : key0_(key0), antennas_(antennas), slots_(slots) {
    key0_.validate();
    if (antennas * slots > kMaxEnumerationBits) {
      throw CapacityError("CmimoChain: B exceeds enumeration guard of 16 bits");
    }
  }

  int bits() const { return antennas_ * slots_; }

  /// Key of `block` given the indices carried by blocks 0..block-1.
  ChaosKey key_for(std::size_t block, std::span<const std::uint32_t> previous) {
    if (previous.size() < block) {
      throw ParameterError("CmimoChain: missing indices for earlier blocks");
    }
    if (block == 0) {
      cached_block_ = 0;
      cached_key_ = key0_;
      return cached_key_;
    }
    if (cached_block_ + 1 != block) {
      // Out-of-order request: replay from the pre-shared key.
      cached_block_ = 0;
      cached_key_ = key0_;
      while (cached_block_ + 1 < block) advance(previous[cached_block_]);
    }
    advance(previous[block - 1]);
    return cached_key_;
  }

  Codebook codebook_for(std::size_t block, std::span<const std::uint32_t> previous) {
    return cmimo_codebook(key_for(block, previous), antennas_, slots_);
  }

  /// Transmitted codewords for a whole frame of indices.
  std::vector<ComplexMatrix> encode_frame(std::span<const std::uint32_t> indices) {
    std::vector<ComplexMatrix> out;
    out.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const ChaosKey key = key_for(i, indices);
      const std::vector<int> pattern = index_to_bits(indices[i], bits());
      out.push_back(cmimo_encode(pattern, key, antennas_, slots_));
    }
    return out;
  }

 private:
  void advance(std::uint32_t index) {
    const std::vector<int> pattern = index_to_bits(index, bits());
    cached_key_ = cmimo_next_key(pattern, cached_key_);
    ++cached_block_;
  }

  ChaosKey key0_;
  int antennas_;
  int slots_;
  std::size_t cached_block_ = 0;
  ChaosKey cached_key_ = key0_;
};

}  // namespace covertsim
