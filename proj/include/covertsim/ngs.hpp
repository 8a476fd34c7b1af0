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

// Noncoherent Gaussian signaling transmitter.
//
// A frame is a Gaussian reference block G (M x KM) followed by W data blocks
// S(i) = S~(i) E(i), where S~(i) = S~(i-1) X(i) is the differential product
// of DUC data matrices and E(i) is an M x T Gaussian projection. G and E(i)
// come from a seed shared by both ends.

#pragma once

#include "covertsim/codebook.hpp"
#include "covertsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace covertsim {

/// Secret seed shared by transmitter and receiver. G is drawn from stream
/// ("ref", 0) and E(i) from stream ("proj", i).
struct SharedSeed {
  std::uint64_t value = 0;

  RandomStream reference_stream() const { return derive_stream(value, "ref", 0); }
  RandomStream projection_stream(std::uint64_t i) const {
    return derive_stream(value, "proj", i);
  }
};

/// M x KM reference with i.i.d. CN(0, 1/M) entries.
inline ComplexMatrix gen_reference_matrix(RandomStream& stream, int antennas,
                                          int repetitions) {
  if (antennas < 1 || repetitions < 1) {
    throw ParameterError("gen_reference_matrix: M and K must be >= 1");
  }
  return sample_complex_gaussian(stream, antennas,
                                 static_cast<Eigen::Index>(repetitions) * antennas,
                                 1.0 / antennas);
}

inline ComplexMatrix gen_reference_matrix(const SharedSeed& seed, int antennas,
                                          int repetitions) {
  RandomStream s = seed.reference_stream();
  return gen_reference_matrix(s, antennas, repetitions);
}

/// M x T projection for block i >= 1 with i.i.d. CN(0, 1/M) entries.
inline ComplexMatrix gen_projection_matrix(const SharedSeed& seed, int antennas,
                                           int slots, std::uint64_t i) {
  if (i < 1) throw ParameterError("gen_projection_matrix: block index must be >= 1");
  if (antennas < 1 || slots < 1) {
    throw ParameterError("gen_projection_matrix: M and T must be >= 1");
  }
  RandomStream s = seed.projection_stream(i);
  return sample_complex_gaussian(s, antennas, slots, 1.0 / antennas);
}

/// S~(i) = S~(i-1) X(i).
inline ComplexMatrix differential_encode(const ComplexMatrix& prev,
                                         const ComplexMatrix& x) {
  if (prev.rows() != prev.cols() || x.rows() != x.cols() ||
      prev.cols() != x.rows()) {
    throw ParameterError("differential_encode: need square matrices of equal size");
  }
  return prev * x;
}

/// The unitary chain is re-projected onto the unitary group this often.
inline constexpr int kRenormalizeEvery = 1000;

struct NgsParams {
  int antennas = 2;     // M
  int slots = 1;        // T
  int repetitions = 1;  // K
};

struct NgsFrame {
  ComplexMatrix reference;                  // G
  std::vector<ComplexMatrix> projections;   // E(1..W)
  std::vector<ComplexMatrix> data;          // X(1..W)
  std::vector<ComplexMatrix> unitary_chain; // S~(0..W), S~(0) = I
  std::vector<ComplexMatrix> transmitted;   // S(0..W), S(0) = G
  std::vector<std::uint32_t> indices;       // codeword index per data block

  std::size_t blocks() const { return data.size(); }
};

/// Builds the transmitted frame for a sequence of codeword indices.
inline NgsFrame build_frame(const std::vector<std::uint32_t>& indices,
                            const Codebook& codebook, const SharedSeed& seed,
                            const NgsParams& params) {
  if (codebook.scheme != Scheme::kDuc) {
    throw ParameterError("build_frame: codebook must be DUC");
  }
  if (codebook.antennas != params.antennas) {
    throw ParameterError("build_frame: codebook M does not match params");
  }
  const int m = params.antennas;
  NgsFrame f;
  f.reference = gen_reference_matrix(seed, m, params.repetitions);
  f.transmitted.push_back(f.reference);
  f.unitary_chain.push_back(ComplexMatrix::Identity(m, m));
  f.indices = indices;
  f.projections.reserve(indices.size());
  f.data.reserve(indices.size());
  for (std::size_t i = 1; i <= indices.size(); ++i) {
    const std::uint32_t b = indices[i - 1];
    if (b >= codebook.size()) {
      throw ParameterError("build_frame: codeword index out of range");
    }
    const ComplexMatrix& x = codebook[b];
    ComplexMatrix chain = differential_encode(f.unitary_chain.back(), x);
    if (i % kRenormalizeEvery == 0) chain = nearest_unitary(chain);
    ComplexMatrix e = gen_projection_matrix(seed, m, params.slots, i);
    f.transmitted.push_back(chain * e);
    f.unitary_chain.push_back(std::move(chain));
    f.projections.push_back(std::move(e));
    f.data.push_back(x);
  }
  return f;
}

/// Overload taking one bit block (length B) per data block.
inline NgsFrame build_frame(const std::vector<std::vector<int>>& bit_blocks,
                            const Codebook& codebook, const SharedSeed& seed,
                            const NgsParams& params) {
  std::vector<std::uint32_t> idx;
  idx.reserve(bit_blocks.size());
  for (const auto& blk : bit_blocks) {
    if (static_cast<int>(blk.size()) != codebook.bits) {
      throw ParameterError("build_frame: bit block length does not match B");
    }
    idx.push_back(bits_to_index(blk));
  }
  return build_frame(idx, codebook, seed, params);
}

struct RateReport {
  double rate = 0.0;            // R = B / T
  double effective_rate = 0.0;  // R_eff = eta R
  double efficiency = 0.0;      // eta
  double overhead_ratio = 0.0;  // 1 - eta
};

inline RateReport effective_rate(int bits, int frame_blocks, int antennas,
                                 int repetitions, int slots) {
  if (bits < 1 || frame_blocks < 1 || antennas < 1 || repetitions < 1 ||
      slots < 1) {
    throw ParameterError("effective_rate: all parameters must be positive");
  }
  RateReport r;
  r.rate = static_cast<double>(bits) / slots;
  r.efficiency =
      1.0 / (1.0 + static_cast<double>(antennas) * repetitions /
                       (static_cast<double>(frame_blocks) * slots));
  r.effective_rate = r.efficiency * r.rate;
  r.overhead_ratio = 1.0 - r.efficiency;
  return r;
}

/// Smallest W whose reference overhead 1 - eta does not exceed `overhead`.
inline int frame_length_for_overhead(double overhead, int antennas,
                                     int repetitions, int slots) {
  if (!(overhead > 0.0 && overhead < 1.0)) {
    throw ParameterError("frame_length_for_overhead: overhead must lie in (0,1)");
  }
  const double w = static_cast<double>(antennas) * repetitions *
                   (1.0 - overhead) / (overhead * slots);
  return std::max(1, static_cast<int>(std::ceil(w - 1e-9)));
}

}  // namespace covertsim
