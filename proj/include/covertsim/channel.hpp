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

// Quasi-static Rayleigh block fading with AWGN: Y = H S + V.

#pragma once

#include "covertsim/numerics.hpp"

namespace covertsim {

struct ChannelRealization {
  ComplexMatrix H;
  double noise_variance = 1.0;
  bool quasi_static = true;

  double snr_linear() const { return 1.0 / noise_variance; }
};

/// N x M channel with i.i.d. CN(0,1) entries, held for a whole frame.
inline ChannelRealization sample_channel(RandomStream& stream, int rx, int tx,
                                         double noise_variance = 1.0) {
  if (rx < 1 || tx < 1) throw ParameterError("sample_channel: N, M must be >= 1");
  if (!(noise_variance >= 0.0)) {
    throw ParameterError("sample_channel: negative noise variance");
  }
  return {sample_complex_gaussian(stream, rx, tx, 1.0), noise_variance, true};
}

/// Y = H S + V with V i.i.d. CN(0, noise_variance). A zero variance gives the
/// noiseless product and draws nothing from the stream.
inline ComplexMatrix transmit(const ComplexMatrix& h, const ComplexMatrix& s,
                              RandomStream& stream, double noise_variance) {
  if (h.cols() != s.rows()) {
    throw ParameterError("transmit: H has " + std::to_string(h.cols()) +
                         " columns but S has " + std::to_string(s.rows()) +
                         " rows");
  }
  if (!(noise_variance >= 0.0)) {
    throw ParameterError("transmit: negative noise variance");
  }
  ComplexMatrix y = h * s;
  if (noise_variance > 0.0) {
    y += sample_complex_gaussian(stream, y.rows(), y.cols(), noise_variance);
  }
  return y;
}

}  // namespace covertsim
