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

// Receivers: coherent ML, iterative semi-blind detection, and the
// noncoherent detector for NGS frames.

#pragma once

#include "covertsim/cmimo.hpp"
#include "covertsim/codebook.hpp"
#include "covertsim/ngs.hpp"
#include "covertsim/numerics.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace covertsim {

struct MlDecision {
  std::uint32_t index = 0;
  double objective = 0.0;
};

struct DetectionResult {
  std::vector<std::uint32_t> indices;
  std::int64_t bit_errors = 0;
  double objective = 0.0;
  // Semi-blind only: channel estimate after the final re-estimation, and
  // whether any re-estimation hit a rank-deficient decision stack.
  ComplexMatrix channel_estimate;
  bool degenerate = false;
  std::vector<std::vector<std::uint32_t>> per_iteration;
};

/// Hamming distance between decided and transmitted index sequences.
inline std::int64_t count_bit_errors(std::span<const std::uint32_t> decided,
                                     std::span<const std::uint32_t> truth) {
  if (decided.size() != truth.size()) {
    throw ParameterError("count_bit_errors: sequence lengths differ");
  }
  std::int64_t errors = 0;
  for (std::size_t i = 0; i < decided.size(); ++i) {
    errors += bit_errors_between(decided[i], truth[i]);
  }
  return errors;
}

/// argmin_k ||Y - H S_k||_F^2, ties to the lowest index.
inline MlDecision coherent_ml(const ComplexMatrix& y, const ComplexMatrix& h,
                              const Codebook& codebook) {
  if (codebook.empty()) throw ParameterError("coherent_ml: empty codebook");
  if (h.rows() != y.rows() || h.cols() != codebook[0].rows() ||
      codebook[0].cols() != y.cols()) {
    throw ParameterError("coherent_ml: inconsistent shapes");
  }
  MlDecision best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    const double obj = (y - h * codebook[k]).squaredNorm();
    if (obj < best.objective) best = {static_cast<std::uint32_t>(k), obj};
  }
  return best;
}

/// Iterative semi-blind detection: I_max rounds of per-block ML given
/// H^(l), each followed by the least-squares re-estimate
/// H^(l+1) = Ybar Shat^+. Returns the decisions of the last round.
///
/// `codebook_for(i, decided)` yields the codebook of block i; `decided`
/// holds this round's decisions for blocks 0..i-1, which lets codebooks
/// depend on earlier blocks (chained chaos state).
template <class CodebookFor>
DetectionResult semi_blind_detect_with(const ComplexMatrix& y_bar,
                                       const ComplexMatrix& h0,
                                       CodebookFor&& codebook_for,
                                       int max_iterations) {
  if (max_iterations < 1) {
    throw ParameterError("semi_blind_detect: I_max must be >= 1");
  }
  const Eigen::Index m = h0.cols();
  if (h0.rows() != y_bar.rows() || m < 1) {
    throw ParameterError("semi_blind_detect: H0 must be N x M");
  }

  DetectionResult res;
  ComplexMatrix h = h0;
  ComplexMatrix s_hat;
  for (int l = 0; l < max_iterations; ++l) {
    std::vector<std::uint32_t> decided;
    double total = 0.0;
    Eigen::Index col = 0;
    for (std::size_t i = 0; col < y_bar.cols(); ++i) {
      const Codebook& book = codebook_for(i, std::span<const std::uint32_t>(decided));
      if (book.empty()) throw ParameterError("semi_blind_detect: empty codebook");
      const Eigen::Index slots = book[0].cols();
      if (book[0].rows() != m || col + slots > y_bar.cols()) {
        throw ParameterError("semi_blind_detect: codeword shape does not fit Ybar");
      }
      if (s_hat.size() == 0) s_hat.resize(m, y_bar.cols());
      const MlDecision d = coherent_ml(y_bar.middleCols(col, slots), h, book);
      decided.push_back(d.index);
      total += d.objective;
      s_hat.middleCols(col, slots) = book[d.index];
      col += slots;
    }
    res.per_iteration.push_back(decided);
    res.indices = std::move(decided);
    res.objective = total;
    try {
      h = y_bar * pseudo_inverse(s_hat);
    } catch (const SingularityError&) {
      res.degenerate = true;
    }
  }
  res.channel_estimate = h;
  return res;
}

/// One codebook per block, or a single codebook shared by all blocks.
inline DetectionResult semi_blind_detect(const ComplexMatrix& y_bar,
                                         const ComplexMatrix& h0,
                                         std::span<const Codebook> codebooks,
                                         int max_iterations) {
  if (codebooks.empty() || codebooks[0].empty()) {
    throw ParameterError("semi_blind_detect: empty codebook");
  }
  const Eigen::Index slots = codebooks[0][0].cols();
  if (y_bar.cols() % slots != 0) {
    throw ParameterError("semi_blind_detect: Ybar width is not a multiple of T");
  }
  const auto blocks = static_cast<std::size_t>(y_bar.cols() / slots);
  if (codebooks.size() != 1 && codebooks.size() != blocks) {
    throw ParameterError("semi_blind_detect: need one codebook or one per block");
  }
  return semi_blind_detect_with(
      y_bar, h0,
      [&](std::size_t i, std::span<const std::uint32_t>) -> const Codebook& {
        return codebooks.size() == 1 ? codebooks[0] : codebooks[i];
      },
      max_iterations);
}

inline DetectionResult semi_blind_detect(const ComplexMatrix& y_bar,
                                         const ComplexMatrix& h0,
                                         const Codebook& codebook,
                                         int max_iterations) {
  return semi_blind_detect(y_bar, h0, std::span<const Codebook>(&codebook, 1),
                           max_iterations);
}

/// Semi-blind detection of a chained C-MIMO frame: each block's codebook is
/// keyed by the receiver's own decision on the previous block.
inline DetectionResult semi_blind_detect(const ComplexMatrix& y_bar,
                                         const ComplexMatrix& h0,
                                         CmimoChain chain, int max_iterations) {
  Codebook current;
  return semi_blind_detect_with(
      y_bar, h0,
      [&](std::size_t i, std::span<const std::uint32_t> decided) -> const Codebook& {
        current = chain.codebook_for(i, decided);
        return current;
      },
      max_iterations);
}

/// Yhat(0) = Y(0) G^+.
inline ComplexMatrix init_reference_estimate(const ComplexMatrix& y0,
                                             const ComplexMatrix& g) {
  if (y0.cols() != g.cols()) {
    throw ParameterError("init_reference_estimate: Y0 and G widths differ");
  }
  return y0 * pseudo_inverse(g);
}

/// Running reference estimate of the noncoherent detector.
struct DetectorState {
  ComplexMatrix y_hat;
  double alpha = 0.8;
  double beta = 0.2;

  static DetectorState make(ComplexMatrix y_hat0, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ParameterError("DetectorState: forgetting factor must lie in (0,1)");
    }
    return {std::move(y_hat0), alpha, 1.0 - alpha};
  }
};

struct NoncoherentStep {
  MlDecision decision;
  DetectorState state;
};

namespace detail {

// Yhat(i) = beta Y E^H + Yhat(i-1) X (I - beta E E^H).
inline ComplexMatrix reference_update(const ComplexMatrix& y_i,
                                      const ComplexMatrix& y_hat_prev,
                                      const ComplexMatrix& x,
                                      const ComplexMatrix& e, double beta) {
  const Eigen::Index m = e.rows();
  const ComplexMatrix proj =
      ComplexMatrix::Identity(m, m) - beta * (e * e.adjoint());
  return beta * (y_i * e.adjoint()) + y_hat_prev * x * proj;
}

}  // namespace detail

/// One block of noncoherent detection: argmin_X ||Y(i) - Yhat(i-1) X E(i)||^2
/// followed by the forgetting-factor reference update.
inline NoncoherentStep noncoherent_detect_step(const ComplexMatrix& y_i,
                                               const DetectorState& state,
                                               const ComplexMatrix& e_i,
                                               const Codebook& codebook) {
  if (codebook.empty()) {
    throw ParameterError("noncoherent_detect_step: empty codebook");
  }
  if (state.y_hat.cols() != codebook[0].rows() ||
      codebook[0].cols() != e_i.rows() || y_i.cols() != e_i.cols() ||
      y_i.rows() != state.y_hat.rows()) {
    throw ParameterError("noncoherent_detect_step: inconsistent shapes");
  }
  MlDecision best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t k = 0; k < codebook.size(); ++k) {
    const double obj = (y_i - state.y_hat * (codebook[k] * e_i)).squaredNorm();
    if (obj < best.objective) best = {static_cast<std::uint32_t>(k), obj};
  }
  DetectorState next = state;
  next.y_hat = detail::reference_update(y_i, state.y_hat, codebook[best.index],
                                        e_i, state.beta);
  if (!next.y_hat.allFinite()) {
    throw std::runtime_error("noncoherent_detect_step: reference estimate diverged");
  }
  return {best, std::move(next)};
}

struct NoncoherentParams {
  NgsParams ngs;
  double alpha = 0.8;
};

/// Decodes Y(0..W) sequentially. `observations[0]` is the reference block.
/// Projections are regenerated from `seed`.
inline DetectionResult decode_frame_noncoherent(
    std::span<const ComplexMatrix> observations, const SharedSeed& seed,
    const Codebook& codebook, const NoncoherentParams& params,
    std::span<const std::uint32_t> truth = {}) {
  DetectionResult res;
  if (observations.size() <= 1) return res;
  const ComplexMatrix g =
      gen_reference_matrix(seed, params.ngs.antennas, params.ngs.repetitions);
  DetectorState state = DetectorState::make(
      init_reference_estimate(observations[0], g), params.alpha);
  res.indices.reserve(observations.size() - 1);
  for (std::size_t i = 1; i < observations.size(); ++i) {
    const ComplexMatrix e =
        gen_projection_matrix(seed, params.ngs.antennas, params.ngs.slots, i);
    NoncoherentStep step =
        noncoherent_detect_step(observations[i], state, e, codebook);
    res.indices.push_back(step.decision.index);
    res.objective += step.decision.objective;
    state = std::move(step.state);
  }
  if (!truth.empty()) res.bit_errors = count_bit_errors(res.indices, truth);
  return res;
}

/// Coherent baseline for NGS: the true channel H, with the differential
/// state followed through the receiver's own decisions. The reference for
/// block i is H S^(i-1) with S^(i) = S^(i-1) X^(i), and each block is ML over
/// {X_b E(i)}.
inline DetectionResult decode_frame_perfect_csi(
    std::span<const ComplexMatrix> observations, const ComplexMatrix& h,
    const NgsFrame& frame, const Codebook& codebook,
    std::span<const std::uint32_t> truth = {}) {
  DetectionResult res;
  if (observations.size() <= 1) return res;
  if (frame.blocks() + 1 != observations.size()) {
    throw ParameterError("decode_frame_perfect_csi: frame/observation mismatch");
  }
  if (codebook.empty() || h.cols() != codebook[0].rows()) {
    throw ParameterError("decode_frame_perfect_csi: inconsistent shapes");
  }
  ComplexMatrix ref = h;
  ComplexMatrix chain = ComplexMatrix::Identity(h.cols(), h.cols());
  for (std::size_t i = 1; i < observations.size(); ++i) {
    const ComplexMatrix& e = frame.projections[i - 1];
    MlDecision best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t k = 0; k < codebook.size(); ++k) {
      const double obj = (observations[i] - ref * (codebook[k] * e)).squaredNorm();
      if (obj < best.objective) best = {static_cast<std::uint32_t>(k), obj};
    }
    res.indices.push_back(best.index);
    res.objective += best.objective;
    chain = chain * codebook[best.index];
    if (i % kRenormalizeEvery == 0) chain = nearest_unitary(chain);
    ref = h * chain;
  }
  if (!truth.empty()) res.bit_errors = count_bit_errors(res.indices, truth);
  return res;
}

}  // namespace covertsim
