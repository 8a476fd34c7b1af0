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

// Monte Carlo experiment orchestration.
//
// Every frame f draws its randomness from streams keyed by
// (master_seed, "frame", f); the same frame index therefore sees the same
// channel, bits, shared seed and unit noise at every SNR point and for every
// scheme, and results do not depend on how frames are scheduled on threads.

#pragma once

#include "covertsim/analysis.hpp"
#include "covertsim/channel.hpp"
#include "covertsim/cmimo.hpp"
#include "covertsim/detectors.hpp"
#include "covertsim/duc.hpp"
#include "covertsim/ngs.hpp"
#include "covertsim/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace covertsim {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Invalid experiment definitions; the CLI maps it to exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class ExperimentScheme { kNgs, kCmimoSemiBlind, kNgsPerfectCsi };

constexpr std::string_view to_string(ExperimentScheme s) {
  switch (s) {
    case ExperimentScheme::kNgs:
      return "NGS";
    case ExperimentScheme::kCmimoSemiBlind:
      return "CMIMO_SEMIBLIND";
    case ExperimentScheme::kNgsPerfectCsi:
      return "NGS_PERFECT_CSI";
  }
  return "?";
}

inline ExperimentScheme parse_scheme(std::string_view s) {
  if (s == "NGS") return ExperimentScheme::kNgs;
  if (s == "CMIMO_SEMIBLIND") return ExperimentScheme::kCmimoSemiBlind;
  if (s == "NGS_PERFECT_CSI") return ExperimentScheme::kNgsPerfectCsi;
  throw ConfigError("unknown scheme '" + std::string(s) +
                    "' (expected NGS, CMIMO_SEMIBLIND or NGS_PERFECT_CSI)");
}

struct SystemParams {
  int M = 2;
  int N = 64;
  int T = 1;
  std::optional<int> W;
  int B = 2;
  int K = 1;
  std::vector<double> snr_db_grid{-20, -15, -10, -5, 0};
  double alpha = 0.8;
  int I_max = 5;
  std::optional<double> overhead_target;
  int frames = 1000;
  std::uint64_t master_seed = 0;
  ExperimentScheme scheme = ExperimentScheme::kNgs;

  /// Frame length: explicit W, or derived from the overhead target.
  int frame_blocks() const {
    if (overhead_target) {
      return frame_length_for_overhead(*overhead_target, M, K, T);
    }
    return W.value_or(0);
  }

  void validate() const {
    auto positive = [](int v, const char* name) {
      if (v < 1) throw ConfigError(std::string(name) + " must be a positive integer");
    };
    positive(M, "M");
    positive(N, "N");
    positive(T, "T");
    positive(B, "B");
    positive(K, "K");
    positive(I_max, "I_max");
    positive(frames, "frames");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (snr_db_grid.empty()) throw ConfigError("snr_db_grid must not be empty");
    for (double s : snr_db_grid) {
      if (!std::isfinite(s)) throw ConfigError("snr_db_grid entries must be finite");
    }
    if (overhead_target) {
      if (!(*overhead_target > 0.0 && *overhead_target < 1.0)) {
        throw ConfigError("overhead_target must lie in (0, 1)");
      }
      const int derived = frame_length_for_overhead(*overhead_target, M, K, T);
      if (W && *W != derived) {
        throw ConfigError("W = " + std::to_string(*W) +
                          " disagrees with overhead_target (derived W = " +
                          std::to_string(derived) + ")");
      }
    } else if (!W) {
      throw ConfigError("either W or overhead_target must be given");
    } else {
      positive(*W, "W");
    }
    if (scheme == ExperimentScheme::kCmimoSemiBlind) {
      if (B != M * T) throw ConfigError("CMIMO_SEMIBLIND requires B == M*T");
      if (B > kMaxEnumerationBits) throw ConfigError("CMIMO_SEMIBLIND requires B <= 16");
    } else if (B > kMaxEnumerationBits) {
      throw ConfigError("DUC enumeration requires B <= 16");
    }
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct BerRecord {
  std::string scheme;
  double snr_db = 0.0;
  std::int64_t frames = 0;
  std::int64_t bits_total = 0;
  std::int64_t bit_errors = 0;
  double ber = 0.0;
  double ci_low = 0.0;   // Wilson 95%
  double ci_high = 0.0;
  double seconds = 0.0;  // summed per-frame wall-clock, not written to ber.csv
};

/// Wilson score interval for k successes in n trials.
inline std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n,
                                                 double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  // The endpoints are exact at k = 0 and k = n; the formula leaves rounding dust.
  const double lo = k == 0 ? 0.0 : std::max(0.0, centre - half);
  const double hi = k == n ? 1.0 : std::min(1.0, centre + half);
  return {lo, hi};
}

struct FrameOutcome {
  std::int64_t bit_errors = 0;
  std::int64_t bits = 0;
};

/// Simulates frame `frame` at SNR grid index `snr_index`.
using FrameSimulator = std::function<FrameOutcome(std::size_t snr_index,
                                                  std::uint64_t frame)>;

struct RunOptions {
  int threads = 1;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs every (SNR, frame) cell on a fixed pool and aggregates per SNR point.
/// Aggregation is by integer sums in cell order, so output never depends on
/// the thread count.
inline std::vector<BerRecord> run_cells(const std::vector<double>& snr_grid,
                                        std::int64_t frames,
                                        std::string_view scheme_label,
                                        const FrameSimulator& simulate,
                                        const RunOptions& opts = {}) {
  const std::size_t points = snr_grid.size();
  const std::size_t total = points * static_cast<std::size_t>(frames);
  std::vector<FrameOutcome> outcomes(total);
  std::vector<double> seconds(total, 0.0);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};

  auto worker = [&] {
    while (true) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= total) break;
      const auto t0 = std::chrono::steady_clock::now();
      outcomes[cell] = simulate(cell / static_cast<std::size_t>(frames),
                                cell % static_cast<std::size_t>(frames));
      seconds[cell] = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      const std::size_t d = done.fetch_add(1) + 1;
      if (opts.progress) opts.progress(d, total);
    }
  };

  const int n_threads = std::max(1, opts.threads);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  std::vector<BerRecord> records;
  records.reserve(points);
  for (std::size_t s = 0; s < points; ++s) {
    BerRecord r;
    r.scheme = std::string(scheme_label);
    r.snr_db = snr_grid[s];
    r.frames = frames;
    for (std::int64_t f = 0; f < frames; ++f) {
      const std::size_t cell = s * static_cast<std::size_t>(frames) +
                               static_cast<std::size_t>(f);
      r.bit_errors += outcomes[cell].bit_errors;
      r.bits_total += outcomes[cell].bits;
      r.seconds += seconds[cell];
    }
    r.ber = r.bits_total > 0 ? static_cast<double>(r.bit_errors) /
                                   static_cast<double>(r.bits_total)
                             : 0.0;
    std::tie(r.ci_low, r.ci_high) = wilson_interval(r.bit_errors, r.bits_total);
    records.push_back(std::move(r));
  }
  return records;
}

/// Per-frame randomness, shared by all SNR points and schemes.
struct FrameStreams {
  std::uint64_t frame_seed = 0;

  static FrameStreams make(std::uint64_t master_seed, std::uint64_t frame) {
    RandomStream s = derive_stream(master_seed, "frame", frame);
    return {s()};
  }
  RandomStream channel() const { return derive_stream(frame_seed, "channel", 0); }
  RandomStream bits() const { return derive_stream(frame_seed, "bits", 0); }
  RandomStream noise(std::uint64_t block) const {
    return derive_stream(frame_seed, "noise", block);
  }
  SharedSeed shared() const {
    RandomStream s = derive_stream(frame_seed, "shared", 0);
    return {s()};
  }
  /// Pre-shared C-MIMO key stream; one key per frame.
  RandomStream cmimo_key() const {
    return derive_stream(shared().value, "cmimo_key", 0);
  }
};

/// Uniform codeword indices for W blocks of B bits.
inline std::vector<std::uint32_t> draw_indices(RandomStream& stream, int blocks,
                                               int bits) {
  std::vector<std::uint32_t> out(static_cast<std::size_t>(blocks));
  for (auto& v : out) v = static_cast<std::uint32_t>(stream() >> (64 - bits));
  return out;
}

/// Frame simulator for one of the three schemes. `factors` selects the DUC
/// codebook for the NGS schemes.
inline FrameSimulator make_frame_simulator(const SystemParams& params,
                                           const DucFactors& factors) {
  params.validate();
  const int w = params.frame_blocks();
  std::vector<double> noise_var;
  for (double s : params.snr_db_grid) noise_var.push_back(noise_variance_from_snr_db(s));

  if (params.scheme == ExperimentScheme::kCmimoSemiBlind) {
    return [params, w, noise_var](std::size_t snr_index,
                                  std::uint64_t frame) -> FrameOutcome {
      const FrameStreams fs = FrameStreams::make(params.master_seed, frame);
      const double nv = noise_var[snr_index];
      RandomStream ch = fs.channel();
      const ComplexMatrix h = sample_complex_gaussian(ch, params.N, params.M, 1.0);
      RandomStream bit_stream = fs.bits();
      const auto truth = draw_indices(bit_stream, w, params.B);
      const SharedSeed shared = fs.shared();
      const ComplexMatrix g = gen_reference_matrix(shared, params.M, params.K);
      RandomStream n0 = fs.noise(0);
      const ComplexMatrix y0 = transmit(h, g, n0, nv);

      RandomStream ks = fs.cmimo_key();
      CmimoChain chain(ChaosKey::random(ks), params.M, params.T);
      const std::vector<ComplexMatrix> tx = chain.encode_frame(truth);
      ComplexMatrix y_bar(params.N, static_cast<Eigen::Index>(w) * params.T);
      for (int i = 1; i <= w; ++i) {
        RandomStream ns = fs.noise(static_cast<std::uint64_t>(i));
        y_bar.middleCols(static_cast<Eigen::Index>(i - 1) * params.T, params.T) =
            transmit(h, tx[static_cast<std::size_t>(i - 1)], ns, nv);
      }
      const ComplexMatrix h0 = init_reference_estimate(y0, g);
      const DetectionResult det = semi_blind_detect(y_bar, h0, chain, params.I_max);
      return {count_bit_errors(det.indices, truth),
              static_cast<std::int64_t>(w) * params.B};
    };
  }

  const Codebook codebook = duc_codebook(factors);
  if (codebook.bits != params.B || codebook.antennas != params.M) {
    throw ConfigError("DUC factors do not match B and M");
  }
  return [params, w, noise_var, codebook](std::size_t snr_index,
                                          std::uint64_t frame) -> FrameOutcome {
    const FrameStreams fs = FrameStreams::make(params.master_seed, frame);
    const double nv = noise_var[snr_index];
    RandomStream ch = fs.channel();
    const ComplexMatrix h = sample_complex_gaussian(ch, params.N, params.M, 1.0);
    RandomStream bit_stream = fs.bits();
    const auto truth = draw_indices(bit_stream, w, params.B);
    const SharedSeed shared = fs.shared();
    const NgsParams ngs{params.M, params.T, params.K};
    const NgsFrame frame_tx = build_frame(truth, codebook, shared, ngs);
    std::vector<ComplexMatrix> ys;
    ys.reserve(frame_tx.transmitted.size());
    for (std::size_t i = 0; i < frame_tx.transmitted.size(); ++i) {
      RandomStream ns = fs.noise(i);
      ys.push_back(transmit(h, frame_tx.transmitted[i], ns, nv));
    }
    DetectionResult det;
    if (params.scheme == ExperimentScheme::kNgsPerfectCsi) {
      det = decode_frame_perfect_csi(ys, h, frame_tx, codebook, truth);
    } else {
      det = decode_frame_noncoherent(ys, shared, codebook, {ngs, params.alpha}, truth);
    }
    return {det.bit_errors, static_cast<std::int64_t>(w) * params.B};
  };
}

inline DucFactors default_factors(const SystemParams& params) {
  return optimize_factors(params.B, params.M);
}

/// End-to-end BER sweep over the SNR grid.
inline std::vector<BerRecord> run_ber_experiment(const SystemParams& params,
                                                 const RunOptions& opts = {},
                                                 std::optional<DucFactors> factors = {}) {
  params.validate();
  const DucFactors f = factors ? *factors : default_factors(params);
  return run_cells(params.snr_db_grid, params.frames, to_string(params.scheme),
                   make_frame_simulator(params, f), opts);
}

/// Decoder complexity for an experiment's M, N, T, B and W.
inline ComplexityReport complexity_counts(const SystemParams& params, int max_iterations) {
  params.validate();
  return complexity_counts(ComplexityParams{params.M, params.N, params.T, params.B,
                                            params.frame_blocks(), max_iterations});
}

/// Evenly spaced grid of `points` values over [lo, hi].
inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 1) throw ParameterError("linear_grid: points must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] =
        points == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (points - 1);
  }
  return g;
}

/// One row per (M, SNR), M-major.
inline std::vector<SecurityPoint> run_security_sweep(const std::vector<int>& m_list,
                                                     const std::vector<double>& snr_grid) {
  if (m_list.empty() || snr_grid.empty()) {
    throw ConfigError("security sweep needs non-empty M list and SNR grid");
  }
  std::vector<SecurityPoint> rows;
  rows.reserve(m_list.size() * snr_grid.size());
  for (int m : m_list) {
    for (double s : snr_grid) rows.push_back(willie_error_lower_bound(s, m));
  }
  return rows;
}

struct CodingGainPoint {
  int antennas = 1;
  DucFactors factors;
  double ngs = 0.0;           // median over projections
  double cmimo = 0.0;         // median over chaos keys
  double spatial_mux = 0.0;   // BPSK per antenna, unit total power
  int ngs_trials = 0;
  int cmimo_keys = 0;
};

/// BPSK-per-antenna spatial multiplexing codebook with B = M, each codeword
/// scaled to unit total power.
inline Codebook spatial_multiplexing_codebook(int antennas) {
  if (antennas < 1 || antennas > kMaxEnumerationBits) {
    throw ParameterError("spatial_multiplexing_codebook: M out of range");
  }
  Codebook cb{Scheme::kCmimo, antennas, antennas, 1, {}};
  const double a = 1.0 / std::sqrt(static_cast<double>(antennas));
  for (std::uint32_t v = 0; v < (1U << antennas); ++v) {
    ComplexMatrix x(antennas, 1);
    const auto bits = index_to_bits(v, antennas);
    for (int m = 0; m < antennas; ++m) x(m, 0) = bits[static_cast<std::size_t>(m)] ? -a : a;
    cb.codewords.push_back(std::move(x));
  }
  return cb;
}

/// Coding gains with B = M, N = 1, T = 1 for each M.
inline std::vector<CodingGainPoint> run_coding_gain_sweep(
    const std::vector<int>& m_range, int trials, int keys, std::uint64_t seed,
    std::uint64_t search_budget = kDefaultSearchBudget) {
  if (m_range.empty()) throw ConfigError("coding-gain sweep needs at least one M");
  if (trials < 1 || keys < 1) throw ConfigError("trials and keys must be positive");
  std::vector<CodingGainPoint> out;
  for (int m : m_range) {
    if (m < 1 || m > kMaxEnumerationBits) {
      throw ConfigError("coding-gain sweep: M must lie in [1, 16]");
    }
    CodingGainPoint p;
    p.antennas = m;
    p.ngs_trials = trials;
    p.cmimo_keys = keys;
    p.factors = optimize_factors(m, m, search_budget);
    const Codebook duc = duc_codebook(p.factors);
    RandomStream proj = derive_stream(seed, "cg_projection", static_cast<std::uint64_t>(m));
    p.ngs = ngs_effective_coding_gain(duc, trials, proj);
    std::vector<double> gains;
    gains.reserve(static_cast<std::size_t>(keys));
    for (int k = 0; k < keys; ++k) {
      RandomStream ks = derive_stream(seed, "cg_key",
                                      static_cast<std::uint64_t>(m) * 1'000'000 +
                                          static_cast<std::uint64_t>(k));
      gains.push_back(coding_gain(cmimo_codebook(ChaosKey::random(ks), m, 1), 1));
    }
    p.cmimo = median(std::move(gains));
    p.spatial_mux = coding_gain(spatial_multiplexing_codebook(m), 1);
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace covertsim
