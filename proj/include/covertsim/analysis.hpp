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

// Figures of merit: coding gain, the KL-based lower bound on a warden's
// detection error, decoder multiplication counts, and Gaussianity checks.

#pragma once

#include "covertsim/codebook.hpp"
#include "covertsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace covertsim {

namespace detail {

inline bool is_diagonal(const ComplexMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (r != c && m(r, c) != Complex{0.0, 0.0}) return false;
    }
  }
  return m.rows() == m.cols();
}

// Scalarised distance of one codeword difference D: D^H D for single-column
// codewords, det(D^H D) otherwise.
inline double pair_metric(const ComplexMatrix& d) {
  if (d.cols() == 1) return d.squaredNorm();
  const ComplexMatrix gram = d.adjoint() * d;
  return std::max(0.0, gram.determinant().real());
}

}  // namespace detail

/// min_{p != q} ((S_p - S_q)^H (S_p - S_q))^(1/N). Single-column codewords
/// give the exact scalar; wider codewords use the determinant.
inline double coding_gain(std::span<const ComplexMatrix> codewords, int rx) {
  if (codewords.size() < 2) {
    throw ParameterError("coding_gain: need at least two codewords");
  }
  if (rx < 1) throw ParameterError("coding_gain: N must be >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < codewords.size(); ++p) {
    for (std::size_t q = p + 1; q < codewords.size(); ++q) {
      best = std::min(best, detail::pair_metric(codewords[p] - codewords[q]));
      if (best == 0.0) return 0.0;
    }
  }
  return std::pow(best, 1.0 / rx);
}

inline double coding_gain(const Codebook& codebook, int rx) {
  return coding_gain(std::span<const ComplexMatrix>(codebook.codewords), rx);
}

/// Coding gain of the projected codebook {X_b E} for one M x 1 projection.
/// Diagonal unitary group codebooks use min_d ||(X_d - I) E||^2, which equals
/// the pairwise minimum because |x_p - x_q| = |x_{p-q} - 1| on each diagonal.
inline double projected_coding_gain(const Codebook& codebook,
                                    const ComplexMatrix& e, int rx = 1) {
  if (codebook.size() < 2) {
    throw ParameterError("projected_coding_gain: need at least two codewords");
  }
  const bool group = codebook.scheme == Scheme::kDuc &&
                     detail::is_diagonal(codebook[0]) && e.cols() == 1;
  if (!group) {
    std::vector<ComplexMatrix> projected;
    projected.reserve(codebook.size());
    for (const auto& x : codebook.codewords) projected.push_back(x * e);
    return coding_gain(projected, rx);
  }
  const Eigen::Index m = e.rows();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t d = 1; d < codebook.size(); ++d) {
    double dist = 0.0;
    for (Eigen::Index k = 0; k < m; ++k) {
      dist += std::norm(codebook[d](k, k) - 1.0) * std::norm(e(k, 0));
    }
    best = std::min(best, dist);
  }
  return std::pow(best, 1.0 / rx);
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw ParameterError("median: empty input");
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

/// Median over `trials` Gaussian projections E ~ CN(0, 1/M) (M x 1) of the
/// coding gain of {X_b E}.
inline double ngs_effective_coding_gain(const Codebook& duc, int trials,
                                        RandomStream& stream, int rx = 1) {
  if (trials < 1) throw ParameterError("ngs_effective_coding_gain: trials must be >= 1");
  const int m = duc.antennas;
  std::vector<double> gains;
  gains.reserve(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const ComplexMatrix e = sample_complex_gaussian(stream, m, 1, 1.0 / m);
    gains.push_back(projected_coding_gain(duc, e, rx));
  }
  return median(std::move(gains));
}

struct SecurityPoint {
  double snr_db = 0.0;
  int antennas = 1;
  double kl = 0.0;
  double xi_min = 1.0;          // raw, may be negative
  double xi_min_clamped = 1.0;  // max(0, xi_min)
};

/// D(CN(0, s1) || CN(0, s0)) for variance ratio r = s1/s0: r - ln r - 1.
inline double complex_gaussian_kl(double ratio) {
  if (!(ratio > 0.0)) throw ParameterError("complex_gaussian_kl: ratio must be > 0");
  const double x = ratio - 1.0;
  if (std::abs(x) < 1e-3) {
    // x - log1p(x) by series; avoids cancellation near r = 1.
    return x * x * (0.5 - x * (1.0 / 3.0 - x * (0.25 - x / 5.0)));
  }
  return x - std::log1p(x);
}

/// Lower bound 1 - sqrt(D/2) on the warden's minimum detection error for a
/// single complex observation, noise-only CN(0, s0) versus signal-plus-noise
/// CN(0, 1/M + s0), with s0 = 10^(-snr_db/10).
inline SecurityPoint willie_error_lower_bound(double snr_db, int antennas) {
  if (antennas < 1) throw ParameterError("willie_error_lower_bound: M must be >= 1");
  SecurityPoint p;
  p.snr_db = snr_db;
  p.antennas = antennas;
  const double s0 = noise_variance_from_snr_db(snr_db);
  const double signal = 1.0 / antennas;
  p.kl = complex_gaussian_kl(1.0 + signal / s0);
  p.xi_min = 1.0 - std::sqrt(p.kl / 2.0);
  p.xi_min_clamped = std::max(0.0, p.xi_min);
  return p;
}

struct ComplexityParams {
  int antennas = 2;   // M
  int rx = 64;        // N
  int slots = 1;      // T
  int bits = 2;       // B
  int blocks = 38;    // W
  int iterations = 5; // I_max
};

struct ComplexityReport {
  ComplexityParams params;
  double conventional = 0.0;          // C_c, all terms
  double proposed = 0.0;              // C_p, all terms
  double conventional_leading = 0.0;
  double proposed_leading = 0.0;
  double ratio = 0.0;                 // C_p / C_c
  double leading_ratio = 0.0;         // leading C_p / leading C_c
  double asymptotic_ratio = 0.0;      // (1/I_max)(1 + 1/M + 1/N)/(1 + 1/M)
};

/// Real multiplication counts of the semi-blind (C_c) and noncoherent (C_p)
/// decoders per frame.
inline ComplexityReport complexity_counts(const ComplexityParams& p) {
  if (p.antennas < 1 || p.rx < 1 || p.slots < 1 || p.bits < 1 || p.blocks < 1 ||
      p.iterations < 1) {
    throw ParameterError("complexity_counts: all parameters must be positive");
  }
  const double m = p.antennas, n = p.rx, t = p.slots, w = p.blocks,
               imax = p.iterations;
  const double cb = std::ldexp(1.0, p.bits);
  ComplexityReport r;
  r.params = p;
  r.conventional_leading = cb * w * imax * (4 * m * n * t + 4 * n * t);
  r.conventional = r.conventional_leading +
                   m * w * (imax - 1) * (8 * m * t + 4 * n / w + m * m / w);
  r.proposed_leading = cb * w * (4 * m * n * t + 4 * n * t + 4 * m * t);
  r.proposed = r.proposed_leading + m * w * (8 * m * n + 4 * n * t + 4 * m * t);
  r.ratio = r.proposed / r.conventional;
  r.leading_ratio = r.proposed_leading / r.conventional_leading;
  r.asymptotic_ratio = (1.0 / imax) * (1.0 + 1.0 / m + 1.0 / n) / (1.0 + 1.0 / m);
  return r;
}

/// Complementary Kolmogorov distribution Q_KS(lambda) = P(K > lambda).
inline double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form, fast for small lambda.
    const double pi = std::numbers::pi;
    const double y = std::exp(-pi * pi / (8.0 * lambda * lambda));
    double sum = 0.0;
    double term = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double odd = 2.0 * k - 1.0;
      term = std::pow(y, odd * odd);
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * pi) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample KS test against N(0, variance).
inline KsResult ks_test_normal(std::vector<double> x, double variance) {
  if (x.empty()) throw ParameterError("ks_test_normal: empty sample");
  if (!(variance > 0.0)) throw ParameterError("ks_test_normal: variance must be > 0");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  const double scale = std::sqrt(2.0 * variance);
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-x[i] / scale);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - cdf,
                  cdf - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

struct PartDiagnostics {
  double mean = 0.0;
  double variance = 0.0;  // second moment about zero
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  double excess_kurtosis = 0.0;
};

struct GaussianityDiagnostics {
  std::size_t samples = 0;
  Complex mean{0.0, 0.0};
  PartDiagnostics real;
  PartDiagnostics imag;

  bool passes(double significance) const {
    return real.ks_p_value > significance && imag.ks_p_value > significance;
  }
};

inline constexpr std::size_t kMinDiagnosticSamples = 1000;

inline GaussianityDiagnostics gaussianity_diagnostics(
    std::span<const Complex> samples) {
  if (samples.size() < kMinDiagnosticSamples) {
    throw ParameterError("gaussianity_diagnostics: need at least 1000 samples");
  }
  GaussianityDiagnostics g;
  g.samples = samples.size();
  auto part = [&](auto get) {
    std::vector<double> x;
    x.reserve(samples.size());
    for (const Complex& s : samples) x.push_back(get(s));
    const double n = static_cast<double>(x.size());
    PartDiagnostics d;
    double sum = 0.0, sq = 0.0;
    for (double v : x) {
      sum += v;
      sq += v * v;
    }
    d.mean = sum / n;
    d.variance = sq / n;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
      const double c = (v - d.mean) * (v - d.mean);
      m2 += c;
      m4 += c * c;
    }
    m2 /= n;
    m4 /= n;
    d.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    if (d.variance > 0.0) {
      const KsResult ks = ks_test_normal(std::move(x), d.variance);
      d.ks_statistic = ks.statistic;
      d.ks_p_value = ks.p_value;
    } else {
      d.ks_statistic = 1.0;
      d.ks_p_value = 0.0;
    }
    return d;
  };
  g.real = part([](const Complex& s) { return s.real(); });
  g.imag = part([](const Complex& s) { return s.imag(); });
  g.mean = {g.real.mean, g.imag.mean};
  return g;
}

/// Flattens matrices into a pool of complex entries.
inline std::vector<Complex> pool_entries(std::span<const ComplexMatrix> mats) {
  std::vector<Complex> out;
  for (const auto& m : mats) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    }
  }
  return out;
}

}  // namespace covertsim
