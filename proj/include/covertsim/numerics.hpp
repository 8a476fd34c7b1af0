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

// Shared numerics: complex dense matrices, addressable random streams and
// complex Gaussian sampling.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace covertsim {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

// Bad argument values (shapes, ranges, lengths).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Gram matrix that cannot be inverted reliably.
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Enumeration requests that exceed a hard size guard.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// Counter-based pseudo-random stream addressed by (master_seed, label, index).
///
/// The n-th output is a fixed function of the key and n, so a stream can be
/// rebuilt anywhere (transmitter, receiver, another worker thread) and yields
/// the same sequence. Satisfies UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  RandomStream(std::uint64_t master_seed, std::string_view label,
               std::uint64_t index)
      : master_seed_(master_seed), label_(label), index_(index) {
    const std::uint64_t a = detail::mix64(master_seed + detail::kGolden);
    const std::uint64_t b = detail::mix64(detail::fnv1a(label) ^ a);
    key_lo_ = detail::mix64(b + index * detail::kGolden);
    key_hi_ = detail::mix64(key_lo_ ^ 0xD1B54A32D192ED03ULL);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    ++counter_;
    return detail::mix64(detail::mix64(counter_ * detail::kGolden + key_lo_) ^
                         key_hi_);
  }

  /// Uniform double on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform double on (0, 1].
  double uniform_open_zero() { return 1.0 - uniform(); }

  /// One circularly-symmetric complex Gaussian draw with the given variance
  /// (each part variance/2).
  Complex complex_gaussian(double variance) {
    const double radius = std::sqrt(-std::log(uniform_open_zero()) * variance);
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

  std::uint64_t master_seed() const { return master_seed_; }
  const std::string& label() const { return label_; }
  std::uint64_t index() const { return index_; }
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t master_seed_;
  std::string label_;
  std::uint64_t index_;
  std::uint64_t key_lo_ = 0;
  std::uint64_t key_hi_ = 0;
  std::uint64_t counter_ = 0;
};

inline RandomStream derive_stream(std::uint64_t master_seed,
                                  std::string_view label, std::uint64_t index) {
  return RandomStream(master_seed, label, index);
}

/// rows x cols matrix of i.i.d. CN(0, variance) entries, filled row-major.
inline ComplexMatrix sample_complex_gaussian(RandomStream& stream,
                                             Eigen::Index rows,
                                             Eigen::Index cols,
                                             double variance) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw ParameterError("sample_complex_gaussian: variance must be positive");
  }
  if (rows < 0 || cols < 0) {
    throw ParameterError("sample_complex_gaussian: negative dimension");
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      out(r, c) = stream.complex_gaussian(variance);
    }
  }
  return out;
}

/// Condition number bound above which a Gram matrix is treated as singular.
inline constexpr double kMaxGramCondition = 1e12;

/// Right pseudo-inverse A^H (A A^H)^{-1} of a full-row-rank matrix.
inline ComplexMatrix pseudo_inverse(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.rows() > a.cols()) {
    throw SingularityError("pseudo_inverse: matrix is not full row rank (" +
                           std::to_string(a.rows()) + "x" +
                           std::to_string(a.cols()) + ")");
  }
  const ComplexMatrix gram = a * a.adjoint();
  const Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(
      gram, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(hi > 0.0) || !(lo > hi / kMaxGramCondition)) {
    throw SingularityError("pseudo_inverse: Gram matrix is singular (cond " +
                           std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
  const Eigen::LLT<ComplexMatrix> llt(gram);
  // (A A^H)^{-1} is Hermitian, so A^H (A A^H)^{-1} = (solve(gram, A))^H.
  return llt.solve(a).adjoint();
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline double frobenius_sq(const ComplexMatrix& m) {
  return m.squaredNorm();
}

/// Nearest unitary matrix (polar factor) of a square matrix.
inline ComplexMatrix nearest_unitary(const ComplexMatrix& m) {
  const Eigen::JacobiSVD<ComplexMatrix> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Linear noise variance for an SNR in dB (10 log10 power ratio).
inline double noise_variance_from_snr_db(double snr_db) {
  return std::pow(10.0, -snr_db / 10.0);
}

inline double snr_db_from_noise_variance(double noise_variance) {
  return -10.0 * std::log10(noise_variance);
}

}  // namespace covertsim
