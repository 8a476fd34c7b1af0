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

// Diagonal unitary codes: X_b = diag(exp(j 2 pi b u_m / 2^B)), with the
// factor vector u chosen to maximise the diversity product.

#pragma once

#include "covertsim/codebook.hpp"
#include "covertsim/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

namespace covertsim {

/// Factor vector u with 0 < u_1 <= ... <= u_M <= 2^B / 2.
struct DucFactors {
  int bits = 1;
  std::vector<int> u{1};

  int antennas() const { return static_cast<int>(u.size()); }
  int upper_bound() const { return bits >= 1 ? (1 << (bits - 1)) : 0; }

  bool feasible() const {
    if (bits < 1 || bits > 30 || u.empty()) return false;
    if (u.front() < 1 || u.back() > upper_bound()) return false;
    return std::is_sorted(u.begin(), u.end());
  }

  void validate() const {
    if (!feasible()) {
      throw ParameterError("DucFactors: need 0 < u_1 <= ... <= u_M <= 2^B/2");
    }
  }

  friend bool operator==(const DucFactors&, const DucFactors&) = default;
};

inline ComplexMatrix duc_matrix(std::int64_t index, const DucFactors& factors) {
  factors.validate();
  const std::int64_t order = std::int64_t{1} << factors.bits;
  if (index < 0 || index >= order) {
    throw ParameterError("duc_matrix: index out of range [0, 2^B)");
  }
  const int m = factors.antennas();
  ComplexMatrix x = ComplexMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    // Reduce the phase numerator exactly before converting to an angle.
    const std::int64_t num = (index * factors.u[static_cast<std::size_t>(i)]) % order;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(num) /
                         static_cast<double>(order);
    x(i, i) = std::polar(1.0, angle);
  }
  return x;
}

inline Codebook duc_codebook(const DucFactors& factors) {
  factors.validate();
  if (factors.bits > 16) {
    throw CapacityError("duc_codebook: B exceeds enumeration guard of 16 bits");
  }
  Codebook cb{Scheme::kDuc, factors.bits, factors.antennas(),
              factors.antennas(), {}};
  const std::int64_t order = std::int64_t{1} << factors.bits;
  cb.codewords.reserve(static_cast<std::size_t>(order));
  for (std::int64_t b = 0; b < order; ++b) {
    cb.codewords.push_back(duc_matrix(b, factors));
  }
  return cb;
}

namespace detail {

// |sin(pi j / 2^B)| for j in [0, 2^B).
inline std::vector<double> sine_table(int bits) {
  const std::size_t order = std::size_t{1} << bits;
  std::vector<double> t(order);
  for (std::size_t j = 0; j < order; ++j) {
    t[j] = std::abs(std::sin(std::numbers::pi * static_cast<double>(j) /
                             static_cast<double>(order)));
  }
  return t;
}

// min_b prod_m |sin(pi b u_m / 2^B)|, without the 1/M root.
inline double min_sine_product(const std::vector<double>& table,
                               const std::vector<int>& u) {
  const std::size_t order = table.size();
  const std::size_t mask = order - 1;
  double worst = 1.0;
  for (std::size_t b = 1; b < order; ++b) {
    double p = 1.0;
    for (int um : u) {
      p *= table[(b * static_cast<std::size_t>(um)) & mask];
      if (p == 0.0) break;
    }
    if (p < worst) {
      worst = p;
      if (worst == 0.0) break;
    }
  }
  return worst;
}

inline double root_m(double product, std::size_t m) {
  return product <= 0.0 ? 0.0 : std::pow(product, 1.0 / static_cast<double>(m));
}

}  // namespace detail

/// min over b in 1..2^B-1 of |prod_m sin(pi b u_m / 2^B)|^(1/M).
inline double diversity_product(const DucFactors& factors) {
  factors.validate();
  if (factors.bits > 24) {
    throw CapacityError("diversity_product: B too large to enumerate");
  }
  const auto table = detail::sine_table(factors.bits);
  return detail::root_m(detail::min_sine_product(table, factors.u),
                        factors.u.size());
}

/// Number of feasible (non-decreasing) factor vectors, saturating at `cap`.
inline std::uint64_t feasible_factor_count(int bits, int antennas,
                                           std::uint64_t cap) {
  // C(upper + M - 1, M) evaluated incrementally.
  const std::uint64_t upper = std::uint64_t{1} << (bits - 1);
  long double c = 1.0L;
  for (int k = 1; k <= antennas; ++k) {
    c = c * static_cast<long double>(upper + static_cast<std::uint64_t>(k) - 1) /
        static_cast<long double>(k);
    if (c > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(c + 0.5L);
}

struct FactorSearchResult {
  DucFactors factors;
  double diversity_product = 0.0;
  bool exhaustive = false;
  std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kDefaultSearchBudget = 1'000'000;

namespace detail {

// Relative slack under which two products count as tied.
inline constexpr double kTieTolerance = 1e-12;

inline bool better(double cand, const std::vector<int>& cand_u, double best,
                   const std::vector<int>& best_u) {
  if (cand > best * (1.0 + kTieTolerance) + 1e-300) return true;
  if (cand >= best * (1.0 - kTieTolerance)) return cand_u < best_u;
  return false;
}

}  // namespace detail

/// Factor search maximising the diversity product. Exhaustive over all
/// non-decreasing vectors when their count is <= budget; otherwise seeded
/// random restarts with coordinate ascent. Ties go to the lexicographically
/// smallest u.
inline FactorSearchResult optimize_factors_detailed(
    int bits, int antennas, std::uint64_t budget = kDefaultSearchBudget,
    std::uint64_t seed = 0x5EED) {
  if (bits < 1 || antennas < 1) {
    throw ParameterError("optimize_factors: B and M must be >= 1");
  }
  if (bits > 24) {
    throw CapacityError("optimize_factors: B too large to enumerate");
  }
  const auto table = detail::sine_table(bits);
  const int upper = 1 << (bits - 1);
  const auto m = static_cast<std::size_t>(antennas);

  FactorSearchResult res;
  res.factors.bits = bits;
  std::vector<int> best_u(m, 1);
  double best = detail::min_sine_product(table, best_u);
  res.evaluated = 1;

  if (feasible_factor_count(bits, antennas, budget) <= budget) {
    res.exhaustive = true;
    std::vector<int> u(m, 1);
    while (true) {
      const double p = detail::min_sine_product(table, u);
      ++res.evaluated;
      if (detail::better(p, u, best, best_u)) {
        best = p;
        best_u = u;
      }
      // Next non-decreasing vector in lexicographic order.
      std::size_t pos = m;
      while (pos > 0 && u[pos - 1] == upper) --pos;
      if (pos == 0) break;
      const int v = u[pos - 1] + 1;
      for (std::size_t i = pos - 1; i < m; ++i) u[i] = v;
    }
  } else {
    RandomStream rng = derive_stream(seed, "duc_search",
                                     static_cast<std::uint64_t>(bits) * 64 +
                                         static_cast<std::uint64_t>(antennas));
    const int restarts = 24;
    for (int r = 0; r < restarts; ++r) {
      std::vector<int> u(m);
      for (auto& x : u) x = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(upper));
      std::sort(u.begin(), u.end());
      double cur = detail::min_sine_product(table, u);
      bool improved = true;
      while (improved) {
        improved = false;
        for (std::size_t i = 0; i < m; ++i) {
          for (int v = 1; v <= upper; ++v) {
            std::vector<int> cand = u;
            cand[i] = v;
            std::sort(cand.begin(), cand.end());
            const double p = detail::min_sine_product(table, cand);
            ++res.evaluated;
            if (p > cur * (1.0 + detail::kTieTolerance) + 1e-300) {
              cur = p;
              u = std::move(cand);
              improved = true;
            }
          }
        }
      }
      if (detail::better(cur, u, best, best_u)) {
        best = cur;
        best_u = u;
      }
    }
  }
  res.factors.u = best_u;
  res.diversity_product = detail::root_m(best, m);
  return res;
}

inline DucFactors optimize_factors(int bits, int antennas,
                                   std::uint64_t budget = kDefaultSearchBudget) {
  return optimize_factors_detailed(bits, antennas, budget).factors;
}

}  // namespace covertsim
