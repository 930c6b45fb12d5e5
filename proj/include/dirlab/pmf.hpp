#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dirlab/params.hpp"

namespace dirlab {

// Distribution of M, the number of dummy queries sent per retrieval.
struct DummyCountPmf {
  struct Atom {
    std::uint64_t m = 0;
    double prob = 0.0;
  };

  std::vector<Atom> support;  // ascending in m, strictly positive mass
  double mean = 0.0;          // E[M]
  double harmonic = 0.0;      // E[1/(M+1)]

  void recompute_moments() {
    mean = 0.0;
    harmonic = 0.0;
    for (const Atom& a : support) {
      mean += static_cast<double>(a.m) * a.prob;
      harmonic += a.prob / (static_cast<double>(a.m) + 1.0);
    }
  }
};

/// Minimum-mean PMF of M subject to E[1/(M+1)] = alpha: two adjacent support
/// points {u-1, u} with u = floor(1/alpha), collapsing to the single point
/// u-1 when 1/alpha is integral. The resulting mean is 2u - u(u+1) alpha.
inline DummyCountPmf optimal_dummy_pmf(double alpha) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  const std::uint64_t u = support_locator(alpha);
  const double uf = static_cast<double>(u);

  DummyCountPmf pmf;
  const double inv = 1.0 / alpha;
  if (std::abs(inv - std::round(inv)) < 1e-9) {
    // Exact boundary alpha = 1/u: the two-point form degenerates; return the
    // single point with the same mean.
    pmf.support = {{u - 1, 1.0}};
  } else {
    const double at_lower = uf * ((uf + 1.0) * alpha - 1.0);  // mass on u-1
    const double at_upper = (uf + 1.0) * (1.0 - uf * alpha);  // mass on u
    pmf.support = {{u - 1, at_lower}, {u, at_upper}};
  }
  pmf.recompute_moments();
  return pmf;
}

/// Exhaustive oracle for the same problem: tries every one-point support and
/// every pair {i, j} with 0 <= i < j <= max_support (not only adjacent
/// pairs), solves the 2x2 system for the masses, and keeps the feasible
/// solution of minimal mean.
inline DummyCountPmf brute_force_min_mean(double alpha,
                                          std::uint64_t max_support) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  const double inv = 1.0 / alpha;
  const std::uint64_t needed =
      static_cast<std::uint64_t>(std::ceil(inv - 1e-9)) + 2;
  detail::require(max_support >= needed,
                  "max_support must be at least ceil(1/alpha) + 2");

  std::optional<DummyCountPmf> best;
  double best_mean = std::numeric_limits<double>::infinity();
  const auto consider = [&](DummyCountPmf candidate) {
    candidate.recompute_moments();
    if (candidate.mean < best_mean) {
      best_mean = candidate.mean;
      best = std::move(candidate);
    }
  };

  for (std::uint64_t m = 0; m <= max_support; ++m) {
    if (std::abs(1.0 / (static_cast<double>(m) + 1.0) - alpha) <= 1e-12) {
      consider(DummyCountPmf{{{m, 1.0}}, 0.0, 0.0});
    }
  }
  for (std::uint64_t i = 0; i < max_support; ++i) {
    const double hi = 1.0 / (static_cast<double>(i) + 1.0);
    for (std::uint64_t j = i + 1; j <= max_support; ++j) {
      const double lo = 1.0 / (static_cast<double>(j) + 1.0);
      double mass_i = (alpha - lo) / (hi - lo);
      double mass_j = 1.0 - mass_i;
      if (mass_i < -1e-12 || mass_j < -1e-12) continue;  // infeasible pair
      mass_i = std::max(mass_i, 0.0);
      mass_j = std::max(mass_j, 0.0);
      DummyCountPmf candidate;
      if (mass_i > 0.0) candidate.support.push_back({i, mass_i});
      if (mass_j > 0.0) candidate.support.push_back({j, mass_j});
      consider(std::move(candidate));
    }
  }

  if (!best) {
    throw std::runtime_error("no feasible dummy-count PMF found");
  }
  return *best;
}

}  // namespace dirlab
