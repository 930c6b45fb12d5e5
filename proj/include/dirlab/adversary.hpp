#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "dirlab/codebook.hpp"
#include "dirlab/query.hpp"
#include "dirlab/rng.hpp"

namespace dirlab {

// A database's guess at the required file for one received query.
struct Prediction {
  int predicted_file = 0;
  std::vector<double> posterior;  // one entry per file, sums to 1
  bool was_tie = false;
};

/// Normalises a likelihood vector into a posterior (uniform priors cancel).
inline std::vector<double> posterior_from_likelihoods(
    std::span<const double> likelihoods) {
  double total = 0.0;
  for (double v : likelihoods) total += v;
  if (!(total > 0.0)) {
    throw std::domain_error("query has zero total probability");
  }
  std::vector<double> post(likelihoods.begin(), likelihoods.end());
  for (double& v : post) v /= total;
  return post;
}

/// Posterior over the K files given a received query, with uniform priors.
inline std::vector<double> posterior(const OverallDistribution& dist,
                                     const Query& q) {
  std::vector<double> likelihoods;
  likelihoods.reserve(static_cast<std::size_t>(dist.params().n_files));
  for (int theta = 1; theta <= dist.params().n_files; ++theta) {
    likelihoods.push_back(dist.prob(q, theta));
  }
  return posterior_from_likelihoods(likelihoods);
}

// Files whose posterior is within relative 1e-9 of the maximum; at eps = 0
// all posteriors are analytically equal but float-noisy, hence the
// tolerance.
inline std::vector<int> argmax_set(std::span<const double> post) {
  double best = 0.0;
  for (double v : post) best = std::max(best, v);
  std::vector<int> ties;
  for (int i = 0; i < static_cast<int>(post.size()); ++i) {
    if (post[static_cast<std::size_t>(i)] >= best * (1.0 - 1e-9)) {
      ties.push_back(i + 1);
    }
  }
  return ties;
}

/// MAP prediction with uniform random tie-breaking.
inline Prediction predict(const OverallDistribution& dist, const Query& q,
                          Rng& rng) {
  Prediction out;
  out.posterior = posterior(dist, q);
  const std::vector<int> ties = argmax_set(out.posterior);
  out.was_tie = ties.size() > 1;
  out.predicted_file =
      out.was_tie
          ? ties[static_cast<std::size_t>(rng.uniform_index(ties.size()))]
          : ties.front();
  return out;
}

}  // namespace dirlab
