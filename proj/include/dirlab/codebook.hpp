#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dirlab/params.hpp"
#include "dirlab/query.hpp"

namespace dirlab {

// Probability class of a real query row: Base rows carry probability p,
// Boosted rows p * e^eps.
enum class ProbClass { kBase, kBoosted };

inline const char* to_string(ProbClass c) {
  return c == ProbClass::kBase ? "base" : "boosted";
}

// One row of the real query table: the queries sent to the N databases at a
// requirement time, drawn with its class probability.
struct RealQueryRow {
  std::vector<Query> per_database;
  ProbClass prob_class = ProbClass::kBase;
};

// One row of the dummy query table: the same single-segment query sent to
// every database, drawn uniformly over the N-1 segments.
struct DummyQueryRow {
  std::vector<Query> per_database;
  double prob = 0.0;
};

struct ValidationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Real query table for one required file: N^K rows. Every interference
// pattern (a per-other-file choice of absent or one segment) appears in N
// cyclic assignments; shift s puts the interference-only query at database
// (s mod N) + 1 and segment r of the required file at the r-th database
// after it. Rows whose pattern is empty are the Base rows and come first.
inline std::vector<RealQueryRow> build_real_table(
    const SchemeParams& params, int file, std::uint64_t row_limit = 1000000) {
  const int n = params.n_databases;
  const int k = params.n_files;
  detail::require(file >= 1 && file <= k, "file index out of range");
  if (params.query_space > row_limit) {
    throw std::overflow_error("real table would have " +
                              std::to_string(params.query_space) +
                              " rows, above the limit of " +
                              std::to_string(row_limit));
  }

  std::vector<RealQueryRow> table;
  table.reserve(params.query_space);

  // Odometer over the interference pattern, lexicographic with the required
  // file pinned to zero; the all-zero pattern is first.
  Query pattern(k);
  while (true) {
    const bool empty_pattern = pattern.is_null();
    for (int shift = 0; shift < n; ++shift) {
      RealQueryRow row;
      row.prob_class = empty_pattern ? ProbClass::kBase : ProbClass::kBoosted;
      row.per_database.assign(static_cast<std::size_t>(n), Query(k));
      row.per_database[static_cast<std::size_t>(shift % n)] = pattern;
      for (int r = 1; r <= n - 1; ++r) {
        Query q = pattern;
        q.set_coeff(file, static_cast<std::uint16_t>(r));
        row.per_database[static_cast<std::size_t>((shift + r) % n)] = q;
      }
      table.push_back(std::move(row));
    }

    int pos = k;
    while (pos >= 1 && (pos == file || pattern.coeff(pos) == n - 1)) {
      if (pos != file) pattern.set_coeff(pos, 0);
      --pos;
    }
    if (pos < 1) break;
    pattern.set_coeff(pos, static_cast<std::uint16_t>(pattern.coeff(pos) + 1));
  }
  return table;
}

inline std::vector<DummyQueryRow> build_dummy_table(const SchemeParams& params,
                                                    int file) {
  const int n = params.n_databases;
  detail::require(file >= 1 && file <= params.n_files,
                  "file index out of range");
  std::vector<DummyQueryRow> table;
  table.reserve(static_cast<std::size_t>(n - 1));
  for (int r = 1; r <= n - 1; ++r) {
    Query q(params.n_files);
    q.set_coeff(file, static_cast<std::uint16_t>(r));
    DummyQueryRow row;
    row.per_database.assign(static_cast<std::size_t>(n), q);
    row.prob = 1.0 / (n - 1.0);
    table.push_back(std::move(row));
  }
  return table;
}

// Query distribution as seen by any one database (the scheme is symmetric
// across databases): real-time conditionals and the overall mixture the
// databases actually know.
class OverallDistribution {
 public:
  explicit OverallDistribution(const SchemeParams& params) : params_(params) {}

  const SchemeParams& params() const { return params_; }

  // P(Q_n = q | theta, R = 1): p for the null query and the theta-segment
  // queries, p e^eps for everything else.
  double real_prob(const Query& q, int theta) const {
    check(q, theta);
    if (q.is_null() || q.single_file() == theta) return params_.p_base;
    return params_.p_base * params_.exp_eps;
  }

  // P(Q_n = q | theta): alpha-mixture of the real conditional and the
  // uniform dummy distribution on the theta segments.
  double prob(const Query& q, int theta) const {
    check(q, theta);
    const double a = params_.alpha;
    const double p = params_.p_base;
    if (q.is_null()) return a * p;
    if (q.single_file() == theta) {
      return a * p + (1.0 - a) / (params_.n_databases - 1.0);
    }
    return a * p * params_.exp_eps;
  }

 private:
  void check(const Query& q, int theta) const {
    detail::require(theta >= 1 && theta <= params_.n_files,
                    "theta out of range");
    detail::require(q.n_files() == params_.n_files,
                    "query has wrong file count");
    for (int i = 1; i <= q.n_files(); ++i) {
      detail::require(q.coeff(i) <= params_.n_databases - 1,
                      "segment index out of range");
    }
  }

  SchemeParams params_;
};

// Outcome of checking a query against the deceptive/PIR conditions.
struct QueryClass {
  enum Kind { kDeceptive, kPir };
  Kind kind = kPir;
  int file = 0;      // target file when deceptive
  double eps = 0.0;  // deception strength when deceptive
};

namespace detail {

inline bool ratio_close(double value, double expected) {
  return std::abs(value - expected) <=
         1e-9 * std::max({1.0, std::abs(value), std::abs(expected)});
}

}  // namespace detail

// Classifies a codebook query: a single-segment query of file k must satisfy
// both deceptive ratios (real-usage ratio e^-eps, posterior ratio e^+eps
// against every other file); anything else must have a uniform posterior.
// With uniform priors the posterior ratio equals the overall-probability
// ratio. Throws ValidationFailure naming the violated ratio.
inline QueryClass classify_query(const OverallDistribution& dist,
                                 const Query& q) {
  const SchemeParams& s = dist.params();
  const int sf = q.single_file();

  if (sf != 0 && s.exp_eps > 1.0) {
    for (int other = 1; other <= s.n_files; ++other) {
      if (other == sf) continue;
      const double real_ratio =
          dist.real_prob(q, sf) / dist.real_prob(q, other);
      if (!detail::ratio_close(real_ratio, 1.0 / s.exp_eps)) {
        throw ValidationFailure(
            "query " + q.to_string() + ": real-usage ratio vs theta=" +
            std::to_string(other) + " is " + std::to_string(real_ratio) +
            ", expected e^-eps");
      }
      const double posterior_ratio = dist.prob(q, sf) / dist.prob(q, other);
      if (!detail::ratio_close(posterior_ratio, s.exp_eps)) {
        throw ValidationFailure(
            "query " + q.to_string() + ": posterior ratio vs theta=" +
            std::to_string(other) + " is " + std::to_string(posterior_ratio) +
            ", expected e^+eps");
      }
    }
    return {QueryClass::kDeceptive, sf, s.eps};
  }

  for (int a = 1; a <= s.n_files; ++a) {
    const double ratio = dist.prob(q, a) / dist.prob(q, 1);
    if (!detail::ratio_close(ratio, 1.0)) {
      throw ValidationFailure("query " + q.to_string() +
                              ": posterior ratio theta=" + std::to_string(a) +
                              " vs theta=1 is " + std::to_string(ratio) +
                              ", expected 1");
    }
  }
  return {QueryClass::kPir, 0, 0.0};
}

}  // namespace dirlab
