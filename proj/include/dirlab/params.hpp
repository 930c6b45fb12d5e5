#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dirlab {

namespace detail {

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

// Scale-aware closeness for internal consistency checks.
inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// base^exp through a 128-bit intermediate; anything above 2^63 is rejected so
// the result always fits the table-indexing arithmetic downstream.
inline std::uint64_t checked_pow(std::uint64_t base, unsigned exp) {
  const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 63;
  unsigned __int128 acc = 1;
  for (unsigned i = 0; i < exp; ++i) {
    acc *= base;
    if (acc > limit) {
      throw std::overflow_error("query space " + std::to_string(base) + "^" +
                                std::to_string(exp) + " exceeds 2^63");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

// floor(1/alpha) with a snap-to-integer guard: when 1/alpha sits within 1e-9
// of an integer it is treated as that integer, so alpha = 1 yields u = 1
// under floating-point noise instead of 0.
inline std::uint64_t support_locator(double alpha) {
  detail::require(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
  const double inv = 1.0 / alpha;
  const double snapped = std::round(inv);
  if (std::abs(inv - snapped) < 1e-9) {
    return static_cast<std::uint64_t>(snapped);
  }
  return static_cast<std::uint64_t>(std::floor(inv));
}

/// Supremum of achievable deception: (K-1)(N-1) / (K (N^K - N)).
inline double deception_capacity(int n_databases, int n_files) {
  detail::require(n_databases >= 2, "n_databases must be at least 2");
  detail::require(n_files >= 2, "n_files must be at least 2");
  const double nk = static_cast<double>(
      checked_pow(static_cast<std::uint64_t>(n_databases),
                  static_cast<unsigned>(n_files)));
  const double n = n_databases;
  const double k = n_files;
  return (k - 1.0) * (n - 1.0) / (k * (nk - n));
}

// e^eps that realises deception d. Kept rational in d so that d = 0 maps to
// exactly 1 and the deception/epsilon round trip avoids an exp/log cycle.
inline double exp_epsilon_from_deception(int n_databases, int n_files,
                                         double d) {
  const double d_max = deception_capacity(n_databases, n_files);
  detail::require(d >= 0.0 && d < d_max,
                  "deception must lie in [0, " + std::to_string(d_max) +
                      ") for N=" + std::to_string(n_databases) +
                      " K=" + std::to_string(n_files));
  const double nk = static_cast<double>(
      checked_pow(static_cast<std::uint64_t>(n_databases),
                  static_cast<unsigned>(n_files)));
  const double n = n_databases;
  const double k = n_files;
  const double num = d * k * n + (k - 1.0) * (n - 1.0);
  const double den = num - d * k * nk;
  return num / den;
}

inline double epsilon_from_deception(int n_databases, int n_files, double d) {
  return std::log(exp_epsilon_from_deception(n_databases, n_files, d));
}

/// Deception realised by a given epsilon; strictly increasing in eps and
/// bounded by deception_capacity.
inline double deception_from_epsilon(int n_databases, int n_files,
                                     double eps) {
  detail::require(eps >= 0.0, "epsilon must be non-negative");
  const double nk = static_cast<double>(
      checked_pow(static_cast<std::uint64_t>(n_databases),
                  static_cast<unsigned>(n_files)));
  const double n = n_databases;
  const double k = n_files;
  const double e = std::exp(eps);
  return (k - 1.0) * (n - 1.0) * (e - 1.0) / (k * (n + (nk - n) * e));
}

namespace detail {

// alpha as a function of e^eps; shared by the epsilon- and deception-based
// constructors below.
inline double alpha_from_exp_epsilon(int n_databases, int n_files,
                                     double exp_eps) {
  const double nk = static_cast<double>(
      checked_pow(static_cast<std::uint64_t>(n_databases),
                  static_cast<unsigned>(n_files)));
  const double n = n_databases;
  const double denom =
      (n - 1.0) * exp_eps * exp_eps + (nk - n) * exp_eps + 1.0;
  require(std::isfinite(denom), "epsilon too large: e^(2 eps) overflows");
  return (n + (nk - n) * exp_eps) / denom;
}

}  // namespace detail

/// Probability that a received query is real, E[1/(M+1)], for a given eps.
inline double alpha_from_epsilon(int n_databases, int n_files, double eps) {
  detail::require(eps >= 0.0, "epsilon must be non-negative");
  checked_pow(static_cast<std::uint64_t>(n_databases),
              static_cast<unsigned>(n_files));
  detail::require(n_databases >= 2 && n_files >= 2,
                  "scheme requires N >= 2 and K >= 2");
  return detail::alpha_from_exp_epsilon(n_databases, n_files, std::exp(eps));
}

// Full parameter tuple of the scheme. Everything is derived from (N, K) and
// e^eps; e^eps is the internal parametrisation, eps is kept for reporting.
struct SchemeParams {
  int n_databases = 0;            // N
  int n_files = 0;                // K
  double deception = 0.0;         // d
  double eps = 0.0;               // nats
  double exp_eps = 1.0;           // e^eps
  double p_base = 0.0;            // p, the base real-row probability
  double alpha = 1.0;             // P(received query is real)
  std::uint64_t u = 1;            // floor(1/alpha), boundary-snapped
  std::uint64_t query_space = 0;  // N^K

  int n_segments() const { return n_databases - 1; }

  static SchemeParams from_exp_epsilon(int n_databases, int n_files,
                                       double exp_eps) {
    detail::require(n_databases >= 2, "n_databases must be at least 2");
    detail::require(n_files >= 2, "n_files must be at least 2");
    detail::require(exp_eps >= 1.0 && std::isfinite(exp_eps),
                    "exp(eps) must be finite and at least 1");
    SchemeParams s;
    s.n_databases = n_databases;
    s.n_files = n_files;
    s.query_space = checked_pow(static_cast<std::uint64_t>(n_databases),
                                static_cast<unsigned>(n_files));
    s.exp_eps = exp_eps;
    s.eps = std::log(exp_eps);
    const double nk = static_cast<double>(s.query_space);
    const double n = n_databases;
    const double k = n_files;
    s.p_base = 1.0 / (n + (nk - n) * exp_eps);
    s.alpha = detail::alpha_from_exp_epsilon(n_databases, n_files, exp_eps);
    s.u = support_locator(s.alpha);
    s.deception =
        (k - 1.0) * (n - 1.0) * (exp_eps - 1.0) / (k * (n + (nk - n) * exp_eps));

    // Construction-time sanity: real-row probabilities normalise, and alpha
    // falls in the bracket (1/(u+1), 1/u] that locates the dummy-count PMF.
    const double mass = n * s.p_base + (nk - n) * s.p_base * exp_eps;
    if (std::abs(mass - 1.0) > 1e-12) {
      throw std::logic_error("real query probabilities do not normalise");
    }
    if (!(s.alpha > 0.0 && s.alpha <= 1.0) ||
        s.alpha > 1.0 / static_cast<double>(s.u) + 1e-9 ||
        s.alpha <= 1.0 / static_cast<double>(s.u + 1) - 1e-9) {
      throw std::logic_error("alpha fell outside (1/(u+1), 1/u]");
    }
    return s;
  }

  static SchemeParams from_epsilon(int n_databases, int n_files, double eps) {
    detail::require(eps >= 0.0, "epsilon must be non-negative");
    return from_exp_epsilon(n_databases, n_files, std::exp(eps));
  }

  // d = deception_capacity is rejected, not clamped: eps diverges there.
  static SchemeParams from_deception(int n_databases, int n_files, double d) {
    SchemeParams s = from_exp_epsilon(
        n_databases, n_files, exp_epsilon_from_deception(n_databases, n_files, d));
    s.deception = d;
    return s;
  }
};

/// MAP prediction error probability of each database, at real-query times.
inline double error_probability(const SchemeParams& s) {
  const double nk = static_cast<double>(s.query_space);
  const double n = s.n_databases;
  const double k = s.n_files;
  return (k - 1.0) * (1.0 + s.exp_eps * (nk - 1.0)) /
         (k * (n + (nk - n) * s.exp_eps));
}

/// Minimal expected dummy-query count E[M] = 2u - u(u+1) alpha.
inline double expected_dummy_count(const SchemeParams& s) {
  const double u = static_cast<double>(s.u);
  return 2.0 * u - u * (u + 1.0) * s.alpha;
}

/// Expected downloaded symbols per retrieval, normalised by file length:
/// (N/(N-1)) (1 - p + E[M]).
inline double download_cost(const SchemeParams& s, double expected_m) {
  detail::require(expected_m >= 0.0, "expected_m must be non-negative");
  const double n = s.n_databases;
  const double ratio = n / (n - 1.0);
  const double first = ratio * (1.0 - s.p_base);

  // Same quantity in the rate-formula arrangement; the two must agree.
  const double nk = static_cast<double>(s.query_space);
  const double nk_over_n = static_cast<double>(s.query_space / s.n_databases);
  const double alt = (1.0 + ((nk - n) / (n - 1.0)) * s.exp_eps) /
                     (1.0 + (nk_over_n - 1.0) * s.exp_eps);
  if (!detail::close(first, alt, 1e-12)) {
    throw std::logic_error("download cost identity violated");
  }
  return first + ratio * expected_m;
}

/// Achievable rate at deception level d: reciprocal of the optimal cost.
inline double achievable_rate(int n_databases, int n_files, double d) {
  const SchemeParams s = SchemeParams::from_deception(n_databases, n_files, d);
  return 1.0 / download_cost(s, expected_dummy_count(s));
}

}  // namespace dirlab
