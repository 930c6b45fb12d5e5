#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dirlab/params.hpp"
#include "dirlab/pmf.hpp"
#include "dirlab/rng.hpp"

using Catch::Matchers::WithinAbs;
using namespace dirlab;

namespace {

// Closed forms of the two-database/two-file instance, written directly from
// that instance's derivation; used to pin the general formulas.
struct TwoByTwo {
  static double alpha(double e) { return 2.0 / (1.0 + e); }
  static double p(double e) { return 1.0 / (2.0 * (1.0 + e)); }
  static double pe(double e) { return (3.0 * e + 1.0) / (4.0 * (1.0 + e)); }
  static double deception(double e) { return (e - 1.0) / (4.0 * (1.0 + e)); }
  static double eps_of_d(double d) {
    return std::log((4.0 * d + 1.0) / (1.0 - 4.0 * d));
  }
  static double cost(double e, double m) {
    return (1.0 + 2.0 * e) / (1.0 + e) + 2.0 * m;
  }
};

// Same for the three-database/three-file instance.
struct ThreeByThree {
  static double alpha(double e) {
    return 3.0 * (1.0 + 8.0 * e) / (2.0 * e * e + 24.0 * e + 1.0);
  }
  static double p(double e) { return 1.0 / (3.0 * (1.0 + 8.0 * e)); }
  static double pe(double e) {
    return (52.0 * e + 2.0) / (9.0 * (8.0 * e + 1.0));
  }
  static double deception(double e) {
    return 4.0 * (e - 1.0) / (9.0 * (8.0 * e + 1.0));
  }
  static double eps_of_d(double d) {
    return std::log((9.0 * d + 4.0) / (4.0 * (1.0 - 18.0 * d)));
  }
  static double cost(double e, double m) {
    return (1.0 + 12.0 * e) / (1.0 + 8.0 * e) + 1.5 * m;
  }
};

}  // namespace

TEST_CASE("deception capacity") {
  CHECK_THAT(deception_capacity(2, 2), WithinAbs(0.25, 1e-15));
  CHECK_THAT(deception_capacity(3, 3), WithinAbs(1.0 / 18.0, 1e-15));
  CHECK_THAT(deception_capacity(2, 3), WithinAbs(1.0 / 9.0, 1e-15));

  CHECK_THROWS_AS(deception_capacity(1, 2), std::invalid_argument);
  CHECK_THROWS_AS(deception_capacity(2, 1), std::invalid_argument);
}

TEST_CASE("query space overflow is rejected loudly") {
  CHECK(checked_pow(2, 63) == (std::uint64_t{1} << 63));
  CHECK_THROWS_AS(checked_pow(3, 41), std::overflow_error);
  CHECK_THROWS_AS(deception_capacity(3, 41), std::overflow_error);
}

TEST_CASE("epsilon from deception") {
  CHECK_THAT(epsilon_from_deception(2, 2, 0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(epsilon_from_deception(2, 2, 0.1),
             WithinAbs(std::log(7.0 / 3.0), 1e-12));
  CHECK_THAT(epsilon_from_deception(3, 3, 0.03),
             WithinAbs(std::log(4.27 / 1.84), 1e-12));

  CHECK_THROWS_AS(epsilon_from_deception(2, 2, -0.01), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_from_deception(2, 2, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(epsilon_from_deception(2, 2, 0.3), std::invalid_argument);
}

TEST_CASE("deception from epsilon") {
  CHECK_THAT(deception_from_epsilon(2, 2, 0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(deception_from_epsilon(5, 4, 0.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(deception_from_epsilon(2, 2, std::log(7.0 / 3.0)),
             WithinAbs(0.1, 1e-12));
  // Large-epsilon limit approaches the capacity.
  CHECK_THAT(deception_from_epsilon(3, 3, 100.0),
             WithinAbs(deception_capacity(3, 3), 1e-12));

  CHECK_THROWS_AS(deception_from_epsilon(2, 2, -1e-9), std::invalid_argument);
}

TEST_CASE("alpha from epsilon") {
  CHECK_THAT(alpha_from_epsilon(2, 2, 0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(alpha_from_epsilon(4, 5, 0.0), WithinAbs(1.0, 1e-15));
  CHECK_THAT(alpha_from_epsilon(2, 2, std::log(7.0 / 3.0)),
             WithinAbs(0.6, 1e-12));
  const double eps = std::log(2.320652);
  CHECK_THAT(alpha_from_epsilon(3, 3, eps), WithinAbs(0.870, 5e-4));
  CHECK_THAT(alpha_from_epsilon(3, 3, eps),
             WithinAbs(ThreeByThree::alpha(2.320652), 1e-12));

  CHECK_THROWS_AS(alpha_from_epsilon(2, 2, -0.5), std::invalid_argument);
}

TEST_CASE("error probability") {
  const auto pir22 = SchemeParams::from_epsilon(2, 2, 0.0);
  CHECK_THAT(error_probability(pir22), WithinAbs(0.5, 1e-15));

  const auto ex1 = SchemeParams::from_epsilon(2, 2, std::log(7.0 / 3.0));
  CHECK_THAT(error_probability(ex1), WithinAbs(0.6, 1e-12));

  const auto pir33 = SchemeParams::from_epsilon(3, 3, 0.0);
  CHECK_THAT(error_probability(pir33), WithinAbs(2.0 / 3.0, 1e-15));
}

TEST_CASE("error probability at eps = 0 equals the PIR baseline") {
  for (int n = 2; n <= 6; ++n) {
    for (int k = 2; k <= 6; ++k) {
      const auto params = SchemeParams::from_epsilon(n, k, 0.0);
      CHECK_THAT(error_probability(params),
                 WithinAbs(1.0 - 1.0 / k, 1e-12));
    }
  }
}

TEST_CASE("deception equals error probability minus the PIR baseline") {
  Rng rng(0x5eed0001);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    const int k = 2 + static_cast<int>(rng.uniform_index(4));
    const double d =
        rng.uniform_double() * 0.98 * deception_capacity(n, k);
    const auto params = SchemeParams::from_deception(n, k, d);
    CHECK_THAT(error_probability(params) - (1.0 - 1.0 / k),
               WithinAbs(params.deception, 1e-12));
  }
}

TEST_CASE("download cost") {
  const auto pir22 = SchemeParams::from_epsilon(2, 2, 0.0);
  CHECK_THAT(download_cost(pir22, 0.0), WithinAbs(1.5, 1e-12));

  const auto ex1 = SchemeParams::from_epsilon(2, 2, std::log(7.0 / 3.0));
  CHECK_THAT(download_cost(ex1, 0.8), WithinAbs(3.3, 1e-12));

  const auto pir33 = SchemeParams::from_epsilon(3, 3, 0.0);
  CHECK_THAT(download_cost(pir33, 0.0), WithinAbs(13.0 / 9.0, 1e-12));

  CHECK_THROWS_AS(download_cost(pir22, -0.1), std::invalid_argument);
}

TEST_CASE("achievable rate") {
  CHECK_THAT(achievable_rate(2, 2, 0.0), WithinAbs(2.0 / 3.0, 1e-12));
  CHECK_THAT(achievable_rate(3, 3, 0.0), WithinAbs(9.0 / 13.0, 1e-12));
  CHECK_THAT(achievable_rate(2, 2, 0.1), WithinAbs(10.0 / 33.0, 1e-12));

  CHECK_THROWS_AS(achievable_rate(2, 2, 0.25), std::invalid_argument);
}

TEST_CASE("real-row probabilities normalise") {
  Rng rng(0x5eed0002);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(5));
    const int k = 2 + static_cast<int>(rng.uniform_index(5));
    const double d =
        rng.uniform_double() * 0.98 * deception_capacity(n, k);
    const auto params = SchemeParams::from_deception(n, k, d);
    const double nk = static_cast<double>(params.query_space);
    const double mass = n * params.p_base +
                        (nk - n) * params.p_base * params.exp_eps;
    CHECK_THAT(mass, WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("deception/epsilon round trip") {
  Rng rng(0x5eed0003);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    const int k = 2 + static_cast<int>(rng.uniform_index(4));
    const double frac = trial < 5 ? 1.0 - 1e-9 : rng.uniform_double();
    const double d = frac * deception_capacity(n, k) * (1.0 - 1e-12);
    const double eps = epsilon_from_deception(n, k, d);
    CHECK_THAT(deception_from_epsilon(n, k, eps), WithinAbs(d, 1e-10));
  }
}

TEST_CASE("general formulas reproduce the worked instances") {
  Rng rng(0x5eed0004);
  for (int trial = 0; trial < 20; ++trial) {
    const double eps = rng.uniform_double() * 3.0;
    const double e = std::exp(eps);

    const auto p22 = SchemeParams::from_epsilon(2, 2, eps);
    CHECK_THAT(p22.alpha, WithinAbs(TwoByTwo::alpha(e), 1e-12));
    CHECK_THAT(p22.p_base, WithinAbs(TwoByTwo::p(e), 1e-12));
    CHECK_THAT(error_probability(p22), WithinAbs(TwoByTwo::pe(e), 1e-12));
    CHECK_THAT(p22.deception, WithinAbs(TwoByTwo::deception(e), 1e-12));
    const double m22 = expected_dummy_count(p22);
    CHECK_THAT(download_cost(p22, m22),
               WithinAbs(TwoByTwo::cost(e, m22), 1e-12));

    const auto p33 = SchemeParams::from_epsilon(3, 3, eps);
    CHECK_THAT(p33.alpha, WithinAbs(ThreeByThree::alpha(e), 1e-12));
    CHECK_THAT(p33.p_base, WithinAbs(ThreeByThree::p(e), 1e-12));
    CHECK_THAT(error_probability(p33), WithinAbs(ThreeByThree::pe(e), 1e-12));
    CHECK_THAT(p33.deception, WithinAbs(ThreeByThree::deception(e), 1e-12));
    const double m33 = expected_dummy_count(p33);
    CHECK_THAT(download_cost(p33, m33),
               WithinAbs(ThreeByThree::cost(e, m33), 1e-12));

    const double d22 = p22.deception;
    CHECK_THAT(epsilon_from_deception(2, 2, d22),
               WithinAbs(TwoByTwo::eps_of_d(d22), 1e-12));
    const double d33 = p33.deception;
    CHECK_THAT(epsilon_from_deception(3, 3, d33),
               WithinAbs(ThreeByThree::eps_of_d(d33), 1e-12));
  }
}

TEST_CASE("rate is non-increasing in the deception level") {
  for (int n = 2; n <= 5; ++n) {
    for (int k = 2; k <= 5; ++k) {
      const double cap = deception_capacity(n, k);
      double previous_rate = 0.0;
      std::uint64_t previous_u = 0;
      for (int i = 0; i < 1000; ++i) {
        const double d = 0.999 * cap * i / 999.0;
        const auto params = SchemeParams::from_deception(n, k, d);
        const double rate = achievable_rate(n, k, d);
        if (i > 0) {
          REQUIRE(rate <= previous_rate + 1e-12);
          if (params.u == previous_u) {
            // No dummy-count boundary crossed: the decrease is strict.
            REQUIRE(rate < previous_rate);
          }
        }
        previous_rate = rate;
        previous_u = params.u;
      }
    }
  }
}

TEST_CASE("support locator snaps exact boundaries") {
  CHECK(support_locator(1.0) == 1);
  CHECK(support_locator(0.5) == 2);
  CHECK(support_locator(1.0 / 3.0) == 3);
  CHECK(support_locator(0.6) == 1);
  CHECK(support_locator(0.3) == 3);
  CHECK_THROWS_AS(support_locator(0.0), std::invalid_argument);
  CHECK_THROWS_AS(support_locator(1.5), std::invalid_argument);

  // d = 0 must give u = 1 and alpha = 1 in the assembled parameters.
  const auto params = SchemeParams::from_deception(4, 3, 0.0);
  CHECK(params.u == 1);
  CHECK(params.alpha == 1.0);
  CHECK(params.exp_eps == 1.0);
}

TEST_CASE("alpha stays inside its support bracket") {
  Rng rng(0x5eed0005);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(4));
    const int k = 2 + static_cast<int>(rng.uniform_index(4));
    const double d =
        rng.uniform_double() * 0.999 * deception_capacity(n, k);
    const auto params = SchemeParams::from_deception(n, k, d);
    const double u = static_cast<double>(params.u);
    CHECK(params.alpha <= 1.0 / u + 1e-9);
    CHECK(params.alpha > 1.0 / (u + 1.0) - 1e-9);
  }
}
