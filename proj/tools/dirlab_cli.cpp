// Command-line front end: closed-form theory sweeps, codebook dumps with
// validation, dummy-count PMF optimisation, and Monte Carlo runs. All data
// goes to --out (or stdout) as CSV or JSON for external plotting.

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dirlab/adversary.hpp"
#include "dirlab/codebook.hpp"
#include "dirlab/params.hpp"
#include "dirlab/pmf.hpp"
#include "dirlab/report_json.hpp"
#include "dirlab/simulator.hpp"

namespace {

constexpr int kExitValidationFailure = 1;
constexpr int kExitBadArguments = 2;

// 12 significant digits, '.' decimal, no separators.
std::string fmt(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = &std::cout;

  explicit OutputTarget(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) {
      throw std::invalid_argument("cannot open output file " + path);
    }
    stream = &file;
  }
};

int cmd_theory(int n, int k, double d_min, double d_max_frac, int steps,
               const std::string& out_path) {
  const double d_cap = dirlab::deception_capacity(n, k);
  if (d_min < 0.0 || d_min >= d_cap) {
    throw std::invalid_argument("d-min must lie in [0, " +
                                std::to_string(d_cap) + ")");
  }
  if (d_max_frac < 0.0 || d_max_frac >= 1.0) {
    throw std::invalid_argument("d-max-frac must lie in [0, 1)");
  }
  if (steps < 2) {
    throw std::invalid_argument("steps must be at least 2");
  }

  const double d_hi = d_max_frac * d_cap;
  std::vector<double> grid;
  if (d_hi <= d_min) {
    grid.push_back(d_min);
  } else {
    for (int i = 0; i < steps; ++i) {
      grid.push_back(d_min + (d_hi - d_min) * i / (steps - 1));
    }
  }

  const auto rows = dirlab::sweep_rates(n, k, grid);
  OutputTarget out(out_path);
  *out.stream << "d,eps,alpha,u,expected_m,download_cost,rate\n";
  for (const auto& row : rows) {
    *out.stream << fmt(row.d) << ',' << fmt(row.eps) << ',' << fmt(row.alpha)
                << ',' << row.u << ',' << fmt(row.expected_m) << ','
                << fmt(row.download_cost) << ',' << fmt(row.rate) << '\n';
  }
  return 0;
}

int cmd_simulate(int n, int k, double d, std::uint64_t retrievals,
                 std::uint64_t seed, int file_len,
                 std::uint32_t field_modulus, unsigned threads,
                 const std::string& out_path) {
  const auto params = dirlab::SchemeParams::from_deception(n, k, d);
  dirlab::SimulationConfig config;
  config.n_retrievals = retrievals;
  config.seed = seed;
  config.file_len = file_len;
  config.field_modulus = field_modulus;
  config.max_threads = threads;

  const auto result = dirlab::run_simulation_detailed(params, config);
  OutputTarget out(out_path);
  *out.stream << dirlab::report_to_json_string(result.report);

  // Self-check: the empirical error rate has to sit within 4 standard
  // errors of the closed form.
  const double gap =
      std::abs(result.report.empirical_pe - result.report.theory_pe);
  if (gap > 4.0 * result.report.std_error_pe) {
    std::cerr << "error: self-check failed: |empirical_pe - theory_pe| = "
              << fmt(gap) << " exceeds 4 * std_error_pe = "
              << fmt(4.0 * result.report.std_error_pe) << "\n";
    return kExitValidationFailure;
  }
  return 0;
}

int cmd_codebook(int n, int k, double d, int file,
                 const std::string& out_path) {
  const auto params = dirlab::SchemeParams::from_deception(n, k, d);
  const auto table = dirlab::build_real_table(params, file);

  {
    OutputTarget out(out_path);
    *out.stream << "row_id,prob_class";
    for (int db = 1; db <= n; ++db) *out.stream << ",db_" << db;
    *out.stream << '\n';
    for (std::size_t row_id = 0; row_id < table.size(); ++row_id) {
      const auto& row = table[row_id];
      *out.stream << row_id << ',' << dirlab::to_string(row.prob_class);
      for (const auto& query : row.per_database) {
        *out.stream << ',' << query.to_string();
      }
      *out.stream << '\n';
    }
  }

  std::uint64_t base_rows = 0;
  for (const auto& row : table) {
    base_rows += row.prob_class == dirlab::ProbClass::kBase;
  }
  const std::uint64_t boosted_rows = table.size() - base_rows;

  const dirlab::OverallDistribution dist(params);
  std::uint64_t deceptive = 0;
  std::uint64_t pir = 0;
  for (const auto& query : dirlab::all_queries(k, n - 1)) {
    const auto cls = dirlab::classify_query(dist, query);
    if (cls.kind == dirlab::QueryClass::kDeceptive) {
      ++deceptive;
    } else {
      ++pir;
    }
  }

  double worst_sum_gap = 0.0;
  for (int theta = 1; theta <= k; ++theta) {
    double sum = 0.0;
    for (const auto& query : dirlab::all_queries(k, n - 1)) {
      sum += dist.prob(query, theta);
    }
    worst_sum_gap = std::max(worst_sum_gap, std::abs(sum - 1.0));
  }
  if (worst_sum_gap > 1e-12) {
    throw dirlab::ValidationFailure(
        "overall distribution sums deviate from 1 by " + fmt(worst_sum_gap));
  }

  std::cout << "rows=" << table.size() << " base=" << base_rows
            << " boosted=" << boosted_rows << "\n"
            << "queries=" << (deceptive + pir) << " deceptive=" << deceptive
            << " pir=" << pir << "\n"
            << "max_distribution_sum_error=" << fmt(worst_sum_gap) << "\n";
  return 0;
}

int cmd_optimize_pmf(std::optional<double> alpha, std::optional<int> n,
                     std::optional<int> k, std::optional<double> d,
                     bool check_oracle, std::uint64_t max_support,
                     const std::string& out_path) {
  double a;
  if (alpha) {
    a = *alpha;
  } else if (n && k && d) {
    a = dirlab::SchemeParams::from_deception(*n, *k, *d).alpha;
  } else {
    throw std::invalid_argument("pass --alpha, or --n, --k and --d");
  }

  const auto pmf = dirlab::optimal_dummy_pmf(a);
  nlohmann::json j{{"alpha", a},
                   {"mean", pmf.mean},
                   {"harmonic", pmf.harmonic},
                   {"support", nlohmann::json::array()}};
  for (const auto& atom : pmf.support) {
    j["support"].push_back({{"m", atom.m}, {"prob", atom.prob}});
  }

  if (check_oracle) {
    if (max_support == 0) {
      max_support = 2 * dirlab::support_locator(a) + 6;
    }
    const auto oracle = dirlab::brute_force_min_mean(a, max_support);
    j["oracle_mean"] = oracle.mean;
    if (std::abs(oracle.mean - pmf.mean) > 1e-9) {
      OutputTarget out(out_path);
      *out.stream << j.dump(2) << "\n";
      std::cerr << "error: oracle mean " << fmt(oracle.mean)
                << " disagrees with closed form " << fmt(pmf.mean) << "\n";
      return kExitValidationFailure;
    }
  }

  OutputTarget out(out_path);
  *out.stream << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"deceptive information retrieval scheme toolbox"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  // theory
  auto* theory = app.add_subcommand(
      "theory", "closed-form sweep over deception levels (CSV)");
  int t_n = 2;
  int t_k = 2;
  double t_d_min = 0.0;
  double t_d_max_frac = 0.95;
  int t_steps = 50;
  std::string t_out;
  theory->add_option("--n", t_n, "number of databases")->required();
  theory->add_option("--k", t_k, "number of files")->required();
  theory->add_option("--d-min", t_d_min, "lowest deception level");
  theory->add_option("--d-max-frac", t_d_max_frac,
                     "top of the grid as a fraction of the deception bound");
  theory->add_option("--steps", t_steps, "grid size");
  theory->add_option("--out", t_out, "output file (default stdout)");

  // simulate
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo run against the closed forms (JSON report)");
  int s_n = 2;
  int s_k = 2;
  double s_d = 0.0;
  std::uint64_t s_retrievals = 100000;
  std::uint64_t s_seed = 0;
  int s_file_len = 0;
  std::uint32_t s_modulus = 257;
  unsigned s_threads = 0;
  std::string s_out;
  simulate->add_option("--n", s_n, "number of databases")->required();
  simulate->add_option("--k", s_k, "number of files")->required();
  simulate->add_option("--d", s_d, "deception level")->required();
  simulate->add_option("--retrievals", s_retrievals, "number of retrievals");
  simulate->add_option("--seed", s_seed, "RNG seed (echoed in the report)")
      ->required();
  simulate->add_option("--file-len", s_file_len,
                       "file length in symbols (default 2(N-1))");
  simulate->add_option("--field-modulus", s_modulus, "prime field modulus");
  simulate->add_option("--threads", s_threads,
                       "max worker threads (DIR_LAB_THREADS also caps)");
  simulate->add_option("--out", s_out, "output file (default stdout)");

  // codebook
  auto* codebook = app.add_subcommand(
      "codebook", "dump one file's real query table and validate (CSV)");
  int c_n = 2;
  int c_k = 2;
  double c_d = 0.0;
  int c_file = 1;
  std::string c_out;
  codebook->add_option("--n", c_n, "number of databases")->required();
  codebook->add_option("--k", c_k, "number of files")->required();
  codebook->add_option("--d", c_d, "deception level")->required();
  codebook->add_option("--file", c_file, "required file index");
  codebook->add_option("--out", c_out, "output file (default stdout)");

  // optimize-pmf
  auto* optimize = app.add_subcommand(
      "optimize-pmf", "minimum-mean dummy-count distribution (JSON)");
  std::optional<double> o_alpha;
  std::optional<int> o_n;
  std::optional<int> o_k;
  std::optional<double> o_d;
  bool o_check = false;
  std::uint64_t o_max_support = 0;
  std::string o_out;
  optimize->add_option("--alpha", o_alpha, "target E[1/(M+1)]");
  optimize->add_option("--n", o_n, "number of databases");
  optimize->add_option("--k", o_k, "number of files");
  optimize->add_option("--d", o_d, "deception level");
  optimize->add_flag("--check", o_check,
                     "cross-check against the exhaustive search");
  optimize->add_option("--max-support", o_max_support,
                       "search bound for --check (default 2 ceil(1/alpha)+6)");
  optimize->add_option("--out", o_out, "output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (theory->parsed()) {
      return cmd_theory(t_n, t_k, t_d_min, t_d_max_frac, t_steps, t_out);
    }
    if (simulate->parsed()) {
      return cmd_simulate(s_n, s_k, s_d, s_retrievals, s_seed, s_file_len,
                          s_modulus, s_threads, s_out);
    }
    if (codebook->parsed()) {
      return cmd_codebook(c_n, c_k, c_d, c_file, c_out);
    }
    if (optimize->parsed()) {
      return cmd_optimize_pmf(o_alpha, o_n, o_k, o_d, o_check, o_max_support,
                              o_out);
    }
  } catch (const dirlab::ValidationFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const std::overflow_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadArguments;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidationFailure;
  }
  return 0;
}
