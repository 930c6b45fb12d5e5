#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <mutex>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dirlab/adversary.hpp"
#include "dirlab/codebook.hpp"
#include "dirlab/params.hpp"
#include "dirlab/pmf.hpp"
#include "dirlab/query.hpp"
#include "dirlab/retrieval.hpp"
#include "dirlab/rng.hpp"

namespace dirlab {

enum class EventKind { kReal, kDummy };

// One query burst on the timeline: the real event at the requirement time or
// one of the M dummy events scheduled after it.
struct RetrievalEvent {
  std::uint64_t tick = 0;
  EventKind kind = EventKind::kReal;
  int required_file = 0;
  const RealQueryRow* real_row = nullptr;
  const DummyQueryRow* dummy_row = nullptr;
};

// Allocates the discrete timeline: every event gets its own tick; real
// events take the next free tick while dummy events land at jittered later
// ticks (gap uniform in [1, 10]) that subsequent real events skip over, so a
// later retrieval's real event may fall between the dummy events of an
// earlier one.
class TickScheduler {
 public:
  explicit TickScheduler(std::uint64_t start_tick = 0) : next_(start_tick) {}

  std::uint64_t real_tick() {
    reserved_.erase(reserved_.begin(), reserved_.lower_bound(next_));
    while (reserved_.contains(next_)) ++next_;
    return next_++;
  }

  std::uint64_t dummy_tick(std::uint64_t after, Rng& rng) {
    std::uint64_t t = after + 1 + rng.uniform_index(10);
    while (reserved_.contains(t)) ++t;
    reserved_.insert(t);
    return t;
  }

 private:
  std::uint64_t next_;
  std::set<std::uint64_t> reserved_;
};

// The fields every run reports; the CLI serialises exactly these names.
struct SimulationReport {
  std::uint64_t n_retrievals = 0;
  double empirical_pe = 0.0;
  double empirical_deception = 0.0;
  double empirical_cost_per_file = 0.0;
  double theory_pe = 0.0;
  double theory_deception = 0.0;
  double theory_cost = 0.0;
  double std_error_pe = 0.0;
  std::uint64_t rng_seed = 0;
  double dummy_time_accuracy = 1.0;
};

// Extra tallies consumed by invariants and the acceptance suite; not part of
// the report schema.
struct SimulationStats {
  std::vector<double> per_db_pe;
  double m_mean = 0.0;
  double m_std_error = 0.0;
  double inv_m1_mean = 0.0;
  double inv_m1_std_error = 0.0;
  std::uint64_t n_events = 0;
  std::uint64_t n_dummy_events = 0;
  std::uint64_t decode_checks = 0;
};

struct SimulationResult {
  SimulationReport report;
  SimulationStats stats;
};

struct SimulationConfig {
  std::uint64_t n_retrievals = 0;
  std::uint64_t seed = 0;
  int file_len = 0;  // 0: default 2(N-1)
  std::uint32_t field_modulus = 257;
  unsigned max_threads = 0;  // 0: DIR_LAB_THREADS, else hardware
  std::uint64_t batch_size = 8192;
};

namespace detail {

struct BatchTally {
  std::uint64_t events = 0;
  std::uint64_t dummy_events = 0;
  std::uint64_t downloaded_symbols = 0;
  std::vector<std::uint64_t> db_errors;  // real events only, per database
  std::uint64_t dummy_predictions = 0;
  std::uint64_t dummy_correct = 0;
  std::uint64_t decode_checks = 0;
  double m_sum = 0.0;
  double m_sq_sum = 0.0;
  double inv_sum = 0.0;
  double inv_sq_sum = 0.0;
};

struct SimContext {
  SchemeParams params;
  SimulationConfig config;
  std::vector<std::vector<RealQueryRow>> real_tables;    // index = file
  std::vector<std::vector<DummyQueryRow>> dummy_tables;  // index = file
  OverallDistribution dist;
  DummyCountPmf dummy_pmf;
  int file_len = 0;
};

inline std::uint64_t sample_dummy_count(const DummyCountPmf& pmf, Rng& rng) {
  if (pmf.support.size() == 1) return pmf.support.front().m;
  const double x = rng.uniform_double();
  return x < pmf.support.front().prob ? pmf.support.front().m
                                      : pmf.support.back().m;
}

inline const RealQueryRow& sample_real_row(
    const std::vector<RealQueryRow>& table, const SchemeParams& params,
    Rng& rng) {
  // The first N rows are the Base rows (probability p each); the remaining
  // N^K - N rows carry p e^eps each.
  const double base_mass =
      static_cast<double>(params.n_databases) * params.p_base;
  const std::uint64_t n = params.n_databases;
  std::uint64_t index;
  if (rng.uniform_double() < base_mass) {
    index = rng.uniform_index(n);
  } else {
    index = n + rng.uniform_index(params.query_space - n);
  }
  return table[index];
}

inline BatchTally run_batch(const SimContext& ctx, std::uint64_t batch_index,
                            std::uint64_t n_retrievals) {
  const SchemeParams& params = ctx.params;
  const int n = params.n_databases;
  const int k = params.n_files;
  const std::uint64_t seg_len =
      static_cast<std::uint64_t>(ctx.file_len) /
      static_cast<std::uint64_t>(params.n_segments());

  Rng rng(Rng::derive_seed(ctx.config.seed, batch_index));
  TickScheduler scheduler(batch_index << 40);
  FileStore store(k, ctx.file_len, params.n_segments(),
                  ctx.config.field_modulus);

  BatchTally tally;
  tally.db_errors.assign(static_cast<std::size_t>(n), 0);
  std::vector<Answer> answers(static_cast<std::size_t>(n));

  for (std::uint64_t i = 0; i < n_retrievals; ++i) {
    const int theta = 1 + static_cast<int>(rng.uniform_index(
                              static_cast<std::uint64_t>(k)));
    const RealQueryRow& row = sample_real_row(
        ctx.real_tables[static_cast<std::size_t>(theta)], params, rng);
    const std::uint64_t m = sample_dummy_count(ctx.dummy_pmf, rng);

    RetrievalEvent event;
    event.tick = scheduler.real_tick();
    event.kind = EventKind::kReal;
    event.required_file = theta;
    event.real_row = &row;

    // Fresh file contents at this time instant, then the actual retrieval:
    // download all answers, decode, and insist on exact recovery.
    store.regenerate(rng);
    for (int db = 0; db < n; ++db) {
      answers[static_cast<std::size_t>(db)] =
          answer(store, row.per_database[static_cast<std::size_t>(db)]);
    }
    const std::vector<std::uint32_t> decoded =
        decode(row, answers, theta, store.modulus());
    const auto stored = store.file(theta);
    if (decoded.size() != stored.size() ||
        !std::equal(decoded.begin(), decoded.end(), stored.begin())) {
      throw std::runtime_error("decode mismatch at tick " +
                               std::to_string(event.tick));
    }
    ++tally.decode_checks;
    ++tally.events;
    tally.downloaded_symbols += download_symbols(row, seg_len);

    // Every database predicts at every received query.
    for (int db = 0; db < n; ++db) {
      const Prediction pred = predict(
          ctx.dist, row.per_database[static_cast<std::size_t>(db)], rng);
      tally.db_errors[static_cast<std::size_t>(db)] +=
          pred.predicted_file != theta;
    }

    std::uint64_t previous_tick = event.tick;
    for (std::uint64_t j = 0; j < m; ++j) {
      RetrievalEvent dummy;
      dummy.tick = scheduler.dummy_tick(previous_tick, rng);
      dummy.kind = EventKind::kDummy;
      dummy.required_file = theta;
      const auto& dummy_table =
          ctx.dummy_tables[static_cast<std::size_t>(theta)];
      dummy.dummy_row = &dummy_table[static_cast<std::size_t>(
          rng.uniform_index(dummy_table.size()))];
      previous_tick = dummy.tick;

      store.regenerate(rng);
      for (int db = 0; db < n; ++db) {
        answers[static_cast<std::size_t>(db)] = answer(
            store, dummy.dummy_row->per_database[static_cast<std::size_t>(db)]);
      }
      ++tally.events;
      ++tally.dummy_events;
      tally.downloaded_symbols += download_symbols(*dummy.dummy_row, seg_len);
      for (int db = 0; db < n; ++db) {
        const Prediction pred =
            predict(ctx.dist,
                    dummy.dummy_row->per_database[static_cast<std::size_t>(db)],
                    rng);
        ++tally.dummy_predictions;
        tally.dummy_correct += pred.predicted_file == theta;
      }
    }

    const double md = static_cast<double>(m);
    tally.m_sum += md;
    tally.m_sq_sum += md * md;
    const double inv = 1.0 / (md + 1.0);
    tally.inv_sum += inv;
    tally.inv_sq_sum += inv * inv;
  }
  return tally;
}

inline unsigned resolve_threads(const SimulationConfig& config,
                                std::uint64_t n_batches) {
  unsigned threads = config.max_threads;
  if (threads == 0) {
    if (const char* env = std::getenv("DIR_LAB_THREADS")) {
      const long parsed = std::strtol(env, nullptr, 10);
      if (parsed >= 1) threads = static_cast<unsigned>(parsed);
    }
  }
  if (threads == 0) threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;
  return static_cast<unsigned>(
      std::min<std::uint64_t>(threads, std::max<std::uint64_t>(n_batches, 1)));
}

}  // namespace detail

/// Monte Carlo run: n_retrievals independent retrievals with uniformly drawn
/// required files, each followed by its optimally distributed dummy events.
/// Batches of fixed size run independently (possibly in parallel) on
/// sub-seeds derived from the master seed and merge in batch order, so a
/// seed fully determines the report regardless of thread count.
inline SimulationResult run_simulation_detailed(const SchemeParams& params,
                                                const SimulationConfig& config) {
  detail::require(config.n_retrievals >= 1, "need at least one retrieval");
  detail::SimContext ctx{params, config, {}, {}, OverallDistribution(params),
                         optimal_dummy_pmf(params.alpha), 0};
  ctx.file_len = config.file_len > 0 ? config.file_len
                                     : 2 * params.n_segments();
  detail::require(ctx.file_len % params.n_segments() == 0,
                  "file length must be a multiple of N-1");

  ctx.real_tables.resize(static_cast<std::size_t>(params.n_files) + 1);
  ctx.dummy_tables.resize(static_cast<std::size_t>(params.n_files) + 1);
  for (int file = 1; file <= params.n_files; ++file) {
    ctx.real_tables[static_cast<std::size_t>(file)] =
        build_real_table(params, file);
    ctx.dummy_tables[static_cast<std::size_t>(file)] =
        build_dummy_table(params, file);
  }

  const std::uint64_t batch_size = std::max<std::uint64_t>(config.batch_size, 1);
  const std::uint64_t n_batches =
      (config.n_retrievals + batch_size - 1) / batch_size;
  std::vector<detail::BatchTally> tallies(n_batches);

  const unsigned threads = detail::resolve_threads(config, n_batches);
  std::atomic<std::uint64_t> next_batch{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  const auto worker = [&] {
    while (true) {
      const std::uint64_t b = next_batch.fetch_add(1);
      if (b >= n_batches) return;
      const std::uint64_t first = b * batch_size;
      const std::uint64_t count =
          std::min(batch_size, config.n_retrievals - first);
      try {
        tallies[b] = detail::run_batch(ctx, b, count);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Deterministic merge in batch-index order.
  detail::BatchTally total;
  total.db_errors.assign(static_cast<std::size_t>(params.n_databases), 0);
  for (const detail::BatchTally& t : tallies) {
    total.events += t.events;
    total.dummy_events += t.dummy_events;
    total.downloaded_symbols += t.downloaded_symbols;
    total.dummy_predictions += t.dummy_predictions;
    total.dummy_correct += t.dummy_correct;
    total.decode_checks += t.decode_checks;
    total.m_sum += t.m_sum;
    total.m_sq_sum += t.m_sq_sum;
    total.inv_sum += t.inv_sum;
    total.inv_sq_sum += t.inv_sq_sum;
    for (std::size_t db = 0; db < total.db_errors.size(); ++db) {
      total.db_errors[db] += t.db_errors[db];
    }
  }

  const double nd = static_cast<double>(config.n_retrievals);
  SimulationResult out;
  SimulationReport& report = out.report;
  report.n_retrievals = config.n_retrievals;
  report.rng_seed = config.seed;
  report.empirical_pe = static_cast<double>(total.db_errors[0]) / nd;
  report.empirical_deception =
      report.empirical_pe - (1.0 - 1.0 / params.n_files);
  report.empirical_cost_per_file =
      static_cast<double>(total.downloaded_symbols) /
      (static_cast<double>(ctx.file_len) * nd);
  report.theory_pe = error_probability(params);
  report.theory_deception = params.deception;
  report.theory_cost = download_cost(params, expected_dummy_count(params));
  report.std_error_pe =
      std::sqrt(report.empirical_pe * (1.0 - report.empirical_pe) / nd);
  report.dummy_time_accuracy =
      total.dummy_predictions == 0
          ? 1.0
          : static_cast<double>(total.dummy_correct) /
                static_cast<double>(total.dummy_predictions);

  SimulationStats& stats = out.stats;
  stats.per_db_pe.reserve(total.db_errors.size());
  for (const std::uint64_t errors : total.db_errors) {
    stats.per_db_pe.push_back(static_cast<double>(errors) / nd);
  }
  stats.m_mean = total.m_sum / nd;
  stats.m_std_error =
      std::sqrt(std::max(total.m_sq_sum / nd - stats.m_mean * stats.m_mean,
                         0.0) /
                nd);
  stats.inv_m1_mean = total.inv_sum / nd;
  stats.inv_m1_std_error = std::sqrt(
      std::max(total.inv_sq_sum / nd - stats.inv_m1_mean * stats.inv_m1_mean,
               0.0) /
      nd);
  stats.n_events = total.events;
  stats.n_dummy_events = total.dummy_events;
  stats.decode_checks = total.decode_checks;
  return out;
}

inline SimulationReport run_simulation(const SchemeParams& params,
                                       std::uint64_t n_retrievals,
                                       std::uint64_t seed) {
  SimulationConfig config;
  config.n_retrievals = n_retrievals;
  config.seed = seed;
  return run_simulation_detailed(params, config).report;
}

// One row of a theory sweep over deception levels.
struct RateSweepRow {
  double d = 0.0;
  double eps = 0.0;
  double alpha = 1.0;
  std::uint64_t u = 1;
  double expected_m = 0.0;
  double download_cost = 0.0;
  double rate = 0.0;
};

/// Closed-form sweep of the scheme quantities over a deception grid.
inline std::vector<RateSweepRow> sweep_rates(int n_databases, int n_files,
                                             std::span<const double> d_grid) {
  std::vector<RateSweepRow> rows;
  rows.reserve(d_grid.size());
  for (const double d : d_grid) {
    const SchemeParams params =
        SchemeParams::from_deception(n_databases, n_files, d);
    RateSweepRow row;
    row.d = d;
    row.eps = params.eps;
    row.alpha = params.alpha;
    row.u = params.u;
    row.expected_m = expected_dummy_count(params);
    row.download_cost = download_cost(params, row.expected_m);
    row.rate = 1.0 / row.download_cost;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dirlab
