#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dirlab/codebook.hpp"
#include "dirlab/query.hpp"
#include "dirlab/rng.hpp"

namespace dirlab {

struct DecodingImpossible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_prime(std::uint32_t x) {
  if (x < 2) return false;
  for (std::uint64_t d = 2; d * d <= x; ++d) {
    if (x % d == 0) return false;
  }
  return true;
}

// K files of L symbols each over the prime field F_q, segmented into
// n_segments equal contiguous blocks (L must divide evenly).
class FileStore {
 public:
  FileStore(int n_files, int file_len, int n_segments,
            std::uint32_t field_modulus)
      : n_files_(n_files),
        file_len_(file_len),
        n_segments_(n_segments),
        modulus_(field_modulus),
        contents_(static_cast<std::size_t>(n_files) * file_len, 0) {
    detail::require(n_files >= 1, "need at least one file");
    detail::require(n_segments >= 1, "need at least one segment");
    detail::require(file_len >= 1 && file_len % n_segments == 0,
                    "file length must be a positive multiple of the segment "
                    "count");
    detail::require(is_prime(field_modulus), "field modulus must be prime");
  }

  int n_files() const { return n_files_; }
  int file_len() const { return file_len_; }
  int n_segments() const { return n_segments_; }
  int segment_len() const { return file_len_ / n_segments_; }
  std::uint32_t modulus() const { return modulus_; }

  std::span<const std::uint32_t> file(int index) const {
    return {contents_.data() +
                static_cast<std::size_t>(index - 1) * file_len_,
            static_cast<std::size_t>(file_len_)};
  }

  // Segment r (1-based) of a file: the r-th contiguous block.
  std::span<const std::uint32_t> segment(int file_index, int r) const {
    detail::require(file_index >= 1 && file_index <= n_files_,
                    "file index out of range");
    detail::require(r >= 1 && r <= n_segments_, "segment index out of range");
    return {contents_.data() +
                static_cast<std::size_t>(file_index - 1) * file_len_ +
                static_cast<std::size_t>(r - 1) * segment_len(),
            static_cast<std::size_t>(segment_len())};
  }

  void set_symbol(int file_index, int pos, std::uint32_t value) {
    contents_.at(static_cast<std::size_t>(file_index - 1) * file_len_ + pos) =
        value % modulus_;
  }

  // Fresh uniform contents; models the file update at a new time instant.
  void regenerate(Rng& rng) {
    for (auto& symbol : contents_) {
      symbol = static_cast<std::uint32_t>(rng.uniform_index(modulus_));
    }
  }

 private:
  int n_files_;
  int file_len_;
  int n_segments_;
  std::uint32_t modulus_;
  std::vector<std::uint32_t> contents_;
};

// Answer of one database: L/(N-1) symbols, or none for the null query.
struct Answer {
  std::vector<std::uint32_t> symbols;
  bool empty() const { return symbols.empty(); }
};

/// Symbol-wise modular sum of the requested segments; empty for phi.
inline Answer answer(const FileStore& store, const Query& q) {
  detail::require(q.n_files() == store.n_files(),
                  "query has wrong file count");
  if (q.is_null()) return {};
  Answer out;
  out.symbols.assign(static_cast<std::size_t>(store.segment_len()), 0);
  for (int file = 1; file <= q.n_files(); ++file) {
    const int r = q.coeff(file);
    if (r == 0) continue;
    const auto seg = store.segment(file, r);
    for (std::size_t t = 0; t < seg.size(); ++t) {
      out.symbols[t] = static_cast<std::uint32_t>(
          (static_cast<std::uint64_t>(out.symbols[t]) + seg[t]) %
          store.modulus());
    }
  }
  return out;
}

// Recovers the required file from a real row's answers: the database whose
// query omits the required file supplies the interference sum, which is
// subtracted from each of the other answers to expose one segment apiece.
inline std::vector<std::uint32_t> decode(const RealQueryRow& row,
                                         const std::vector<Answer>& answers,
                                         int required,
                                         std::uint32_t field_modulus) {
  const int n = static_cast<int>(row.per_database.size());
  detail::require(static_cast<int>(answers.size()) == n,
                  "need one answer per database");

  int interference_db = 0;
  for (int db = 1; db <= n; ++db) {
    if (!row.per_database[static_cast<std::size_t>(db - 1)].contains_file(
            required)) {
      interference_db = db;
      break;
    }
  }
  if (interference_db == 0) {
    throw DecodingImpossible(
        "row has no interference-only database for file " +
        std::to_string(required));
  }

  const Answer& base = answers[static_cast<std::size_t>(interference_db - 1)];
  std::size_t seg_len = 0;
  for (const Answer& a : answers) {
    if (!a.empty()) {
      seg_len = a.symbols.size();
      break;
    }
  }
  std::vector<std::uint32_t> file(seg_len * static_cast<std::size_t>(n - 1),
                                  0);
  for (int db = 1; db <= n; ++db) {
    if (db == interference_db) continue;
    const Query& q = row.per_database[static_cast<std::size_t>(db - 1)];
    const int r = q.coeff(required);
    const Answer& a = answers[static_cast<std::size_t>(db - 1)];
    if (a.symbols.size() != seg_len || (!base.empty() && base.symbols.size() != seg_len)) {
      throw DecodingImpossible("answer lengths are inconsistent");
    }
    for (std::size_t t = 0; t < seg_len; ++t) {
      const std::uint64_t minuend = a.symbols[t];
      const std::uint64_t subtrahend = base.empty() ? 0 : base.symbols[t];
      file[static_cast<std::size_t>(r - 1) * seg_len + t] =
          static_cast<std::uint32_t>(
              (minuend + field_modulus - subtrahend) % field_modulus);
    }
  }
  return file;
}

/// Downloaded symbols for a row: one answer of segment_len symbols per
/// non-null query.
inline std::uint64_t download_symbols(const RealQueryRow& row,
                                      std::uint64_t segment_len) {
  std::uint64_t total = 0;
  for (const Query& q : row.per_database) {
    if (!q.is_null()) total += segment_len;
  }
  return total;
}

inline std::uint64_t download_symbols(const DummyQueryRow& row,
                                      std::uint64_t segment_len) {
  return segment_len * row.per_database.size();
}

}  // namespace dirlab
