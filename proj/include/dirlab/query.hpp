#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dirlab {

// One query as received by a single database: for each file, either no
// coefficient (0) or the index of the requested segment (1..N-1). The
// all-absent query is the null query phi.
class Query {
 public:
  Query() = default;
  explicit Query(int n_files) : coeffs_(static_cast<std::size_t>(n_files), 0) {
    if (n_files < 1) throw std::invalid_argument("query needs n_files >= 1");
  }

  int n_files() const { return static_cast<int>(coeffs_.size()); }

  // file is 1-based; segment 0 means absent.
  std::uint16_t coeff(int file) const {
    return coeffs_.at(static_cast<std::size_t>(file - 1));
  }
  void set_coeff(int file, std::uint16_t segment) {
    coeffs_.at(static_cast<std::size_t>(file - 1)) = segment;
  }

  bool is_null() const {
    for (auto c : coeffs_) {
      if (c != 0) return false;
    }
    return true;
  }

  int weight() const {
    int w = 0;
    for (auto c : coeffs_) w += (c != 0);
    return w;
  }

  // File index if the query touches exactly one file, 0 otherwise.
  int single_file() const {
    int file = 0;
    for (int i = 1; i <= n_files(); ++i) {
      if (coeff(i) != 0) {
        if (file != 0) return 0;
        file = i;
      }
    }
    return file;
  }

  bool contains_file(int file) const { return coeff(file) != 0; }

  auto operator<=>(const Query&) const = default;

  // "W1^1+W2^2" with files in ascending order; "phi" for the null query.
  std::string to_string() const {
    if (is_null()) return "phi";
    std::string out;
    for (int i = 1; i <= n_files(); ++i) {
      if (coeff(i) == 0) continue;
      if (!out.empty()) out += '+';
      out += 'W';
      out += std::to_string(i);
      out += '^';
      out += std::to_string(coeff(i));
    }
    return out;
  }

  static Query parse(std::string_view text, int n_files, int n_segments) {
    Query q(n_files);
    if (text == "phi") return q;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t plus = text.find('+', pos);
      if (plus == std::string_view::npos) plus = text.size();
      std::string_view term = text.substr(pos, plus - pos);
      std::size_t caret = term.find('^');
      if (term.size() < 4 || term[0] != 'W' || caret == std::string_view::npos) {
        throw std::invalid_argument("bad query term: " + std::string(term));
      }
      int file = 0;
      int segment = 0;
      auto fr = std::from_chars(term.data() + 1, term.data() + caret, file);
      auto sr = std::from_chars(term.data() + caret + 1,
                                term.data() + term.size(), segment);
      if (fr.ec != std::errc{} || sr.ec != std::errc{} || file < 1 ||
          file > n_files || segment < 1 || segment > n_segments) {
        throw std::invalid_argument("bad query term: " + std::string(term));
      }
      if (q.coeff(file) != 0) {
        throw std::invalid_argument("file repeated in query: " +
                                    std::string(text));
      }
      q.set_coeff(file, static_cast<std::uint16_t>(segment));
      pos = plus + 1;
    }
    return q;
  }

 private:
  std::vector<std::uint16_t> coeffs_;
};

// All N^K distinct queries in lexicographic coefficient order (the canonical
// table ordering); intended for small query spaces.
inline std::vector<Query> all_queries(int n_files, int n_segments) {
  std::vector<Query> out;
  Query q(n_files);
  while (true) {
    out.push_back(q);
    int file = n_files;
    while (file >= 1 && q.coeff(file) == n_segments) {
      q.set_coeff(file, 0);
      --file;
    }
    if (file < 1) break;
    q.set_coeff(file, static_cast<std::uint16_t>(q.coeff(file) + 1));
  }
  return out;
}

}  // namespace dirlab
