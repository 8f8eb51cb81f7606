#pragma once

#include <cstdint>
#include <vector>

namespace dtn {

// GF(2^m) arithmetic via log/antilog tables, 1 <= m <= 8.
class GF2m {
 public:
  static const GF2m& get(int m);  // shared immutable tables

  int order() const { return q_; }
  int mul(int a, int b) const {
    if (a == 0 || b == 0) return 0;
    return exp_[log_[a] + log_[b]];
  }
  int inv(int a) const;
  static int add(int a, int b) { return a ^ b; }

 private:
  explicit GF2m(int m);
  int q_;
  std::vector<int> exp_;  // size 2q, doubled to avoid modular reduction
  std::vector<int> log_;
};

struct FieldMatrix {
  int q = 2;                               // field order, a power of two
  std::size_t cols = 0;                    // K
  std::vector<std::vector<uint16_t>> rows;

  void add_row(std::vector<uint16_t> r);
};

// Rank over F_q via Gaussian elimination; the input is left untouched.
std::size_t gf_rank(const FieldMatrix& m);

// Incremental rank tracker: maintains a reduced basis, O(K^2) per row.
class RankTracker {
 public:
  RankTracker(int q, std::size_t cols);
  // Returns true if the row increased the rank.
  bool add_row(std::vector<uint16_t> row);
  std::size_t rank() const { return basis_.size(); }

 private:
  const GF2m* gf_;
  std::size_t cols_;
  std::vector<std::vector<uint16_t>> basis_;  // rows with distinct pivots
  std::vector<int> pivot_;                    // pivot column per basis row
};

}  // namespace dtn
