#include "dtn/gf.hpp"

#include <array>
#include <stdexcept>

namespace dtn {

namespace {
// Primitive polynomials for GF(2^m), m = 1..8 (with the x^m bit included).
constexpr std::array<int, 9> kPrimPoly = {0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D};
}  // namespace

GF2m::GF2m(int m) {
  if (m < 1 || m > 8) throw std::invalid_argument("GF2m: need 1 <= m <= 8");
  q_ = 1 << m;
  exp_.assign(2 * q_, 0);
  log_.assign(q_, 0);
  int x = 1;
  for (int i = 0; i < q_ - 1; ++i) {
    exp_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x & q_) x ^= kPrimPoly[m];
  }
  for (int i = q_ - 1; i < 2 * q_; ++i) exp_[i] = exp_[i - (q_ - 1)];
}

const GF2m& GF2m::get(int m) {
  static const std::array<GF2m, 8> tables = {GF2m(1), GF2m(2), GF2m(3), GF2m(4),
                                             GF2m(5), GF2m(6), GF2m(7), GF2m(8)};
  if (m < 1 || m > 8) throw std::invalid_argument("GF2m: need 1 <= m <= 8");
  return tables[m - 1];
}

int GF2m::inv(int a) const {
  if (a == 0) throw std::domain_error("GF2m: zero has no inverse");
  return exp_[(q_ - 1) - log_[a]];
}

namespace {

int m_for_order(int q) {
  for (int m = 1; m <= 8; ++m)
    if ((1 << m) == q) return m;
  throw std::invalid_argument("FieldMatrix: q must be 2^m with 1 <= m <= 8");
}

}  // namespace

void FieldMatrix::add_row(std::vector<uint16_t> r) {
  if (r.size() != cols) throw std::invalid_argument("FieldMatrix: row size mismatch");
  for (uint16_t v : r)
    if (v >= q) throw std::invalid_argument("FieldMatrix: entry out of field range");
  rows.push_back(std::move(r));
}

std::size_t gf_rank(const FieldMatrix& m) {
  RankTracker rt(m.q, m.cols);
  for (const auto& r : m.rows) {
    for (uint16_t v : r)
      if (v >= m.q) throw std::invalid_argument("gf_rank: entry out of field range");
    rt.add_row(r);
  }
  return rt.rank();
}

RankTracker::RankTracker(int q, std::size_t cols)
    : gf_(&GF2m::get(m_for_order(q))), cols_(cols) {}

bool RankTracker::add_row(std::vector<uint16_t> row) {
  if (row.size() != cols_) throw std::invalid_argument("RankTracker: row size mismatch");
  for (;;) {
    std::size_t c = 0;
    while (c < cols_ && row[c] == 0) ++c;
    if (c == cols_) return false;
    std::size_t b = 0;
    while (b < basis_.size() && pivot_[b] != static_cast<int>(c)) ++b;
    if (b == basis_.size()) {
      pivot_.push_back(static_cast<int>(c));
      basis_.push_back(std::move(row));
      return true;
    }
    // Cancel the leading entry; the first nonzero column strictly increases
    // (each basis row's first nonzero column is its pivot), so this terminates.
    const int factor = gf_->mul(static_cast<int>(row[c]), gf_->inv(basis_[b][c]));
    for (std::size_t j = c; j < cols_; ++j)
      row[j] = static_cast<uint16_t>(GF2m::add(row[j], gf_->mul(factor, basis_[b][j])));
  }
}

}  // namespace dtn
