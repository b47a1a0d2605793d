#pragma once

#include "lrei/types.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace lrei {

// Compressed sparse row storage for 2^n-dimensional operators. Rows are
// sorted by column and duplicate coordinates have been merged.
struct SparseHermitian {
  Index dim = 0;
  std::vector<std::int64_t> row_ptr;
  std::vector<std::int32_t> col;
  std::vector<cxd> val;

  Index nnz() const { return static_cast<Index>(val.size()); }

  // y = A x
  void matvec(const cxd* x, cxd* y) const;
  void matvec(const Vec& x, Vec& y) const { matvec(x.data(), y.data()); }

  // Y = A X for tall X (dim x r), column by column
  void matmat(const Mat& X, Mat& Y) const;

  cxd entry(Index i, Index j) const;
  cxd trace() const;
  double hermiticity_defect_sampled(Index samples) const;

  Mat dense() const;  // guarded to dim <= 2^12
};

// 2x2 single-site factor with at most one nonzero per row:
// row q -> (column col[q], value val[q]). Covers I, the Pauli matrices,
// and matrix units.
struct Local2 {
  std::array<std::int32_t, 2> col{0, 1};
  std::array<cxd, 2> val{cxd(0), cxd(0)};

  static Local2 identity() { return {{0, 1}, {cxd(1), cxd(1)}}; }
  static Local2 pauli_x() { return {{1, 0}, {cxd(1), cxd(1)}}; }
  static Local2 pauli_y() { return {{1, 0}, {cxd(0, -1), cxd(0, 1)}}; }
  static Local2 pauli_z() { return {{0, 1}, {cxd(1), cxd(-1)}}; }
  // |a><b| : nonzero only in row a
  static Local2 unit(int a, int b) {
    Local2 m;
    m.col = {static_cast<std::int32_t>(b), static_cast<std::int32_t>(b)};
    m.val[a] = cxd(1);
    return m;
  }
  static Local2 pauli(int axis);  // 0,1,2 -> x,y,z
};

// Accumulates tensor-product terms acting on one or two sites of an
// n-site register (site 1 = most significant bit) and assembles the CSR
// matrix in a row-parallel two-pass sweep. Duplicate coordinates are
// summed, entries below 1e-15 pruned.
class OperatorBuilder {
 public:
  OperatorBuilder(int n_sites, int max_sites = kDefaultMaxSites);

  void add_site(double coeff, int site, const Local2& a);
  void add_site(cxd coeff, int site, const Local2& a);
  void add_pair(double coeff, int site_i, int site_j, const Local2& a,
                const Local2& b);

  SparseHermitian build() const;

  int n_sites() const { return n_; }

 private:
  struct Term {
    cxd coeff;
    int i, j;  // j < 0 for single-site terms
    Local2 a, b;
  };
  int n_;
  Index dim_;
  std::vector<Term> terms_;
};

// Maximum site count guard; LREI_MAX_SITES overrides the default of 26.
int max_sites_limit();

}  // namespace lrei
