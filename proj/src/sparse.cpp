#include "lrei/sparse.hpp"

#include "lrei/kernels.hpp"

#include <algorithm>
#include <cstdlib>
#include <random>

namespace lrei {

namespace {
constexpr double kPruneTol = 1e-15;
}

Local2 Local2::pauli(int axis) {
  switch (axis) {
    case 0: return pauli_x();
    case 1: return pauli_y();
    default: return pauli_z();
  }
}

int max_sites_limit() {
  if (const char* env = std::getenv("LREI_MAX_SITES")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  return kDefaultMaxSites;
}

void SparseHermitian::matvec(const cxd* x, cxd* y) const {
  const Index n = dim;
  const bool par = kernels::mode() == kernels::ExecMode::Parallel && nnz() >= (1 << 15);
#pragma omp parallel for schedule(static) if (par)
  for (Index i = 0; i < n; ++i) {
    cxd acc{};
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      acc += val[static_cast<size_t>(k)] * x[col[static_cast<size_t>(k)]];
    y[i] = acc;
  }
}

void SparseHermitian::matmat(const Mat& X, Mat& Y) const {
  for (Index c = 0; c < X.cols(); ++c)
    matvec(X.col(c).data(), Y.col(c).data());
}

cxd SparseHermitian::entry(Index i, Index j) const {
  const auto b = col.begin() + row_ptr[i], e = col.begin() + row_ptr[i + 1];
  auto it = std::lower_bound(b, e, static_cast<std::int32_t>(j));
  if (it == e || *it != j) return cxd{};
  return val[static_cast<size_t>(it - col.begin())];
}

cxd SparseHermitian::trace() const {
  cxd acc{};
  for (Index i = 0; i < dim; ++i) acc += entry(i, i);
  return acc;
}

double SparseHermitian::hermiticity_defect_sampled(Index samples) const {
  if (nnz() == 0) return 0.0;
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<std::int64_t> pick(0, nnz() - 1);
  double worst = 0.0;
  for (Index s = 0; s < samples; ++s) {
    const std::int64_t k = pick(rng);
    const auto it = std::upper_bound(row_ptr.begin(), row_ptr.end(), k);
    const Index i = static_cast<Index>(it - row_ptr.begin()) - 1;
    const Index j = col[static_cast<size_t>(k)];
    worst = std::max(worst,
                     std::abs(val[static_cast<size_t>(k)] - std::conj(entry(j, i))));
  }
  return worst;
}

Mat SparseHermitian::dense() const {
  if (dim > (Index{1} << 12))
    throw ResourceGuardError("SparseHermitian::dense: dimension too large");
  Mat A = Mat::Zero(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (std::int64_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      A(i, col[static_cast<size_t>(k)]) += val[static_cast<size_t>(k)];
  return A;
}

OperatorBuilder::OperatorBuilder(int n_sites, int max_sites) : n_(n_sites) {
  if (n_sites < 1) throw std::invalid_argument("OperatorBuilder: n_sites < 1");
  if (n_sites > max_sites)
    throw ResourceGuardError("OperatorBuilder: n_sites exceeds the site guard (" +
                             std::to_string(max_sites) + "); set LREI_MAX_SITES to override");
  dim_ = Index{1} << n_sites;
}

void OperatorBuilder::add_site(double coeff, int site, const Local2& a) {
  add_site(cxd(coeff), site, a);
}

void OperatorBuilder::add_site(cxd coeff, int site, const Local2& a) {
  if (site < 1 || site > n_) throw std::invalid_argument("site index out of range");
  terms_.push_back({coeff, site, -1, a, Local2::identity()});
}

void OperatorBuilder::add_pair(double coeff, int site_i, int site_j,
                               const Local2& a, const Local2& b) {
  if (site_i < 1 || site_i > n_ || site_j < 1 || site_j > n_ || site_i == site_j)
    throw std::invalid_argument("pair site indices out of range");
  terms_.push_back({cxd(coeff), site_i, site_j, a, b});
}

SparseHermitian OperatorBuilder::build() const {
  const Index n = dim_;
  const int bits = n_;
  SparseHermitian out;
  out.dim = n;
  out.row_ptr.assign(static_cast<size_t>(n) + 1, 0);

  struct Entry {
    std::int64_t c;
    cxd v;
  };

  // site s (1-based) lives at bit (n_ - s); site 1 is the most significant.
  auto row_entries = [&](Index row, std::vector<Entry>& scratch) {
    scratch.clear();
    for (const Term& t : terms_) {
      const int shift_i = bits - t.i;
      const int qi = static_cast<int>((row >> shift_i) & 1);
      if (t.j < 0) {
        const cxd v = t.coeff * t.a.val[qi];
        if (v == cxd{}) continue;
        const Index c = (row & ~(Index{1} << shift_i)) |
                        (static_cast<Index>(t.a.col[qi]) << shift_i);
        scratch.push_back({c, v});
      } else {
        const int shift_j = bits - t.j;
        const int qj = static_cast<int>((row >> shift_j) & 1);
        const cxd v = t.coeff * t.a.val[qi] * t.b.val[qj];
        if (v == cxd{}) continue;
        Index c = row;
        c = (c & ~(Index{1} << shift_i)) | (static_cast<Index>(t.a.col[qi]) << shift_i);
        c = (c & ~(Index{1} << shift_j)) | (static_cast<Index>(t.b.col[qj]) << shift_j);
        scratch.push_back({c, v});
      }
    }
    std::sort(scratch.begin(), scratch.end(),
              [](const Entry& x, const Entry& y) { return x.c < y.c; });
    // merge duplicates in place, prune tiny results
    size_t w = 0;
    for (size_t rpos = 0; rpos < scratch.size();) {
      std::int64_t c = scratch[rpos].c;
      cxd v{};
      while (rpos < scratch.size() && scratch[rpos].c == c) v += scratch[rpos++].v;
      if (std::abs(v) > kPruneTol) scratch[w++] = {c, v};
    }
    scratch.resize(w);
  };

  const bool par = kernels::mode() == kernels::ExecMode::Parallel && n >= (1 << 12);

#pragma omp parallel if (par)
  {
    std::vector<Entry> scratch;
    scratch.reserve(terms_.size());
#pragma omp for schedule(static)
    for (Index i = 0; i < n; ++i) {
      row_entries(i, scratch);
      out.row_ptr[static_cast<size_t>(i) + 1] = static_cast<std::int64_t>(scratch.size());
    }
  }
  for (Index i = 0; i < n; ++i) out.row_ptr[static_cast<size_t>(i) + 1] += out.row_ptr[static_cast<size_t>(i)];

  out.col.resize(static_cast<size_t>(out.row_ptr[static_cast<size_t>(n)]));
  out.val.resize(out.col.size());

#pragma omp parallel if (par)
  {
    std::vector<Entry> scratch;
    scratch.reserve(terms_.size());
#pragma omp for schedule(static)
    for (Index i = 0; i < n; ++i) {
      row_entries(i, scratch);
      std::int64_t k = out.row_ptr[static_cast<size_t>(i)];
      for (const Entry& e : scratch) {
        out.col[static_cast<size_t>(k)] = static_cast<std::int32_t>(e.c);
        out.val[static_cast<size_t>(k)] = e.v;
        ++k;
      }
    }
  }
  return out;
}

}  // namespace lrei
