#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lrei/kernels.hpp"
#include "test_util.hpp"

using namespace lrei;
namespace ker = lrei::kernels;

#include <cstring>
#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

bool bits_equal(const cxd& a, const cxd& b) {
  return std::memcmp(&a, &b, sizeof(cxd)) == 0;
}
template <typename Derived>
bool bits_equal(const Eigen::MatrixBase<Derived>& a,
                const Eigen::MatrixBase<Derived>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.derived().data(), b.derived().data(),
                     sizeof(cxd) * static_cast<size_t>(a.size())) == 0;
}

// Runs f in both modes and requires bitwise identical output.
template <typename F>
auto both_modes(F&& f) {
  ker::set_mode(ker::ExecMode::Serial);
  auto serial = f();
  ker::set_mode(ker::ExecMode::Parallel);
  auto parallel = f();
  REQUIRE(bits_equal(serial, parallel));
  return serial;
}

}  // namespace

TEST_CASE("dotc matches Eigen and is mode-independent bitwise") {
  auto rng = testutil::make_rng(1);
  for (Index n : {1L, 7L, 4096L, 100000L}) {
    const Vec x = testutil::random_vec(n, rng);
    const Vec y = testutil::random_vec(n, rng);
    const cxd mine = both_modes([&] { return ker::dotc(x, y); });
    const cxd ref = x.dot(y);
    CHECK(std::abs(mine - ref) <= 1e-12 * std::abs(ref));
  }
}

TEST_CASE("nrm2 and axpy") {
  auto rng = testutil::make_rng(2);
  const Index n = 50000;
  const Vec x = testutil::random_vec(n, rng);
  Vec y = testutil::random_vec(n, rng);
  CHECK(ker::nrm2(x) == doctest::Approx(x.norm()).epsilon(1e-13));
  const Vec y0 = y;
  const cxd a(0.3, -0.7);
  const Vec expected = y0 + a * x;
  const Vec got = both_modes([&] {
    Vec z = y0;
    ker::axpy(a, x, z);
    return z;
  });
  CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("multi_dotc and gemv_acc fused passes") {
  auto rng = testutil::make_rng(3);
  const Index n = 30000, m = 7;
  const Mat u = testutil::random_mat(n, m, rng);
  const Vec x = testutil::random_vec(n, rng);
  const Vec p = both_modes([&] {
    Vec out(m);
    ker::multi_dotc(u, m, x.data(), out.data());
    return out;
  });
  const Vec ref = u.adjoint() * x;
  CHECK((p - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());

  const Vec t = testutil::random_vec(m, rng);
  const Vec y = both_modes([&] {
    Vec out = Vec::Zero(n);
    ker::gemv_acc(u, m, t.data(), out.data());
    return out;
  });
  const Vec yref = u * t;
  CHECK((y - yref).cwiseAbs().maxCoeff() <= 1e-12 * yref.cwiseAbs().maxCoeff());
}

TEST_CASE("gemm_ah_b and gemm_tall_small") {
  auto rng = testutil::make_rng(4);
  const Index n = 9000, p = 4, q = 5;
  const Mat a = testutil::random_mat(n, p, rng);
  const Mat b = testutil::random_mat(n, q, rng);
  const Mat c = both_modes([&] { return ker::gemm_ah_b(a, b); });
  const Mat cref = a.adjoint() * b;
  CHECK((c - cref).cwiseAbs().maxCoeff() <= 1e-11 * cref.cwiseAbs().maxCoeff());

  const Mat s = testutil::random_mat(p, q, rng);
  const Mat d = both_modes([&] { return ker::gemm_tall_small(a, s); });
  const Mat dref = a * s;
  CHECK((d - dref).cwiseAbs().maxCoeff() <= 1e-11 * dref.cwiseAbs().maxCoeff());
}

TEST_CASE("reflect_block applies I - beta u u^*") {
  auto rng = testutil::make_rng(5);
  const Index n = 2000, m = 3, k = 17;
  Vec u = Vec::Zero(n);
  for (Index i = k; i < n; ++i) u[i] = testutil::random_vec(1, rng)[0];
  const double beta = 2.0 / u.squaredNorm();
  Mat b = testutil::random_mat(n, m, rng);
  const Mat b0 = b;
  ker::reflect_block(b, u, beta, k);
  const Mat ref = b0 - beta * u * (u.adjoint() * b0);
  CHECK((b - ref).cwiseAbs().maxCoeff() <= 1e-12 * b0.cwiseAbs().maxCoeff());

  // Hermitian unitary: applying twice restores the input.
  ker::reflect_block(b, u, beta, k);
  CHECK((b - b0).cwiseAbs().maxCoeff() <= 1e-12 * b0.cwiseAbs().maxCoeff());
}

TEST_CASE("results do not depend on thread count") {
#ifdef _OPENMP
  auto rng = testutil::make_rng(6);
  const Index n = 200000;
  const Vec x = testutil::random_vec(n, rng);
  const Vec y = testutil::random_vec(n, rng);
  ker::set_mode(ker::ExecMode::Parallel);
  const int saved = omp_get_max_threads();
  const cxd c1 = ker::dotc(x, y);
  omp_set_num_threads(1);
  const cxd c2 = ker::dotc(x, y);
  omp_set_num_threads(std::max(2, saved));
  const cxd c3 = ker::dotc(x, y);
  omp_set_num_threads(saved);
  CHECK(bits_equal(c1, c2));
  CHECK(bits_equal(c1, c3));
#endif
}
