#include <doctest.h>

#include <random>

#include "lrgibbs/kernels.hpp"

using namespace lrgibbs;
namespace ks = lrgibbs::kernels::serial;
namespace ko = lrgibbs::kernels::omp;

namespace {

CMatrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("OpenMP kernels reproduce the serial reference") {
  std::mt19937_64 rng(11);
  const int n = 7;
  const CMatrix local = random_matrix(4, 4, rng);
  const std::vector<int> qubits{5, 1};
  CHECK((ko::embed(local, qubits, n) - ks::embed(local, qubits, n)).norm() == doctest::Approx(0.0));

  const CMatrix in = random_matrix(1 << n, 9, rng);
  CMatrix a(1 << n, 9);
  CMatrix b(1 << n, 9);
  const kernels::LocalAction op{&local, qubits};
  ks::apply_local(op, n, in, a);
  ko::apply_local(op, n, in, b);
  CHECK((a - b).norm() < 1e-12 * a.norm());
  CHECK((a - ks::embed(local, qubits, n) * in).norm() < 1e-12 * a.norm());

  const CMatrix single = random_matrix(2, 2, rng);
  std::vector<kernels::LocalAction> terms{op, {&single, {3}}};
  CHECK((ko::assemble(terms, n) - ks::assemble(terms, n)).norm() < 1e-12);

  const CMatrix rho = random_matrix(1 << n, 1 << n, rng);
  const cplx t1 = ks::trace_product(rho, op, n);
  CHECK(std::abs(t1 - ko::trace_product(rho, op, n)) < 1e-10);
  CHECK(std::abs(t1 - (rho * ks::embed(local, qubits, n)).trace()) < 1e-9);
}

TEST_CASE("spectral filter kernels agree") {
  std::mt19937_64 rng(5);
  const CMatrix v = random_matrix(16, 16, rng);
  RVector lambda = RVector::LinSpaced(16, -2.0, 3.0);
  const std::vector<double> t{0.1, 0.5, 1.3};
  const std::vector<double> w{0.2, 0.3, 0.1};
  CMatrix a(16, 16);
  CMatrix b(16, 16);
  ks::spectral_filter(v, lambda, t, w, 0.05, a);
  ko::spectral_filter(v, lambda, t, w, 0.05, b);
  CHECK((a - b).norm() < 1e-13 * a.norm());
  const double f = 0.05 + 0.2 * std::cos(5.0 * 0.1) + 0.3 * std::cos(5.0 * 0.5) + 0.1 * std::cos(5.0 * 1.3);
  CHECK(std::abs(a(15, 0) - v(15, 0) * f) < 1e-12);
}

TEST_CASE("lattice sums agree between kernels") {
  for (const Lattice& lat : {Lattice::chain(13), Lattice({5, 6})}) {
    CHECK(ko::max_power_sum(lat, 2.5) == doctest::Approx(ks::max_power_sum(lat, 2.5)).epsilon(1e-14));
    CHECK(ko::convolution_sum(lat, 2.5, 0, lat.size() - 1) ==
          doctest::Approx(ks::convolution_sum(lat, 2.5, 0, lat.size() - 1)).epsilon(1e-14));
  }
  CHECK(kernels::max_threads() >= 1);
}
