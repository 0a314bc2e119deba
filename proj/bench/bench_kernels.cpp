// Serial reference kernels against their OpenMP versions.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>

#include "lrgibbs/kernels.hpp"
#include "lrgibbs/model.hpp"

using namespace lrgibbs;
namespace ks = lrgibbs::kernels::serial;
namespace ko = lrgibbs::kernels::omp;

namespace {

double seconds(const std::function<void()>& f, int reps) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const char* name, double serial, double omp) {
  std::printf("%-16s serial %10.3e s   omp %10.3e s   speedup %5.2f\n", name, serial, omp, serial / omp);
}

}  // namespace

int main() {
  std::printf("threads: %d\n", kernels::max_threads());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  const int n = 11;
  const int dim = 1 << n;
  CMatrix rho(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) rho(i, j) = cplx(normal(rng), normal(rng));
  }
  const Hamiltonian h = build_lr_tfi(n, 1.5, 1.0, 0.25);
  std::vector<kernels::LocalAction> terms;
  for (const auto& t : h.terms()) terms.push_back({&t.matrix, t.support.sites()});
  const kernels::LocalAction& pair = terms.front();

  row("assemble", seconds([&] { ks::assemble(terms, n); }, 2), seconds([&] { ko::assemble(terms, n); }, 2));
  CMatrix out(dim, dim);
  row("apply_local", seconds([&] { ks::apply_local(pair, n, rho, out); }, 3),
      seconds([&] { ko::apply_local(pair, n, rho, out); }, 3));
  row("trace_product", seconds([&] { ks::trace_product(rho, pair, n); }, 20),
      seconds([&] { ko::trace_product(rho, pair, n); }, 20));

  const RVector lambda = RVector::LinSpaced(dim, -5.0, 5.0);
  std::vector<double> t(64);
  std::vector<double> w(64);
  for (int m = 0; m < 64; ++m) {
    t[m] = 0.05 * (m + 1);
    w[m] = 1.0 / 64;
  }
  row("spectral_filter", seconds([&] { ks::spectral_filter(rho, lambda, t, w, 0.0, out); }, 1),
      seconds([&] { ko::spectral_filter(rho, lambda, t, w, 0.0, out); }, 1));

  const Lattice grid({12, 12});
  row("max_power_sum", seconds([&] { ks::max_power_sum(grid, 3.0); }, 3),
      seconds([&] { ko::max_power_sum(grid, 3.0); }, 3));
  row("convolution_sum", seconds([&] { ks::convolution_sum(grid, 3.0, 0, 143); }, 200),
      seconds([&] { ko::convolution_sum(grid, 3.0, 0, 143); }, 200));
  return 0;
}
