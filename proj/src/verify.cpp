#include "lrgibbs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrgibbs/bounds.hpp"
#include "lrgibbs/errors.hpp"
#include "lrgibbs/exact.hpp"
#include "lrgibbs/linalg.hpp"
#include "lrgibbs/model.hpp"
#include "lrgibbs/quadrature.hpp"
#include "lrgibbs/tensornet.hpp"

namespace lrgibbs::verify {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
int uniform_int(Rng& rng, int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

/// GUE-like Hermitian matrix on n qubits, scaled to unit operator norm.
CMatrix random_hermitian(Rng& rng, int n) {
  const int dim = 1 << n;
  std::normal_distribution<double> normal;
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  }
  CMatrix h = 0.5 * (m + m.adjoint());
  return h / linalg::operator_norm(h);
}

void add(SuiteReport& r, std::string name, double value, double limit) {
  r.checks.push_back({std::move(name), value, limit, std::isfinite(value) && value <= limit});
}

}  // namespace

int SuiteReport::passed() const {
  return static_cast<int>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return c.passed; }));
}

int SuiteReport::failed() const { return static_cast<int>(checks.size()) - passed(); }

void to_json(nlohmann::json& j, const SuiteReport& r) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& c : r.checks) {
    if (!c.passed) failures.push_back({{"name", c.name}, {"value", c.value}, {"limit", c.limit}});
  }
  j = {{"suite", r.suite}, {"passed", r.passed()}, {"failed", r.failed()}, {"failures", failures},
       {"warnings", r.warnings}};
}

SuiteReport identities(std::uint64_t seed) {
  SuiteReport r;
  r.suite = "identities";
  Rng rng(seed);
  for (double beta : {0.37, 1.0, 2.0}) {
    const auto c = bounds::dilog_identity_check(beta);
    add(r, "dilog beta=" + std::to_string(beta), std::abs(c.quadrature - c.closed_form) / c.closed_form, 1e-8);
  }
  for (double beta : {0.25, 1.0, 4.0}) {
    const quad::FilterRule rule = quad::filter_rule(beta);
    add(r, "f_beta mass beta=" + std::to_string(beta), std::abs(rule.total_mass() - 1.0), 1e-6);
  }
  for (int i = 0; i < 20; ++i) {
    const int n = uniform_int(rng, 1, 3);
    const CMatrix h = random_hermitian(rng, n);
    const CMatrix v = random_hermitian(rng, n);
    const double beta = uniform(rng, 0.1, 2.0);
    const double s = uniform(rng, -0.5, 0.5);
    add(r, "derivative residual #" + std::to_string(i), exact::exponential_derivative_check(h, v, beta, s), 1e-5);
  }
  for (int i = 0; i < 50; ++i) {
    const int n = uniform_int(rng, 1, 3);
    const CMatrix h = random_hermitian(rng, n) * uniform(rng, 0.5, 4.0);
    const CMatrix v = random_hermitian(rng, n);
    const double beta = uniform(rng, 0.1, 2.0);
    const double phi = linalg::operator_norm(exact::belief_propagation(h, v, beta));
    add(r, "phi contraction #" + std::to_string(i), phi / linalg::operator_norm(v), 1.0 + 1e-4);
  }
  return r;
}

SuiteReport oracles(std::uint64_t seed) {
  SuiteReport r;
  r.suite = "oracles";
  Rng rng(seed);
  for (int i = 0; i < 20; ++i) {
    const int n = uniform_int(rng, 1, 5);
    const CMatrix h = random_hermitian(rng, n);
    const CMatrix v = random_hermitian(rng, n) * uniform(rng, 0.05, 1.0);
    const CMatrix o = random_hermitian(rng, n);
    const double beta = i % 2 == 0 ? 0.25 : 1.0;
    const double direct = exact::lppl_difference(h, v, o, beta);
    const double duhamel = exact::duhamel_difference(h, v, o, beta).value;
    add(r, "duhamel #" + std::to_string(i), std::abs(duhamel - direct) / std::max(1.0, direct), 1e-6);
  }
  tensornet::TebdConfig cfg;
  cfg.dbeta = 1e-2;
  cfg.chi_max = 64;
  for (double alpha : {0.5, 1.5, 3.0}) {
    const LrTfiChain chain = LrTfiChain::make(8, alpha, 1.0, 0.25);
    const PlacedObservable zz = pauli_string(Region{3, 4}, "zz");
    const exact::SpectrumPtr spectrum = exact::diagonalize(build_lr_tfi(chain));
    tensornet::Mpo mpo = tensornet::Mpo::identity(chain.n);
    for (double beta : {0.25, 1.0}) {
      tensornet::evolve(mpo, chain, beta, cfg);
      const double diff = std::abs(tensornet::mpo_expectation(mpo, zz) - exact::expectation(exact::gibbs(spectrum, beta), zz));
      add(r, "tensornet N=8 alpha=" + std::to_string(alpha) + " beta=" + std::to_string(beta), diff, 1e-3);
    }
  }
  return r;
}

SuiteReport bounds_domination(int samples, std::uint64_t seed) {
  SuiteReport r;
  r.suite = "bounds-domination";
  if (samples <= 0) r.warnings.push_back("no random samples drawn; integral checks are vacuous");
  Rng rng(seed);
  constexpr double kSlack = 1e-10;
  for (int i = 0; i < samples; ++i) {
    for (auto kind : {bounds::RegimeKind::high_temperature, bounds::RegimeKind::strong_2d_plus_1,
                      bounds::RegimeKind::strong_2d_to_2d_plus_1}) {
      bounds::LrbParams p;
      p.dimension = uniform_int(rng, 1, 3);
      p.g = uniform(rng, 0.2, 2.0);
      p.u = uniform(rng, 0.5, 3.0);
      p.k = uniform_int(rng, 2, 3);
      const double D = p.dimension;
      double beta = 0.0;
      switch (kind) {
        case bounds::RegimeKind::high_temperature:
          p.alpha = uniform(rng, D + 0.1, D + 4.0);
          beta = uniform(rng, 0.01, 0.99) * std::min(p.beta_star(), (2.0 * M_PI - 1.0) / p.v());
          break;
        case bounds::RegimeKind::strong_2d_plus_1:
          p.alpha = uniform(rng, 2 * D + 1, 2 * D + 4);
          beta = uniform(rng, 0.1, 5.0);
          break;
        case bounds::RegimeKind::strong_2d_to_2d_plus_1:
          p.alpha = uniform(rng, 2 * D + 0.05, 2 * D + 1);
          beta = uniform(rng, 0.1, 5.0);
          break;
      }
      const bounds::Regime regime{kind, beta, std::nullopt};
      const double closed = bounds::integral_I1(beta, regime, p);
      const double b = uniform(rng, 0.05, 20.0) * beta;
      const double quadrature = bounds::integral_I1_quadrature(beta, regime, p, b);
      add(r, std::string("I1 ") + bounds::to_string(kind) + " #" + std::to_string(i), quadrature / closed, 1.0 + kSlack);
    }
    const double beta = uniform(rng, 0.1, 5.0);
    const double b = uniform(rng, 0.01, 5.0);
    const double closed = bounds::integral_I2(beta, b);
    const double quadrature = bounds::integral_I2_quadrature(beta, b);
    const double exact_value = bounds::integral_I2_exact(beta, b);
    add(r, "I2 quadrature #" + std::to_string(i), quadrature / closed, 1.0 + kSlack);
    add(r, "I2 closed log #" + std::to_string(i), exact_value / closed, 1.0 + kSlack);
  }
  // Convolution lemma on every pair of every finite chain (N <= 30) and square (L <= 10).
  const std::vector<std::pair<int, std::vector<double>>> alphas{{1, {1.5, 2.0, 3.0}}, {2, {2.5, 3.0, 4.0}}};
  for (const auto& [dim, list] : alphas) {
    for (double alpha : list) {
      double worst = 0.0;
      const int max_extent = dim == 1 ? 30 : 10;
      for (int extent = 2; extent <= max_extent; ++extent) {
        const Lattice lat(std::vector<int>(dim, extent));
        const double u = u_constant(lat, alpha);
        for (Site i = 0; i < lat.size(); ++i) {
          for (Site k = 0; k < lat.size(); ++k) {
            const auto c = bounds::convolution_check(lat, alpha, i, k, u);
            worst = std::max(worst, c.lhs / c.rhs);
          }
        }
      }
      add(r, "convolution D=" + std::to_string(dim) + " alpha=" + std::to_string(alpha), worst, 1.0 + 1e-12);
    }
  }
  // Surface cardinality: enumerate the level set around the center of a (2 ell + 1)^D box.
  for (int dim = 1; dim <= 3; ++dim) {
    for (int ell = 1; ell <= 6; ++ell) {
      const int extent = 2 * ell + 1;
      const Lattice lat(std::vector<int>(dim, extent));
      const Site center = lat.site(std::vector<int>(dim, ell));
      const double count = static_cast<double>(level_set(lat, Region{center}, ell).size());
      const auto bound = surface_bound(dim, ell);
      const std::string tag = " D=" + std::to_string(dim) + " ell=" + std::to_string(ell);
      add(r, "surface binomial" + tag, count / bound.binomial, 1.0);
      add(r, "surface power" + tag, count / bound.power, 1.0);
    }
  }
  return r;
}

SuiteReport run_suite(const std::string& name, int samples, std::uint64_t seed) {
  if (name == "identities") return identities(seed);
  if (name == "oracles") return oracles(seed);
  if (name == "bounds-domination") return bounds_domination(samples, seed);
  throw ConfigError("unknown verify suite: " + name);
}

}  // namespace lrgibbs::verify
