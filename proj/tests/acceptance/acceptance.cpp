// Acceptance runner: one PASS/FAIL line per primary criterion.
// Usage: acceptance [name ...]   (no names: run everything)

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "lrgibbs/bounds.hpp"
#include "lrgibbs/exact.hpp"
#include "lrgibbs/experiments.hpp"
#include "lrgibbs/lattice.hpp"
#include "lrgibbs/linalg.hpp"
#include "lrgibbs/model.hpp"
#include "lrgibbs/quadrature.hpp"
#include "lrgibbs/tensornet.hpp"
#include "lrgibbs/verify.hpp"

using namespace lrgibbs;
namespace ex = lrgibbs::experiments;

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = 3.14159265358979323846;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------- oracles

CMatrix random_hermitian(Rng& rng, int n) {
  const int dim = 1 << n;
  std::normal_distribution<double> normal;
  CMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) m(i, j) = cplx(normal(rng), normal(rng));
  CMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return h / es.eigenvalues().cwiseAbs().maxCoeff();
}

double opnorm(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

struct Eig {
  RVector e;
  CMatrix u;
};

Eig eig(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// Closed-form belief propagation: in the eigenbasis Phi(V)_kl = V_kl tanh(b w / 2) / (b w / 2).
CMatrix phi_closed(const Eig& s, const CMatrix& v, double beta) {
  CMatrix ve = s.u.adjoint() * v * s.u;
  for (int k = 0; k < ve.rows(); ++k) {
    for (int l = 0; l < ve.cols(); ++l) {
      const double x = 0.5 * beta * (s.e(k) - s.e(l));
      ve(k, l) *= std::abs(x) < 1e-12 ? 1.0 : std::tanh(x) / x;
    }
  }
  return s.u * ve * s.u.adjoint();
}

/// Daleckii-Krein: d/ds e^{-beta (H + s V)} at s.
CMatrix exp_derivative(const CMatrix& h, const CMatrix& v, double beta, double s) {
  const Eig d = eig(CMatrix(h + s * v));
  CMatrix ve = d.u.adjoint() * v * d.u;
  for (int k = 0; k < ve.rows(); ++k) {
    for (int l = 0; l < ve.cols(); ++l) {
      const double ek = d.e(k), el = d.e(l);
      const double q = std::abs(ek - el) < 1e-10 ? -beta * std::exp(-beta * ek)
                                                 : (std::exp(-beta * ek) - std::exp(-beta * el)) / (ek - el);
      ve(k, l) *= q;
    }
  }
  return d.u * ve * d.u.adjoint();
}

double thermal_mean(const CMatrix& h, const CMatrix& o, double beta) {
  const Eig d = eig(h);
  const RVector w = (-beta * (d.e.array() - d.e.minCoeff())).exp();
  const CMatrix oe = d.u.adjoint() * o * d.u;
  double num = 0.0;
  for (int k = 0; k < w.size(); ++k) num += w(k) * oe(k, k).real();
  return num / w.sum();
}

/// Z on one site of an n-site register, site 0 most significant.
CMatrix z_site(int site, int n) {
  const int dim = 1 << n;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) out(b, b) = ((b >> (n - 1 - site)) & 1) ? -1.0 : 1.0;
  return out;
}

/// Dense Kac-normalized LR-TFI, site 0 most significant.
CMatrix dense_lr_tfi(int n, double alpha, double J, double h) {
  double pairs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) pairs += std::pow(j - i, -alpha);
  const double kac = pairs / n;
  const int dim = 1 << n;
  // Diagonal field plus XX flips, assembled in the computational basis.
  CMatrix H = CMatrix::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    double diag = 0.0;
    for (int s = 0; s < n; ++s) diag += ((b >> (n - 1 - s)) & 1) ? -h : h;
    H(b, b) = diag;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int flipped = b ^ (1 << (n - 1 - i)) ^ (1 << (n - 1 - j));
        H(flipped, b) += J / kac * std::pow(j - i, -alpha);
      }
    }
  }
  return H;
}

double zz_mean(const CMatrix& H, int n, int a, int b, double beta) {
  const int dim = 1 << n;
  const Eig d = eig(H);
  const RVector w = (-beta * (d.e.array() - d.e.minCoeff())).exp();
  double num = 0.0;
  for (int k = 0; k < dim; ++k) {
    double zz = 0.0;
    for (int c = 0; c < dim; ++c) {
      const int sa = ((c >> (n - 1 - a)) & 1) ? -1 : 1;
      const int sb = ((c >> (n - 1 - b)) & 1) ? -1 : 1;
      zz += std::norm(d.u(c, k)) * sa * sb;
    }
    num += w(k) * zz;
  }
  return num / w.sum();
}

double f_beta_oracle(double beta, double t) {
  const double x = kPi * std::abs(t) / beta;
  return 2.0 / (beta * kPi) * std::log1p(2.0 / std::expm1(x));
}

// ---------------------------------------------------------------- criteria

Outcome identity_suite() {
  Rng rng(20240611);
  int failures = 0;
  double worst_dilog = 0, worst_mass = 0, worst_deriv = 0, worst_phi = 0, worst_oracle = 0;
  boost::math::quadrature::exp_sinh<double> es;
  for (double beta : {0.37, 1.0, 2.0}) {
    const auto c = bounds::dilog_identity_check(beta);
    const double target = beta * kPi / 4.0;
    const double rel = std::abs(c.quadrature - target) / target;
    const double own = es.integrate([&](double t) { return std::log1p(2.0 / std::expm1(kPi * t / beta)); });
    worst_oracle = std::max(worst_oracle, std::abs(own - target) / target);
    worst_dilog = std::max(worst_dilog, rel);
    failures += rel >= 1e-8;
  }
  for (double beta : {0.25, 1.0, 4.0}) {
    const double lib = quad::filter_rule(beta).total_mass();
    const double own = 2.0 * es.integrate([&](double t) { return f_beta_oracle(beta, t); });
    const double err = std::max(std::abs(lib - 1.0), std::abs(own - 1.0));
    worst_mass = std::max(worst_mass, err);
    failures += err > 1e-6;
  }
  for (int i = 0; i < 20; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const CMatrix h = random_hermitian(rng, n);
    const CMatrix v = random_hermitian(rng, n);
    const double beta = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const double s = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
    const double lib = exact::exponential_derivative_check(h, v, beta, s);
    // Same identity with the analytic derivative and closed-form filter.
    const Eig d = eig(CMatrix(h + s * v));
    CMatrix e = d.u * (-beta * d.e.array()).exp().matrix().asDiagonal() * d.u.adjoint();
    const CMatrix phi = phi_closed(d, v, beta);
    const CMatrix rhs = -0.5 * beta * (e * phi + phi * e);
    const double own = opnorm(exp_derivative(h, v, beta, s) - rhs) / opnorm(rhs);
    const double r = std::max(lib, own);
    worst_deriv = std::max(worst_deriv, r);
    failures += !(r < 1e-5);
  }
  for (int i = 0; i < 50; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    const CMatrix h = random_hermitian(rng, n) * std::uniform_real_distribution<double>(0.5, 4.0)(rng);
    const CMatrix v = random_hermitian(rng, n);
    const double beta = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const CMatrix lib = exact::belief_propagation(h, v, beta);
    const double ratio = opnorm(lib) / opnorm(v);
    worst_oracle = std::max(worst_oracle, opnorm(lib - phi_closed(eig(h), v, beta)));
    worst_phi = std::max(worst_phi, ratio);
    failures += !(ratio <= 1.0 + 1e-4);
  }
  failures += worst_oracle > 1e-6;
  return {failures == 0, "dilog " + fmt("%.2e", worst_dilog) + ", mass " + fmt("%.2e", worst_mass) +
                             ", derivative " + fmt("%.2e", worst_deriv) + ", phi ratio " + fmt("%.8f", worst_phi) +
                             ", oracle gap " + fmt("%.2e", worst_oracle)};
}

Outcome duhamel_oracle() {
  Rng rng(20240612);
  double worst = 0.0, worst_direct = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    const CMatrix h = random_hermitian(rng, n);
    const CMatrix v = random_hermitian(rng, n) * std::uniform_real_distribution<double>(0.05, 1.0)(rng);
    const CMatrix o = random_hermitian(rng, n);
    const double beta = i % 2 == 0 ? 0.25 : 1.0;
    const double lppl = exact::lppl_difference(h, v, o, beta);
    const double duh = exact::duhamel_difference(h, v, o, beta).value;
    const double direct = std::abs(thermal_mean(h, o, beta) - thermal_mean(CMatrix(h + v), o, beta));
    worst = std::max(worst, std::abs(duh - lppl) / std::max(1.0, lppl));
    worst_direct = std::max(worst_direct, std::abs(duh - direct) / std::max(1.0, direct));
  }
  return {worst < 1e-6 && worst_direct < 1e-6,
          "max scaled gap " + fmt("%.2e", worst) + " (vs own direct " + fmt("%.2e", worst_direct) + ")"};
}

Outcome engine_oracle() {
  tensornet::TebdConfig cfg;
  cfg.dbeta = 1e-3;
  cfg.chi_max = 128;
  double worst = 0.0;
  for (int n : {8, 10}) {
    for (double alpha : {0.5, 1.5, 3.0}) {
      const LrTfiChain chain = LrTfiChain::make(n, alpha, 1.0, 0.25);
      const CMatrix H = dense_lr_tfi(n, alpha, 1.0, 0.25);
      const Region mid = ex::middle_pair(n);
      const PlacedObservable zz = pauli_string(mid, "zz");
      tensornet::Mpo mpo = tensornet::Mpo::identity(n);
      for (double beta : {0.25, 1.0}) {
        tensornet::evolve(mpo, chain, beta, cfg);
        const double diff = std::abs(tensornet::mpo_expectation(mpo, zz) - zz_mean(H, n, mid.front(), mid.back(), beta));
        std::printf("  engine N=%d alpha=%g beta=%g |diff|=%.3e\n", n, alpha, beta, diff);
        worst = std::max(worst, diff);
      }
    }
  }
  return {worst < 1e-3, "max |tensornet - exact| " + fmt("%.3e", worst)};
}

ex::SweepSpec sweep(ex::Kind kind, double alpha, double dbeta, int chi) {
  ex::SweepSpec s;
  s.kind = kind;
  s.alphas = {alpha};
  s.betas = {1.0};
  s.tebd.dbeta = dbeta;
  s.tebd.chi_max = chi;
  s.workers = 1;
  return s;
}

Outcome epsilon_linearity() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.5, 3.0}) {
    ex::SweepSpec s = sweep(ex::Kind::stability, alpha, 0.05, 128);
    s.engine = ex::Engine::tensornet;
    s.sizes = {16};
    s.epsilons = {0.01, 0.02, 0.05, 0.1, 0.2};
    const auto res = ex::stability_sweep(s);
    const ex::FitResult fit = res.epsilon_fits.begin()->second;
    ok = ok && fit.r >= 0.999;
    detail += "alpha=" + fmt("%g", alpha) + " r=" + fmt("%.5f", fit.r) + "; ";
    for (const auto& row : res.table.rows)
      std::printf("  eps alpha=%g eps=%g abs_diff=%.6e\n", alpha, row[res.table.column_index("epsilon")],
                  row[res.table.column_index("abs_diff")]);
  }
  return {ok, detail};
}

Outcome size_stabilization() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.5, 3.0}) {
    ex::SweepSpec s = sweep(ex::Kind::stability, alpha, 0.05, 64);
    s.sizes = {8, 10, 12, 14, 16, 18, 20, 22, 24};
    s.epsilons = {0.1};
    s.auto_exact_max = 10;
    const auto res = ex::stability_sweep(s);
    std::vector<double> tail;
    for (const auto& row : res.table.rows) {
      const double n = row[res.table.column_index("N")];
      const double v = row[res.table.column_index("abs_diff")];
      std::printf("  size alpha=%g N=%g abs_diff=%.6e\n", alpha, n, v);
      if (n > 12) tail.push_back(v);
    }
    const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
    double mean = 0.0;
    for (double v : tail) mean += v / tail.size();
    const double spread = (*hi - *lo) / mean;
    ok = ok && std::isfinite(spread) && spread <= 0.35;
    detail += "alpha=" + fmt("%g", alpha) + " spread=" + fmt("%.3f", spread) + "; ";
  }
  return {ok, detail};
}

Outcome decay_slopes() {
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.5, 3.0}) {
    ex::SweepSpec s = sweep(ex::Kind::decay, alpha, 0.05, 128);
    s.engine = ex::Engine::tensornet;
    s.sizes = {32};
    const auto res = ex::decay_profile(s);
    const ex::FitResult fit = res.fits.begin()->second;
    for (const auto& row : res.table.rows)
      std::printf("  decay alpha=%g d=%g cov=%.6e\n", alpha, row[res.table.column_index("d")],
                  row[res.table.column_index("cov")]);
    bool pass = std::abs(fit.r) >= 0.9;
    if (alpha == 3.0) pass = pass && fit.slope <= -2.4;
    if (alpha == 1.5) pass = pass && fit.slope >= -2.0 && fit.slope <= -1.1;
    ok = ok && pass;
    detail += "alpha=" + fmt("%g", alpha) + " slope=" + fmt("%.3f", fit.slope) + " r=" + fmt("%.3f", fit.r) + "; ";
  }
  return {ok, detail};
}

Outcome bound_domination() {
  const verify::SuiteReport lib = verify::bounds_domination(50, 20240613);
  int failures = lib.failed();
  // Own quadrature of the I2 integral and brute-force convolution and surface counts.
  Rng rng(20240614);
  boost::math::quadrature::exp_sinh<double> es;
  for (int i = 0; i < 50; ++i) {
    const double beta = std::uniform_real_distribution<double>(0.1, 5.0)(rng);
    const double b = std::uniform_real_distribution<double>(0.01, 5.0)(rng);
    const double mu = 2.0 * kPi / beta;
    const double own = es.integrate([&](double x) { return 1.0 / std::expm1(mu * (x + b)); });
    failures += own > bounds::integral_I2(beta, b) * (1.0 + 1e-10);
  }
  auto check_lattice = [&](int dim, int extent, double alpha) {
    const Lattice lat(std::vector<int>(dim, extent));
    const int n = lat.size();
    auto dist = [&](int a, int b) {
      int d = 0;
      for (int ax = 0, sa = a, sb = b; ax < dim; ++ax, sa /= extent, sb /= extent) d += std::abs(sa % extent - sb % extent);
      return d;
    };
    std::vector<double> w(n * n);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) w[a * n + b] = std::pow(1.0 + dist(a, b), -alpha);
    double row = 0.0;
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int b = 0; b < n; ++b) s += w[a * n + b];
      row = std::max(row, s);
    }
    const double u = std::pow(2.0, alpha) * row;
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < n; ++k) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) lhs += w[i * n + j] * w[j * n + k];
        failures += lhs > u * w[i * n + k] * (1.0 + 1e-12);
      }
    }
  };
  for (double alpha : {1.5, 2.0, 3.0})
    for (int extent = 2; extent <= 30; ++extent) check_lattice(1, extent, alpha);
  for (double alpha : {2.5, 3.0, 4.0})
    for (int extent = 2; extent <= 10; ++extent) check_lattice(2, extent, alpha);
  for (int dim = 1; dim <= 3; ++dim) {
    for (int ell = 1; ell <= 6; ++ell) {
      // Points of Z^D at l1 distance ell from the origin.
      long count = 0;
      std::vector<int> x(dim, -ell);
      while (true) {
        int l1 = 0;
        for (int c : x) l1 += std::abs(c);
        count += l1 == ell;
        int ax = 0;
        while (ax < dim && x[ax] == ell) x[ax++] = -ell;
        if (ax == dim) break;
        ++x[ax];
      }
      const SurfaceBound sb = surface_bound(dim, ell);
      failures += count > sb.binomial || count > sb.power;
    }
  }
  return {failures == 0, std::to_string(lib.passed()) + " library checks passed, " + std::to_string(failures) +
                             " failures including own oracles"};
}

Outcome lr_envelope() {
  ex::SweepSpec s;
  s.kind = ex::Kind::lrb_fit;
  s.engine = ex::Engine::exact;
  s.alphas = {3.0};
  s.sizes = {8};
  s.workers = 1;
  const auto res = ex::lrb_fit(s);
  // Recompute one commutator norm from the own dense builder.
  const auto& t = res.table;
  const std::vector<double>& row = t.rows.back();
  const int d = static_cast<int>(row[t.column_index("d")]);
  const double time = row[t.column_index("t")];
  const Eig e = eig(dense_lr_tfi(8, 3.0, 1.0, 0.25));
  const CMatrix u = e.u * (cplx(0, 1) * time * e.e.array()).exp().matrix().asDiagonal() * e.u.adjoint();
  const CMatrix za = u * z_site(s.lrb_site, 8) * u.adjoint();
  const CMatrix zb = z_site(s.lrb_site + d, 8);
  const double own = opnorm(za * zb - zb * za);
  const double gap = std::abs(own - row[t.column_index("measured")]);
  return {res.variation < 10.0 && gap < 1e-8,
          "kappa variation " + fmt("%.3f", res.variation) + ", commutator oracle gap " + fmt("%.1e", gap)};
}

Outcome locind_trend() {
  bool ok = true;
  std::string detail;
  for (double alpha : {1.5, 3.0}) {
    ex::SweepSpec s = sweep(ex::Kind::locind, alpha, 0.1, 256);
    s.engine = ex::Engine::tensornet;
    s.sizes = {24};
    const auto res = ex::locind_profile(s);
    std::vector<double> ds, vs;
    for (const auto& row : res.table.rows) {
      const double size = row[res.table.column_index("region_size")];
      const double v = row[res.table.column_index("abs_diff")];
      std::printf("  locind alpha=%g d=%g abs_diff=%.6e\n", alpha, row[res.table.column_index("d")], v);
      if (size < 24) {
        ds.push_back(row[res.table.column_index("d")]);
        vs.push_back(v);
      }
    }
    const double worst = ex::worst_increase(ds, vs, 2.0);
    ok = ok && worst <= 0.10;
    detail += "alpha=" + fmt("%g", alpha) + " worst increase " + fmt("%.3f", worst) + "; ";
  }
  return {ok, detail};
}

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {"identity-suite", 120, identity_suite},        {"duhamel-oracle", 300, duhamel_oracle},
      {"engine-oracle", 900, engine_oracle},          {"epsilon-linearity", 1200, epsilon_linearity},
      {"size-stabilization", 1800, size_stabilization}, {"decay-slopes", 2700, decay_slopes},
      {"bound-domination", 300, bound_domination},    {"lr-envelope", 600, lr_envelope},
      {"locind-trend", 1200, locind_trend}};
  std::set<std::string> only(argv + 1, argv + argc);
  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.name)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s %s: %s [%.1fs of %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs, c.budget_s,
                in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
