#include "lrgibbs/exact.hpp"

#include <cmath>
#include <string>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/kernels.hpp"

namespace lrgibbs::exact {

namespace {

void check_capacity(int sites, const Options& opt) {
  if (sites > opt.max_sites) {
    throw CapacityError("dense engine limited to " + std::to_string(opt.max_sites) + " sites, got " +
                        std::to_string(sites));
  }
}

kernels::LocalAction action(const PlacedOperator& op) {
  return {&op.matrix, std::vector<int>(op.support.begin(), op.support.end())};
}

// Logarithms of the normalized Boltzmann weights, stable for large beta * spread.
RVector log_weights(const RVector& lambda, double beta, double* log_partition) {
  RVector lw(lambda.size());
  const double shift = lambda.size() ? lambda(0) : 0.0;
  double sum = 0.0;
  for (Eigen::Index k = 0; k < lambda.size(); ++k) {
    lw(k) = -beta * (lambda(k) - shift);
    sum += std::exp(lw(k));
  }
  const double log_sum = std::log(sum);
  lw.array() -= log_sum;
  if (log_partition) *log_partition = -beta * shift + log_sum;
  return lw;
}

CMatrix to_eigenbasis(const Spectrum& s, const CMatrix& o) { return s.vectors.adjoint() * o * s.vectors; }
CMatrix from_eigenbasis(const Spectrum& s, const CMatrix& o) { return s.vectors * o * s.vectors.adjoint(); }

CMatrix exp_minus(const Spectrum& s, double beta) {
  const RVector f = (-beta * s.values.array()).exp().matrix();
  return s.vectors * f.asDiagonal() * s.vectors.adjoint();
}

}  // namespace

int register_size(const CMatrix& m) {
  if (m.rows() != m.cols() || m.rows() < 1) throw DomainError("expected a square matrix");
  int n = 0;
  while ((Eigen::Index{1} << n) < m.rows()) ++n;
  if ((Eigen::Index{1} << n) != m.rows()) throw DomainError("matrix dimension is not a power of two");
  return n;
}

CMatrix dense(const Hamiltonian& h, const Options& opt) {
  const int n = h.sites();
  check_capacity(n, opt);
  std::vector<kernels::LocalAction> acts;
  acts.reserve(h.terms().size());
  for (const auto& t : h.terms()) acts.push_back(action(t));
  return opt.parallel ? kernels::omp::assemble(acts, n) : kernels::serial::assemble(acts, n);
}

CMatrix dense(const PlacedOperator& op, int sites, const Options& opt) {
  check_capacity(sites, opt);
  const auto act = action(op);
  return opt.parallel ? kernels::omp::embed(op.matrix, act.qubits, sites)
                      : kernels::serial::embed(op.matrix, act.qubits, sites);
}

SpectrumPtr diagonalize(const CMatrix& h, const Options& opt) {
  const int n = register_size(h);
  check_capacity(n, opt);
  auto out = std::make_shared<Spectrum>();
  out->sites = n;
  if (linalg::is_real(h)) {
    const RMatrix re = 0.5 * (h.real() + h.real().transpose());
    auto eig = linalg::eigh(re);
    out->values = std::move(eig.values);
    out->vectors = eig.vectors.cast<cplx>();
  } else {
    auto eig = linalg::eigh(CMatrix(0.5 * (h + h.adjoint())));
    out->values = std::move(eig.values);
    out->vectors = std::move(eig.vectors);
  }
  out->norm = out->values.size() ? std::max(std::abs(out->values(0)), std::abs(out->values(out->values.size() - 1)))
                                 : 0.0;
  return out;
}

SpectrumPtr diagonalize(const Hamiltonian& h, const Options& opt) { return diagonalize(dense(h, opt), opt); }

SpectralGibbs gibbs(SpectrumPtr spectrum, double beta) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  SpectralGibbs g;
  g.beta = beta;
  g.log_weights = log_weights(spectrum->values, beta, &g.log_partition);
  g.weights = g.log_weights.array().exp().matrix();
  g.spectrum = std::move(spectrum);
  return g;
}

SpectralGibbs gibbs(const Hamiltonian& h, double beta, const Options& opt) {
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  return gibbs(diagonalize(h, opt), beta);
}

CMatrix SpectralGibbs::density_matrix() const {
  return spectrum->vectors * weights.cast<cplx>().asDiagonal() * spectrum->vectors.adjoint();
}

CMatrix SpectralGibbs::power(double tau) const {
  const RVector p = (tau * log_weights.array()).exp().matrix();
  return spectrum->vectors * p.cast<cplx>().asDiagonal() * spectrum->vectors.adjoint();
}

cplx expectation_complex(const SpectralGibbs& rho, const PlacedObservable& o, const Options& opt) {
  const int n = rho.sites();
  if (!o.support.empty() && o.support.back() >= n) throw DomainError("observable outside the register");
  // Sum over eigenvectors: tr[rho O] = sum_k w_k <k|O|k>.
  const CMatrix& u = rho.spectrum->vectors;
  CMatrix ou;
  const auto act = action(o);
  if (opt.parallel) kernels::omp::apply_local(act, n, u, ou);
  else kernels::serial::apply_local(act, n, u, ou);
  cplx sum = 0.0;
  for (Eigen::Index k = 0; k < u.cols(); ++k) sum += rho.weights(k) * u.col(k).dot(ou.col(k));
  return sum;
}

double expectation(const SpectralGibbs& rho, const PlacedObservable& o, const Options& opt) {
  const cplx v = expectation_complex(rho, o, opt);
  if (std::abs(v.imag()) > 1e-10 * std::max(1.0, o.norm())) {
    throw AccuracyError("expectation has imaginary residue " + std::to_string(v.imag()));
  }
  return v.real();
}

double expectation(const SpectralGibbs& rho, const CMatrix& full_operator) {
  const CMatrix& u = rho.spectrum->vectors;
  const CMatrix ou = full_operator * u;
  cplx sum = 0.0;
  for (Eigen::Index k = 0; k < u.cols(); ++k) sum += rho.weights(k) * u.col(k).dot(ou.col(k));
  return sum.real();
}

double covariance(const SpectralGibbs& rho, const PlacedObservable& a, const PlacedObservable& b,
                  const Options& opt) {
  const PlacedOperator ab = product(a, b);
  return (expectation_complex(rho, ab, opt) - expectation_complex(rho, a, opt) * expectation_complex(rho, b, opt))
      .real();
}

double generalized_covariance(const SpectralGibbs& rho, double tau, const CMatrix& a, const CMatrix& b) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
  const Spectrum& s = *rho.spectrum;
  const CMatrix ae = to_eigenbasis(s, a);
  const CMatrix be = to_eigenbasis(s, b);
  const RVector& lw = rho.log_weights;
  cplx sum = 0.0;
  for (Eigen::Index l = 0; l < ae.cols(); ++l) {
    for (Eigen::Index k = 0; k < ae.rows(); ++k) {
      sum += std::exp(tau * lw(k) + (1.0 - tau) * lw(l)) * ae(k, l) * be(l, k);
    }
  }
  cplx mean_a = 0.0;
  cplx mean_b = 0.0;
  for (Eigen::Index k = 0; k < ae.rows(); ++k) {
    mean_a += rho.weights(k) * ae(k, k);
    mean_b += rho.weights(k) * be(k, k);
  }
  // The imaginary part is odd under tau -> 1 - tau and drops out of every tau integral.
  return (sum - mean_a * mean_b).real();
}

double generalized_covariance(const SpectralGibbs& rho, double tau, const PlacedObservable& a,
                              const PlacedObservable& b, const Options& opt) {
  return generalized_covariance(rho, tau, dense(a, rho.sites(), opt), dense(b, rho.sites(), opt));
}

CMatrix heisenberg(const Spectrum& spec, const CMatrix& o, double t) {
  CMatrix oe = to_eigenbasis(spec, o);
  for (Eigen::Index l = 0; l < oe.cols(); ++l) {
    for (Eigen::Index k = 0; k < oe.rows(); ++k) {
      oe(k, l) *= std::polar(1.0, (spec.values(k) - spec.values(l)) * t);
    }
  }
  return from_eigenbasis(spec, oe);
}

CMatrix heisenberg(const Hamiltonian& h, const PlacedObservable& o, double t, const Options& opt) {
  const auto spec = diagonalize(h, opt);
  return heisenberg(*spec, dense(o, h.sites(), opt), t);
}

double commutator_norm(const Spectrum& spec, const CMatrix& a, const CMatrix& b, double t) {
  const CMatrix at = heisenberg(spec, a, t);
  // i[A(t), B] is Hermitian, so its norm comes from a Hermitian eigensolve.
  const CMatrix c = cplx(0.0, 1.0) * (at * b - b * at);
  return linalg::operator_norm(0.5 * (c + c.adjoint()));
}

double commutator_norm(const Hamiltonian& h, const PlacedObservable& a, const PlacedObservable& b, double t,
                       const Options& opt) {
  const auto spec = diagonalize(h, opt);
  return commutator_norm(*spec, dense(a, h.sites(), opt), dense(b, h.sites(), opt), t);
}

CMatrix belief_propagation(const Spectrum& h, const CMatrix& v, double beta, const quad::QuadratureSpec& spec,
                           const Options& opt) {
  if (v.rows() != h.vectors.rows() || v.cols() != h.vectors.cols()) throw DomainError("V dimension mismatch");
  if (linalg::hermiticity_defect(v) >= 1e-12 * std::max(1.0, v.cwiseAbs().maxCoeff())) {
    throw DomainError("belief propagation needs a Hermitian V");
  }
  const quad::FilterRule rule = quad::filter_rule(beta, spec);
  const CMatrix ve = to_eigenbasis(h, v);
  CMatrix filtered;
  if (opt.parallel) {
    kernels::omp::spectral_filter(ve, h.values, rule.nodes, rule.weights, rule.origin, filtered);
  } else {
    kernels::serial::spectral_filter(ve, h.values, rule.nodes, rule.weights, rule.origin, filtered);
  }
  CMatrix out = from_eigenbasis(h, filtered);
  return 0.5 * (out + out.adjoint());
}

CMatrix belief_propagation(const CMatrix& h, const CMatrix& v, double beta, const quad::QuadratureSpec& spec,
                           const Options& opt) {
  return belief_propagation(*diagonalize(h, opt), v, beta, spec, opt);
}

double exponential_derivative_check(const CMatrix& h, const CMatrix& v, double beta, double s, double ds,
                                    const quad::QuadratureSpec& spec, const Options& opt) {
  if (!(ds > 0)) throw DomainError("ds must be positive");
  const auto at = [&](double x) { return diagonalize(CMatrix(h + x * v), opt); };
  const auto center = at(s);
  const CMatrix lhs = (exp_minus(*at(s + ds), beta) - exp_minus(*at(s - ds), beta)) / (2.0 * ds);
  const CMatrix e = exp_minus(*center, beta);
  const CMatrix phi = belief_propagation(*center, v, beta, spec, opt);
  const CMatrix rhs = -0.5 * beta * (e * phi + phi * e);
  const double scale = linalg::operator_norm(rhs);
  const CMatrix diff = lhs - rhs;
  const double err = linalg::operator_norm(0.5 * (diff + diff.adjoint()));
  return scale > 0.0 ? err / scale : err;
}

namespace {

double duhamel_once(const CMatrix& h, const CMatrix& v, const CMatrix& o, double beta, int n_s, int n_tau,
                    const Options& opt) {
  const quad::Rule s_rule = quad::gauss_legendre(n_s, 0.0, 1.0);
  const quad::Rule tau_rule = quad::gauss_legendre(n_tau, 0.0, 1.0);
  double total = 0.0;
  for (int i = 0; i < n_s; ++i) {
    const auto spec = diagonalize(CMatrix(h + s_rule.nodes[i] * v), opt);
    const RVector lw = log_weights(spec->values, beta, nullptr);
    const CMatrix oe = to_eigenbasis(*spec, o);
    const CMatrix ve = to_eigenbasis(*spec, v);
    // m_kl = O_kl V_lk; Cov^tau = sum_kl w_k^tau w_l^(1-tau) m_kl - <O><V>.
    const CMatrix m = oe.cwiseProduct(ve.transpose());
    double mean_o = 0.0;
    double mean_v = 0.0;
    for (Eigen::Index k = 0; k < lw.size(); ++k) {
      mean_o += std::exp(lw(k)) * oe(k, k).real();
      mean_v += std::exp(lw(k)) * ve(k, k).real();
    }
    double inner = 0.0;
    for (int j = 0; j < n_tau; ++j) {
      const double tau = tau_rule.nodes[j];
      double cov = 0.0;
      for (Eigen::Index l = 0; l < m.cols(); ++l) {
        for (Eigen::Index k = 0; k < m.rows(); ++k) {
          cov += std::exp(tau * lw(k) + (1.0 - tau) * lw(l)) * m(k, l).real();
        }
      }
      inner += tau_rule.weights[j] * (cov - mean_o * mean_v);
    }
    total += s_rule.weights[i] * inner;
  }
  return beta * total;
}

}  // namespace

DuhamelResult duhamel_difference(const CMatrix& h, const CMatrix& v, const CMatrix& o, double beta,
                                 const DuhamelGrid& grid, const Options& opt) {
  if (grid.n_s < 8 || grid.n_tau < 8) throw DomainError("Duhamel grid needs at least 8 nodes per axis");
  if (!(beta >= 0)) throw DomainError("beta must be nonnegative");
  const int n = register_size(h);
  if (register_size(v) != n || register_size(o) != n) throw DomainError("operator dimensions differ");
  check_capacity(n, opt);
  int ns = grid.n_s;
  int nt = grid.n_tau;
  double coarse = duhamel_once(h, v, o, beta, ns, nt, opt);
  while (true) {
    if (2 * ns > grid.max_nodes || 2 * nt > grid.max_nodes) {
      throw AccuracyError("Duhamel quadrature did not converge");
    }
    ns *= 2;
    nt *= 2;
    const double fine = duhamel_once(h, v, o, beta, ns, nt, opt);
    if (std::abs(fine - coarse) <= grid.tolerance * std::max(1.0, std::abs(fine))) {
      return {std::abs(fine), fine, ns, nt};
    }
    coarse = fine;
  }
}

DuhamelResult duhamel_difference(const Hamiltonian& h, const Hamiltonian& v, const PlacedObservable& o, double beta,
                                 const DuhamelGrid& grid, const Options& opt) {
  return duhamel_difference(dense(h, opt), dense(v, opt), dense(o, h.sites(), opt), beta, grid, opt);
}

double lppl_difference(const CMatrix& h, const CMatrix& v, const CMatrix& o, double beta, const Options& opt) {
  const auto base = gibbs(diagonalize(h, opt), beta);
  const auto pert = gibbs(diagonalize(CMatrix(h + v), opt), beta);
  return std::abs(expectation(base, o) - expectation(pert, o));
}

double lppl_difference(const Hamiltonian& h, const Hamiltonian& v, const PlacedObservable& o, double beta,
                       const Options& opt) {
  return lppl_difference(dense(h, opt), dense(v, opt), dense(o, h.sites(), opt), beta, opt);
}

}  // namespace lrgibbs::exact
