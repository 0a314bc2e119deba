#pragma once

#include <memory>

#include "lrgibbs/linalg.hpp"
#include "lrgibbs/model.hpp"
#include "lrgibbs/quadrature.hpp"

namespace lrgibbs::exact {

struct Options {
  int max_sites = 14;  // dense capacity: 2^max_sites
  bool parallel = true;
};

/// Eigendecomposition of a dense Hamiltonian, shared by every Gibbs state,
/// Heisenberg evolution and filter built from it.
struct Spectrum {
  int sites = 0;
  RVector values;   // ascending
  CMatrix vectors;  // unitary, columns are eigenvectors
  double norm = 0.0;
};

using SpectrumPtr = std::shared_ptr<const Spectrum>;

/// Dense matrix of H on all lattice sites (big-endian, site 0 most significant).
CMatrix dense(const Hamiltonian& h, const Options& opt = {});
/// Identity-extends an operator to the full register of `sites` qubits.
CMatrix dense(const PlacedOperator& op, int sites, const Options& opt = {});

SpectrumPtr diagonalize(const Hamiltonian& h, const Options& opt = {});
SpectrumPtr diagonalize(const CMatrix& h, const Options& opt = {});

struct SpectralGibbs {
  SpectrumPtr spectrum;
  double beta = 0.0;
  double log_partition = 0.0;
  RVector weights;  // Boltzmann weights, sum to 1
  RVector log_weights;

  int sites() const { return spectrum->sites; }
  CMatrix density_matrix() const;
  /// rho^tau in the computational basis.
  CMatrix power(double tau) const;
};

SpectralGibbs gibbs(SpectrumPtr spectrum, double beta);
SpectralGibbs gibbs(const Hamiltonian& h, double beta, const Options& opt = {});

/// Full expectation with the imaginary residue kept for diagnostics.
cplx expectation_complex(const SpectralGibbs& rho, const PlacedObservable& o, const Options& opt = {});
/// tr[rho O]; throws AccuracyError if the imaginary residue exceeds 1e-10.
double expectation(const SpectralGibbs& rho, const PlacedObservable& o, const Options& opt = {});
double expectation(const SpectralGibbs& rho, const CMatrix& full_operator);

double covariance(const SpectralGibbs& rho, const PlacedObservable& a, const PlacedObservable& b,
                  const Options& opt = {});

/// Tr(rho^tau A rho^{1-tau} B) - Tr(rho A) Tr(rho B) for full-register operators.
double generalized_covariance(const SpectralGibbs& rho, double tau, const CMatrix& a, const CMatrix& b);
double generalized_covariance(const SpectralGibbs& rho, double tau, const PlacedObservable& a,
                              const PlacedObservable& b, const Options& opt = {});

/// O(t) = e^{itH} O e^{-itH} on the full register.
CMatrix heisenberg(const Spectrum& spec, const CMatrix& o, double t);
CMatrix heisenberg(const Hamiltonian& h, const PlacedObservable& o, double t, const Options& opt = {});

double commutator_norm(const Spectrum& spec, const CMatrix& a, const CMatrix& b, double t);
double commutator_norm(const Hamiltonian& h, const PlacedObservable& a, const PlacedObservable& b, double t,
                       const Options& opt = {});

/// Phi(V) = integral of f_beta(t) e^{-itH} V e^{itH} dt, evaluated in the
/// eigenbasis of H with the filter rule from `spec`.
CMatrix belief_propagation(const Spectrum& h, const CMatrix& v, double beta, const quad::QuadratureSpec& spec = {},
                           const Options& opt = {});
CMatrix belief_propagation(const CMatrix& h, const CMatrix& v, double beta, const quad::QuadratureSpec& spec = {},
                           const Options& opt = {});

/// Relative residual of d/ds e^{-beta H(s)} = -(beta/2){e^{-beta H(s)}, Phi(V)}
/// with H(s) = H + sV, the derivative taken by central differences.
double exponential_derivative_check(const CMatrix& h, const CMatrix& v, double beta, double s, double ds = 1e-4,
                                    const quad::QuadratureSpec& spec = {}, const Options& opt = {});

struct DuhamelGrid {
  int n_s = 24;
  int n_tau = 24;
  int max_nodes = 192;     // doubling stops here
  double tolerance = 1e-9; // agreement between successive grids
};

struct DuhamelResult {
  double value = 0.0;   // |beta * double integral|
  double signed_integral = 0.0;  // beta * double integral = <O>_H - <O>_{H+V}
  int n_s = 0;
  int n_tau = 0;
};

DuhamelResult duhamel_difference(const CMatrix& h, const CMatrix& v, const CMatrix& o, double beta,
                                 const DuhamelGrid& grid = {}, const Options& opt = {});
DuhamelResult duhamel_difference(const Hamiltonian& h, const Hamiltonian& v, const PlacedObservable& o, double beta,
                                 const DuhamelGrid& grid = {}, const Options& opt = {});

/// |tr[O rho(H)] - tr[O rho(H + V)]|.
double lppl_difference(const CMatrix& h, const CMatrix& v, const CMatrix& o, double beta, const Options& opt = {});
double lppl_difference(const Hamiltonian& h, const Hamiltonian& v, const PlacedObservable& o, double beta,
                       const Options& opt = {});

/// Number of qubits of a 2^n square matrix; throws otherwise.
int register_size(const CMatrix& m);

}  // namespace lrgibbs::exact
