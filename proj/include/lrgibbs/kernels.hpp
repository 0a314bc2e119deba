#pragma once

#include <span>
#include <vector>

#include "lrgibbs/lattice.hpp"
#include "lrgibbs/linalg.hpp"

// Hot loops of the dense engine. Every kernel has a serial reference in
// `serial` and an OpenMP version in `omp` with identical semantics; tests
// compare the two and the bench target times them.
namespace lrgibbs::kernels {

/// A k-qubit operator acting on bit positions `qubits` of an n-qubit register.
/// Qubit q is bit (n - 1 - q) of the basis index (big-endian), and qubits[0]
/// is the most significant bit of the local operator index.
struct LocalAction {
  const CMatrix* matrix;
  std::vector<int> qubits;
};

namespace serial {

/// Dense 2^n x 2^n embedding of a local operator.
CMatrix embed(const CMatrix& local, std::span<const int> qubits, int n);

/// out = (op (x) I) * in, column by column.
void apply_local(const LocalAction& op, int n, const CMatrix& in, CMatrix& out);

/// Dense sum of local terms.
CMatrix assemble(std::span<const LocalAction> terms, int n);

/// tr[rho (op (x) I)] without forming the extended operator.
cplx trace_product(const CMatrix& rho, const LocalAction& op, int n);

/// out_kl = v_kl * F(lambda_k - lambda_l) where F(w) = origin + sum_m w_m cos(w t_m).
void spectral_filter(const CMatrix& v, const RVector& lambda, std::span<const double> t,
                     std::span<const double> w, double origin, CMatrix& out);

/// max over j' of sum_j (1 + d(j, j'))^(-alpha).
double max_power_sum(const Lattice& lat, double alpha);

/// sum_j (1 + d_ij)^(-alpha) (1 + d_jk)^(-alpha).
double convolution_sum(const Lattice& lat, double alpha, Site i, Site k);

}  // namespace serial

namespace omp {

CMatrix embed(const CMatrix& local, std::span<const int> qubits, int n);
void apply_local(const LocalAction& op, int n, const CMatrix& in, CMatrix& out);
CMatrix assemble(std::span<const LocalAction> terms, int n);
cplx trace_product(const CMatrix& rho, const LocalAction& op, int n);
void spectral_filter(const CMatrix& v, const RVector& lambda, std::span<const double> t,
                     std::span<const double> w, double origin, CMatrix& out);
double max_power_sum(const Lattice& lat, double alpha);
double convolution_sum(const Lattice& lat, double alpha, Site i, Site k);

}  // namespace omp

int max_threads();

}  // namespace lrgibbs::kernels
