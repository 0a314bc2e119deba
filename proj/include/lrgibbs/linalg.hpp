#pragma once

#include <complex>

#include <Eigen/Dense>

namespace lrgibbs {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

namespace linalg {

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns are eigenvectors
};

struct SymmetricEigen {
  RVector values;
  RMatrix vectors;
};

struct Svd {
  RMatrix u;
  RVector s;  // descending
  RMatrix vt;
};

// LAPACK-backed (zheevd / dsyevd / dgesdd) dense factorizations.
HermitianEigen eigh(const CMatrix& m);
SymmetricEigen eigh(const RMatrix& m);
Svd svd(const RMatrix& m);

double hermiticity_defect(const CMatrix& m);
bool is_real(const CMatrix& m);

/// Spectral norm; Hermitian input uses the eigenvalues directly, otherwise
/// sqrt(lambda_max(X^dagger X)).
double operator_norm(const CMatrix& m);

CMatrix kron(const CMatrix& a, const CMatrix& b);

const CMatrix& pauli_x();
const CMatrix& pauli_y();
const CMatrix& pauli_z();
const CMatrix& identity2();

}  // namespace linalg
}  // namespace lrgibbs
