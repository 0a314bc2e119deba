#include "lrgibbs/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <lapacke.h>

#include "lrgibbs/errors.hpp"

namespace lrgibbs::linalg {

HermitianEigen eigh(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("eigh: matrix not square");
  HermitianEigen out;
  const lapack_int n = static_cast<lapack_int>(m.rows());
  out.vectors = m;
  out.values.resize(n);
  if (n == 0) return out;
  auto* a = reinterpret_cast<lapack_complex_double*>(out.vectors.data());
  lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'U', n, a, n, out.values.data());
  if (info != 0) throw AccuracyError("zheevd failed with info " + std::to_string(info));
  return out;
}

SymmetricEigen eigh(const RMatrix& m) {
  if (m.rows() != m.cols()) throw DomainError("eigh: matrix not square");
  SymmetricEigen out;
  const lapack_int n = static_cast<lapack_int>(m.rows());
  out.vectors = m;
  out.values.resize(n);
  if (n == 0) return out;
  lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'U', n, out.vectors.data(), n, out.values.data());
  if (info != 0) throw AccuracyError("dsyevd failed with info " + std::to_string(info));
  return out;
}

Svd svd(const RMatrix& m) {
  const lapack_int rows = static_cast<lapack_int>(m.rows());
  const lapack_int cols = static_cast<lapack_int>(m.cols());
  const lapack_int k = std::min(rows, cols);
  Svd out;
  out.u.resize(rows, k);
  out.s.resize(k);
  out.vt.resize(k, cols);
  if (k == 0) return out;
  RMatrix work = m;
  lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, work.data(), rows, out.s.data(),
                                   out.u.data(), rows, out.vt.data(), k);
  if (info != 0) {
    // dgesdd occasionally fails to converge on badly scaled input; dgesvd is slower but robust.
    work = m;
    RVector superb(k);
    info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, work.data(), rows, out.s.data(),
                          out.u.data(), rows, out.vt.data(), k, superb.data());
    if (info != 0) throw AccuracyError("SVD failed with info " + std::to_string(info));
  }
  return out;
}

double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  if (m.size() == 0) return 0.0;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_real(const CMatrix& m) { return m.size() == 0 || m.imag().cwiseAbs().maxCoeff() == 0.0; }

double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  const double scale = m.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (m.rows() == m.cols() && hermiticity_defect(m) <= 1e-14 * scale) {
    const CMatrix herm = 0.5 * (m + m.adjoint());
    RVector ev = eigh(herm).values;
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  const CMatrix gram = m.adjoint() * m;
  RVector ev = eigh(gram).values;
  return std::sqrt(std::max(0.0, ev(ev.size() - 1)));
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

const CMatrix& pauli_x() {
  static const CMatrix m = (CMatrix(2, 2) << 0, 1, 1, 0).finished();
  return m;
}

const CMatrix& pauli_y() {
  static const CMatrix m = (CMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
  return m;
}

const CMatrix& pauli_z() {
  static const CMatrix m = (CMatrix(2, 2) << 1, 0, 0, -1).finished();
  return m;
}

const CMatrix& identity2() {
  static const CMatrix m = CMatrix::Identity(2, 2);
  return m;
}

}  // namespace lrgibbs::linalg
