#include "lrgibbs/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "lrgibbs/errors.hpp"

namespace lrgibbs::kernels {

namespace {

// Index tables for a local action: base offsets of the untouched bits and the
// scattered pattern of each local basis state.
struct Scatter {
  std::vector<Eigen::Index> local;  // 2^k offsets, one per local basis state
  std::vector<int> free_bits;       // bit positions not acted on, ascending
  Eigen::Index rest = 1;            // 2^(n-k)
};

Scatter make_scatter(std::span<const int> qubits, int n) {
  const int k = static_cast<int>(qubits.size());
  if (k > n) throw DomainError("local operator larger than register");
  Scatter s;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int q : qubits) {
    if (q < 0 || q >= n || used[q]) throw DomainError("invalid qubit list");
    used[q] = true;
  }
  s.local.assign(std::size_t{1} << k, 0);
  for (std::size_t a = 0; a < s.local.size(); ++a) {
    Eigen::Index off = 0;
    for (int m = 0; m < k; ++m) {
      if ((a >> (k - 1 - m)) & 1U) off |= Eigen::Index{1} << (n - 1 - qubits[m]);
    }
    s.local[a] = off;
  }
  for (int b = 0; b < n; ++b) {
    if (!used[n - 1 - b]) s.free_bits.push_back(b);
  }
  s.rest = Eigen::Index{1} << s.free_bits.size();
  return s;
}

inline Eigen::Index spread(const Scatter& s, Eigen::Index r) {
  Eigen::Index x = 0;
  for (std::size_t m = 0; m < s.free_bits.size(); ++m) {
    if ((r >> m) & 1) x |= Eigen::Index{1} << s.free_bits[m];
  }
  return x;
}

void check_dims(const CMatrix& local, std::span<const int> qubits) {
  const Eigen::Index dim = Eigen::Index{1} << qubits.size();
  if (local.rows() != dim || local.cols() != dim) throw DomainError("local operator dimension mismatch");
}

inline void apply_column(const CMatrix& m, const Scatter& s, const cplx* in, cplx* out) {
  const auto dim = static_cast<Eigen::Index>(s.local.size());
  cplx buf[64];
  for (Eigen::Index r = 0; r < s.rest; ++r) {
    const Eigen::Index base = spread(s, r);
    for (Eigen::Index b = 0; b < dim; ++b) buf[b] = in[base + s.local[b]];
    for (Eigen::Index a = 0; a < dim; ++a) {
      cplx acc = 0.0;
      for (Eigen::Index b = 0; b < dim; ++b) acc += m(a, b) * buf[b];
      out[base + s.local[a]] = acc;
    }
  }
}

inline double pair_weight(const Lattice& lat, double alpha, Site a, Site b) {
  return std::pow(1.0 + lat.distance(a, b), -alpha);
}

inline double filter_value(double omega, std::span<const double> t, std::span<const double> w, double origin) {
  double acc = origin;
  for (std::size_t m = 0; m < t.size(); ++m) acc += w[m] * std::cos(omega * t[m]);
  return acc;
}

}  // namespace

namespace serial {

CMatrix embed(const CMatrix& local, std::span<const int> qubits, int n) {
  check_dims(local, qubits);
  const Scatter s = make_scatter(qubits, n);
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(d, d);
  const auto dim = static_cast<Eigen::Index>(s.local.size());
  for (Eigen::Index r = 0; r < s.rest; ++r) {
    const Eigen::Index base = spread(s, r);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) out(base + s.local[a], base + s.local[b]) = local(a, b);
    }
  }
  return out;
}

void apply_local(const LocalAction& op, int n, const CMatrix& in, CMatrix& out) {
  check_dims(*op.matrix, op.qubits);
  if (op.qubits.size() > 6) throw UnsupportedError("apply_local supports at most 6 qubits");
  if (in.rows() != (Eigen::Index{1} << n)) throw DomainError("register dimension mismatch");
  const Scatter s = make_scatter(op.qubits, n);
  out.resize(in.rows(), in.cols());
  for (Eigen::Index c = 0; c < in.cols(); ++c) apply_column(*op.matrix, s, in.col(c).data(), out.col(c).data());
}

CMatrix assemble(std::span<const LocalAction> terms, int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& term : terms) {
    check_dims(*term.matrix, term.qubits);
    const Scatter s = make_scatter(term.qubits, n);
    const auto dim = static_cast<Eigen::Index>(s.local.size());
    for (Eigen::Index r = 0; r < s.rest; ++r) {
      const Eigen::Index base = spread(s, r);
      for (Eigen::Index b = 0; b < dim; ++b) {
        for (Eigen::Index a = 0; a < dim; ++a) out(base + s.local[a], base + s.local[b]) += (*term.matrix)(a, b);
      }
    }
  }
  return out;
}

cplx trace_product(const CMatrix& rho, const LocalAction& op, int n) {
  check_dims(*op.matrix, op.qubits);
  if (rho.rows() != (Eigen::Index{1} << n)) throw DomainError("register dimension mismatch");
  const Scatter s = make_scatter(op.qubits, n);
  const auto dim = static_cast<Eigen::Index>(s.local.size());
  cplx sum = 0.0;
  for (Eigen::Index r = 0; r < s.rest; ++r) {
    const Eigen::Index base = spread(s, r);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) sum += rho(base + s.local[a], base + s.local[b]) * (*op.matrix)(b, a);
    }
  }
  return sum;
}

void spectral_filter(const CMatrix& v, const RVector& lambda, std::span<const double> t,
                     std::span<const double> w, double origin, CMatrix& out) {
  out.resize(v.rows(), v.cols());
  for (Eigen::Index l = 0; l < v.cols(); ++l) {
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      out(k, l) = v(k, l) * filter_value(lambda(k) - lambda(l), t, w, origin);
    }
  }
}

double max_power_sum(const Lattice& lat, double alpha) {
  double best = 0.0;
  for (Site jp = 0; jp < lat.size(); ++jp) {
    double sum = 0.0;
    for (Site j = 0; j < lat.size(); ++j) sum += pair_weight(lat, alpha, j, jp);
    best = std::max(best, sum);
  }
  return best;
}

double convolution_sum(const Lattice& lat, double alpha, Site i, Site k) {
  double sum = 0.0;
  for (Site j = 0; j < lat.size(); ++j) sum += pair_weight(lat, alpha, i, j) * pair_weight(lat, alpha, j, k);
  return sum;
}

}  // namespace serial

namespace omp {

CMatrix embed(const CMatrix& local, std::span<const int> qubits, int n) {
  check_dims(local, qubits);
  const Scatter s = make_scatter(qubits, n);
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(d, d);
  const auto dim = static_cast<Eigen::Index>(s.local.size());
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < s.rest; ++r) {
    const Eigen::Index base = spread(s, r);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) out(base + s.local[a], base + s.local[b]) = local(a, b);
    }
  }
  return out;
}

void apply_local(const LocalAction& op, int n, const CMatrix& in, CMatrix& out) {
  check_dims(*op.matrix, op.qubits);
  if (op.qubits.size() > 6) throw UnsupportedError("apply_local supports at most 6 qubits");
  if (in.rows() != (Eigen::Index{1} << n)) throw DomainError("register dimension mismatch");
  const Scatter s = make_scatter(op.qubits, n);
  out.resize(in.rows(), in.cols());
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < in.cols(); ++c) apply_column(*op.matrix, s, in.col(c).data(), out.col(c).data());
}

CMatrix assemble(std::span<const LocalAction> terms, int n) {
  const Eigen::Index d = Eigen::Index{1} << n;
  CMatrix out = CMatrix::Zero(d, d);
  for (const auto& term : terms) {
    check_dims(*term.matrix, term.qubits);
    const Scatter s = make_scatter(term.qubits, n);
    const auto dim = static_cast<Eigen::Index>(s.local.size());
    // Distinct r touch disjoint index sets, so the updates never collide.
#pragma omp parallel for schedule(static)
    for (Eigen::Index r = 0; r < s.rest; ++r) {
      const Eigen::Index base = spread(s, r);
      for (Eigen::Index b = 0; b < dim; ++b) {
        for (Eigen::Index a = 0; a < dim; ++a) out(base + s.local[a], base + s.local[b]) += (*term.matrix)(a, b);
      }
    }
  }
  return out;
}

cplx trace_product(const CMatrix& rho, const LocalAction& op, int n) {
  check_dims(*op.matrix, op.qubits);
  if (rho.rows() != (Eigen::Index{1} << n)) throw DomainError("register dimension mismatch");
  const Scatter s = make_scatter(op.qubits, n);
  const auto dim = static_cast<Eigen::Index>(s.local.size());
  double re = 0.0;
  double im = 0.0;
#pragma omp parallel for reduction(+ : re, im) schedule(static)
  for (Eigen::Index r = 0; r < s.rest; ++r) {
    const Eigen::Index base = spread(s, r);
    for (Eigen::Index b = 0; b < dim; ++b) {
      for (Eigen::Index a = 0; a < dim; ++a) {
        const cplx term = rho(base + s.local[a], base + s.local[b]) * (*op.matrix)(b, a);
        re += term.real();
        im += term.imag();
      }
    }
  }
  return {re, im};
}

void spectral_filter(const CMatrix& v, const RVector& lambda, std::span<const double> t,
                     std::span<const double> w, double origin, CMatrix& out) {
  out.resize(v.rows(), v.cols());
#pragma omp parallel for schedule(dynamic, 4)
  for (Eigen::Index l = 0; l < v.cols(); ++l) {
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      out(k, l) = v(k, l) * filter_value(lambda(k) - lambda(l), t, w, origin);
    }
  }
}

double max_power_sum(const Lattice& lat, double alpha) {
  double best = 0.0;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (Site jp = 0; jp < lat.size(); ++jp) {
    double sum = 0.0;
    for (Site j = 0; j < lat.size(); ++j) sum += pair_weight(lat, alpha, j, jp);
    best = std::max(best, sum);
  }
  return best;
}

double convolution_sum(const Lattice& lat, double alpha, Site i, Site k) {
  double sum = 0.0;
#pragma omp parallel for reduction(+ : sum) schedule(static)
  for (Site j = 0; j < lat.size(); ++j) sum += pair_weight(lat, alpha, i, j) * pair_weight(lat, alpha, j, k);
  return sum;
}

}  // namespace omp

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace lrgibbs::kernels
