#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrgibbs/lattice.hpp"
#include "lrgibbs/linalg.hpp"

namespace lrgibbs {

/// Hermitian matrix acting on the qubits of `support`. Local basis index is
/// big-endian over the sorted support: the first site is the most significant bit.
struct PlacedOperator {
  Region support;
  CMatrix matrix;

  PlacedOperator() = default;
  /// Validates dimension 2^|support| and Hermiticity (max |M - M^dagger| < 1e-12).
  PlacedOperator(Region support, CMatrix matrix);

  double norm() const;
};

using LocalTerm = PlacedOperator;
using PlacedObservable = PlacedOperator;

/// Product of single-qubit Paulis, e.g. pauli_string({3, 4}, "zz").
PlacedOperator pauli_string(const Region& sites, const std::string& ops);

/// Identity-extends `op` onto `target` (which must contain op.support).
CMatrix extend(const PlacedOperator& op, const Region& target);

/// The operator product a*b on the union of supports. Not Hermitian in general,
/// so the result skips validation.
PlacedOperator product(const PlacedOperator& a, const PlacedOperator& b);

/// Parameters of the Kac-normalized long-range transverse-field Ising chain
///   H = (J / kac) sum_{i<j} X_i X_j / |i-j|^alpha + h sum_i Z_i.
struct LrTfiChain {
  int n = 2;
  double alpha = 1.0;
  double J = 1.0;
  double h = 0.25;
  double kac = 0.5;  // N_LR of the chain the couplings were normalized for

  static LrTfiChain make(int n, double alpha, double J, double h);
  double coupling(int i, int j) const;
  /// First `count` sites with unchanged couplings (the restriction H_B to a left block).
  LrTfiChain prefix(int count) const;
  LrTfiChain with_field(double field) const;
};

/// Finite k-local Hamiltonian on a lattice with long-range metadata (g, alpha).
class Hamiltonian {
 public:
  Hamiltonian() = default;
  Hamiltonian(Lattice lattice, std::vector<LocalTerm> terms, int k, double g, double alpha);

  const Lattice& lattice() const { return lattice_; }
  const std::vector<LocalTerm>& terms() const { return terms_; }
  int locality() const { return k_; }
  double g() const { return g_; }
  double alpha() const { return alpha_; }
  int sites() const { return lattice_.size(); }

  /// Set when the Hamiltonian is an LR-TFI chain (possibly with shifted field).
  const std::optional<LrTfiChain>& chain() const { return chain_; }
  Hamiltonian& set_chain(LrTfiChain chain);
  Hamiltonian& set_g(double g);

 private:
  Lattice lattice_;
  std::vector<LocalTerm> terms_;
  int k_ = 1;
  double g_ = 0.0;
  double alpha_ = 1.0;
  std::optional<LrTfiChain> chain_;
};

struct PerturbationSpec {
  Hamiltonian base;
  Hamiltonian perturbation;
  double epsilon = 0.0;

  /// base + epsilon * perturbation, validated for shared lattice and locality.
  Hamiltonian combined() const;
};

/// a + scale * b; terms with identical support are merged.
Hamiltonian add(const Hamiltonian& a, const Hamiltonian& b, double scale = 1.0);

/// J_{j,j'}: sum of norms of terms whose support contains both sites.
double coupling_strength(const Hamiltonian& h, Site a, Site b);

struct LongRangeReport {
  bool ok = true;
  Site worst_a = -1;
  Site worst_b = -1;
  double worst_ratio = 0.0;  // max over pairs of J (1+d)^alpha / g
};

LongRangeReport verify_long_range(const Hamiltonian& h);

/// u = max_{j'} sum_j 2^alpha / (1 + d(j, j'))^alpha, including j = j'.
double u_constant(const Lattice& lat, double alpha);
double beta_star(double u, double g, int k);

/// N_LR = N^{-1} sum_{i<j} |i-j|^{-alpha}.
double kac_norm(int n, double alpha);

Hamiltonian build_lr_tfi(int n, double alpha, double J, double h);
Hamiltonian build_lr_tfi(const LrTfiChain& chain);
Hamiltonian build_field_perturbation(int n);

/// H_B: keeps terms with support inside B.
Hamiltonian restrict(const Hamiltonian& h, const Region& b);

/// Terms whose support meets both B and its complement.
Hamiltonian boundary_terms(const Hamiltonian& h, const Region& b);

void to_json(nlohmann::json& j, const Hamiltonian& h);
Hamiltonian hamiltonian_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const PlacedOperator& op);
PlacedOperator operator_from_json(const nlohmann::json& j);

}  // namespace lrgibbs
