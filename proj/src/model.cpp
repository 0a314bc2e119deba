#include "lrgibbs/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/kernels.hpp"

namespace lrgibbs {

namespace {

constexpr double kHermitianTolerance = 1e-12;

Eigen::Index local_dim(const Region& r) { return Eigen::Index{1} << r.size(); }

}  // namespace

PlacedOperator::PlacedOperator(Region sup, CMatrix m) : support(std::move(sup)), matrix(std::move(m)) {
  if (matrix.rows() != local_dim(support) || matrix.cols() != local_dim(support)) {
    throw DomainError("operator matrix must be 2^|support| square");
  }
  if (linalg::hermiticity_defect(matrix) >= kHermitianTolerance) {
    throw DomainError("operator matrix is not Hermitian");
  }
}

double PlacedOperator::norm() const { return linalg::operator_norm(matrix); }

PlacedOperator pauli_string(const Region& sites, const std::string& ops) {
  if (ops.size() != sites.size()) throw DomainError("pauli_string: one letter per site required");
  CMatrix m = CMatrix::Identity(1, 1);
  for (char c : ops) {
    switch (c) {
      case 'x': case 'X': m = linalg::kron(m, linalg::pauli_x()); break;
      case 'y': case 'Y': m = linalg::kron(m, linalg::pauli_y()); break;
      case 'z': case 'Z': m = linalg::kron(m, linalg::pauli_z()); break;
      case 'i': case 'I': m = linalg::kron(m, linalg::identity2()); break;
      default: throw DomainError(std::string("pauli_string: unknown letter ") + c);
    }
  }
  return PlacedOperator(sites, std::move(m));
}

CMatrix extend(const PlacedOperator& op, const Region& target) {
  if (!target.contains(op.support)) throw DomainError("extend: target does not contain support");
  std::vector<int> positions;
  positions.reserve(op.support.size());
  for (Site s : op.support) {
    positions.push_back(static_cast<int>(std::lower_bound(target.begin(), target.end(), s) - target.begin()));
  }
  return kernels::serial::embed(op.matrix, positions, static_cast<int>(target.size()));
}

PlacedOperator product(const PlacedOperator& a, const PlacedOperator& b) {
  PlacedOperator out;
  out.support = region_union(a.support, b.support);
  out.matrix = extend(a, out.support) * extend(b, out.support);
  return out;
}

LrTfiChain LrTfiChain::make(int n, double alpha, double J, double h) {
  return LrTfiChain{n, alpha, J, h, kac_norm(n, alpha)};
}

double LrTfiChain::coupling(int i, int j) const {
  if (i == j) throw DomainError("coupling of a site with itself");
  return J / kac * std::pow(std::abs(i - j), -alpha);
}

LrTfiChain LrTfiChain::prefix(int count) const {
  if (count < 1 || count > n) throw DomainError("prefix length out of range");
  LrTfiChain out = *this;
  out.n = count;
  return out;
}

LrTfiChain LrTfiChain::with_field(double field) const {
  LrTfiChain out = *this;
  out.h = field;
  return out;
}

Hamiltonian::Hamiltonian(Lattice lattice, std::vector<LocalTerm> terms, int k, double g, double alpha)
    : lattice_(std::move(lattice)), terms_(std::move(terms)), k_(k), g_(g), alpha_(alpha) {
  if (k_ < 1) throw DomainError("locality k must be >= 1");
  if (g_ < 0) throw DomainError("g must be nonnegative");
  if (!(alpha_ > 0)) throw DomainError("alpha must be positive");
  for (const auto& t : terms_) {
    validate(lattice_, t.support);
    if (static_cast<int>(t.support.size()) > k_) throw DomainError("term support exceeds locality k");
    if (t.support.empty()) throw DomainError("term with empty support");
  }
}

Hamiltonian& Hamiltonian::set_chain(LrTfiChain chain) {
  if (chain.n != lattice_.size() || lattice_.dimension() != 1) throw DomainError("chain metadata size mismatch");
  chain_ = chain;
  return *this;
}

Hamiltonian& Hamiltonian::set_g(double g) {
  if (g < 0) throw DomainError("g must be nonnegative");
  g_ = g;
  return *this;
}

Hamiltonian PerturbationSpec::combined() const {
  if (!(base.lattice() == perturbation.lattice())) throw DomainError("perturbation lives on a different lattice");
  return add(base, perturbation, epsilon);
}

Hamiltonian add(const Hamiltonian& a, const Hamiltonian& b, double scale) {
  if (!(a.lattice() == b.lattice())) throw DomainError("cannot add Hamiltonians on different lattices");
  std::map<std::vector<Site>, CMatrix> merged;
  std::vector<std::vector<Site>> order;
  auto accumulate = [&](const LocalTerm& t, double c) {
    auto [it, inserted] = merged.try_emplace(t.support.sites(), c * t.matrix);
    if (inserted) order.push_back(t.support.sites());
    else it->second += c * t.matrix;
  };
  for (const auto& t : a.terms()) accumulate(t, 1.0);
  for (const auto& t : b.terms()) accumulate(t, scale);
  std::vector<LocalTerm> terms;
  terms.reserve(order.size());
  for (const auto& key : order) {
    CMatrix& m = merged.at(key);
    m = 0.5 * (m + m.adjoint()).eval();
    terms.emplace_back(Region(key), m);
  }
  Hamiltonian out(a.lattice(), std::move(terms), std::max(a.locality(), b.locality()),
                  a.g() + std::abs(scale) * b.g(), std::min(a.alpha(), b.alpha()));
  if (a.chain() && b.chain() && b.chain()->J == 0.0) {
    out.set_chain(a.chain()->with_field(a.chain()->h + scale * b.chain()->h));
  }
  return out;
}

double coupling_strength(const Hamiltonian& h, Site a, Site b) {
  if (a == b) throw DomainError("coupling_strength needs two distinct sites");
  if (!h.lattice().contains(a) || !h.lattice().contains(b)) throw DomainError("site outside lattice");
  double sum = 0.0;
  for (const auto& t : h.terms()) {
    if (t.support.contains(a) && t.support.contains(b)) sum += t.norm();
  }
  return sum;
}

LongRangeReport verify_long_range(const Hamiltonian& h) {
  const Lattice& lat = h.lattice();
  const int n = lat.size();
  // Accumulate J_{jj'} over terms once instead of rescanning per pair.
  std::vector<double> J(static_cast<std::size_t>(n) * n, 0.0);
  for (const auto& t : h.terms()) {
    const double norm = t.norm();
    for (std::size_t x = 0; x < t.support.size(); ++x) {
      for (std::size_t y = x + 1; y < t.support.size(); ++y) {
        J[static_cast<std::size_t>(t.support.sites()[x]) * n + t.support.sites()[y]] += norm;
      }
    }
  }
  LongRangeReport report;
  for (Site a = 0; a < n; ++a) {
    for (Site b = a + 1; b < n; ++b) {
      const double jab = J[static_cast<std::size_t>(a) * n + b];
      if (jab == 0.0) continue;
      const double scaled = jab * std::pow(1.0 + lat.distance(a, b), h.alpha());
      const double ratio = h.g() > 0 ? scaled / h.g() : INFINITY;
      if (ratio > report.worst_ratio) {
        report.worst_ratio = ratio;
        report.worst_a = a;
        report.worst_b = b;
      }
    }
  }
  report.ok = report.worst_ratio <= 1.0 + 1e-12;
  return report;
}

double u_constant(const Lattice& lat, double alpha) {
  if (!(alpha > 0)) throw DomainError("u_constant needs alpha > 0");
  return kernels::omp::max_power_sum(lat, alpha) * std::pow(2.0, alpha);
}

double beta_star(double u, double g, int k) {
  if (!(u > 0) || !(g > 0) || k < 1) throw DomainError("beta_star needs u, g > 0 and k >= 1");
  return 1.0 / (8.0 * u * g * k);
}

double kac_norm(int n, double alpha) {
  if (n < 2) throw DomainError("kac_norm needs N >= 2");
  // sum_{i<j} |i-j|^{-alpha} = sum_d (N - d) d^{-alpha}
  double sum = 0.0;
  for (int d = 1; d < n; ++d) sum += (n - d) * std::pow(static_cast<double>(d), -alpha);
  return sum / n;
}

Hamiltonian build_lr_tfi(const LrTfiChain& c) {
  if (c.n < 2) throw DomainError("LR-TFI needs N >= 2");
  if (!(c.alpha > 0)) throw DomainError("LR-TFI needs alpha > 0");
  std::vector<LocalTerm> terms;
  const CMatrix xx = linalg::kron(linalg::pauli_x(), linalg::pauli_x());
  for (int i = 0; i < c.n; ++i) {
    for (int j = i + 1; j < c.n; ++j) terms.emplace_back(Region{i, j}, c.coupling(i, j) * xx);
  }
  for (int i = 0; i < c.n; ++i) terms.emplace_back(Region{i}, c.h * linalg::pauli_z());
  // g saturates the long-range envelope at nearest neighbours: (|J|/kac) 2^alpha.
  const double g = std::abs(c.J) / c.kac * std::pow(2.0, c.alpha);
  Hamiltonian out(Lattice::chain(c.n), std::move(terms), 2, g, c.alpha);
  out.set_chain(c);
  return out;
}

Hamiltonian build_lr_tfi(int n, double alpha, double J, double h) {
  if (n < 2) throw DomainError("LR-TFI needs N >= 2");
  if (!(alpha > 0)) throw DomainError("LR-TFI needs alpha > 0");
  return build_lr_tfi(LrTfiChain::make(n, alpha, J, h));
}

Hamiltonian build_field_perturbation(int n) {
  if (n < 1) throw DomainError("field perturbation needs N >= 1");
  std::vector<LocalTerm> terms;
  for (int i = 0; i < n; ++i) terms.emplace_back(Region{i}, linalg::pauli_z());
  Hamiltonian out(Lattice::chain(n), std::move(terms), 1, 0.0, 1.0);
  if (n >= 2) out.set_chain(LrTfiChain{n, 1.0, 0.0, 1.0, kac_norm(n, 1.0)});
  return out;
}

Hamiltonian restrict(const Hamiltonian& h, const Region& b) {
  validate(h.lattice(), b);
  std::vector<LocalTerm> kept;
  for (const auto& t : h.terms()) {
    if (b.contains(t.support)) kept.push_back(t);
  }
  return Hamiltonian(h.lattice(), std::move(kept), h.locality(), h.g(), h.alpha());
}

Hamiltonian boundary_terms(const Hamiltonian& h, const Region& b) {
  validate(h.lattice(), b);
  std::vector<LocalTerm> kept;
  for (const auto& t : h.terms()) {
    if (t.support.intersects(b) && !b.contains(t.support)) kept.push_back(t);
  }
  return Hamiltonian(h.lattice(), std::move(kept), h.locality(), h.g(), h.alpha());
}

void to_json(nlohmann::json& j, const PlacedOperator& op) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index r = 0; r < op.matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < op.matrix.cols(); ++c) {
      entries.push_back({op.matrix(r, c).real(), op.matrix(r, c).imag()});
    }
  }
  j = nlohmann::json{{"support", op.support}, {"matrix", entries}};
}

PlacedOperator operator_from_json(const nlohmann::json& j) {
  Region support = j.at("support").get<Region>();
  const auto& entries = j.at("matrix");
  const Eigen::Index dim = Eigen::Index{1} << support.size();
  if (!entries.is_array() || static_cast<Eigen::Index>(entries.size()) != dim * dim) {
    throw DomainError("operator matrix must list 4^|support| [re, im] entries");
  }
  CMatrix m(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto& e = entries.at(static_cast<std::size_t>(r * dim + c));
      m(r, c) = e.is_array() ? cplx(e.at(0).get<double>(), e.at(1).get<double>()) : cplx(e.get<double>(), 0.0);
    }
  }
  return PlacedOperator(std::move(support), std::move(m));
}

void to_json(nlohmann::json& j, const Hamiltonian& h) {
  if (h.chain()) {
    const auto& c = *h.chain();
    j = nlohmann::json{{"model", "lr_tfi"}, {"N", c.n}, {"alpha", c.alpha}, {"J", c.J}, {"h", c.h}};
    return;
  }
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : h.terms()) terms.push_back(t);
  j = nlohmann::json{{"model", "custom"}, {"lattice", h.lattice()}, {"k", h.locality()},
                     {"g", h.g()}, {"alpha", h.alpha()}, {"terms", terms}};
}

Hamiltonian hamiltonian_from_json(const nlohmann::json& j) {
  const std::string model = j.value("model", "custom");
  if (model == "lr_tfi") {
    return build_lr_tfi(j.at("N").get<int>(), j.at("alpha").get<double>(), j.value("J", 1.0), j.value("h", 0.25));
  }
  if (model != "custom") throw ConfigError("unknown model '" + model + "'");
  std::vector<LocalTerm> terms;
  int max_site = 0;
  std::size_t max_support = 1;
  for (const auto& t : j.at("terms")) {
    terms.push_back(operator_from_json(t));
    if (!terms.back().support.empty()) max_site = std::max(max_site, terms.back().support.back());
    max_support = std::max(max_support, terms.back().support.size());
  }
  Lattice lat = j.contains("lattice") ? j.at("lattice").get<Lattice>() : Lattice::chain(max_site + 1);
  const int k = j.value("k", static_cast<int>(max_support));
  const double alpha = j.value("alpha", 1.0);
  Hamiltonian out(std::move(lat), std::move(terms), k, j.value("g", 0.0), alpha);
  if (!j.contains("g")) {
    // Saturating choice: smallest g that satisfies the declared power law.
    Hamiltonian probe = out;
    probe.set_g(1.0);
    out.set_g(verify_long_range(probe).worst_ratio);
  }
  return out;
}

}  // namespace lrgibbs
