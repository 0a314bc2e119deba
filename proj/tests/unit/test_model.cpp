#include <doctest.h>

#include <cmath>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/model.hpp"

using namespace lrgibbs;

TEST_CASE("Kac normalization matches the direct pair sum") {
  for (int n : {2, 5, 11}) {
    for (double alpha : {0.5, 1.5, 3.0}) {
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) sum += std::pow(j - i, -alpha);
      }
      CHECK(kac_norm(n, alpha) == doctest::Approx(sum / n).epsilon(1e-14));
    }
  }
  CHECK(kac_norm(2, 1.7) == doctest::Approx(0.5));
}

TEST_CASE("LR-TFI chain couplings and terms") {
  const LrTfiChain c = LrTfiChain::make(6, 1.5, 1.0, 0.25);
  CHECK(c.coupling(0, 2) == doctest::Approx(1.0 / (c.kac * std::pow(2.0, 1.5))));
  CHECK(c.coupling(4, 1) == doctest::Approx(c.coupling(1, 4)));
  const Hamiltonian h = build_lr_tfi(c);
  CHECK(h.terms().size() == 15 + 6);
  CHECK(h.locality() == 2);
  CHECK(verify_long_range(h).ok);
  CHECK(h.g() == doctest::Approx(std::pow(2.0, 1.5) / c.kac));
}

TEST_CASE("prefix keeps the couplings of the parent chain") {
  const LrTfiChain c = LrTfiChain::make(10, 3.0, 1.0, 0.25);
  const LrTfiChain p = c.prefix(4);
  CHECK(p.n == 4);
  CHECK(p.coupling(0, 3) == doctest::Approx(c.coupling(0, 3)));
  CHECK(p.kac == doctest::Approx(c.kac));
  CHECK_THROWS_AS(c.prefix(11), DomainError);
}

TEST_CASE("field shift equals adding epsilon V") {
  const LrTfiChain c = LrTfiChain::make(4, 1.5, 1.0, 0.25);
  const Hamiltonian shifted = build_lr_tfi(c.with_field(0.35));
  const Hamiltonian summed = add(build_lr_tfi(c), build_field_perturbation(4), 0.1);
  REQUIRE(shifted.terms().size() == summed.terms().size());
  for (std::size_t t = 0; t < shifted.terms().size(); ++t) {
    bool found = false;
    for (const auto& s : summed.terms()) {
      if (s.support == shifted.terms()[t].support) {
        found = (s.matrix - shifted.terms()[t].matrix).norm() < 1e-14;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("u constant on a chain equals 2^alpha times the worst row sum") {
  const Lattice lat = Lattice::chain(9);
  const double alpha = 2.5;
  double worst = 0.0;
  for (int j2 = 0; j2 < 9; ++j2) {
    double s = 0.0;
    for (int j = 0; j < 9; ++j) s += std::pow(1.0 + std::abs(j - j2), -alpha);
    worst = std::max(worst, s);
  }
  CHECK(u_constant(lat, alpha) == doctest::Approx(std::pow(2.0, alpha) * worst).epsilon(1e-13));
  CHECK(beta_star(2.0, 3.0, 2) == doctest::Approx(1.0 / 96.0));
}

TEST_CASE("restriction and boundary terms split the Hamiltonian") {
  const Hamiltonian h = build_lr_tfi(6, 1.5, 1.0, 0.25);
  const Region b{1, 2, 3};
  const Hamiltonian inside = restrict(h, b);
  const Hamiltonian across = boundary_terms(h, b);
  // 3 pairs + 3 fields inside; pairs with exactly one end in B: 3 * 3.
  CHECK(inside.terms().size() == 6);
  CHECK(across.terms().size() == 9);
}

TEST_CASE("operators reject non-Hermitian matrices") {
  CMatrix m = CMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(PlacedOperator(Region{0}, m), DomainError);
  CHECK_THROWS(pauli_string(Region{0, 1}, "z"));
}

TEST_CASE("Hamiltonian JSON round trip") {
  const Hamiltonian h = build_lr_tfi(4, 3.0, 1.0, 0.25);
  const nlohmann::json j = h;
  const Hamiltonian back = hamiltonian_from_json(j);
  CHECK(back.terms().size() == h.terms().size());
  CHECK(back.g() == doctest::Approx(h.g()));
  CHECK((back.terms()[3].matrix - h.terms()[3].matrix).norm() == doctest::Approx(0.0));
}
