#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/exact.hpp"
#include "lrgibbs/tensornet.hpp"

using namespace lrgibbs;
using namespace lrgibbs::tensornet;

namespace {

RMatrix exact_gibbs(const LrTfiChain& c, double beta) {
  const auto spec = exact::diagonalize(build_lr_tfi(c));
  const RVector w = (-beta * (spec->values.array() - spec->values.minCoeff())).exp();
  const CMatrix rho = spec->vectors * w.asDiagonal() * spec->vectors.adjoint();
  const RMatrix r = rho.real();
  return r / r.trace();
}

RMatrix normalized(const Mpo& m) {
  const RMatrix d = m.to_dense();
  return d / d.trace();
}

TebdConfig tight(double dbeta) {
  TebdConfig cfg;
  cfg.dbeta = dbeta;
  cfg.cutoff = 1e-15;
  cfg.chi_max = 256;
  return cfg;
}

}  // namespace

TEST_CASE("swap schedule brings every pair together exactly once") {
  for (int n : {2, 3, 6, 9}) {
    const SwapSchedule s = build_swap_schedule(n);
    std::set<std::pair<int, int>> pairs;
    for (const auto& e : s.events) {
      const auto p = std::minmax(e.left_label, e.right_label);
      CHECK(pairs.insert(p).second);
    }
    CHECK(static_cast<int>(pairs.size()) == n * (n - 1) / 2);
    const auto perm = net_permutation(s);
    for (int i = 0; i < n; ++i) CHECK(perm[i] == i);
  }
}

TEST_CASE("identity MPO represents the identity") {
  const Mpo m = Mpo::identity(4);
  CHECK(m.trace() == doctest::Approx(16.0));
  CHECK((m.to_dense() - RMatrix::Identity(16, 16)).norm() < 1e-13);
  CHECK(m.max_bond() == 1);
}

TEST_CASE("TEBD converges to the exact Gibbs state at second order") {
  const LrTfiChain c = LrTfiChain::make(5, 1.5, 1.0, 0.25);
  const RMatrix target = exact_gibbs(c, 0.5);
  double errors[2];
  int k = 0;
  for (double dbeta : {0.02, 0.01}) {
    Mpo m = Mpo::identity(5);
    evolve(m, c, 0.5, tight(dbeta));
    errors[k++] = (normalized(m) - target).norm();
  }
  CHECK(errors[1] < 1e-4);
  CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("first-order slices converge linearly") {
  const LrTfiChain c = LrTfiChain::make(4, 3.0, 1.0, 0.25);
  const RMatrix target = exact_gibbs(c, 0.4);
  double errors[2];
  int k = 0;
  for (double dbeta : {0.02, 0.01}) {
    TebdConfig cfg = tight(dbeta);
    cfg.order = 1;
    Mpo m = Mpo::identity(4);
    evolve(m, c, 0.4, cfg);
    errors[k++] = (normalized(m) - target).norm();
  }
  CHECK(errors[0] / errors[1] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("parity-blocked and dense MPOs evolve identically") {
  const LrTfiChain c = LrTfiChain::make(6, 1.5, 1.0, 0.25);
  Mpo blocked = Mpo::identity(6);
  Mpo dense = Mpo::identity(6);
  dense.set_blocked(false);
  CHECK(blocked.blocked());
  CHECK_FALSE(dense.blocked());
  TebdConfig cfg = tight(0.05);
  evolve(blocked, c, 0.5, cfg);
  evolve(dense, c, 0.5, cfg);
  CHECK(blocked.bond_dims() == dense.bond_dims());
  CHECK((normalized(blocked) - normalized(dense)).norm() < 1e-10);
  CHECK(blocked.log_scale() == doctest::Approx(dense.log_scale()).epsilon(1e-10));
}

TEST_CASE("the discarded-weight route matches the SVD route") {
  const LrTfiChain c = LrTfiChain::make(6, 0.5, 1.0, 0.25);
  TebdConfig gram = tight(0.05);
  gram.cutoff = 1e-12;
  TebdConfig svd = gram;
  svd.mode = CutoffMode::relative_singular;
  svd.cutoff = 1e-6;  // the same tail in singular-value terms
  Mpo a = Mpo::identity(6);
  Mpo b = Mpo::identity(6);
  evolve(a, c, 0.5, gram);
  evolve(b, c, 0.5, svd);
  CHECK((normalized(a) - normalized(b)).norm() < 1e-5);
}

TEST_CASE("set_blocked rejects tensors without parity symmetry") {
  RMatrix s0(4, 1);
  s0 << 1.0, 0.3, 0.0, 1.0;  // o != i entry with odd parity on a boundary bond
  RMatrix s1(4, 1);
  s1 << 1.0, 0.0, 0.0, 1.0;
  Mpo m = Mpo::from_tensors({s0, s1}, 0.0, 0);
  CHECK_FALSE(m.blocked());
  CHECK_THROWS_AS(m.set_blocked(true), DomainError);
}

TEST_CASE("expectations from the environment match the dense state") {
  const LrTfiChain c = LrTfiChain::make(6, 3.0, 1.0, 0.25);
  Mpo m = Mpo::identity(6);
  evolve(m, c, 0.6, tight(0.02));
  const auto rho = exact::gibbs(build_lr_tfi(c), 0.6);
  const Environment env(m);
  const auto a = pauli_string(Region{0, 1}, "zz");
  const auto b = pauli_string(Region{4, 5}, "zz");
  CHECK(env.expectation(a) == doctest::Approx(mpo_expectation(m, a)).epsilon(1e-12));
  CHECK(env.expectation(a) == doctest::Approx(exact::expectation(rho, a)).epsilon(1e-3));
  CHECK(std::abs(env.covariance(a, b) - exact::covariance(rho, a, b)) < 1e-6);
  CHECK_THROWS_AS(env.expectation(pauli_string(Region{0, 2}, "zz")), UnsupportedError);
}

TEST_CASE("mirror twice is the identity and checkpoints round trip") {
  const LrTfiChain c = LrTfiChain::make(5, 1.5, 1.0, 0.25);
  Mpo m = Mpo::identity(5);
  evolve(m, c, 0.3, tight(0.05));
  Mpo twice = m;
  twice.mirror();
  twice.mirror();
  CHECK((twice.to_dense() - m.to_dense()).norm() < 1e-12 * m.to_dense().norm());

  const auto path = std::filesystem::temp_directory_path() / "lrgibbs_unit_checkpoint.mpo";
  m.save(path.string(), {{"tag", "unit"}});
  nlohmann::json header;
  const Mpo back = Mpo::load(path.string(), &header);
  std::filesystem::remove(path);
  CHECK(header.at("tag") == "unit");
  CHECK(back.beta() == doctest::Approx(m.beta()));
  CHECK(back.steps_done() == m.steps_done());
  CHECK((back.to_dense() - m.to_dense()).norm() < 1e-12 * m.to_dense().norm());
}

TEST_CASE("truncation caps the bond dimension and reports the discarded weight") {
  const LrTfiChain c = LrTfiChain::make(8, 0.5, 1.0, 0.25);
  Mpo m = Mpo::identity(8);
  evolve(m, c, 1.0, tight(0.1));
  const double before = m.trace();
  const auto rep = truncate(m, 0.0, 4);
  CHECK(m.max_bond() <= 4);
  CHECK(rep.total > 0.0);
  CHECK(m.trace() == doctest::Approx(before).epsilon(0.05));
}

TEST_CASE("evolution bookkeeping") {
  const LrTfiChain c = LrTfiChain::make(4, 1.5, 1.0, 0.25);
  Mpo m = Mpo::identity(4);
  TebdConfig cfg = tight(0.1);
  const auto rep = evolve(m, c, 0.35, cfg);
  CHECK(rep.steps == 3);
  CHECK(rep.rounded);
  CHECK(m.beta() == doctest::Approx(0.3));
  CHECK_THROWS_AS(evolve(m, c, 0.1, cfg), DomainError);
  cfg.dbeta = -1.0;
  CHECK_THROWS_AS(evolve(m, c, 1.0, cfg), DomainError);
}
