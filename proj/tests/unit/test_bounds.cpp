#include <doctest.h>

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>

#include "lrgibbs/bounds.hpp"
#include "lrgibbs/errors.hpp"

using namespace lrgibbs;
using namespace lrgibbs::bounds;

namespace {

LrbParams params(double alpha) {
  LrbParams p;
  p.alpha = alpha;
  p.g = 1.0;
  p.u = 0.5;
  p.k = 2;
  p.kappa_lr = 1.0;
  p.kappa_lr1 = 1.0;
  p.kappa_lr2 = 1.0;
  p.kappa_lr3 = 1.0;
  return p;
}

}  // namespace

TEST_CASE("zeta against Boost") {
  for (double s : {1.01, 1.5, 2.0, 3.0, 7.5}) {
    CHECK(zeta(s) == doctest::Approx(boost::math::zeta(s)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(zeta(1.0), DomainError);
}

TEST_CASE("regime preconditions") {
  const LrbParams p = params(3.0);
  CHECK_NOTHROW(check_regime({RegimeKind::high_temperature, 0.5 * p.beta_star(), {}}, p));
  CHECK_THROWS_AS(check_regime({RegimeKind::high_temperature, 2.0 * p.beta_star(), {}}, p), DomainError);
  CHECK_THROWS_AS(check_regime({RegimeKind::strong_2d_plus_1, 1.0, {}}, params(2.5)), DomainError);
  CHECK_NOTHROW(check_regime({RegimeKind::strong_2d_to_2d_plus_1, 1.0, {}}, params(2.5)));
  CHECK(applicable_regimes(p, 1.0).size() == 2);
  CHECK(default_eps_t(2.5, 1) == doctest::Approx(0.0));
  CHECK(default_eps_t(2.8, 1) == doctest::Approx(2.0 * (1.0 / 0.8 - 1.0)));
  CHECK(lppl_exponent(RegimeKind::strong_2d_to_2d_plus_1, 2.5, 1) == doctest::Approx(1.5));
}

TEST_CASE("envelopes: shape, zero at t = 0, configuration errors") {
  LrbParams p = params(3.0);
  const Regime ht{RegimeKind::high_temperature, 0.5 * p.beta_star(), {}};
  CHECK(lrb_envelope(p, ht, 0.0, 3.0) == 0.0);
  CHECK(lrb_envelope(p, ht, 0.2, 3.0) == doctest::Approx(std::expm1(p.v() * 0.2) / 64.0));
  CHECK_THROWS_AS(lrb_envelope(p, {RegimeKind::strong_2d_plus_1, 1.0, {}}, 5.0, 1.0), DomainError);
  p.kappa_lr.reset();
  CHECK_THROWS_AS(lrb_envelope(p, ht, 0.2, 3.0), ConfigError);
}

TEST_CASE("right-hand sides") {
  CHECK(stability_rhs(0.0, 1.0, 1.0, 1.0, 1.0, 2, 2.0) == 0.0);
  CHECK(stability_rhs(0.1, 2.0, 3.0, 4.0, 1.0, 2, 2.0) ==
        doctest::Approx(0.1 * 3.0 * 4.0 * 2.0 * 2.0 * std::exp(2.0)));
  CHECK(decay_rhs(1.0, 1.0, 1.0, 1.0, 1.0, 2, 3.0, 2.0) == doctest::Approx(std::exp(1.0) / 16.0));
  CHECK_THROWS_AS(locind_rhs(1.0, 2.5, 1.0, 1.0, 2, 3.0, 3.0, 1), DomainError);
  CHECK(kappa_dprime(1.0, 1.0, 1.0, 3.0, 1) == doctest::Approx((2.0 + 4.0) * 3.0 * 2.0));
}

TEST_CASE("I2: closed form dominates the exact logarithm, which matches quadrature") {
  for (double beta : {0.3, 1.0, 4.0}) {
    for (double b : {0.05, 0.5, 3.0}) {
      const double exact_value = integral_I2_exact(beta, b);
      CHECK(integral_I2_quadrature(beta, b) == doctest::Approx(exact_value).epsilon(1e-9));
      CHECK(exact_value <= integral_I2(beta, b));
    }
  }
}

TEST_CASE("I1 closed forms dominate quadrature in each regime") {
  const LrbParams p3 = params(3.0);
  const double bs = 0.5 * p3.beta_star();
  CHECK(integral_I1_quadrature(bs, {RegimeKind::high_temperature, bs, {}}, p3, 10.0 * bs) <=
        integral_I1(bs, {RegimeKind::high_temperature, bs, {}}, p3));
  for (double beta : {0.2, 1.0, 5.0}) {
    const Regime s{RegimeKind::strong_2d_plus_1, beta, {}};
    CHECK(integral_I1_quadrature(beta, s, p3, 50.0 * beta) <= integral_I1(beta, s, p3));
    const LrbParams p28 = params(2.8);
    const Regime t{RegimeKind::strong_2d_to_2d_plus_1, beta, {}};
    CHECK(integral_I1_quadrature(beta, t, p28, 50.0 * beta) <= integral_I1(beta, t, p28));
  }
}

TEST_CASE("dilogarithm identity") {
  for (double beta : {0.37, 1.0, 2.0}) {
    const auto c = dilog_identity_check(beta);
    CHECK(c.quadrature == doctest::Approx(c.closed_form).epsilon(1e-10));
  }
}

TEST_CASE("convolution lemma on a chain and a square") {
  for (const Lattice& lat : {Lattice::chain(12), Lattice({4, 4})}) {
    const double alpha = lat.dimension() + 1.5;
    for (Site i = 0; i < lat.size(); ++i) {
      for (Site k = 0; k < lat.size(); k += 3) CHECK(convolution_check(lat, alpha, i, k).holds());
    }
  }
  CHECK_THROWS_AS(convolution_check(Lattice::chain(4), 0.9, 0, 1), DomainError);
}

TEST_CASE("kappa(beta) assembly adds its parts") {
  const LrbParams p = params(3.0);
  const double beta = 0.5 * p.beta_star();
  const auto k = kappa_beta_assemble({RegimeKind::high_temperature, beta, {}}, p, beta, 2.0);
  CHECK(k.total == doctest::Approx(k.lr_term + k.tail_term + k.decay_term));
  CHECK(k.decay_term == doctest::Approx(2.0 * beta));
  CHECK(k.lr_term == doctest::Approx(4.0 * k.ic));
  CHECK(k.tail_argmax >= 1);
  CHECK_THROWS_AS(kappa_beta_assemble({RegimeKind::high_temperature, beta, {}}, p, beta, std::nullopt), ConfigError);
  nlohmann::json j = k;
  CHECK(j.at("total").get<double>() == doctest::Approx(k.total));
}

TEST_CASE("LR parameters JSON round trip") {
  const LrbParams p = params(2.5);
  nlohmann::json j = p;
  const LrbParams back = lrb_params_from_json(j);
  CHECK(back.alpha == p.alpha);
  CHECK(back.kappa_lr2 == p.kappa_lr2);
  CHECK(back.v() == doctest::Approx(p.v()));
}
