#include "lrgibbs/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/kernels.hpp"
#include "lrgibbs/model.hpp"

namespace lrgibbs::bounds {

namespace {

constexpr double kPi = std::numbers::pi;

double factorial(int n) { return std::tgamma(n + 1.0); }

int two_term_ell(double alpha, int dimension) {
  return static_cast<int>(std::floor(dimension / (alpha - 2.0 * dimension)));
}

double require(const std::optional<double>& value, const char* name) {
  if (!value) throw ConfigError(std::string("missing configured constant ") + name);
  if (!(*value >= 0)) throw DomainError(std::string(name) + " must be nonnegative");
  return *value;
}

}  // namespace

const char* to_string(RegimeKind kind) {
  switch (kind) {
    case RegimeKind::high_temperature:
      return "HighTemperature";
    case RegimeKind::strong_2d_plus_1:
      return "Strong_2D_plus_1";
    case RegimeKind::strong_2d_to_2d_plus_1:
      return "Strong_2D_to_2D_plus_1";
  }
  return "?";
}

RegimeKind regime_from_string(const std::string& name) {
  for (RegimeKind k : {RegimeKind::high_temperature, RegimeKind::strong_2d_plus_1,
                       RegimeKind::strong_2d_to_2d_plus_1}) {
    if (name == to_string(k)) return k;
  }
  throw ConfigError("unknown regime: " + name);
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::configured:
      return "configured";
    case Provenance::assembled:
      return "assembled";
    case Provenance::fitted:
      return "fitted";
  }
  return "?";
}

double default_eps_t(double alpha, int dimension) {
  const double x = dimension / (alpha - 2.0 * dimension);
  return 2.0 * (x - std::floor(x));
}

void check_regime(const Regime& regime, const LrbParams& p) {
  const double D = p.dimension;
  if (p.dimension < 1) throw DomainError("dimension must be positive");
  switch (regime.kind) {
    case RegimeKind::high_temperature:
      if (!(p.alpha > D)) throw DomainError("high-temperature regime needs alpha > D");
      if (!(regime.beta > 0) || !(regime.beta < p.beta_star()))
        throw DomainError("high-temperature regime needs 0 < beta < beta*");
      break;
    case RegimeKind::strong_2d_plus_1:
      if (!(p.alpha >= 2 * D + 1)) throw DomainError("Strong_2D_plus_1 needs alpha >= 2D + 1");
      break;
    case RegimeKind::strong_2d_to_2d_plus_1:
      if (!(p.alpha > 2 * D && p.alpha <= 2 * D + 1)) throw DomainError("Strong_2D_to_2D_plus_1 needs 2D < alpha <= 2D + 1");
      if (regime.eps_t && !(*regime.eps_t >= 0 && *regime.eps_t <= 2)) throw DomainError("eps_T must lie in [0, 2]");
      break;
  }
}

std::vector<RegimeKind> applicable_regimes(const LrbParams& p, double beta) {
  std::vector<RegimeKind> out;
  for (RegimeKind k : {RegimeKind::high_temperature, RegimeKind::strong_2d_plus_1,
                       RegimeKind::strong_2d_to_2d_plus_1}) {
    try {
      check_regime({k, beta, std::nullopt}, p);
      out.push_back(k);
    } catch (const DomainError&) {
    }
  }
  return out;
}

double lppl_exponent(RegimeKind kind, double alpha, int dimension) {
  return kind == RegimeKind::strong_2d_to_2d_plus_1 ? alpha - dimension : alpha;
}

double lrb_envelope(const LrbParams& p, const Regime& regime, double t, double d) {
  check_regime(regime, p);
  if (!(d >= 0)) throw DomainError("distance must be nonnegative");
  const double at = std::abs(t);
  const double D = p.dimension;
  switch (regime.kind) {
    case RegimeKind::high_temperature:
      return require(p.kappa_lr, "kappa_LR") * std::expm1(p.v() * at) / std::pow(1.0 + d, p.alpha);
    case RegimeKind::strong_2d_plus_1: {
      const double gap = d - p.v() * at;
      if (!(gap > 0)) throw DomainError("envelope needs d > v|t|");
      return require(p.kappa_lr1, "kappa_LR1") * std::pow(at, 2 * D + 1) / std::pow(gap, p.alpha);
    }
    case RegimeKind::strong_2d_to_2d_plus_1: {
      if (!(d > 0)) throw DomainError("two-term envelope needs d > 0");
      const double eps = regime.eps_t.value_or(default_eps_t(p.alpha, p.dimension));
      const double power = (p.alpha - D) / (p.alpha - 2 * D) - eps / 2;
      const double first = std::pow(at / std::pow(d, p.alpha - 2 * D + eps), power);
      const double second = at / std::pow(d, p.alpha - D);
      return require(p.kappa_lr2, "kappa_LR2") * first + require(p.kappa_lr3, "kappa_LR3") * second;
    }
  }
  return 0.0;
}

double decay_rhs(double K, double norm_a, double norm_b, double size_a, double size_b, int k, double d,
                 double alpha) {
  if (!(d >= 0)) throw DomainError("distance must be nonnegative");
  if (k < 1) throw DomainError("locality k must be positive");
  return K * norm_a * norm_b * size_a * size_b * std::exp((size_a + size_b) / k) / std::pow(1.0 + d, alpha);
}

double lppl_rhs(double kappa_beta, double norm_a, double norm_v, double size_a, double size_b, int k, double d,
                double exponent) {
  return decay_rhs(kappa_beta, norm_a, norm_v, size_a, size_b, k, d, exponent);
}

double stability_rhs(double eps, double v, double u, double kappa_beta, double norm_a, int k, double size_a) {
  if (!(eps >= 0)) throw DomainError("epsilon must be nonnegative");
  if (k < 1) throw DomainError("locality k must be positive");
  return eps * (v * u / 2.0) * kappa_beta * norm_a * k * size_a * std::exp(size_a / k + 1.0);
}

double zeta(double s) {
  if (!(s > 1)) throw DomainError("zeta needs s > 1");
  constexpr int n = 16;
  // B_2k / (2k)! for k = 1..7.
  static constexpr double kBernoulli[] = {1.0 / 12.0,         -1.0 / 720.0,          1.0 / 30240.0,
                                          -1.0 / 1209600.0,   1.0 / 47900160.0,      -691.0 / 1307674368000.0,
                                          1.0 / 74724249600.0};
  double sum = 0.0;
  for (int j = n - 1; j >= 1; --j) sum += std::pow(j, -s);
  sum += std::pow(n, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(n, -s);
  double rising = s;  // s (s+1) ... (s + 2k - 2)
  double npow = std::pow(n, -s - 1.0);
  for (int k = 1; k <= 7; ++k) {
    sum += kBernoulli[k - 1] * rising * npow;
    rising *= (s + 2 * k - 1) * (s + 2 * k);
    npow /= static_cast<double>(n) * n;
  }
  return sum;
}

double locind_rhs(double kappa_prime, double delta, double norm_a, double size_a, int k, double d, double alpha,
                  int dimension) {
  if (!(delta > 0 && delta < alpha - dimension)) throw DomainError("delta must lie in (0, alpha - D)");
  if (k < 1) throw DomainError("locality k must be positive");
  return kappa_prime * zeta(1.0 + delta) * norm_a * size_a * size_a * std::exp(size_a / k) /
         std::pow(1.0 + d, alpha - dimension - delta);
}

double kappa_dprime(double beta, double g, double K_dprime, double alpha, int dimension) {
  return (2.0 * beta * g + 4.0 * K_dprime) * std::pow(3.0, alpha - 2.0 * dimension) * 2.0;
}

double locind_to_decay_rhs(double kappa_dprime, double norm_a, double norm_b, double size_a, double size_b, int k,
                           double d, double alpha, int dimension) {
  if (!(alpha > 2.0 * dimension)) throw DomainError("local indistinguishability to decay needs alpha > 2D");
  if (!(d >= 0)) throw DomainError("distance must be nonnegative");
  if (d <= 3) return 2.0 * norm_a * norm_b;
  return kappa_dprime * norm_a * norm_b * size_a * size_b * std::exp((size_a + size_b) / k) /
         std::pow(1.0 + d, alpha - 2.0 * dimension);
}

double envelope_growth(const Regime& regime, const LrbParams& p, double t) {
  switch (regime.kind) {
    case RegimeKind::high_temperature:
      return std::expm1(p.v() * t);
    case RegimeKind::strong_2d_plus_1:
      return std::pow(t, 2 * p.dimension + 1);
    case RegimeKind::strong_2d_to_2d_plus_1:
      return std::pow(t, 1 + two_term_ell(p.alpha, p.dimension)) + t;
  }
  return 0.0;
}

double integral_I1(double beta, const Regime& regime, const LrbParams& p) {
  if (!(beta > 0)) throw DomainError("beta must be positive");
  Regime r = regime;
  r.beta = beta;
  check_regime(r, p);
  const double mu = 2.0 * kPi / beta;
  switch (regime.kind) {
    case RegimeKind::high_temperature:
      if (!(2.0 * kPi - p.v() * beta >= 1.0)) throw DomainError("high-temperature integral needs 2 pi - v beta >= 1");
      return beta * (1.0 + p.v() * beta / (2.0 * kPi));
    case RegimeKind::strong_2d_plus_1: {
      // 1/(1 - e^{-x}) <= 1 + 1/x splits the integrand into t^l and t^{l-1}/mu pieces.
      const int l = 2 * p.dimension + 1;
      return (factorial(l) + factorial(l - 1)) / std::pow(mu, l + 1);
    }
    case RegimeKind::strong_2d_to_2d_plus_1: {
      const int l = two_term_ell(p.alpha, p.dimension);
      return (factorial(l + 1) + factorial(l)) / std::pow(mu, l + 2) + 2.0 / (mu * mu);
    }
  }
  return 0.0;
}

double integral_I1_quadrature(double beta, const Regime& regime, const LrbParams& p, double b) {
  if (!(beta > 0) || !(b > 0)) throw DomainError("beta and b must be positive");
  const double mu = 2.0 * kPi / beta;
  auto f = [&](double t) {
    if (t <= 0) {
      switch (regime.kind) {
        case RegimeKind::high_temperature:
          return p.v() / mu;
        case RegimeKind::strong_2d_plus_1:
          return 0.0;
        case RegimeKind::strong_2d_to_2d_plus_1:
          return (two_term_ell(p.alpha, p.dimension) == 0 ? 2.0 : 1.0) / mu;
      }
    }
    // e^{-mu t} / (1 - e^{-mu t}) = 1 / expm1(mu t)
    return envelope_growth(regime, p, t) / std::expm1(mu * t);
  };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  const double value = integrator.integrate(f, 0.0, b, 1e-13, &err);
  if (!std::isfinite(value) || err > 1e-8 * std::max(1.0, std::abs(value)))
    throw AccuracyError("I1 quadrature did not converge");
  return value;
}

double integral_I2(double beta, double b) {
  if (!(beta > 0)) throw DomainError("beta must be positive");
  if (!(b > 0)) throw DomainError("I2 needs b > 0");
  const double x = 2.0 * kPi * b / beta;
  return beta / (2.0 * kPi) * std::exp(-x) * (1.0 + 1.0 / x);
}

double integral_I2_exact(double beta, double b) {
  if (!(beta > 0) || !(b > 0)) throw DomainError("beta and b must be positive");
  const double x = 2.0 * kPi * b / beta;
  return -beta / (2.0 * kPi) * std::log1p(-std::exp(-x));
}

double integral_I2_quadrature(double beta, double b) {
  if (!(beta > 0) || !(b > 0)) throw DomainError("beta and b must be positive");
  const double mu = 2.0 * kPi / beta;
  boost::math::quadrature::exp_sinh<double> integrator;
  double err = 0.0;
  const double value = integrator.integrate([&](double t) { return 1.0 / std::expm1(mu * t); }, b,
                                            std::numeric_limits<double>::infinity(), 1e-13, &err);
  if (!std::isfinite(value)) throw AccuracyError("I2 quadrature did not converge");
  return value;
}

DilogCheck dilog_identity_check(double beta) {
  if (!(beta > 0)) throw DomainError("beta must be positive");
  // log((e^x + 1)/(e^x - 1)) = log1p(2 / expm1(x)); log singularity at 0, exponential tail.
  auto f = [&](double t) { return t <= 0 ? 0.0 : std::log1p(2.0 / std::expm1(kPi * t / beta)); };
  boost::math::quadrature::tanh_sinh<double> head;
  boost::math::quadrature::exp_sinh<double> tail;
  double e1 = 0.0;
  double e2 = 0.0;
  const double value =
      head.integrate(f, 0.0, beta, 1e-14, &e1) + tail.integrate(f, beta, std::numeric_limits<double>::infinity(), 1e-14, &e2);
  if (!std::isfinite(value) || e1 + e2 > 1e-10 * beta) throw AccuracyError("dilogarithm quadrature did not converge");
  return {value, beta * kPi / 4.0};
}

ConvolutionCheck convolution_check(const Lattice& lat, double alpha, Site i, Site k) {
  if (!(alpha > lat.dimension())) throw DomainError("convolution lemma needs alpha > D");
  return convolution_check(lat, alpha, i, k, u_constant(lat, alpha));
}

ConvolutionCheck convolution_check(const Lattice& lat, double alpha, Site i, Site k, double u) {
  if (!(alpha > lat.dimension())) throw DomainError("convolution lemma needs alpha > D");
  ConvolutionCheck out;
  out.lhs = kernels::omp::convolution_sum(lat, alpha, i, k);
  out.rhs = u / std::pow(1.0 + lat.distance(i, k), alpha);
  return out;
}

KappaBreakdown kappa_beta_assemble(const Regime& regime, const LrbParams& p, double beta,
                                   std::optional<double> decay_K) {
  Regime r = regime;
  r.beta = beta;
  check_regime(r, p);
  const double K = require(decay_K, "K");
  KappaBreakdown out;
  out.beta = beta;
  switch (regime.kind) {
    case RegimeKind::high_temperature:
      out.kappa_eff = require(p.kappa_lr, "kappa_LR");
      break;
    case RegimeKind::strong_2d_plus_1:
      out.kappa_eff = require(p.kappa_lr1, "kappa_LR1") * std::pow(4.0, p.alpha);
      break;
    case RegimeKind::strong_2d_to_2d_plus_1:
      out.kappa_eff = std::pow(2.0, p.alpha - p.dimension) *
                      std::max(require(p.kappa_lr2, "kappa_LR2"), require(p.kappa_lr3, "kappa_LR3"));
      break;
  }
  out.ic = integral_I1(beta, r, p);

  const double a = lppl_exponent(regime.kind, p.alpha, p.dimension);
  const double v = p.v();
  if (!(v > 0)) throw DomainError("v = 2gu must be positive");
  // log of the summand decreases once d >= a beta v / pi.
  const double stop = std::min(1e7, std::ceil(a * beta * v / kPi) + 1.0);
  out.tail_sup = 0.0;
  for (int d = 1; d <= static_cast<int>(std::max(1.0, stop)); ++d) {
    const double b = d / (2.0 * v);
    const double value = std::pow(1.0 + d, a) * integral_I2(beta, b) * 2.0 * kPi / beta;
    if (value > out.tail_sup) {
      out.tail_sup = value;
      out.tail_argmax = d;
    }
  }
  out.lr_term = 4.0 * out.kappa_eff * out.ic;
  out.tail_term = 4.0 * beta / kPi * out.tail_sup;
  out.decay_term = beta * K;
  out.total = out.lr_term + out.tail_term + out.decay_term;
  return out;
}

void to_json(nlohmann::json& j, const KappaBreakdown& b) {
  j = nlohmann::json{{"beta", b.beta},           {"kappa_eff", b.kappa_eff}, {"I_c", b.ic},
                     {"tail_sup", b.tail_sup},   {"tail_argmax", b.tail_argmax}, {"lr_term", b.lr_term},
                     {"tail_term", b.tail_term}, {"decay_term", b.decay_term}, {"total", b.total},
                     {"provenance", to_string(b.provenance)}};
}

void to_json(nlohmann::json& j, const LrbParams& p) {
  j = nlohmann::json{{"alpha", p.alpha}, {"D", p.dimension}, {"g", p.g}, {"k", p.k}, {"u", p.u}, {"v", p.v()}};
  if (p.kappa_lr) j["kappa_lr"] = *p.kappa_lr;
  if (p.kappa_lr1) j["kappa_lr1"] = *p.kappa_lr1;
  if (p.kappa_lr2) j["kappa_lr2"] = *p.kappa_lr2;
  if (p.kappa_lr3) j["kappa_lr3"] = *p.kappa_lr3;
}

LrbParams lrb_params_from_json(const nlohmann::json& j) {
  LrbParams p;
  p.alpha = j.value("alpha", p.alpha);
  p.dimension = j.value("D", p.dimension);
  p.g = j.value("g", p.g);
  p.k = j.value("k", p.k);
  p.u = j.value("u", p.u);
  for (auto [key, slot] : {std::pair{"kappa_lr", &p.kappa_lr}, std::pair{"kappa_lr1", &p.kappa_lr1},
                           std::pair{"kappa_lr2", &p.kappa_lr2}, std::pair{"kappa_lr3", &p.kappa_lr3}}) {
    if (j.contains(key)) *slot = j.at(key).get<double>();
  }
  return p;
}

}  // namespace lrgibbs::bounds
