#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrgibbs/lattice.hpp"

namespace lrgibbs::bounds {

enum class RegimeKind {
  high_temperature,     // beta < beta*, alpha > D; exponential envelope
  strong_2d_plus_1,     // alpha >= 2D + 1; p(t) / (d - v t)^alpha
  strong_2d_to_2d_plus_1,  // 2D < alpha <= 2D + 1; two-term polynomial envelope
};

const char* to_string(RegimeKind kind);
RegimeKind regime_from_string(const std::string& name);

struct LrbParams {
  std::optional<double> kappa_lr;   // exponential envelope
  std::optional<double> kappa_lr1;  // p(t) / (d - v t)^alpha envelope
  std::optional<double> kappa_lr2;  // two-term envelope, first term
  std::optional<double> kappa_lr3;  // two-term envelope, second term
  double alpha = 3.0;
  int dimension = 1;
  double g = 1.0;
  int k = 2;
  double u = 1.0;

  double v() const { return 2.0 * g * u; }
  double beta_star() const { return 1.0 / (8.0 * u * g * k); }
};

struct Regime {
  RegimeKind kind = RegimeKind::high_temperature;
  double beta = 0.0;             // used by the high-temperature preconditions
  std::optional<double> eps_t;   // two-term regime; defaults to default_eps_t
};

/// eps = 2 (D/(alpha - 2D) - floor(D/(alpha - 2D))).
double default_eps_t(double alpha, int dimension);

/// Throws DomainError when (alpha, D, beta) violate the regime's preconditions.
void check_regime(const Regime& regime, const LrbParams& p);

/// Regimes whose preconditions hold, in declaration order.
std::vector<RegimeKind> applicable_regimes(const LrbParams& p, double beta);

/// Decay exponent of the resulting LPPL bound: alpha, or alpha - D in the two-term regime.
double lppl_exponent(RegimeKind kind, double alpha, int dimension);

/// Commutator envelope per unit operator norms at time t and distance d.
double lrb_envelope(const LrbParams& p, const Regime& regime, double t, double d);

double decay_rhs(double K, double norm_a, double norm_b, double size_a, double size_b, int k, double d,
                 double alpha);
double lppl_rhs(double kappa_beta, double norm_a, double norm_v, double size_a, double size_b, int k, double d,
                double exponent);
double stability_rhs(double eps, double v, double u, double kappa_beta, double norm_a, int k, double size_a);

/// Riemann zeta for s > 1 to absolute accuracy ~1e-12 (series plus Euler-Maclaurin tail).
double zeta(double s);

double locind_rhs(double kappa_prime, double delta, double norm_a, double size_a, int k, double d, double alpha,
                  int dimension);

/// kappa'' = (2 beta g + 4 K'') 3^(alpha - 2D) 2.
double kappa_dprime(double beta, double g, double K_dprime, double alpha, int dimension);
double locind_to_decay_rhs(double kappa_dprime, double norm_a, double norm_b, double size_a, double size_b, int k,
                           double d, double alpha, int dimension);

/// Closed-form bound I_c(beta) on int_0^b e^{-mu t} g(t) / (1 - e^{-mu t}) dt, mu = 2 pi / beta,
/// valid for every b > 0.
double integral_I1(double beta, const Regime& regime, const LrbParams& p);
/// The integral itself by adaptive quadrature.
double integral_I1_quadrature(double beta, const Regime& regime, const LrbParams& p, double b);
/// The integrand's g(t) for the regime.
double envelope_growth(const Regime& regime, const LrbParams& p, double t);

/// (beta / 2 pi) e^{-2 pi b / beta} (1 + beta / (2 pi b)).
double integral_I2(double beta, double b);
/// (beta / 2 pi) log(1 / (1 - e^{-2 pi b / beta})).
double integral_I2_exact(double beta, double b);
double integral_I2_quadrature(double beta, double b);

struct DilogCheck {
  double quadrature = 0.0;
  double closed_form = 0.0;
};

/// int_0^inf log((e^{pi t/beta} + 1) / (e^{pi t/beta} - 1)) dt against beta pi / 4.
DilogCheck dilog_identity_check(double beta);

struct ConvolutionCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs * (1.0 + 1e-12); }
};

ConvolutionCheck convolution_check(const Lattice& lat, double alpha, Site i, Site k);
/// Same with a precomputed u constant.
ConvolutionCheck convolution_check(const Lattice& lat, double alpha, Site i, Site k, double u);

enum class Provenance { configured, assembled, fitted };
const char* to_string(Provenance p);

struct Constant {
  double value = 0.0;
  Provenance provenance = Provenance::configured;
};

struct BoundConstants {
  std::optional<Constant> K;             // decay of correlations
  std::optional<Constant> K_prime;       // LPPL
  std::optional<Constant> K_dprime;      // local indistinguishability
  std::optional<Constant> kappa_beta;
  std::optional<Constant> kappa_prime;
  std::optional<Constant> kappa_dprime;
};

/// Factors of kappa(beta) = c3(beta) + beta K with
///   c3 = 4 (kappa_eff I_c(beta) + (beta/pi) S(beta)),
///   S  = sup_{d >= 1} (1 + d)^a e^{-2 pi b/beta} (1 + beta/(2 pi b)), b = d / (2v),
/// where kappa_eff and a are the regime's envelope prefactor and decay exponent.
struct KappaBreakdown {
  double beta = 0.0;
  double kappa_eff = 0.0;
  double ic = 0.0;
  double tail_sup = 0.0;
  int tail_argmax = 1;
  double lr_term = 0.0;     // 4 kappa_eff I_c
  double tail_term = 0.0;   // 4 (beta/pi) S
  double decay_term = 0.0;  // beta K
  double total = 0.0;
  Provenance provenance = Provenance::assembled;
};

KappaBreakdown kappa_beta_assemble(const Regime& regime, const LrbParams& p, double beta,
                                   std::optional<double> decay_K);

void to_json(nlohmann::json& j, const KappaBreakdown& b);
void to_json(nlohmann::json& j, const LrbParams& p);
LrbParams lrb_params_from_json(const nlohmann::json& j);

}  // namespace lrgibbs::bounds
