#pragma once

#include <functional>
#include <vector>

namespace lrgibbs::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [a, b] (Newton iteration on P_n).
Rule gauss_legendre(int n, double a = -1.0, double b = 1.0);

double integrate(const Rule& rule, const std::function<double(double)>& f);

/// f_beta(t) = (2 / (beta pi)) log((e^{pi|t|/beta} + 1) / (e^{pi|t|/beta} - 1)).
/// Throws DomainError at t = 0 and for beta <= 0.
double f_beta(double beta, double t);

/// Integration controls for the belief-propagation filter.
struct QuadratureSpec {
  double eta_factor = 1e-6;     // eta = eta_factor * beta
  double horizon_factor = 50.0; // T = horizon_factor * beta
  int nodes = 2000;             // total nodes on [eta, T]
  double tolerance = 1e-8;      // allowed tail mass beyond T
};

/// Even-weight rule for integrals of f_beta(t) g(t) over the real line with g
/// even: the integral is approximated by origin * g(0) + sum_m weights[m] g(nodes[m]).
/// `origin` is the analytic mass of [-eta, eta]; nodes are positive.
struct FilterRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  double origin = 0.0;
  double tail_bound = 0.0;  // rigorous upper bound on the mass beyond |t| > T
  double beta = 0.0;

  /// approximates the integral of f_beta(t) cos(omega t).
  double transform(double omega) const;
  double total_mass() const;
};

/// Builds the rule; throws AccuracyError when the tail bound exceeds the tolerance.
FilterRule filter_rule(double beta, const QuadratureSpec& spec = {});

/// Upper bound on the integral of f_beta over [T, infinity).
double f_beta_tail_bound(double beta, double horizon);

}  // namespace lrgibbs::quad
