#include "lrgibbs/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "lrgibbs/errors.hpp"

namespace lrgibbs::quad {

using std::numbers::pi;

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 1) p0 = 1.0;
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

Rule gauss_legendre(int n, double a, double b) {
  if (n < 1) throw DomainError("Gauss-Legendre needs at least one node");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

double integrate(const Rule& rule, const std::function<double(double)>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

double f_beta(double beta, double t) {
  if (!(beta > 0)) throw DomainError("f_beta needs beta > 0");
  if (t == 0.0) throw DomainError("f_beta is singular at t = 0");
  const double x = pi * std::abs(t) / beta;
  return 2.0 / (beta * pi) * std::log1p(2.0 / std::expm1(x));
}

double f_beta_tail_bound(double beta, double horizon) {
  // f_beta(t) <= (4 / (beta pi)) / (e^{pi t / beta} - 1), integrated in closed form.
  const double q = std::exp(-pi * horizon / beta);
  return -4.0 / (pi * pi) * std::log1p(-q);
}

double FilterRule::transform(double omega) const {
  double acc = origin;
  for (std::size_t m = 0; m < nodes.size(); ++m) acc += weights[m] * std::cos(omega * nodes[m]);
  return acc;
}

double FilterRule::total_mass() const {
  double acc = origin;
  for (double w : weights) acc += w;
  return acc;
}

FilterRule filter_rule(double beta, const QuadratureSpec& spec) {
  if (!(beta > 0)) throw DomainError("filter rule needs beta > 0");
  if (!(spec.eta_factor > 0) || spec.eta_factor >= 1.0) throw DomainError("eta_factor must lie in (0, 1)");
  if (!(spec.horizon_factor > 1.0)) throw DomainError("horizon_factor must exceed 1");
  if (spec.nodes < 16) throw DomainError("filter rule needs at least 16 nodes");

  FilterRule rule;
  rule.beta = beta;
  const double eta = spec.eta_factor * beta;
  const double horizon = spec.horizon_factor * beta;
  rule.tail_bound = 2.0 * f_beta_tail_bound(beta, horizon);
  if (rule.tail_bound > spec.tolerance) {
    throw AccuracyError("belief-propagation horizon too short: tail mass " + std::to_string(rule.tail_bound));
  }
  // Near 0, f_beta(t) = (2 / (beta pi)) log(2 beta / (pi t)) + O(t^2).
  rule.origin = 2.0 * 2.0 / (beta * pi) * eta * (std::log(2.0 * beta / (pi * eta)) + 1.0);

  // Geometric panels resolve the logarithm between eta and beta, unit panels
  // of width beta cover the exponential tail.
  std::vector<double> edges{eta};
  while (edges.back() * 10.0 < 0.999 * beta) edges.push_back(edges.back() * 10.0);
  const int unit_panels = static_cast<int>(std::ceil(spec.horizon_factor - 1.0 - 1e-9));
  for (int m = 0; m < unit_panels; ++m) edges.push_back(beta * (1.0 + m));
  edges.push_back(horizon);
  const int panels = static_cast<int>(edges.size()) - 1;
  const int per_panel = std::max(4, spec.nodes / panels);
  const Rule unit = gauss_legendre(per_panel);
  for (int p = 0; p < panels; ++p) {
    const double a = edges[p];
    const double b = edges[p + 1];
    for (int i = 0; i < per_panel; ++i) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * unit.nodes[i];
      const double w = 0.5 * (b - a) * unit.weights[i];
      rule.nodes.push_back(t);
      rule.weights.push_back(2.0 * w * f_beta(beta, t));
    }
  }
  return rule;
}

}  // namespace lrgibbs::quad
