#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace lrgibbs::verify {

struct Check {
  std::string name;
  double value = 0.0;  // measured residual or ratio
  double limit = 0.0;  // pass when value <= limit
  bool passed = false;
};

struct SuiteReport {
  std::string suite;
  std::vector<Check> checks;
  std::vector<std::string> warnings;

  int passed() const;
  int failed() const;
  bool ok() const { return failed() == 0; }
};

void to_json(nlohmann::json& j, const SuiteReport& r);

/// Dilogarithm identity, f_beta normalization, exponential-derivative residual
/// on random N <= 3 instances, and contraction of the belief-propagation map.
SuiteReport identities(std::uint64_t seed = 7);

/// Duhamel double integral against direct differences (random N <= 5), and
/// tensornet against exact diagonalization at N = 8.
SuiteReport oracles(std::uint64_t seed = 7);

/// Closed-form integral bounds against quadrature, the convolution lemma on
/// finite lattices, and surface-cardinality bounds against enumeration.
/// `samples` random draws per regime; zero samples is a vacuous pass with a warning.
SuiteReport bounds_domination(int samples = 50, std::uint64_t seed = 7);

/// Dispatch by name: "identities", "oracles", "bounds-domination".
SuiteReport run_suite(const std::string& name, int samples = 50, std::uint64_t seed = 7);

}  // namespace lrgibbs::verify
