#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrgibbs/bounds.hpp"
#include "lrgibbs/tensornet.hpp"

namespace lrgibbs::experiments {

enum class Engine { exact, tensornet, automatic };

const char* to_string(Engine e);
Engine engine_from_string(const std::string& name);

enum class Kind { stability, decay, locind, lrb_fit, bound_compare };

const char* to_string(Kind k);
Kind kind_from_string(const std::string& name);

struct SweepSpec {
  Kind kind = Kind::stability;
  Engine engine = Engine::automatic;
  std::vector<double> alphas{1.5};
  std::vector<double> betas{1.0};
  std::vector<double> epsilons{0.1};
  std::vector<int> sizes{8};
  double J = 1.0;
  double h = 0.25;
  tensornet::TebdConfig tebd;
  int auto_exact_max = 12;  // automatic engine: exact when N <= this
  int exact_capacity = 14;
  std::string output;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: available parallelism

  // decay: O_A = ZZ on (anchor, anchor + 1), 0-based
  int anchor = 3;
  double noise_floor = 1e-14;
  double fit_window = 0.25;  // fits use d >= fit_window * N

  // lrb_fit
  int lrb_site = 1;
  std::vector<int> lrb_distances{2, 3, 4, 5, 6};
  int lrb_time_points = 8;

  // bound_compare
  std::optional<double> kappa_beta;  // configured mode when set

  /// lists nonempty, values in range; throws ConfigError.
  void validate() const;
  Engine engine_for(int n) const;
};

SweepSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SweepSpec& s);
/// FNV-1a of the canonical JSON dump.
std::string spec_hash(const SweepSpec& s);

/// Rectangular table of reals. Text columns are not supported; categorical
/// values (status, flags) are encoded as numbers and documented in metadata.
struct DataTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;

  void add_row(std::vector<double> row);
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta(const std::string& key) const;

  /// '# key=value' lines, the header, then rows at 17 significant digits.
  void write_csv(std::ostream& out) const;
  void write_csv(const std::string& path) const;
  static DataTable read_csv(std::istream& in);
  static DataTable read_csv(const std::string& path);
};

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double x);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
  int n_points = 0;
};

/// Ordinary least squares with the Pearson correlation.
FitResult linear_fit(const std::vector<double>& xs, const std::vector<double>& ys);

/// Jobs run on a bounded pool; results keep submission order.
class WorkerPool {
 public:
  explicit WorkerPool(int workers = 0);
  int workers() const { return workers_; }
  void run(std::size_t jobs, const std::function<void(std::size_t)>& job) const;

 private:
  int workers_;
};

/// Middle pair (floor(N/2) - 1, floor(N/2)).
Region middle_pair(int n);

/// One ZZ expectation per (chain, beta) through the chosen engine.
struct Measurement {
  bool ok = true;
  std::string error;
  double value = 0.0;
};

struct StabilityResult {
  DataTable table;
  /// Per (N, alpha, beta): linear fit of abs_diff against epsilon.
  std::map<std::string, FitResult> epsilon_fits;
};

/// Rows [N, alpha, beta, epsilon, value_unperturbed, value_perturbed, abs_diff, engine, status].
StabilityResult stability_sweep(const SweepSpec& spec);

struct ProfileResult {
  DataTable table;
  std::map<std::string, FitResult> fits;  // keyed "N:<n>,alpha:<a>,beta:<b>"
};

/// Rows [N, alpha, beta, d, cov, abs_cov, flag]; flag 1 marks |cov| below the noise floor.
ProfileResult decay_profile(const SweepSpec& spec);

/// Rows [N, alpha, beta, d, value_full, value_restricted, abs_diff, region_size].
/// d = d(A, B^c); the last row per series is B = chain (abs_diff 0, d = buffer + 1).
ProfileResult locind_profile(const SweepSpec& spec);

/// Largest relative increase v[d+1] / v[d] - 1 over consecutive rows with d >= d_min.
double worst_increase(const std::vector<double>& ds, const std::vector<double>& values, double d_min);

struct LrbFitResult {
  DataTable table;    // rows [d, t, measured, envelope_unit, ratio]
  DataTable kappas;   // rows [d, kappa]
  double kappa_max = 0.0;
  double kappa_min = 0.0;
  double variation = 0.0;  // kappa_max / kappa_min
  FitResult fit;           // log kappa against log(1 + d)
};

/// Exact engine only. O_A = Z at lrb_site, O_B = Z at lrb_site + d; t on a grid in (0, d / (2v)].
LrbFitResult lrb_fit(const SweepSpec& spec);

struct BoundCompareResult {
  DataTable table;  // rows [N, alpha, beta, epsilon, measured, bound, ratio, violated]
  bool configured = false;
  bool all_hold = true;
  double inferred_kappa = 0.0;  // fitted mode: max measured / (bound at kappa = 1)
};

BoundCompareResult bound_compare(const SweepSpec& spec);

}  // namespace lrgibbs::experiments
