#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/experiments.hpp"

using namespace lrgibbs;
using namespace lrgibbs::experiments;

namespace {

std::string body(const DataTable& t) {
  DataTable copy = t;
  copy.metadata.clear();
  std::ostringstream out;
  copy.write_csv(out);
  return out.str();
}

}  // namespace

TEST_CASE("linear fit") {
  const FitResult f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r == doctest::Approx(1.0));
  CHECK(linear_fit({0, 1, 2}, {0, -1, -2}).r == doctest::Approx(-1.0));
  CHECK_THROWS_AS(linear_fit({1, 1, 1}, {0, 1, 2}), DomainError);
  CHECK_THROWS_AS(linear_fit({1}, {0}), DomainError);
}

TEST_CASE("CSV round trip keeps metadata and every digit") {
  DataTable t;
  t.columns = {"a", "b"};
  t.add_row({0.1, -1.0 / 3.0});
  t.add_row({1e-300, std::nan("")});
  t.set_meta("kind", "unit");
  std::stringstream io;
  t.write_csv(io);
  const DataTable back = DataTable::read_csv(io);
  CHECK(back.columns == t.columns);
  CHECK(back.meta("kind") == "unit");
  CHECK(back.rows[0][1] == t.rows[0][1]);
  CHECK(back.rows[1][0] == t.rows[1][0]);
  CHECK(std::isnan(back.rows[1][1]));
  CHECK_THROWS_AS(t.add_row({1.0}), DomainError);
  CHECK_THROWS_AS(t.set_meta("a=b", "c"), DomainError);
}

TEST_CASE("spec JSON: round trip, unknown fields, validation") {
  SweepSpec s;
  s.kind = Kind::decay;
  s.sizes = {10, 12};
  s.tebd.chi_max = 64;
  s.kappa_beta = 2.5;
  const SweepSpec back = spec_from_json(to_json(s));
  CHECK(spec_hash(back) == spec_hash(s));
  CHECK(back.kappa_beta == 2.5);
  CHECK_THROWS_AS(spec_from_json({{"alpha", {1.0}}}), ConfigError);
  CHECK_THROWS_AS(spec_from_json({{"betas", {-1.0}}}), ConfigError);
  CHECK_THROWS_AS(spec_from_json({{"tebd", {{"dbeta", 0.0}}}}), ConfigError);
  s.workers = 3;
  s.output = "elsewhere";
  CHECK(spec_hash(s) == spec_hash(back));
}

TEST_CASE("automatic engine selection") {
  SweepSpec s;
  CHECK(s.engine_for(12) == Engine::exact);
  CHECK(s.engine_for(13) == Engine::tensornet);
  s.engine = Engine::exact;
  CHECK(s.engine_for(40) == Engine::exact);
  CHECK(middle_pair(9) == Region{3, 4});
}

TEST_CASE("stability sweep: zero shift, determinism, failures recorded") {
  SweepSpec s;
  s.sizes = {4, 6};
  s.alphas = {1.5, 3.0};
  s.betas = {1.0, 0.5};
  s.epsilons = {0.0, 0.05, 0.1};
  s.workers = 1;
  const StabilityResult a = stability_sweep(s);
  CHECK(a.table.rows.size() == 2 * 2 * 2 * 3);
  for (const auto& r : a.table.rows) {
    if (r[a.table.column_index("epsilon")] == 0.0) CHECK(r[a.table.column_index("abs_diff")] < 1e-10);
  }
  s.workers = 4;
  CHECK(body(stability_sweep(s).table) == body(a.table));

  s.engine = Engine::exact;
  s.exact_capacity = 5;
  const StabilityResult failed = stability_sweep(s);
  CHECK(failed.table.rows.size() == a.table.rows.size());
  int failures = 0;
  for (const auto& r : failed.table.rows) failures += r[failed.table.column_index("status")] == 1.0;
  CHECK(failures == 2 * 2 * 3);
}

TEST_CASE("exact and tensornet engines agree on a small sweep") {
  SweepSpec s;
  s.sizes = {6};
  s.alphas = {1.5};
  s.betas = {1.0};
  s.epsilons = {0.1};
  s.tebd.dbeta = 0.01;
  s.engine = Engine::exact;
  const auto e = stability_sweep(s).table;
  s.engine = Engine::tensornet;
  const auto t = stability_sweep(s).table;
  const auto c = e.column_index("value_perturbed");
  CHECK(std::abs(e.rows[0][c] - t.rows[0][c]) < 1e-4);
  CHECK(t.rows[0][t.column_index("engine")] == 1.0);
}

TEST_CASE("decay profile at infinite temperature is flat zero and flagged") {
  SweepSpec s;
  s.sizes = {8};
  s.betas = {0.0, 1.0};
  s.anchor = 1;
  const ProfileResult r = decay_profile(s);
  const auto beta = r.table.column("beta");
  const auto cov = r.table.column("abs_cov");
  const auto flag = r.table.column("flag");
  for (std::size_t i = 0; i < beta.size(); ++i) {
    if (beta[i] == 0.0) {
      CHECK(cov[i] < 1e-12);
      CHECK(flag[i] == 1.0);
    }
  }
  CHECK(r.fits.size() == 1);
}

TEST_CASE("local indistinguishability: the full region reproduces the global state") {
  SweepSpec s;
  s.sizes = {8};
  s.alphas = {3.0};
  const ProfileResult r = locind_profile(s);
  const auto& last = r.table.rows.back();
  CHECK(last[r.table.column_index("region_size")] == 8.0);
  CHECK(last[r.table.column_index("abs_diff")] == 0.0);
  CHECK(r.table.rows.size() == 4);
}

TEST_CASE("worst increase statistic") {
  CHECK(worst_increase({1, 2, 3, 4}, {1.0, 0.5, 0.25, 0.3}, 2.0) == doctest::Approx(0.2));
  CHECK(worst_increase({1, 2, 3}, {1.0, 2.0, 0.5}, 2.0) < 0.0);
}

TEST_CASE("LR fit: bounded commutators and capacity limit") {
  SweepSpec s;
  s.sizes = {8};
  s.alphas = {3.0};
  s.lrb_time_points = 4;
  const LrbFitResult r = lrb_fit(s);
  for (double m : r.table.column("measured")) CHECK(m <= 2.0 + 1e-12);
  CHECK(r.variation >= 1.0);
  CHECK(r.kappas.rows.size() == 5);
  s.sizes = {12};
  CHECK_THROWS_AS(lrb_fit(s), CapacityError);
}

TEST_CASE("bound comparison modes") {
  SweepSpec s;
  s.sizes = {6};
  s.alphas = {3.0};
  s.epsilons = {0.0, 0.1};
  const BoundCompareResult fitted = bound_compare(s);
  CHECK_FALSE(fitted.configured);
  CHECK(fitted.inferred_kappa > 0.0);
  CHECK(fitted.table.rows[0][fitted.table.column_index("bound")] == 0.0);
  s.kappa_beta = 10.0 * fitted.inferred_kappa;
  CHECK(bound_compare(s).all_hold);
  s.kappa_beta = 0.1 * fitted.inferred_kappa;
  CHECK_FALSE(bound_compare(s).all_hold);
}

TEST_CASE("worker pool keeps results in submission order") {
  std::vector<int> out(100, -1);
  WorkerPool(4).run(out.size(), [&](std::size_t i) { out[i] = static_cast<int>(i * i); });
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == static_cast<int>(i * i));
  CHECK_THROWS_AS(WorkerPool(2).run(3, [](std::size_t i) { if (i == 1) throw DomainError("x"); }), DomainError);
}
