#include <doctest.h>

#include <cmath>

#include "lrgibbs/errors.hpp"
#include "lrgibbs/lattice.hpp"

using namespace lrgibbs;

TEST_CASE("chain and grid distances are graph distances") {
  const Lattice chain = Lattice::chain(7);
  CHECK(chain.distance(0, 6) == 6);
  CHECK(chain.diameter() == 6);
  const Lattice grid({4, 5});
  const std::vector<int> a{0, 0};
  const std::vector<int> b{3, 4};
  CHECK(grid.distance(grid.site(a), grid.site(b)) == 7);
  CHECK_THROWS_AS(chain.distance(0, 7), DomainError);
}

TEST_CASE("regions are sorted sets and reject out-of-range sites") {
  const Region r{4, 2};
  CHECK(r.sites() == std::vector<Site>{2, 4});
  CHECK_THROWS_AS(Region({1, 1}), DomainError);
  CHECK_FALSE(r.contiguous());
  CHECK(Region::interval(3, 3).contiguous());
  CHECK_THROWS(validate(Lattice::chain(3), Region{5}));
}

TEST_CASE("level sets partition the ball") {
  const Lattice grid({9, 9});
  const Region a{grid.site(std::vector<int>{4, 4})};
  std::size_t total = 0;
  for (int ell = 1; ell <= 3; ++ell) total += level_set(grid, a, ell).size();
  CHECK(total == ball(grid, a, 3).size());
  CHECK(level_set(grid, a, 1).size() == 4);
  CHECK(level_set(grid, a, 2).size() == 8);
}

TEST_CASE("surface bounds dominate enumeration in D <= 3") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int ell = 1; ell <= 5; ++ell) {
      const Lattice lat(std::vector<int>(dim, 2 * ell + 1));
      const Site c = lat.site(std::vector<int>(dim, ell));
      const double count = static_cast<double>(level_set(lat, Region{c}, ell).size());
      const auto b = surface_bound(dim, ell);
      CHECK(count <= b.binomial);
      CHECK(count <= b.power);
    }
  }
}

TEST_CASE("lattice and region JSON round trip") {
  const Lattice lat({3, 4});
  nlohmann::json j = lat;
  CHECK(j.get<Lattice>() == lat);
  const Region r{1, 5, 7};
  nlohmann::json jr = r;
  CHECK(jr.get<Region>() == r);
}
