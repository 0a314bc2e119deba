#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <json.hpp>

namespace lrgibbs {

using Site = int;

/// Finite hypercubic lattice with open boundaries. Sites are numbered
/// row-major over coordinates (last coordinate fastest).
class Lattice {
 public:
  Lattice() : Lattice(std::vector<int>{1}) {}
  explicit Lattice(std::vector<int> extents);
  static Lattice chain(int n) { return Lattice({n}); }

  int dimension() const { return static_cast<int>(extents_.size()); }
  const std::vector<int>& extents() const { return extents_; }
  int size() const { return size_; }
  bool contains(Site s) const { return s >= 0 && s < size_; }

  std::vector<int> coordinates(Site s) const;
  Site site(std::span<const int> coords) const;

  /// Manhattan distance; throws DomainError for invalid ids.
  int distance(Site a, Site b) const;

  /// Largest distance between any two sites.
  int diameter() const;

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  void check(Site s) const;

  std::vector<int> extents_;
  std::vector<int> strides_;
  int size_ = 1;
};

/// Sorted, duplicate-free set of site ids.
class Region {
 public:
  Region() = default;
  Region(std::initializer_list<Site> sites) : Region(std::vector<Site>(sites)) {}
  explicit Region(std::vector<Site> sites);

  /// Contiguous block [first, first + count).
  static Region interval(Site first, int count);
  static Region all(const Lattice& lat) { return interval(0, lat.size()); }

  const std::vector<Site>& sites() const { return sites_; }
  std::size_t size() const { return sites_.size(); }
  bool empty() const { return sites_.empty(); }
  bool contains(Site s) const;
  bool contains(const Region& other) const;
  bool intersects(const Region& other) const;
  bool contiguous() const;
  Site front() const { return sites_.front(); }
  Site back() const { return sites_.back(); }

  auto begin() const { return sites_.begin(); }
  auto end() const { return sites_.end(); }

  friend bool operator==(const Region&, const Region&) = default;

 private:
  std::vector<Site> sites_;
};

Region region_union(const Region& a, const Region& b);
Region complement(const Lattice& lat, const Region& a);
void validate(const Lattice& lat, const Region& a);

/// Distance from a nonempty region to a single site.
int distance_to(const Lattice& lat, const Region& a, Site x);
int region_distance(const Lattice& lat, const Region& a, const Region& b);

/// Complement sites at exactly distance `ell` from A (ell >= 1).
Region level_set(const Lattice& lat, const Region& a, int ell);
/// Complement sites within distance `ell` of A; A itself is excluded.
Region ball(const Lattice& lat, const Region& a, int ell);

struct SurfaceBound {
  double binomial;  // 2^D * binom(D + ell - 1, ell)
  double power;     // 2 e^2 (D + ell - 1)^(D - 1)
};

/// Upper bounds on the number of sites at graph distance exactly `ell` from a
/// single site in the infinite D-dimensional hypercubic lattice.
SurfaceBound surface_bound(int dimension, int ell);

void to_json(nlohmann::json& j, const Lattice& lat);
void from_json(const nlohmann::json& j, Lattice& lat);
void to_json(nlohmann::json& j, const Region& r);
void from_json(const nlohmann::json& j, Region& r);

}  // namespace lrgibbs
