#include "lrgibbs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lrgibbs/errors.hpp"

namespace lrgibbs {

Lattice::Lattice(std::vector<int> extents) : extents_(std::move(extents)) {
  if (extents_.empty()) throw DomainError("lattice needs at least one dimension");
  strides_.assign(extents_.size(), 1);
  long long total = 1;
  for (int d = dimension() - 1; d >= 0; --d) {
    if (extents_[d] < 1) throw DomainError("lattice extents must be positive");
    strides_[d] = static_cast<int>(total);
    total *= extents_[d];
    if (total > std::numeric_limits<int>::max()) throw DomainError("lattice too large");
  }
  size_ = static_cast<int>(total);
}

void Lattice::check(Site s) const {
  if (!contains(s)) {
    throw DomainError("site id " + std::to_string(s) + " outside lattice of " +
                      std::to_string(size_) + " sites");
  }
}

std::vector<int> Lattice::coordinates(Site s) const {
  check(s);
  std::vector<int> c(extents_.size());
  for (int d = 0; d < dimension(); ++d) {
    c[d] = s / strides_[d];
    s %= strides_[d];
  }
  return c;
}

Site Lattice::site(std::span<const int> coords) const {
  if (static_cast<int>(coords.size()) != dimension()) throw DomainError("coordinate rank mismatch");
  Site s = 0;
  for (int d = 0; d < dimension(); ++d) {
    if (coords[d] < 0 || coords[d] >= extents_[d]) throw DomainError("coordinate out of range");
    s += coords[d] * strides_[d];
  }
  return s;
}

int Lattice::distance(Site a, Site b) const {
  check(a);
  check(b);
  int dist = 0;
  for (int d = 0; d < dimension(); ++d) {
    dist += std::abs(a / strides_[d] - b / strides_[d]);
    a %= strides_[d];
    b %= strides_[d];
  }
  return dist;
}

int Lattice::diameter() const {
  int sum = 0;
  for (int e : extents_) sum += e - 1;
  return sum;
}

Region::Region(std::vector<Site> sites) : sites_(std::move(sites)) {
  std::sort(sites_.begin(), sites_.end());
  if (std::adjacent_find(sites_.begin(), sites_.end()) != sites_.end()) {
    throw DomainError("region contains duplicate sites");
  }
  if (!sites_.empty() && sites_.front() < 0) throw DomainError("negative site id in region");
}

Region Region::interval(Site first, int count) {
  if (count < 0) throw DomainError("negative interval length");
  std::vector<Site> s(static_cast<std::size_t>(count));
  std::iota(s.begin(), s.end(), first);
  return Region(std::move(s));
}

bool Region::contains(Site s) const { return std::binary_search(sites_.begin(), sites_.end(), s); }

bool Region::contains(const Region& other) const {
  return std::includes(sites_.begin(), sites_.end(), other.sites_.begin(), other.sites_.end());
}

bool Region::intersects(const Region& other) const {
  auto a = sites_.begin();
  auto b = other.sites_.begin();
  while (a != sites_.end() && b != other.sites_.end()) {
    if (*a == *b) return true;
    if (*a < *b) ++a; else ++b;
  }
  return false;
}

bool Region::contiguous() const {
  return sites_.empty() || sites_.back() - sites_.front() + 1 == static_cast<int>(sites_.size());
}

Region region_union(const Region& a, const Region& b) {
  std::vector<Site> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return Region(std::move(out));
}

Region complement(const Lattice& lat, const Region& a) {
  std::vector<Site> out;
  for (Site s = 0; s < lat.size(); ++s) {
    if (!a.contains(s)) out.push_back(s);
  }
  return Region(std::move(out));
}

void validate(const Lattice& lat, const Region& a) {
  if (!a.empty() && !lat.contains(a.back())) {
    throw DomainError("region site " + std::to_string(a.back()) + " outside lattice");
  }
}

int distance_to(const Lattice& lat, const Region& a, Site x) {
  if (a.empty()) throw DomainError("distance to an empty region");
  int best = std::numeric_limits<int>::max();
  for (Site s : a) best = std::min(best, lat.distance(s, x));
  return best;
}

int region_distance(const Lattice& lat, const Region& a, const Region& b) {
  if (a.empty() || b.empty()) throw DomainError("distance between empty regions");
  int best = std::numeric_limits<int>::max();
  for (Site x : b) best = std::min(best, distance_to(lat, a, x));
  return best;
}

Region level_set(const Lattice& lat, const Region& a, int ell) {
  if (ell < 1) throw DomainError("level set index must be >= 1");
  validate(lat, a);
  std::vector<Site> out;
  for (Site x = 0; x < lat.size(); ++x) {
    if (!a.contains(x) && distance_to(lat, a, x) == ell) out.push_back(x);
  }
  return Region(std::move(out));
}

Region ball(const Lattice& lat, const Region& a, int ell) {
  if (ell < 0) throw DomainError("ball radius must be >= 0");
  validate(lat, a);
  std::vector<Site> out;
  if (ell == 0) return Region{};
  for (Site x = 0; x < lat.size(); ++x) {
    if (!a.contains(x) && distance_to(lat, a, x) <= ell) out.push_back(x);
  }
  return Region(std::move(out));
}

SurfaceBound surface_bound(int dimension, int ell) {
  if (dimension < 1 || ell < 1) throw DomainError("surface bound needs D >= 1 and ell >= 1");
  // binom(D + ell - 1, ell) = binom(D + ell - 1, D - 1) computed via lgamma for large arguments
  const double n = dimension + ell - 1;
  const double log_binom = std::lgamma(n + 1) - std::lgamma(ell + 1.0) - std::lgamma(dimension);
  const double binom = std::round(std::exp(log_binom));
  return {std::ldexp(binom, dimension), 2.0 * std::exp(2.0) * std::pow(n, dimension - 1)};
}

void to_json(nlohmann::json& j, const Lattice& lat) {
  j = nlohmann::json{{"dimension", lat.dimension()}, {"extents", lat.extents()}};
}

void from_json(const nlohmann::json& j, Lattice& lat) {
  auto extents = j.at("extents").get<std::vector<int>>();
  if (j.contains("dimension") && j.at("dimension").get<int>() != static_cast<int>(extents.size())) {
    throw DomainError("lattice dimension does not match extents");
  }
  lat = Lattice(std::move(extents));
}

void to_json(nlohmann::json& j, const Region& r) { j = r.sites(); }

void from_json(const nlohmann::json& j, Region& r) { r = Region(j.get<std::vector<Site>>()); }

}  // namespace lrgibbs
