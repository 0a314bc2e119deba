#include "lrgibbs/tensornet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>

#include "lrgibbs/errors.hpp"

namespace lrgibbs::tensornet {

namespace {

using Gate4 = std::array<double, 16>;

Gate4 matmul(const Gate4& a, const Gate4& b) {
  Gate4 c{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int k = 0; k < 4; ++k) acc += a[i * 4 + k] * b[k * 4 + j];
      c[i * 4 + j] = acc;
    }
  }
  return c;
}

// diag(f_left) (x) diag(f_right) with 2-vectors of diagonal entries.
Gate4 diag_product(const std::array<double, 2>& left, const std::array<double, 2>& right) {
  Gate4 g{};
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) g[(2 * a + b) * 5] = left[a] * right[b];
  }
  return g;
}

// exp(-t h Z) with Z = diag(1, -1).
std::array<double, 2> field_factor(double t, double h) { return {std::exp(-t * h), std::exp(t * h)}; }

// exp(-t c X (x) X) = cosh(tc) I - sinh(tc) X (x) X.
Gate4 xx_gate(double t, double c) {
  Gate4 g{};
  const double ch = std::cosh(t * c);
  const double sh = std::sinh(t * c);
  for (int k = 0; k < 4; ++k) g[k * 5] = ch;
  // X (x) X maps |ab> to |(1-a)(1-b)>: index k <-> 3 - k.
  for (int k = 0; k < 4; ++k) g[k * 4 + (3 - k)] = -sh;
  return g;
}

std::size_t keep_count(const RVector& s, double cutoff, int chi_max, CutoffMode mode, double* discarded) {
  const auto n = static_cast<std::size_t>(s.size());
  const double total = s.squaredNorm();
  std::size_t keep = n;
  while (keep > 0 && s(static_cast<Eigen::Index>(keep) - 1) == 0.0) --keep;
  if (mode == CutoffMode::relative_singular) {
    const double floor = cutoff * (n ? s(0) : 0.0);
    while (keep > 1 && s(static_cast<Eigen::Index>(keep) - 1) < floor) --keep;
  } else {
    double tail = 0.0;
    while (keep > 1) {
      const double next = tail + s(static_cast<Eigen::Index>(keep) - 1) * s(static_cast<Eigen::Index>(keep) - 1);
      if (next > cutoff * total) break;
      tail = next;
      --keep;
    }
  }
  keep = std::min<std::size_t>(std::max<std::size_t>(keep, 1), static_cast<std::size_t>(std::max(chi_max, 1)));
  double dropped = 0.0;
  for (std::size_t j = keep; j < n; ++j) dropped += s(static_cast<Eigen::Index>(j)) * s(static_cast<Eigen::Index>(j));
  *discarded = total > 0.0 ? dropped / total : 0.0;
  return keep;
}

// Copies a (rows x cols) block into a freshly shaped matrix with the same storage order.
RMatrix reshape(const RMatrix& m, Eigen::Index rows, Eigen::Index cols) {
  RMatrix out(rows, cols);
  std::copy(m.data(), m.data() + m.size(), out.data());
  return out;
}

constexpr char kMagic[8] = {'L', 'R', 'G', 'M', 'P', 'O', '1', '\n'};

using Charges = std::vector<std::uint8_t>;
using Index = Eigen::Index;

// Parity of o + i for the combined physical index p = o + 2 i.
inline std::uint8_t local_parity(Index p) { return static_cast<std::uint8_t>((p ^ (p >> 1)) & 1); }

// Charges of the (left * 4) rows of a site tensor, row l + left * p.
Charges row_charges(const Charges& left, bool blocked) {
  const auto l = static_cast<Index>(left.size());
  Charges out(static_cast<std::size_t>(4 * l), 0);
  if (!blocked) return out;
  for (Index p = 0; p < 4; ++p) {
    for (Index j = 0; j < l; ++j) out[static_cast<std::size_t>(j + l * p)] = left[j] ^ local_parity(p);
  }
  return out;
}

// Charges of the (4 * right) columns of a left-unfolded tensor, column p + 4 r.
Charges column_charges(const Charges& right, bool blocked) {
  const auto r = static_cast<Index>(right.size());
  Charges out(static_cast<std::size_t>(4 * r), 0);
  if (!blocked) return out;
  for (Index j = 0; j < r; ++j) {
    for (Index p = 0; p < 4; ++p) out[static_cast<std::size_t>(p + 4 * j)] = right[j] ^ local_parity(p);
  }
  return out;
}

std::array<std::vector<Index>, 2> sectors(const Charges& q) {
  std::array<std::vector<Index>, 2> out;
  for (std::size_t i = 0; i < q.size(); ++i) out[q[i]].push_back(static_cast<Index>(i));
  return out;
}

struct Factors {
  RMatrix left;
  RMatrix right;
  Charges charges;  // of the new bond
};

// Thin QR per parity sector: m = left * right with `left` isometric.
Factors sector_qr(const RMatrix& m, const Charges& rq, const Charges& cq) {
  const auto rows = sectors(rq);
  const auto cols = sectors(cq);
  Index k = 0;
  for (int c = 0; c < 2; ++c) k += std::min<Index>(rows[c].size(), cols[c].size());
  if (k == 0) throw NumericalCollapse("MPO tensor has no populated parity sector");
  Factors f{RMatrix::Zero(m.rows(), k), RMatrix::Zero(k, m.cols()), Charges(static_cast<std::size_t>(k))};
  Index offset = 0;
  for (int c = 0; c < 2; ++c) {
    const auto kc = std::min<Index>(rows[c].size(), cols[c].size());
    if (kc == 0) continue;
    const RMatrix block = m(rows[c], cols[c]);
    Eigen::HouseholderQR<RMatrix> qr(block);
    const RMatrix q = qr.householderQ() * RMatrix::Identity(block.rows(), kc);
    const RMatrix r = qr.matrixQR().topRows(kc).triangularView<Eigen::Upper>();
    for (Index j = 0; j < kc; ++j) {
      for (std::size_t i = 0; i < rows[c].size(); ++i) f.left(rows[c][i], offset + j) = q(static_cast<Index>(i), j);
      for (std::size_t i = 0; i < cols[c].size(); ++i) f.right(offset + j, cols[c][i]) = r(j, static_cast<Index>(i));
      f.charges[static_cast<std::size_t>(offset + j)] = static_cast<std::uint8_t>(c);
    }
    offset += kc;
  }
  return f;
}

struct SectorBasis {
  RMatrix vectors;  // columns ordered by descending singular value
  RVector s;
  RMatrix vt;       // only filled by the SVD route
};

// Truncated factorization m = left * right per parity sector. The kept
// singular values sit in `right` when center_right, in `left` otherwise.
// The Gram route (dsyevd on m m^T or m^T m) resolves squared singular values
// down to ~1e-16 of the largest, ample for discarded-weight cutoffs; tighter
// or relative cutoffs take the SVD route.
Factors sector_split(const RMatrix& m, const Charges& rq, const Charges& cq, bool center_right, double cutoff,
                     int chi_max, CutoffMode mode, SvdRecord* rec) {
  const auto rows = sectors(rq);
  const auto cols = sectors(cq);
  const bool gram = mode == CutoffMode::discarded_weight && cutoff >= 1e-13;
  std::array<SectorBasis, 2> basis;
  std::array<RMatrix, 2> blocks;
  struct Candidate {
    double s;
    int sector;
    Index j;
  };
  std::vector<Candidate> all;
  for (int c = 0; c < 2; ++c) {
    if (rows[c].empty() || cols[c].empty()) continue;
    blocks[c] = m(rows[c], cols[c]);
    SectorBasis& b = basis[c];
    if (gram) {
      const RMatrix g = center_right ? RMatrix(blocks[c] * blocks[c].transpose())
                                     : RMatrix(blocks[c].transpose() * blocks[c]);
      const linalg::SymmetricEigen eig = linalg::eigh(g);
      const Index n = eig.values.size();
      const Index kc = std::min<Index>(rows[c].size(), cols[c].size());
      b.vectors = eig.vectors.rightCols(kc).rowwise().reverse();
      b.s.resize(kc);
      for (Index j = 0; j < kc; ++j) b.s(j) = std::sqrt(std::max(0.0, eig.values(n - 1 - j)));
    } else {
      linalg::Svd svd = linalg::svd(blocks[c]);
      b.vectors = center_right ? std::move(svd.u) : RMatrix(svd.vt.transpose());
      b.vt = center_right ? std::move(svd.vt) : std::move(svd.u);
      b.s = std::move(svd.s);
    }
    for (Index j = 0; j < b.s.size(); ++j) all.push_back({b.s(j), c, j});
  }
  std::stable_sort(all.begin(), all.end(), [](const Candidate& x, const Candidate& y) { return x.s > y.s; });
  RVector s(static_cast<Index>(all.size()));
  for (std::size_t i = 0; i < all.size(); ++i) s(static_cast<Index>(i)) = all[i].s;
  const auto k = static_cast<Index>(keep_count(s, cutoff, chi_max, mode, &rec->discarded_weight));
  rec->kept = static_cast<int>(k);

  Factors f{RMatrix::Zero(m.rows(), k), RMatrix::Zero(k, m.cols()), Charges(static_cast<std::size_t>(k))};
  for (int c = 0; c < 2; ++c) {
    std::vector<Index> pos;
    std::vector<Index> idx;
    for (Index i = 0; i < k; ++i) {
      if (all[i].sector != c) continue;
      pos.push_back(i);
      idx.push_back(all[i].j);
      f.charges[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(c);
    }
    if (pos.empty()) continue;
    const SectorBasis& b = basis[c];
    const RMatrix vec = b.vectors(Eigen::all, idx);
    // Side that keeps the vectors, and the projection carrying the weights.
    RMatrix iso = vec;
    RMatrix carried;
    if (gram) {
      carried = center_right ? RMatrix(vec.transpose() * blocks[c]) : RMatrix(blocks[c] * vec);
    } else {
      const RVector sv = b.s(idx);
      carried = center_right ? RMatrix(sv.asDiagonal() * b.vt(idx, Eigen::all))
                             : RMatrix(b.vt(Eigen::all, idx) * sv.asDiagonal());
    }
    for (std::size_t a = 0; a < pos.size(); ++a) {
      const auto ai = static_cast<Index>(a);
      if (center_right) {
        for (std::size_t i = 0; i < rows[c].size(); ++i) f.left(rows[c][i], pos[a]) = iso(static_cast<Index>(i), ai);
        for (std::size_t i = 0; i < cols[c].size(); ++i) f.right(pos[a], cols[c][i]) = carried(ai, static_cast<Index>(i));
      } else {
        for (std::size_t i = 0; i < rows[c].size(); ++i) f.left(rows[c][i], pos[a]) = carried(static_cast<Index>(i), ai);
        for (std::size_t i = 0; i < cols[c].size(); ++i) f.right(pos[a], cols[c][i]) = iso(static_cast<Index>(i), ai);
      }
    }
  }
  return f;
}

}  // namespace

void validate(const TebdConfig& cfg) {
  if (!(cfg.dbeta > 0)) throw DomainError("dbeta must be positive");
  if (!(cfg.cutoff >= 0) || cfg.cutoff >= 1) throw DomainError("cutoff must lie in [0, 1)");
  if (cfg.chi_max < 1) throw DomainError("chi_max must be positive");
  if (cfg.order != 1 && cfg.order != 2) throw DomainError("trotter order must be 1 or 2");
}

SwapSchedule build_swap_schedule(int n) {
  if (n < 2) throw DomainError("swap schedule needs N >= 2");
  SwapSchedule out;
  out.n = n;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  auto swap_at = [&](int p) {
    out.events.push_back({p, order[p], order[p + 1]});
    std::swap(order[p], order[p + 1]);
  };
  int lo = 0;
  int hi = n - 1;
  bool rightward = true;
  while (lo < hi) {
    if (rightward) {
      for (int p = lo; p < hi; ++p) swap_at(p);
      --hi;
    } else {
      for (int p = hi - 1; p >= lo; --p) swap_at(p);
      ++lo;
    }
    rightward = !rightward;
  }
  out.final_order = order;
  return out;
}

std::vector<int> net_permutation(const SwapSchedule& schedule) {
  std::vector<int> order(schedule.final_order.rbegin(), schedule.final_order.rend());
  return order;
}

std::vector<Gate> trotter_slice(const LrTfiChain& chain, double dbeta, int order) {
  if (!(dbeta >= 0)) throw DomainError("dbeta must be nonnegative");
  if (order != 1 && order != 2) throw DomainError("trotter order must be 1 or 2");
  const SwapSchedule schedule = build_swap_schedule(chain.n);
  const auto& events = schedule.events;
  std::vector<int> first(static_cast<std::size_t>(chain.n), -1);
  std::vector<int> last(static_cast<std::size_t>(chain.n), -1);
  for (int e = 0; e < static_cast<int>(events.size()); ++e) {
    for (int label : {events[e].left_label, events[e].right_label}) {
      if (first[label] < 0) first[label] = e;
      last[label] = e;
    }
  }
  const double pre_t = order == 2 ? 0.5 * dbeta : dbeta;
  const double post_t = order == 2 ? 0.5 * dbeta : 0.0;
  const std::array<double, 2> one{1.0, 1.0};
  std::vector<Gate> gates;
  gates.reserve(events.size());
  for (int e = 0; e < static_cast<int>(events.size()); ++e) {
    const auto& ev = events[e];
    auto pre = [&](int label) { return first[label] == e ? field_factor(pre_t, chain.h) : one; };
    auto post = [&](int label) { return last[label] == e ? field_factor(post_t, chain.h) : one; };
    const Gate4 g = matmul(diag_product(post(ev.left_label), post(ev.right_label)),
                           matmul(xx_gate(dbeta, chain.coupling(ev.left_label, ev.right_label)),
                                  diag_product(pre(ev.left_label), pre(ev.right_label))));
    gates.push_back({ev, g});
  }
  return gates;
}

std::vector<Gate> trotter_slice(const Hamiltonian& h, double dbeta, int order) {
  if (!h.chain()) throw DomainError("Trotter slices are implemented for the LR-TFI chain only");
  return trotter_slice(*h.chain(), dbeta, order);
}

Mpo Mpo::identity(int n) {
  if (n < 2) throw DomainError("identity MPO needs N >= 2");
  Mpo m;
  RMatrix site(4, 1);
  site << 1.0, 0.0, 0.0, 1.0;
  m.tensors_.assign(static_cast<std::size_t>(n), site / std::sqrt(2.0));
  m.charges_.assign(static_cast<std::size_t>(n + 1), Charges{0});
  m.log_scale_ = 0.5 * n * std::log(2.0);
  return m;
}

Mpo Mpo::from_tensors(std::vector<RMatrix> tensors, double log_scale, int center) {
  if (tensors.size() < 2) throw DomainError("MPO needs at least two sites");
  for (std::size_t s = 0; s < tensors.size(); ++s) {
    if (tensors[s].rows() % 4 != 0) throw DomainError("site tensor rows must be a multiple of 4");
    const Eigen::Index left = tensors[s].rows() / 4;
    if (s == 0 && left != 1) throw DomainError("left boundary bond must be 1");
    if (s > 0 && tensors[s - 1].cols() != left) throw DomainError("bond dimensions do not match");
  }
  if (tensors.back().cols() != 1) throw DomainError("right boundary bond must be 1");
  Mpo m;
  m.tensors_ = std::move(tensors);
  m.log_scale_ = log_scale;
  m.center_ = std::clamp(center, 0, m.size() - 1);
  m.blocked_ = m.infer_charges();
  if (!m.blocked_) m.reset_charges();
  return m;
}

bool Mpo::infer_charges() {
  const int n = size();
  std::vector<Charges> q(static_cast<std::size_t>(n + 1));
  q[0] = Charges{0};
  for (int s = 0; s < n; ++s) {
    const RMatrix& a = tensors_[s];
    const Charges rq = row_charges(q[s], true);
    Charges next(static_cast<std::size_t>(a.cols()), 0);
    for (Index r = 0; r < a.cols(); ++r) {
      Index arg = 0;
      const double peak = a.col(r).cwiseAbs().maxCoeff(&arg);
      if (peak == 0.0) continue;
      const std::uint8_t c = rq[static_cast<std::size_t>(arg)];
      for (Index i = 0; i < a.rows(); ++i) {
        if (rq[static_cast<std::size_t>(i)] != c && std::abs(a(i, r)) > 1e-12 * peak) return false;
      }
      next[static_cast<std::size_t>(r)] = c;
    }
    q[s + 1] = std::move(next);
  }
  charges_ = std::move(q);
  return true;
}

void Mpo::reset_charges() {
  charges_.assign(static_cast<std::size_t>(size() + 1), Charges{});
  charges_[0] = Charges{0};
  for (int s = 0; s < size(); ++s) charges_[s + 1] = Charges(static_cast<std::size_t>(right_dim(s)), 0);
}

void Mpo::set_blocked(bool on) {
  if (!on) {
    blocked_ = false;
    reset_charges();
    return;
  }
  if (!infer_charges()) {
    reset_charges();
    throw DomainError("MPO is not parity symmetric; blocking unavailable");
  }
  blocked_ = true;
}

std::vector<int> Mpo::bond_dims() const {
  std::vector<int> out;
  for (int s = 0; s + 1 < size(); ++s) out.push_back(right_dim(s));
  return out;
}

int Mpo::max_bond() const {
  int best = 1;
  for (int b : bond_dims()) best = std::max(best, b);
  return best;
}

std::pair<double, int> Mpo::log_trace() const {
  RVector v = RVector::Ones(1);
  double log_acc = log_scale_;
  for (int s = 0; s < size(); ++s) {
    const RMatrix& a = tensors_[s];
    const Eigen::Index l = a.rows() / 4;
    const RMatrix t = a.topRows(l) + a.bottomRows(l);
    RVector next = t.transpose() * v;
    const double scale = next.cwiseAbs().maxCoeff();
    if (scale == 0.0 || !std::isfinite(scale)) return {-INFINITY, 0};
    log_acc += std::log(scale);
    v = next / scale;
  }
  const double value = v(0);
  return {log_acc + std::log(std::abs(value)), value > 0 ? 1 : (value < 0 ? -1 : 0)};
}

double Mpo::trace() const {
  const auto [log_abs, sign] = log_trace();
  return sign * std::exp(log_abs);
}

RMatrix Mpo::to_dense(int max_sites) const {
  const int n = size();
  if (n > max_sites) throw CapacityError("dense MPO reconstruction limited to " + std::to_string(max_sites) + " sites");
  // acc rows: combined physical index with earlier sites fastest (p = o + 2 i per site).
  RMatrix acc = tensors_[0];
  for (int s = 1; s < n; ++s) {
    const RMatrix& a = tensors_[s];
    const Eigen::Index l = a.rows() / 4;
    const Eigen::Index rows = acc.rows();
    RMatrix next(rows * 4, a.cols());
    for (int p = 0; p < 4; ++p) next.middleRows(rows * p, rows) = acc * a.middleRows(l * p, l);
    acc = std::move(next);
  }
  const Eigen::Index dim = Eigen::Index{1} << n;
  RMatrix out(dim, dim);
  const double scale = std::exp(log_scale_);
  for (Eigen::Index q = 0; q < acc.rows(); ++q) {
    Eigen::Index row = 0;
    Eigen::Index col = 0;
    for (int s = 0; s < n; ++s) {
      const Eigen::Index p = (q >> (2 * s)) & 3;
      row |= (p & 1) << (n - 1 - s);
      col |= (p >> 1) << (n - 1 - s);
    }
    out(row, col) = scale * acc(q, 0);
  }
  return out;
}

void Mpo::move_center(int target) {
  if (target < 0 || target >= size()) throw DomainError("center target out of range");
  while (center_ < target) {
    const int c = center_;
    RMatrix& a = tensors_[c];
    RMatrix& b = tensors_[c + 1];
    Factors f = sector_qr(a, row_charges(charges_[c], blocked_), charges_[c + 1]);
    const Index k = f.left.cols();
    const Index bl = b.rows() / 4;
    const Eigen::Map<const RMatrix> bv(b.data(), bl, 4 * b.cols());
    b = reshape(f.right * bv, k * 4, b.cols());
    a = std::move(f.left);
    charges_[c + 1] = std::move(f.charges);
    ++center_;
  }
  while (center_ > target) {
    const int c = center_;
    RMatrix& a = tensors_[c - 1];
    RMatrix& b = tensors_[c];
    const Index bl = b.rows() / 4;
    const Eigen::Map<const RMatrix> bv(b.data(), bl, 4 * b.cols());
    const RMatrix bt = bv.transpose();
    Factors f = sector_qr(bt, column_charges(charges_[c + 1], blocked_), charges_[c]);
    const Index k = f.left.cols();
    b = reshape(RMatrix(f.left.transpose()), k * 4, b.cols());
    a = a * f.right.transpose();
    charges_[c] = std::move(f.charges);
    --center_;
  }
}

void Mpo::canonicalize(int target) {
  center_ = size() - 1;
  move_center(0);
  move_center(target);
}

SvdRecord Mpo::apply_gate(int p, const std::array<double, 16>& gate, bool swap, bool center_right, double cutoff,
                          int chi_max, CutoffMode mode) {
  if (p < 0 || p + 1 >= size()) throw DomainError("gate position out of range");
  if (center_ != p && center_ != p + 1) move_center(p);
  RMatrix& a = tensors_[p];
  RMatrix& b = tensors_[p + 1];
  const Eigen::Index la = a.rows() / 4;
  const Eigen::Index m = a.cols();
  const Eigen::Index rb = b.cols();
  const Eigen::Map<const RMatrix> bv(b.data(), m, 4 * rb);
  const RMatrix theta = a * bv;  // row l + la * p1, column p2 + 4 r

  RMatrix out(la * 4, 4 * rb);
  double v[4];
  for (Eigen::Index r = 0; r < rb; ++r) {
    for (int i2 = 0; i2 < 2; ++i2) {
      for (int i1 = 0; i1 < 2; ++i1) {
        for (Eigen::Index l = 0; l < la; ++l) {
          for (int o1 = 0; o1 < 2; ++o1) {
            for (int o2 = 0; o2 < 2; ++o2) v[2 * o1 + o2] = theta(l + la * (o1 + 2 * i1), (o2 + 2 * i2) + 4 * r);
          }
          for (int o1 = 0; o1 < 2; ++o1) {
            for (int o2 = 0; o2 < 2; ++o2) {
              const int row = 2 * o1 + o2;
              const double w = gate[row * 4] * v[0] + gate[row * 4 + 1] * v[1] + gate[row * 4 + 2] * v[2] +
                               gate[row * 4 + 3] * v[3];
              if (swap) out(l + la * (o2 + 2 * i2), (o1 + 2 * i1) + 4 * r) = w;
              else out(l + la * (o1 + 2 * i1), (o2 + 2 * i2) + 4 * r) = w;
            }
          }
        }
      }
    }
  }

  SvdRecord rec;
  Factors f = sector_split(out, row_charges(charges_[p], blocked_), column_charges(charges_[p + 2], blocked_),
                           center_right, cutoff, chi_max, mode, &rec);
  RMatrix& carrier = center_right ? f.right : f.left;
  const double norm = carrier.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalCollapse("MPO norm vanished during truncation");
  carrier /= norm;
  log_scale_ += std::log(norm);
  const Index k = f.left.cols();
  a = std::move(f.left);
  b = reshape(f.right, k * 4, rb);
  charges_[p + 1] = std::move(f.charges);
  center_ = center_right ? p + 1 : p;
  return rec;
}

void Mpo::mirror() {
  std::reverse(tensors_.begin(), tensors_.end());
  const int n = size();
  const std::uint8_t total = charges_[n].empty() ? 0 : charges_[n][0];
  std::vector<Charges> q(static_cast<std::size_t>(n + 1));
  for (int b = 0; b <= n; ++b) {
    q[b] = charges_[n - b];
    for (auto& c : q[b]) c ^= total;
  }
  charges_ = std::move(q);
  for (RMatrix& a : tensors_) {
    const Eigen::Index l = a.rows() / 4;
    const Eigen::Index r = a.cols();
    RMatrix t(r * 4, l);
    for (int p = 0; p < 4; ++p) t.middleRows(r * p, r) = a.middleRows(l * p, l).transpose();
    a = std::move(t);
  }
  center_ = size() - 1 - center_;
}

void Mpo::normalize() {
  const double norm = tensors_[center_].norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalCollapse("MPO norm vanished");
  tensors_[center_] /= norm;
  log_scale_ += std::log(norm);
}

void Mpo::save(const std::string& path, const nlohmann::json& extra) const {
  nlohmann::json header = extra;
  header["N"] = size();
  header["bond_dims"] = bond_dims();
  header["steps_done"] = steps_;
  header["beta"] = beta_;
  header["log_scale"] = log_scale_;
  header["center"] = center_;
  const std::string text = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof kMagic);
  const auto len = static_cast<std::uint64_t>(text.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const RMatrix& a : tensors_) {
    out.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
  }
  if (!out) throw ConfigError("failed writing checkpoint: " + path);
}

Mpo Mpo::load(const std::string& path, nlohmann::json* header_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open checkpoint: " + path);
  char magic[sizeof kMagic];
  in.read(magic, sizeof magic);
  if (!in || !std::equal(magic, magic + sizeof magic, kMagic)) throw ConfigError("not an MPO checkpoint: " + path);
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1U << 26)) throw ConfigError("corrupt checkpoint header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  const nlohmann::json header = nlohmann::json::parse(text);
  const int n = header.at("N").get<int>();
  const auto bonds = header.at("bond_dims").get<std::vector<int>>();
  if (n < 2 || static_cast<int>(bonds.size()) != n - 1) throw ConfigError("checkpoint bond list does not match N");
  std::vector<RMatrix> tensors;
  for (int s = 0; s < n; ++s) {
    const int l = s == 0 ? 1 : bonds[s - 1];
    const int r = s == n - 1 ? 1 : bonds[s];
    RMatrix a(4 * l, r);
    in.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(a.size() * sizeof(double)));
    if (!in) throw ConfigError("truncated checkpoint: " + path);
    tensors.push_back(std::move(a));
  }
  Mpo m = from_tensors(std::move(tensors), header.at("log_scale").get<double>(), header.value("center", 0));
  m.set_progress(header.value("beta", 0.0), header.value("steps_done", 0L));
  if (header_out) *header_out = header;
  return m;
}

TruncationReport truncate(Mpo& mpo, double cutoff, int chi_max, CutoffMode mode) {
  if (!(cutoff >= 0) || cutoff >= 1) throw DomainError("cutoff must lie in [0, 1)");
  if (chi_max < 1) throw DomainError("chi_max must be positive");
  TruncationReport rep;
  mpo.canonicalize(0);
  // An identity gate without swap turns apply_gate into a plain two-site split.
  std::array<double, 16> id{};
  for (int k = 0; k < 4; ++k) id[k * 5] = 1.0;
  for (int p = 0; p + 1 < mpo.size(); ++p) {
    const SvdRecord rec = mpo.apply_gate(p, id, false, true, cutoff, chi_max, mode);
    rep.discarded.push_back(rec.discarded_weight);
    rep.total += rec.discarded_weight;
  }
  return rep;
}

EvolveReport evolve(Mpo& mpo, const LrTfiChain& chain, double beta_target, const TebdConfig& cfg,
                    const StepObserver& observer) {
  validate(cfg);
  if (mpo.size() != chain.n) throw DomainError("MPO size does not match the chain");
  const double start = mpo.beta();
  if (beta_target < start - 1e-12) throw DomainError("target beta lies behind the current state");
  EvolveReport rep;
  const double span = std::max(0.0, beta_target - start);
  rep.steps = static_cast<long>(std::floor(span / cfg.dbeta + 1e-9));
  rep.rounding_remainder = span - rep.steps * cfg.dbeta;
  rep.rounded = rep.rounding_remainder > 1e-12;
  rep.beta = start;
  rep.max_bond = mpo.max_bond();
  if (rep.steps == 0) return rep;

  const std::vector<Gate> gates = trotter_slice(chain, cfg.dbeta, cfg.order);
  const long base_steps = mpo.steps_done();
  for (long step = 0; step < rep.steps; ++step) {
    mpo.move_center(0);
    double slice_weight = 0.0;
    for (std::size_t g = 0; g < gates.size(); ++g) {
      const int p = gates[g].event.position;
      const bool right = g + 1 < gates.size() && gates[g + 1].event.position > p;
      const SvdRecord rec = mpo.apply_gate(p, gates[g].matrix, true, right, cfg.cutoff, cfg.chi_max, cfg.mode);
      slice_weight += rec.discarded_weight;
      rep.max_discarded = std::max(rep.max_discarded, rec.discarded_weight);
    }
    mpo.mirror();
    rep.total_discarded += slice_weight;
    rep.step_discarded.push_back(slice_weight);
    rep.max_bond = std::max(rep.max_bond, mpo.max_bond());
    rep.beta = start + (step + 1) * cfg.dbeta;
    mpo.set_progress(rep.beta, base_steps + step + 1);
    if (observer) observer(mpo, rep);
  }
  return rep;
}

Environment::Environment(const Mpo& mpo) : mpo_(&mpo) {
  const int n = mpo.size();
  left_.resize(static_cast<std::size_t>(n));
  right_.resize(static_cast<std::size_t>(n));
  left_[0] = RVector::Ones(1);
  for (int s = 0; s + 1 < n; ++s) {
    const RMatrix& a = mpo.tensor(s);
    const Eigen::Index l = a.rows() / 4;
    RVector next = (a.topRows(l) + a.bottomRows(l)).transpose() * left_[s];
    const double scale = next.cwiseAbs().maxCoeff();
    left_[s + 1] = scale > 0 ? RVector(next / scale) : next;
  }
  right_[n - 1] = RVector::Ones(1);
  for (int s = n - 1; s > 0; --s) {
    const RMatrix& a = mpo.tensor(s);
    const Eigen::Index l = a.rows() / 4;
    RVector next = (a.topRows(l) + a.bottomRows(l)) * right_[s];
    const double scale = next.cwiseAbs().maxCoeff();
    right_[s - 1] = scale > 0 ? RVector(next / scale) : next;
  }
}

Environment::Value Environment::evaluate(std::span<const PlacedObservable> factors) const {
  const int n = mpo_->size();
  std::vector<const PlacedObservable*> order;
  for (const auto& f : factors) {
    if (f.support.empty()) throw DomainError("observable with empty support");
    if (!f.support.contiguous()) throw UnsupportedError("MPO expectations need contiguous supports");
    if (f.support.back() >= n) throw DomainError("observable outside the chain");
    order.push_back(&f);
  }
  std::sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->support.front() < b->support.front(); });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (order[k]->support.front() <= order[k - 1]->support.back()) throw DomainError("factors overlap");
  }
  if (order.empty()) return {1.0, 0.0};

  const int first = order.front()->support.front();
  const int last = order.back()->support.back();
  // Numerator (real and imaginary parts of O) and denominator share environments.
  RVector num_re = left_[first];
  RVector num_im = RVector::Zero(num_re.size());
  RVector den = left_[first];
  std::size_t next = 0;
  int s = first;
  while (s <= last) {
    const RMatrix& a = mpo_->tensor(s);
    const Eigen::Index l = a.rows() / 4;
    const RMatrix t = a.topRows(l) + a.bottomRows(l);
    den = t.transpose() * den;
    if (next < order.size() && order[next]->support.front() == s) {
      const PlacedObservable& f = *order[next];
      const int w = static_cast<int>(f.support.size());
      // e_re/e_im rows: combined physical index of the window so far (first site fastest).
      RMatrix e_re = num_re.transpose();
      RMatrix e_im = num_im.transpose();
      for (int k = 0; k < w; ++k) {
        const RMatrix& b = mpo_->tensor(s + k);
        const Eigen::Index bl = b.rows() / 4;
        const Eigen::Map<const RMatrix> bv(b.data(), bl, 4 * b.cols());
        e_re = reshape(RMatrix(e_re * bv), e_re.rows() * 4, b.cols());
        e_im = reshape(RMatrix(e_im * bv), e_im.rows() * 4, b.cols());
        if (k > 0) {
          const RMatrix tb = b.topRows(bl) + b.bottomRows(bl);
          den = tb.transpose() * den;
        }
      }
      // tr[rho O] = sum rho_{o,i} O_{i,o}; O is indexed big-endian over its sites.
      const Eigen::Index combos = e_re.rows();
      RVector o_re(combos);
      RVector o_im(combos);
      for (Eigen::Index q = 0; q < combos; ++q) {
        Eigen::Index row = 0;
        Eigen::Index col = 0;
        for (int k = 0; k < w; ++k) {
          const Eigen::Index p = (q >> (2 * k)) & 3;
          col |= (p & 1) << (w - 1 - k);   // out index o
          row |= (p >> 1) << (w - 1 - k);  // in index i
        }
        o_re(q) = f.matrix(row, col).real();
        o_im(q) = f.matrix(row, col).imag();
      }
      // (e_re + i e_im) contracted with (o_re + i o_im); the state part is real, so e_im only
      // carries earlier imaginary factors.
      const RVector new_re = e_re.transpose() * o_re - e_im.transpose() * o_im;
      const RVector new_im = e_re.transpose() * o_im + e_im.transpose() * o_re;
      num_re = new_re;
      num_im = new_im;
      s += w;
      ++next;
    } else {
      num_re = t.transpose() * num_re;
      num_im = t.transpose() * num_im;
      ++s;
    }
    const double scale = den.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !std::isfinite(scale)) throw NumericalCollapse("trace vanished in environment contraction");
    den /= scale;
    num_re /= scale;
    num_im /= scale;
  }
  const RVector& r = right_[last];
  const double d = den.dot(r);
  if (d == 0.0) throw NumericalCollapse("MPO trace is zero");
  return {num_re.dot(r) / d, num_im.dot(r) / d};
}

double Environment::expectation(const PlacedObservable& o) const {
  const Value v = evaluate(std::span<const PlacedObservable>(&o, 1));
  if (std::abs(v.imag) > 1e-8 * std::max(1.0, o.norm())) {
    throw AccuracyError("MPO expectation has imaginary residue " + std::to_string(v.imag));
  }
  return v.real;
}

double Environment::covariance(const PlacedObservable& a, const PlacedObservable& b) const {
  const std::array<PlacedObservable, 2> both{a, b};
  return evaluate(both).real - expectation(a) * expectation(b);
}

double mpo_expectation(const Mpo& mpo, const PlacedObservable& o) { return Environment(mpo).expectation(o); }

}  // namespace lrgibbs::tensornet
