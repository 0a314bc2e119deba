#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lrgibbs/linalg.hpp"
#include "lrgibbs/model.hpp"

namespace lrgibbs::tensornet {

enum class CutoffMode {
  discarded_weight,  // drop the tail while sum(dropped s^2) / sum(s^2) <= cutoff
  relative_singular, // drop s_j < cutoff * s_0
};

struct TebdConfig {
  double dbeta = 1e-3;
  double cutoff = 1e-12;
  int chi_max = 128;
  int order = 2;
  CutoffMode mode = CutoffMode::discarded_weight;
};

void validate(const TebdConfig& cfg);

/// One adjacent transposition of the swap network. The labels are the logical
/// sites sitting at `position` and `position + 1` before the swap; their
/// interaction gate is applied at the same time.
struct SwapEvent {
  int position;
  int left_label;
  int right_label;
};

/// Cocktail-shaker network: alternating sweeps that reverse the chain, so every
/// pair becomes adjacent exactly once. The reversed order is undone for free by
/// mirroring the tensor list (Mpo::mirror).
struct SwapSchedule {
  int n = 0;
  std::vector<SwapEvent> events;
  std::vector<int> final_order;  // label at each position after the events
};

SwapSchedule build_swap_schedule(int n);

/// Label at each position after the schedule and the closing mirror; the identity for a valid schedule.
std::vector<int> net_permutation(const SwapSchedule& schedule);

/// Interaction gate of one event, followed by a swap of the two positions.
/// `matrix` is row-major over (o_left, o_right) with o_left most significant.
struct Gate {
  SwapEvent event;
  std::array<double, 16> matrix;
};

/// Gates of one Trotter slice of e^{-dbeta H} for the LR-TFI chain. The field
/// factors ride on each site's first (and, at order 2, last) gate of the slice.
std::vector<Gate> trotter_slice(const LrTfiChain& chain, double dbeta, int order);
std::vector<Gate> trotter_slice(const Hamiltonian& h, double dbeta, int order);

struct SvdRecord {
  double discarded_weight = 0.0;
  int kept = 0;
};

/// Real matrix-product operator. Site tensor s is stored column-major as a
/// (left * 4) x right matrix with row index l + left * (o + 2 i), where o/i
/// are the out/in physical indices. The represented operator is
/// exp(log_scale) times the contraction.
///
/// Every bond index carries a Z2 charge, the parity of (o + i) summed over the
/// sites to its left. Operators commuting with the total Z parity stay block
/// diagonal under that labelling, so splits and QR steps run per parity block.
/// With blocking off all charges are zero and the same code runs dense.
class Mpo {
 public:
  Mpo() = default;
  static Mpo identity(int n);

  int size() const { return static_cast<int>(tensors_.size()); }
  const RMatrix& tensor(int s) const { return tensors_.at(s); }
  int left_dim(int s) const { return static_cast<int>(tensors_.at(s).rows() / 4); }
  int right_dim(int s) const { return static_cast<int>(tensors_.at(s).cols()); }
  std::vector<int> bond_dims() const;
  int max_bond() const;
  /// charges(b) for bond b in [0, N]; bonds 0 and N are the boundaries.
  const std::vector<std::uint8_t>& charges(int bond) const { return charges_.at(bond); }
  bool blocked() const { return blocked_; }
  /// Turning blocking on infers the charges and fails with DomainError when
  /// the tensors are not parity symmetric.
  void set_blocked(bool on);

  double log_scale() const { return log_scale_; }
  int center() const { return center_; }
  double beta() const { return beta_; }
  long steps_done() const { return steps_; }

  /// log |tr M| and its sign, M the represented operator.
  std::pair<double, int> log_trace() const;
  double trace() const;

  /// Dense matrix of the represented operator (big-endian, site 0 most significant).
  RMatrix to_dense(int max_sites = 12) const;

  /// Moves the orthogonality center with QR steps; norms are unchanged.
  void move_center(int target);
  /// Brings an arbitrary MPO into canonical form centered at `target`.
  void canonicalize(int target = 0);
  /// Applies a 4x4 gate on the out indices of sites (p, p+1), optionally swaps
  /// the two sites, and splits by truncated SVD leaving the center on the
  /// right site when `center_right`. The center must be at p or p+1.
  SvdRecord apply_gate(int p, const std::array<double, 16>& gate, bool swap, bool center_right, double cutoff,
                       int chi_max, CutoffMode mode);
  /// Reverses the site order (relabeling only).
  void mirror();
  /// Sets the represented Frobenius norm aside into log_scale.
  void normalize();

  void set_progress(double beta, long steps) {
    beta_ = beta;
    steps_ = steps;
  }

  /// Direct construction from tensors; validates bond consistency. Parity
  /// blocking is enabled when the tensors admit it.
  static Mpo from_tensors(std::vector<RMatrix> tensors, double log_scale, int center);

  void save(const std::string& path, const nlohmann::json& extra = {}) const;
  /// Returns the header alongside the state.
  static Mpo load(const std::string& path, nlohmann::json* header = nullptr);

 private:
  bool infer_charges();
  void reset_charges();

  std::vector<RMatrix> tensors_;
  std::vector<std::vector<std::uint8_t>> charges_;
  bool blocked_ = true;
  double log_scale_ = 0.0;
  int center_ = 0;
  double beta_ = 0.0;
  long steps_ = 0;
};

struct TruncationReport {
  std::vector<double> discarded;  // per bond
  double total = 0.0;
};

/// Canonical sweep that SVD-truncates every bond.
TruncationReport truncate(Mpo& mpo, double cutoff, int chi_max, CutoffMode mode = CutoffMode::discarded_weight);

struct EvolveReport {
  long steps = 0;
  double beta = 0.0;              // reached
  bool rounded = false;           // target was not a multiple of dbeta
  double rounding_remainder = 0.0;
  double max_discarded = 0.0;     // largest single-SVD discarded weight
  double total_discarded = 0.0;
  int max_bond = 0;
  std::vector<double> step_discarded;  // summed per slice
};

/// Called after every slice with the running report.
using StepObserver = std::function<void(const Mpo&, const EvolveReport&)>;

/// Applies floor((beta_target - mpo.beta()) / dbeta) slices of e^{-dbeta H}.
EvolveReport evolve(Mpo& mpo, const LrTfiChain& chain, double beta_target, const TebdConfig& cfg,
                    const StepObserver& observer = {});

/// Cached left/right trace environments for repeated expectations.
class Environment {
 public:
  explicit Environment(const Mpo& mpo);

  struct Value {
    double real = 0.0;
    double imag = 0.0;  // residue from the anti-symmetric part of the state
  };

  /// tr[rho O1 O2 ...] / tr[rho] for factors on disjoint contiguous windows.
  Value evaluate(std::span<const PlacedObservable> factors) const;
  double expectation(const PlacedObservable& o) const;
  double covariance(const PlacedObservable& a, const PlacedObservable& b) const;

 private:
  const Mpo* mpo_;
  std::vector<RVector> left_;   // left_[s]: sites < s contracted with the trace
  std::vector<RVector> right_;  // right_[s]: sites > s
};

/// tr[rho O] / tr[rho]; O must live on a contiguous window.
double mpo_expectation(const Mpo& mpo, const PlacedObservable& o);

}  // namespace lrgibbs::tensornet
