#pragma once

#include <span>
#include <vector>

#include "tpi/biphoton.hpp"
#include "tpi/modes.hpp"

namespace tpi::fock {

/// Small discrete single-particle basis: labeled modes at fixed wavenumbers.
/// Dimension is capped at 16; dense algebra only.
class DiscreteModeBasis {
 public:
  struct Mode {
    ModeLabel label;
    double k;

    auto operator<=>(const Mode&) const = default;
  };

  explicit DiscreteModeBasis(std::vector<Mode> modes);

  std::size_t dimension() const { return modes_.size(); }
  const std::vector<Mode>& modes() const { return modes_; }
  std::size_t index_of(const ModeLabel& label, double k) const;

  /// Detection kernel e^{i(k x - w_k t)} per basis mode, restricted to one
  /// port/polarization; zero elsewhere.
  std::vector<cplx> field_coefficients(const ModeLabel& label, double x, double t) const;

 private:
  std::vector<Mode> modes_;
};

/// Normalized two-particle vector over the symmetric (bosons) or antisymmetric
/// (fermions) pair basis. Pair ordering is lexicographic (i <= j for bosons,
/// i < j for fermions) with the sqrt(2) diagonal weight folded into the
/// coefficients, so coefficient k of a boson vector is
///   N (f(i,j) + f(j,i)) for i < j   and   N sqrt(2) f(i,i) on the diagonal.
class TwoPhotonVector {
 public:
  TwoPhotonVector(DiscreteModeBasis basis, ExchangeStatistics stats,
                  std::vector<cplx> pair_coefficients);

  const DiscreteModeBasis& basis() const { return basis_; }
  ExchangeStatistics statistics() const { return stats_; }
  const std::vector<cplx>& pair_coefficients() const { return coeffs_; }
  std::size_t pair_dimension() const { return coeffs_.size(); }
  double norm() const;

  /// Coefficient of the ordered pair (i, j) in the a_i^dag a_j^dag expansion
  /// (the implicit normalized f-table entry).
  cplx amplitude(std::size_t i, std::size_t j) const;

 private:
  DiscreteModeBasis basis_;
  ExchangeStatistics stats_;
  std::vector<cplx> coeffs_;
};

/// Builds the explicit normalized vector from an amplitude table f (row-major
/// d x d). The normalization constant matches the closed-form N^T expression;
/// a vanishing norm (e.g. symmetric f with fermion statistics) is an error.
TwoPhotonVector build_state(const DiscreteModeBasis& basis, std::span<const cplx> f_table,
                            ExchangeStatistics stats);

/// a_i^dag -> sum_j U_ji a_j^dag. U must be unitary to 1e-12.
TwoPhotonVector apply_mode_unitary(const TwoPhotonVector& v, std::span<const cplx> unitary);

/// <T| E1- E2- E2+ E1+ |T> by explicit annihilation through the Fock sectors;
/// e1, e2 are field coefficients per basis mode.
double glauber_w2(const TwoPhotonVector& v, std::span<const cplx> e1, std::span<const cplx> e2);

struct EquivalenceReport {
  double max_abs_diff = 0.0;
  double tolerance = 0.0;
  std::size_t n_events = 0;
  bool pass = false;
};

struct DetectionEvent {
  ModeLabel mode1;
  double x1, t1;
  ModeLabel mode2;
  double x2, t2;
};

/// Compares pipeline w2 against the oracle w2 over a set of detection events.
/// Both sides must be built over the identical discrete basis: the pipeline
/// state on a unit-spacing grid whose support sits on interior nodes, the
/// oracle on the matching (mode, k) list.
EquivalenceReport equivalence_check(const BiphotonState& pipeline, const TwoPhotonVector& oracle,
                                    std::span<const DetectionEvent> events,
                                    double tolerance = 1e-10);

}  // namespace tpi::fock
