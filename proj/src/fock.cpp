#include "tpi/fock.hpp"

#include <algorithm>
#include <cmath>

#include "tpi/correlation.hpp"

namespace tpi::fock {

namespace {

constexpr std::size_t kMaxDimension = 16;
const double kSqrt2 = std::sqrt(2.0);

// Pair index layout: lexicographic (i, j) with i <= j for bosons, i < j for
// fermions.
std::size_t pair_count(std::size_t d, ExchangeStatistics stats) {
  return stats.sign > 0 ? d * (d + 1) / 2 : d * (d - 1) / 2;
}

}  // namespace

DiscreteModeBasis::DiscreteModeBasis(std::vector<Mode> modes) : modes_(std::move(modes)) {
  if (modes_.empty()) fail(ErrorKind::Validation, "discrete basis must not be empty");
  if (modes_.size() > kMaxDimension)
    fail(ErrorKind::SizeLimit, "discrete basis dimension exceeds 16 modes");
  auto sorted = modes_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    fail(ErrorKind::Validation, "discrete basis labels must be unique");
}

std::size_t DiscreteModeBasis::index_of(const ModeLabel& label, double k) const {
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].label == label && modes_[i].k == k) return i;
  fail(ErrorKind::InvalidArgument, "mode not in discrete basis: " + to_string(label));
}

std::vector<cplx> DiscreteModeBasis::field_coefficients(const ModeLabel& label, double x,
                                                        double t) const {
  std::vector<cplx> e(modes_.size(), cplx(0.0));
  for (std::size_t i = 0; i < modes_.size(); ++i)
    if (modes_[i].label == label) e[i] = std::polar(1.0, modes_[i].k * (x - t));
  return e;
}

TwoPhotonVector::TwoPhotonVector(DiscreteModeBasis basis, ExchangeStatistics stats,
                                 std::vector<cplx> pair_coefficients)
    : basis_(std::move(basis)), stats_(stats), coeffs_(std::move(pair_coefficients)) {
  if (coeffs_.size() != pair_count(basis_.dimension(), stats_))
    fail(ErrorKind::InvalidArgument, "pair coefficient vector has wrong length");
}

double TwoPhotonVector::norm() const {
  double s = 0.0;
  for (const auto& c : coeffs_) s += std::norm(c);
  return std::sqrt(s);
}

cplx TwoPhotonVector::amplitude(std::size_t i, std::size_t j) const {
  const std::size_t d = basis_.dimension();
  if (stats_.sign > 0) {
    if (i > j) std::swap(i, j);
    // offset of row i in the packed upper triangle (diagonal included)
    const std::size_t off = i * d - i * (i + 1) / 2 + i;
    const cplx c = coeffs_[off + (j - i)];
    return (i == j) ? c / kSqrt2 : 0.5 * c;
  }
  double sign = 1.0;
  if (i == j) return 0.0;
  if (i > j) {
    std::swap(i, j);
    sign = -1.0;
  }
  // fermion packing: row i holds columns j in (i, d)
  const std::size_t row_off = i * (d - 1) - i * (i - 1) / 2;
  return sign * 0.5 * coeffs_[row_off + (j - i - 1)];
}

TwoPhotonVector build_state(const DiscreteModeBasis& basis, std::span<const cplx> f_table,
                            ExchangeStatistics stats) {
  const std::size_t d = basis.dimension();
  if (stats.sign != 1 && stats.sign != -1)
    fail(ErrorKind::Validation, "exchange statistics sign must be +1 or -1");
  if (f_table.size() != d * d)
    fail(ErrorKind::InvalidArgument, "f table must be d x d");
  std::vector<cplx> coeffs;
  coeffs.reserve(pair_count(d, stats));
  if (stats.sign > 0) {
    for (std::size_t i = 0; i < d; ++i) {
      coeffs.push_back(kSqrt2 * f_table[i * d + i]);
      for (std::size_t j = i + 1; j < d; ++j)
        coeffs.push_back(f_table[i * d + j] + f_table[j * d + i]);
    }
  } else {
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j)
        coeffs.push_back(f_table[i * d + j] - f_table[j * d + i]);
  }
  double norm_sq = 0.0;
  for (const auto& c : coeffs) norm_sq += std::norm(c);
  double scale = 0.0;
  for (const auto& f : f_table) scale += std::norm(f);
  if (norm_sq <= 1e-24 * std::max(1.0, scale))
    fail(ErrorKind::ZeroNorm, "two-photon state has zero norm for these statistics");
  const double inv = 1.0 / std::sqrt(norm_sq);
  for (auto& c : coeffs) c *= inv;
  return TwoPhotonVector(basis, stats, std::move(coeffs));
}

TwoPhotonVector apply_mode_unitary(const TwoPhotonVector& v, std::span<const cplx> unitary) {
  const std::size_t d = v.basis().dimension();
  if (unitary.size() != d * d) fail(ErrorKind::InvalidArgument, "unitary must be d x d");
  // Unitarity check.
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      cplx dot = 0.0;
      for (std::size_t r = 0; r < d; ++r)
        dot += std::conj(unitary[r * d + a]) * unitary[r * d + b];
      const cplx expect = (a == b) ? cplx(1.0) : cplx(0.0);
      if (std::abs(dot - expect) > 1e-12)
        fail(ErrorKind::Validation, "mode transformation is not unitary to 1e-12");
    }
  }
  // Transform the implicit f table: a_i^dag -> sum_j U_ji a_j^dag gives
  // f'(p, q) = sum_{i,j} U_pi U_qj f(i, j).
  std::vector<cplx> f(d * d, cplx(0.0));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) f[i * d + j] = v.amplitude(i, j);
  std::vector<cplx> tmp(d * d, cplx(0.0));
  for (std::size_t p = 0; p < d; ++p)
    for (std::size_t i = 0; i < d; ++i) {
      const cplx u = unitary[p * d + i];
      if (u == cplx(0.0)) continue;
      for (std::size_t j = 0; j < d; ++j) tmp[p * d + j] += u * f[i * d + j];
    }
  std::vector<cplx> fp(d * d, cplx(0.0));
  for (std::size_t q = 0; q < d; ++q)
    for (std::size_t j = 0; j < d; ++j) {
      const cplx u = unitary[q * d + j];
      if (u == cplx(0.0)) continue;
      for (std::size_t p = 0; p < d; ++p) fp[p * d + q] += u * tmp[p * d + j];
    }
  return build_state(v.basis(), fp, v.statistics());
}

double glauber_w2(const TwoPhotonVector& v, std::span<const cplx> e1, std::span<const cplx> e2) {
  const std::size_t d = v.basis().dimension();
  if (e1.size() != d || e2.size() != d)
    fail(ErrorKind::InvalidArgument, "field coefficient vectors must match the basis");
  // First annihilation: |phi> = E1+ |T>, a one-photon vector.
  // a_nu |i j> = delta_{nu i} |j> + stats delta_{nu j} |i> for the ordered pair
  // expansion; work from the packed pair coefficients.
  std::vector<cplx> one(d, cplx(0.0));
  if (v.statistics().sign > 0) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) {
      // diagonal |2_i>: a_i sqrt(2) |1_i>
      one[i] += e1[i] * kSqrt2 * v.pair_coefficients()[idx++];
      for (std::size_t j = i + 1; j < d; ++j) {
        const cplx c = v.pair_coefficients()[idx++];
        one[j] += e1[i] * c;
        one[i] += e1[j] * c;
      }
    }
  } else {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = i + 1; j < d; ++j) {
        const cplx c = v.pair_coefficients()[idx++];
        // |i j> = a_i^dag a_j^dag |vac>; a_nu picks up the fermionic sign.
        one[j] += e1[i] * c;
        one[i] -= e1[j] * c;
      }
    }
  }
  // Second annihilation onto the vacuum amplitude.
  cplx amp = 0.0;
  for (std::size_t i = 0; i < d; ++i) amp += e2[i] * one[i];
  return std::norm(amp);
}

EquivalenceReport equivalence_check(const BiphotonState& pipeline, const TwoPhotonVector& oracle,
                                    std::span<const DetectionEvent> events, double tolerance) {
  const auto& basis = oracle.basis();
  // The pipeline grid must hold every basis wavenumber on an interior node of
  // weight equal to the grid spacing, otherwise the quadrature and the plain
  // mode sums cannot coincide.
  const FrequencyGrid& grid = pipeline.grid();
  for (const auto& m : basis.modes()) {
    const double pos = (m.k - grid.k_min()) / grid.spacing();
    const auto idx = static_cast<std::size_t>(std::llround(pos));
    if (std::abs(pos - static_cast<double>(idx)) > 1e-9 || idx == 0 || idx + 1 >= grid.size())
      fail(ErrorKind::Validation,
           "basis mismatch: oracle wavenumbers must sit on interior pipeline grid nodes");
    if (std::abs(grid.weight(idx) - 1.0) > 1e-12)
      fail(ErrorKind::Validation, "basis mismatch: pipeline grid spacing must be 1");
  }
  for (const auto& ev : events) {
    if (!pipeline.has_mode(ev.mode1) || !pipeline.has_mode(ev.mode2))
      fail(ErrorKind::Validation, "basis mismatch: pipeline lacks a detection event mode");
  }

  EquivalenceReport report;
  report.tolerance = tolerance;
  report.n_events = events.size();
  for (const auto& ev : events) {
    const double w2_pipeline =
        2.0 * std::norm(two_photon_amplitude(pipeline,
                                             {ev.mode1.port, ev.mode1.polarization, ev.x1, ev.t1},
                                             {ev.mode2.port, ev.mode2.polarization, ev.x2, ev.t2}));
    const auto e1 = basis.field_coefficients(ev.mode1, ev.x1, ev.t1);
    const auto e2 = basis.field_coefficients(ev.mode2, ev.x2, ev.t2);
    const double w2_oracle = glauber_w2(oracle, e1, e2);
    report.max_abs_diff = std::max(report.max_abs_diff, std::abs(w2_pipeline - w2_oracle));
  }
  report.pass = report.max_abs_diff <= tolerance;
  return report;
}

}  // namespace tpi::fock
