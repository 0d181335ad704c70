#include "tpi/biphoton.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace tpi {

namespace {

constexpr std::size_t kMaxPairDimension = 1024;

cplx weighted_overlap(const FrequencyGrid& grid, const std::vector<cplx>& a,
                      const std::vector<cplx>& b) {
  // sum_k w_k conj(a) b
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += grid.weight(i) * std::conj(a[i]) * b[i];
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// SinglePhotonState

SinglePhotonState::SinglePhotonState(const SpectralAmplitude& g, const ModeLabel& mode)
    : grid_(g.grid()) {
  components_.push_back({mode, std::vector<cplx>(g.values().begin(), g.values().end())});
}

SinglePhotonState::SinglePhotonState(FrequencyGrid grid, std::vector<Component> components)
    : grid_(grid), components_(std::move(components)) {
  for (const auto& c : components_)
    if (c.amplitude.size() != grid_.size())
      fail(ErrorKind::InvalidArgument, "single-photon component length does not match grid");
  std::sort(components_.begin(), components_.end(),
            [](const Component& a, const Component& b) { return a.mode < b.mode; });
}

const std::vector<cplx>* SinglePhotonState::component(const ModeLabel& mode) const {
  for (const auto& c : components_)
    if (c.mode == mode) return &c.amplitude;
  return nullptr;
}

double SinglePhotonState::norm() const {
  double s = 0.0;
  for (const auto& c : components_)
    for (std::size_t i = 0; i < c.amplitude.size(); ++i)
      s += grid_.weight(i) * std::norm(c.amplitude[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// BiphotonState

double EntangledKernel::operator()(double w_sum) const {
  const double u = w_sum - peak_sum_frequency;
  return std::exp(-u * u / (sigma * sigma));
}

BiphotonState::BiphotonState(FrequencyGrid grid, ExchangeStatistics stats)
    : grid_(grid), stats_(stats) {
  if (stats.sign != 1 && stats.sign != -1)
    fail(ErrorKind::Validation, "exchange statistics sign must be +1 or -1");
}

void BiphotonState::rebuild_mode_list() {
  std::set<ModeLabel> labels;
  for (const auto& t : terms_) {
    labels.insert(t.mode1);
    labels.insert(t.mode2);
  }
  modes_.assign(labels.begin(), labels.end());
}

std::size_t BiphotonState::mode_index(const ModeLabel& m) const {
  const auto it = std::lower_bound(modes_.begin(), modes_.end(), m);
  if (it == modes_.end() || *it != m)
    fail(ErrorKind::InvalidArgument, "unknown mode " + to_string(m));
  return static_cast<std::size_t>(it - modes_.begin());
}

bool BiphotonState::has_mode(const ModeLabel& m) const {
  return std::binary_search(modes_.begin(), modes_.end(), m);
}

std::optional<double> BiphotonState::entanglement_width() const {
  if (kernel_) return kernel_->sigma;
  return std::nullopt;
}

cplx BiphotonState::f_amplitude(const ModeLabel& m1, std::size_t k1, const ModeLabel& m2,
                                std::size_t k2) const {
  if (!dense_.empty()) {
    const std::size_t d = pair_dimension();
    const std::size_t i = mode_index(m1) * grid_.size() + k1;
    const std::size_t j = mode_index(m2) * grid_.size() + k2;
    return dense_[i * d + j];
  }
  cplx s = 0.0;
  for (const auto& t : terms_)
    if (t.mode1 == m1 && t.mode2 == m2) s += t.amp1[k1] * t.amp2[k2];
  if (kernel_ && s != cplx(0.0)) s *= (*kernel_)(grid_.node(k1) + grid_.node(k2));
  return s;
}

void BiphotonState::compute_norm_factor() {
  // N = (sum |f|^2 + sign * sum conj(f(l',l)) f(l,l'))^(-1/2); both sums run
  // over the full (mode x k) pair space with quadrature weights.
  double direct = 0.0;
  double cross = 0.0;
  if (!dense_.empty()) {
    const std::size_t d = pair_dimension();
    const std::size_t n = grid_.size();
    cplx cross_c = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double wi = grid_.weight(i % n);
      for (std::size_t j = 0; j < d; ++j) {
        const double w = wi * grid_.weight(j % n);
        direct += w * std::norm(dense_[i * d + j]);
        cross_c += w * std::conj(dense_[j * d + i]) * dense_[i * d + j];
      }
    }
    cross = cross_c.real();
  } else if (kernel_) {
    // Single product term with a shared kernel.
    const auto& t = terms_.front();
    const std::size_t n = grid_.size();
    cplx cross_c = 0.0;
    const bool same_mode = t.mode1 == t.mode2;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = grid_.weight(i);
      const double ki = grid_.node(i);
      for (std::size_t j = 0; j < n; ++j) {
        const double w = wi * grid_.weight(j);
        const double kern = (*kernel_)(ki + grid_.node(j));
        direct += w * kern * kern * std::norm(t.amp1[i]) * std::norm(t.amp2[j]);
        if (same_mode)
          cross_c += w * kern * kern * std::conj(t.amp1[j] * t.amp2[i]) * t.amp1[i] * t.amp2[j];
      }
    }
    cross = cross_c.real();
  } else {
    cplx cross_c = 0.0;
    for (const auto& a : terms_) {
      for (const auto& b : terms_) {
        if (a.mode1 == b.mode1 && a.mode2 == b.mode2) {
          direct += (weighted_overlap(grid_, b.amp1, a.amp1) *
                     weighted_overlap(grid_, b.amp2, a.amp2))
                        .real();
        }
        if (a.mode1 == b.mode2 && a.mode2 == b.mode1) {
          // conj(f(l',l)) f(l,l') pairs amp1 of `a` against amp2 of `b`.
          cross_c += weighted_overlap(grid_, b.amp2, a.amp1) *
                     weighted_overlap(grid_, b.amp1, a.amp2);
        }
      }
    }
    cross = cross_c.real();
  }
  const double total = direct + static_cast<double>(stats_.sign) * cross;
  if (!(total > 1e-12 * std::max(1.0, direct)))
    fail(ErrorKind::ZeroNorm, "two-photon amplitude has (near-)zero norm");
  norm_factor_ = 1.0 / std::sqrt(total);
}

BiphotonState BiphotonState::from_table(std::vector<ModeLabel> modes, FrequencyGrid grid,
                                        std::vector<cplx> table, ExchangeStatistics stats) {
  std::sort(modes.begin(), modes.end());
  if (std::adjacent_find(modes.begin(), modes.end()) != modes.end())
    fail(ErrorKind::Validation, "duplicate mode labels in table state");
  const std::size_t d = modes.size() * grid.size();
  if (d > kMaxPairDimension) {
    std::ostringstream msg;
    msg << "dense two-photon table dimension " << d << " exceeds the " << kMaxPairDimension
        << " limit";
    fail(ErrorKind::SizeLimit, msg.str());
  }
  if (table.size() != d * d)
    fail(ErrorKind::InvalidArgument, "dense two-photon table has wrong shape");
  BiphotonState state(grid, stats);
  state.modes_ = std::move(modes);
  state.dense_ = std::move(table);
  state.compute_norm_factor();
  return state;
}

BiphotonState separable_state(const SpectralAmplitude& p, const ModeLabel& mode_p,
                              const SpectralAmplitude& q, const ModeLabel& mode_q,
                              ExchangeStatistics stats) {
  p.grid().require_same(q.grid());
  BiphotonState state(p.grid(), stats);
  ProductTerm term;
  term.mode1 = mode_p;
  term.mode2 = mode_q;
  term.amp1.assign(p.values().begin(), p.values().end());
  term.amp2.assign(q.values().begin(), q.values().end());
  state.terms_.push_back(std::move(term));
  state.rebuild_mode_list();
  state.compute_norm_factor();
  return state;
}

BiphotonState entangled_gaussian_state(const SpectralAmplitude& p, const ModeLabel& mode_p,
                                       const SpectralAmplitude& q, const ModeLabel& mode_q,
                                       double sigma, double peak_sum_frequency) {
  p.grid().require_same(q.grid());
  if (!(sigma > 0.0)) fail(ErrorKind::Validation, "entanglement width sigma must be positive");
  if (!std::isfinite(peak_sum_frequency))
    fail(ErrorKind::Validation, "peak sum frequency must be finite");
  BiphotonState state(p.grid(), ExchangeStatistics::boson());
  ProductTerm term;
  term.mode1 = mode_p;
  term.mode2 = mode_q;
  term.amp1.assign(p.values().begin(), p.values().end());
  term.amp2.assign(q.values().begin(), q.values().end());
  state.terms_.push_back(std::move(term));
  state.kernel_ = EntangledKernel{sigma, peak_sum_frequency};
  state.rebuild_mode_list();
  state.compute_norm_factor();
  return state;
}

cplx symmetrized_amplitude(const BiphotonState& state, const ModeLabel& m1, std::size_t k1,
                           const ModeLabel& m2, std::size_t k2) {
  if (!state.has_mode(m1)) fail(ErrorKind::InvalidArgument, "unknown mode " + to_string(m1));
  if (!state.has_mode(m2)) fail(ErrorKind::InvalidArgument, "unknown mode " + to_string(m2));
  return state.f_amplitude(m1, k1, m2, k2) +
         static_cast<double>(state.statistics().sign) * state.f_amplitude(m2, k2, m1, k1);
}

std::vector<double> default_displacement_nodes(double sigma, std::size_t count,
                                               double half_width_factor) {
  if (!(sigma > 0.0)) fail(ErrorKind::InvalidArgument, "sigma must be positive");
  if (count < 2) fail(ErrorKind::InvalidArgument, "node count must be at least 2");
  const double half = half_width_factor / sigma;
  std::vector<double> nodes(count);
  for (std::size_t i = 0; i < count; ++i)
    nodes[i] = -half + 2.0 * half * static_cast<double>(i) / static_cast<double>(count - 1);
  return nodes;
}

std::vector<DisplacedPair> displaced_pair_decomposition(const BiphotonState& state,
                                                        std::span<const double> t_nodes) {
  if (!state.kernel() || !state.entanglement_width())
    fail(ErrorKind::Validation,
         "displaced-pair decomposition requires an entangled-Gaussian state");
  if (state.terms().size() != 1)
    fail(ErrorKind::Validation,
         "displaced-pair decomposition applies to the source state, before any network");
  const double sigma = state.kernel()->sigma;
  const double peak = state.kernel()->peak_sum_frequency;
  const double prefactor = state.norm_factor() * sigma / (2.0 * std::sqrt(std::numbers::pi));
  const auto& t = state.terms().front();
  SpectralAmplitude p(state.grid(), t.amp1);
  SpectralAmplitude q(state.grid(), t.amp2);
  std::vector<DisplacedPair> pairs;
  pairs.reserve(t_nodes.size());
  for (const double tau : t_nodes) {
    const cplx w = prefactor * std::exp(-sigma * sigma * tau * tau / 4.0) *
                   std::polar(1.0, -peak * tau);
    pairs.push_back({w, apply_delay_phase(p, tau), apply_delay_phase(q, tau)});
  }
  return pairs;
}

double total_two_photon_probability(const BiphotonState& state) {
  // (N^2 / 2) sum over ordered mode pairs and (k, k') of w w' |f_sym|^2.
  const std::size_t n = state.grid().size();
  double total = 0.0;
  for (const auto& m1 : state.modes()) {
    for (const auto& m2 : state.modes()) {
      for (std::size_t i = 0; i < n; ++i) {
        const double wi = state.grid().weight(i);
        for (std::size_t j = 0; j < n; ++j) {
          total += wi * state.grid().weight(j) *
                   std::norm(symmetrized_amplitude(state, m1, i, m2, j));
        }
      }
    }
  }
  const double nf = state.norm_factor();
  return 0.5 * nf * nf * total;
}

}  // namespace tpi
