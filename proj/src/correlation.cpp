#include "tpi/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace tpi {

namespace {

constexpr double kSupportThreshold = 1e-9;  // relative envelope cutoff
constexpr double kNodeHalfWidthFactor = 8.0;
constexpr std::size_t kMaxNodes = 200000;

struct SpectralMoments {
  double center = 0.0;
  double spread = 0.0;
  double mass = 0.0;
};

SpectralMoments amplitude_moments(const FrequencyGrid& grid, const std::vector<cplx>& amp) {
  SpectralMoments m;
  double sum = 0.0, sum_k = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    const double p = grid.weight(i) * std::norm(amp[i]);
    sum += p;
    sum_k += p * grid.node(i);
  }
  if (sum <= 0.0) return m;
  m.mass = sum;
  m.center = sum_k / sum;
  double var = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    const double u = grid.node(i) - m.center;
    var += grid.weight(i) * std::norm(amp[i]) * u * u;
  }
  m.spread = std::sqrt(std::max(0.0, var / sum));
  return m;
}

cplx detection_kernel(double k, double x, double t) { return std::polar(1.0, k * (x - t)); }

// sum_{k,k'} w w' f((mA,k),(mB,k')) eA(k) eB(k') with eX the detection kernels.
cplx slot_sum(const BiphotonState& state, const ModeLabel& mA, double xA, double tA,
              const ModeLabel& mB, double xB, double tB) {
  const FrequencyGrid& grid = state.grid();
  const std::size_t n = grid.size();

  if (state.representation() == BiphotonState::Representation::Dense) {
    if (!state.has_mode(mA) || !state.has_mode(mB)) return 0.0;
    cplx s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const cplx ea = grid.weight(i) * detection_kernel(grid.node(i), xA, tA);
      for (std::size_t j = 0; j < n; ++j)
        s += ea * grid.weight(j) * detection_kernel(grid.node(j), xB, tB) *
             state.f_amplitude(mA, i, mB, j);
    }
    return s;
  }

  if (state.kernel()) {
    cplx s = 0.0;
    const EntangledKernel& kern = *state.kernel();
    for (const auto& term : state.terms()) {
      if (term.mode1 != mA || term.mode2 != mB) continue;
      for (std::size_t i = 0; i < n; ++i) {
        const cplx ea =
            grid.weight(i) * term.amp1[i] * detection_kernel(grid.node(i), xA, tA);
        if (ea == cplx(0.0)) continue;
        const double ki = grid.node(i);
        for (std::size_t j = 0; j < n; ++j) {
          s += ea * grid.weight(j) * term.amp2[j] * kern(ki + grid.node(j)) *
               detection_kernel(grid.node(j), xB, tB);
        }
      }
    }
    return s;
  }

  cplx s = 0.0;
  for (const auto& term : state.terms()) {
    if (term.mode1 != mA || term.mode2 != mB) continue;
    cplx a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      a += grid.weight(i) * term.amp1[i] * detection_kernel(grid.node(i), xA, tA);
      b += grid.weight(i) * term.amp2[i] * detection_kernel(grid.node(i), xB, tB);
    }
    s += a * b;
  }
  return s;
}

std::vector<Polarization> port_components(const BiphotonState& state, const std::string& port,
                                          const std::optional<Polarization>& filter) {
  bool port_known = false;
  std::vector<Polarization> pols;
  for (const auto& m : state.modes()) {
    if (m.port != port) continue;
    port_known = true;
    pols.push_back(m.polarization);
  }
  if (!port_known)
    fail(ErrorKind::Validation, "detector port '" + port + "' is not in the state's mode list");
  if (filter) return {*filter};
  return pols;
}

// ---------------------------------------------------------------------------
// Windowed engine

struct SlotProfiles {
  // Photon-slot time profiles of one product term at the two detectors.
  std::vector<cplx> at_d1;
  std::vector<cplx> at_d2;
};

double trap_weight(std::size_t j, std::size_t count, double h) {
  return (j == 0 || j + 1 == count) ? 0.5 * h : h;
}

cplx window_dot(const std::vector<cplx>& f, const std::vector<cplx>& g, double h) {
  cplx s = 0.0;
  const std::size_t count = f.size();
  for (std::size_t j = 0; j < count; ++j) s += trap_weight(j, count, h) * f[j] * std::conj(g[j]);
  return s;
}

struct ComponentLists {
  // Indices into the state's term list matching (d1, d2) and (d2, d1).
  std::vector<std::size_t> l12;
  std::vector<std::size_t> l21;
};

ComponentLists match_terms(const BiphotonState& state, const ModeLabel& m1, const ModeLabel& m2) {
  ComponentLists lists;
  for (std::size_t i = 0; i < state.terms().size(); ++i) {
    const auto& t = state.terms()[i];
    if (t.mode1 == m1 && t.mode2 == m2) lists.l12.push_back(i);
    if (t.mode1 == m2 && t.mode2 == m1) lists.l21.push_back(i);
  }
  return lists;
}

void nyquist_guard(const BiphotonState& state, const CoincidenceWindow& window) {
  std::vector<SpectralMoments> moments;
  for (const auto& t : state.terms()) {
    moments.push_back(amplitude_moments(state.grid(), t.amp1));
    moments.push_back(amplitude_moments(state.grid(), t.amp2));
  }
  if (state.representation() == BiphotonState::Representation::Dense) {
    // No product structure; bound the beat content by the grid span.
    moments.push_back({state.grid().k_min(), 0.0, 1.0});
    moments.push_back({state.grid().k_max(), 0.0, 1.0});
  }
  double beat = 0.0;
  for (const auto& a : moments) {
    if (a.mass <= 0.0) continue;
    for (const auto& b : moments) {
      if (b.mass <= 0.0) continue;
      beat = std::max(beat, std::abs(a.center - b.center) + a.spread + b.spread);
    }
  }
  if (beat <= 0.0) return;
  const double max_spacing = 2.0 * std::numbers::pi / (8.0 * beat);
  if (window.spacing() > max_spacing) {
    const auto needed = static_cast<std::size_t>(
                            std::ceil((window.t_end - window.t_start) / max_spacing)) +
                        1;
    std::ostringstream msg;
    msg << "undersampled window: Nyquist guard requires 8 samples per beat period "
        << "(spacing " << window.spacing() << " > " << max_spacing << "; need at least "
        << needed << " samples)";
    fail(ErrorKind::NumericalGuard, msg.str());
  }
}

// Displaced-pair node lattice for entangled windowed rates.
struct NodeSet {
  std::vector<double> tau;
  std::vector<cplx> weight;  // (sigma / 2 sqrt(pi)) h_trap exp(-s^2 t^2/4) e^{-i peak t}
};

struct SupportInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty = true;
};

SupportInterval profile_support(const SpectralAmplitude& amp, double x, double probe_lo,
                                double probe_hi) {
  constexpr std::size_t kProbe = 385;
  const double dt = (probe_hi - probe_lo) / static_cast<double>(kProbe - 1);
  const auto probe = wavepacket_profile(amp, x, probe_lo, dt, kProbe);
  double peak = 0.0;
  for (const auto& v : probe) peak = std::max(peak, std::abs(v));
  SupportInterval s;
  if (peak <= 0.0) return s;
  for (std::size_t j = 0; j < kProbe; ++j) {
    if (std::abs(probe[j]) > kSupportThreshold * peak) {
      const double t = probe_lo + dt * static_cast<double>(j);
      if (s.empty) {
        s.lo = s.hi = t;
        s.empty = false;
      } else {
        s.hi = t;
      }
    }
  }
  // One probe step of padding on each side.
  if (!s.empty) {
    s.lo -= dt;
    s.hi += dt;
  }
  return s;
}

// Accumulates the three Gram sums for one polarization component pair.
struct ComponentSums {
  double s11 = 0.0;
  double s22 = 0.0;
  cplx s12 = 0.0;
};

// Separable path: direct window dots over the few product terms.
ComponentSums plain_component_sums(const BiphotonState& state, const CoincidenceWindow& w,
                                   const ModeLabel& m1, const ModeLabel& m2) {
  ComponentSums sums;
  const auto lists = match_terms(state, m1, m2);
  if (lists.l12.empty() && lists.l21.empty()) return sums;
  const double h = w.spacing();
  const std::size_t count = w.n_time_samples;

  auto profile = [&](const std::vector<cplx>& amp, double x) {
    return wavepacket_profile(SpectralAmplitude(state.grid(), amp), x, w.t_start, h, count);
  };

  std::vector<SlotProfiles> p12, p21;
  for (const auto i : lists.l12)
    p12.push_back({profile(state.terms()[i].amp1, w.detector1.x),
                   profile(state.terms()[i].amp2, w.detector2.x)});
  for (const auto i : lists.l21)
    p21.push_back({profile(state.terms()[i].amp2, w.detector1.x),
                   profile(state.terms()[i].amp1, w.detector2.x)});

  for (std::size_t i = 0; i < p12.size(); ++i)
    for (std::size_t j = 0; j < p12.size(); ++j)
      sums.s11 += (window_dot(p12[i].at_d1, p12[j].at_d1, h) *
                   window_dot(p12[i].at_d2, p12[j].at_d2, h))
                      .real();
  for (std::size_t i = 0; i < p21.size(); ++i)
    for (std::size_t j = 0; j < p21.size(); ++j)
      sums.s22 += (window_dot(p21[i].at_d1, p21[j].at_d1, h) *
                   window_dot(p21[i].at_d2, p21[j].at_d2, h))
                      .real();
  for (std::size_t i = 0; i < p12.size(); ++i)
    for (std::size_t j = 0; j < p21.size(); ++j)
      sums.s12 += window_dot(p12[i].at_d1, p21[j].at_d1, h) *
                  window_dot(p12[i].at_d2, p21[j].at_d2, h);
  return sums;
}

struct AlignedEngine {
  double h = 0.0;              // fine lattice spacing
  std::size_t fine_count = 0;  // window samples on the fine lattice
  long ext_lo = 0;  // lattice index of the first extended sample rel. to window start
  std::size_t ext_count = 0;
  std::vector<long> node_offset;  // lattice offsets of the displaced-pair nodes
  std::vector<cplx> node_weight;
};

// Builds cumulative trapezoid prefix C[m] = integral over lattice cells
// [ext_lo, ext_lo + m) of A(t) conj(B(t + L h)).
void lag_prefix(const std::vector<cplx>& a, const std::vector<cplx>& b, long lag, double h,
                std::vector<cplx>& prefix) {
  const long n = static_cast<long>(a.size());
  prefix.assign(a.size(), cplx(0.0));
  auto value = [&](long m) -> cplx {
    const long bm = m + lag;
    if (m < 0 || m >= n || bm < 0 || bm >= n) return cplx(0.0);
    return a[static_cast<std::size_t>(m)] * std::conj(b[static_cast<std::size_t>(bm)]);
  };
  cplx acc = 0.0;
  cplx prev = value(0);
  prefix[0] = 0.0;
  for (long m = 1; m < n; ++m) {
    const cplx cur = value(m);
    acc += 0.5 * h * (prev + cur);
    prefix[static_cast<std::size_t>(m)] = acc;
    prev = cur;
  }
}

// sum_{rho, rho'} w_rho conj(w_rho') X_AB(rho, rho') X_CD(rho, rho') where
// X_AB(rho, rho') = trapz over the window of A(t - tau_rho) conj(B(t - tau_rho')).
cplx aligned_node_pair_sum(const AlignedEngine& eng, const std::vector<cplx>& a,
                           const std::vector<cplx>& b, const std::vector<cplx>& c,
                           const std::vector<cplx>& d) {
  const std::size_t n_nodes = eng.node_offset.size();
  if (n_nodes == 0) return 0.0;
  std::vector<cplx> pref_ab, pref_cd;
  cplx total = 0.0;
  const long jw1 = static_cast<long>(eng.fine_count) - 1;
  const long n_lag = static_cast<long>(n_nodes) - 1;

  for (long lag = -n_lag; lag <= n_lag; ++lag) {
    lag_prefix(a, b, lag, eng.h, pref_ab);
    lag_prefix(c, d, lag, eng.h, pref_cd);
    cplx lag_sum = 0.0;
    for (std::size_t r = 0; r < n_nodes; ++r) {
      // Partner node with offset_rho - offset_rho' = lag; offsets are consecutive.
      const long rp = static_cast<long>(r) - lag;
      if (rp < 0 || rp >= static_cast<long>(n_nodes)) continue;
      // Window sample j maps to extended index (j - offset_rho) - ext_lo.
      const long base = -eng.ext_lo - eng.node_offset[r];
      const long i0 = base;
      const long i1 = base + jw1;
      if (i0 < 0 || i1 >= static_cast<long>(eng.ext_count)) continue;
      const cplx xab =
          pref_ab[static_cast<std::size_t>(i1)] - pref_ab[static_cast<std::size_t>(i0)];
      const cplx xcd =
          pref_cd[static_cast<std::size_t>(i1)] - pref_cd[static_cast<std::size_t>(i0)];
      lag_sum += eng.node_weight[r] * std::conj(eng.node_weight[static_cast<std::size_t>(rp)]) *
                 xab * xcd;
    }
    total += lag_sum;
  }
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public pointwise operations

void CoincidenceWindow::validate() const {
  if (!(t_end > t_start))
    fail(ErrorKind::Validation, "coincidence window requires t_end > t_start");
  if (n_time_samples < 64)
    fail(ErrorKind::Validation, "coincidence window requires n_time_samples >= 64");
}

cplx single_photon_wavefunction(const SinglePhotonState& state, const DetectionPoint& p) {
  cplx total = 0.0;
  for (const auto& comp : state.components()) {
    if (comp.mode.port != p.port) continue;
    if (p.polarization && comp.mode.polarization != *p.polarization) continue;
    if (!p.polarization) {
      // Amplitudes are per component; an unfiltered point must be unambiguous.
      std::size_t at_port = 0;
      for (const auto& c : state.components())
        if (c.mode.port == p.port) ++at_port;
      if (at_port > 1)
        fail(ErrorKind::Validation,
             "single-photon amplitude at port '" + p.port +
                 "' is ambiguous: specify a polarization");
    }
    total += wavepacket_amplitude(SpectralAmplitude(state.grid(), comp.amplitude), p.x, p.t);
  }
  return total;
}

double first_order_rate(const SinglePhotonState& state, const DetectionPoint& p) {
  double rate = 0.0;
  for (const auto& comp : state.components()) {
    if (comp.mode.port != p.port) continue;
    if (p.polarization && comp.mode.polarization != *p.polarization) continue;
    rate += std::norm(
        wavepacket_amplitude(SpectralAmplitude(state.grid(), comp.amplitude), p.x, p.t));
  }
  return rate;
}

cplx two_photon_amplitude(const BiphotonState& state, const DetectionPoint& p1,
                          const DetectionPoint& p2) {
  if (!p1.polarization || !p2.polarization)
    fail(ErrorKind::Validation, "two_photon_amplitude requires resolved polarizations");
  port_components(state, p1.port, p1.polarization);
  port_components(state, p2.port, p2.polarization);
  const ModeLabel m1{p1.port, *p1.polarization};
  const ModeLabel m2{p2.port, *p2.polarization};
  const cplx f12 = slot_sum(state, m1, p1.x, p1.t, m2, p2.x, p2.t);
  const cplx f21 = slot_sum(state, m2, p2.x, p2.t, m1, p1.x, p1.t);
  return state.norm_factor() / std::sqrt(2.0) *
         (f12 + static_cast<double>(state.statistics().sign) * f21);
}

double second_order_rate(const BiphotonState& state, const DetectionPoint& p1,
                         const DetectionPoint& p2) {
  const auto pols1 = port_components(state, p1.port, p1.polarization);
  const auto pols2 = port_components(state, p2.port, p2.polarization);
  double rate = 0.0;
  for (const auto c1 : pols1) {
    for (const auto c2 : pols2) {
      DetectionPoint q1 = p1;
      DetectionPoint q2 = p2;
      q1.polarization = c1;
      q2.polarization = c2;
      rate += 2.0 * std::norm(two_photon_amplitude(state, q1, q2));
    }
  }
  return rate;
}

RateSplit exchange_decomposition(const BiphotonState& state, const DetectionPoint& p1,
                                 const DetectionPoint& p2) {
  if (state.representation() == BiphotonState::Representation::Dense)
    fail(ErrorKind::Validation,
         "exchange decomposition requires a product-form state (dense tables carry no "
         "independent-particle split)");
  const auto pols1 = port_components(state, p1.port, p1.polarization);
  const auto pols2 = port_components(state, p2.port, p2.polarization);
  const double n2 = state.norm_factor() * state.norm_factor();
  const double sign = static_cast<double>(state.statistics().sign);
  RateSplit split;
  for (const auto c1 : pols1) {
    for (const auto c2 : pols2) {
      const ModeLabel m1{p1.port, c1};
      const ModeLabel m2{p2.port, c2};
      const cplx f12 = slot_sum(state, m1, p1.x, p1.t, m2, p2.x, p2.t);
      const cplx f21 = slot_sum(state, m2, p2.x, p2.t, m1, p1.x, p1.t);
      split.direct += n2 * (std::norm(f12) + std::norm(f21));
      split.exchange += 2.0 * sign * n2 * (f12 * std::conj(f21)).real();
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Windowed rates

namespace {

RateSplit windowed_products_plain(const BiphotonState& state, const CoincidenceWindow& w,
                                  std::span<const Polarization> pols1,
                                  std::span<const Polarization> pols2) {
  const double n2 = state.norm_factor() * state.norm_factor();
  const double sign = static_cast<double>(state.statistics().sign);
  RateSplit split;
  for (const auto c1 : pols1) {
    for (const auto c2 : pols2) {
      const auto sums = plain_component_sums(state, w, ModeLabel{w.detector1.port, c1},
                                             ModeLabel{w.detector2.port, c2});
      split.direct += n2 * (sums.s11 + sums.s22);
      split.exchange += 2.0 * sign * n2 * sums.s12.real();
    }
  }
  return split;
}

RateSplit windowed_products_entangled(const BiphotonState& state, const CoincidenceWindow& w,
                                      std::span<const Polarization> pols1,
                                      std::span<const Polarization> pols2,
                                      std::vector<NodePairContribution>* node_report) {
  const EntangledKernel kern = *state.kernel();
  const double sigma = kern.sigma;
  const FrequencyGrid& grid = state.grid();

  // Node spacing must resolve the packet envelopes, the node count per weight
  // width, and any kernel/carrier detuning.
  double max_spread = 0.0;
  double max_center_sum = 0.0, min_center_sum = 0.0;
  {
    bool first = true;
    for (const auto& t : state.terms()) {
      const auto m1 = amplitude_moments(grid, t.amp1);
      const auto m2 = amplitude_moments(grid, t.amp2);
      if (m1.mass <= 0.0 || m2.mass <= 0.0) continue;
      max_spread = std::max({max_spread, m1.spread, m2.spread});
      const double cs = m1.center + m2.center;
      if (first) {
        max_center_sum = min_center_sum = cs;
        first = false;
      } else {
        max_center_sum = std::max(max_center_sum, cs);
        min_center_sum = std::min(min_center_sum, cs);
      }
    }
  }
  const double detune = std::max(std::abs(max_center_sum - kern.peak_sum_frequency),
                                 std::abs(min_center_sum - kern.peak_sum_frequency));
  const double residual = detune + 2.0 * max_spread;
  const double h_window = w.spacing();
  double target = std::min(h_window, 2.0 * std::numbers::pi / (8.0 * std::max(residual, 1e-12)));

  const double weight_half_width = kNodeHalfWidthFactor / sigma;
  target = std::min(target, std::max(weight_half_width / 128.0, 1e-9));

  // Terms actually coupled to the detector components.
  std::vector<std::size_t> involved12, involved21;
  for (const auto c1 : pols1) {
    for (const auto c2 : pols2) {
      const auto lists =
          match_terms(state, ModeLabel{w.detector1.port, c1}, ModeLabel{w.detector2.port, c2});
      involved12.insert(involved12.end(), lists.l12.begin(), lists.l12.end());
      involved21.insert(involved21.end(), lists.l21.begin(), lists.l21.end());
    }
  }
  if (involved12.empty() && involved21.empty()) return {};

  // Node range: weight support intersected with the taus for which both slot
  // profiles of some matched term still reach the window.
  double tau_lo = -weight_half_width, tau_hi = weight_half_width;
  {
    double reach_lo = 0.0, reach_hi = 0.0;
    bool any = false;
    const double probe_margin = 0.75 * (w.t_end - w.t_start) + 4.0 / std::max(max_spread, 1e-6);
    auto reach = [&](const SupportInterval& a, const SupportInterval& b, double& lo, double& hi,
                     bool& ok) {
      if (a.empty || b.empty) return;
      const double l = std::max(w.t_start - a.hi, w.t_start - b.hi);
      const double h2 = std::min(w.t_end - a.lo, w.t_end - b.lo);
      if (l > h2) return;
      if (!ok) {
        lo = l;
        hi = h2;
        ok = true;
      } else {
        lo = std::min(lo, l);
        hi = std::max(hi, h2);
      }
    };
    for (const auto idx : involved12) {
      const auto& t = state.terms()[idx];
      const auto s1 = profile_support(SpectralAmplitude(grid, t.amp1), w.detector1.x,
                                      w.t_start - probe_margin, w.t_end + probe_margin);
      const auto s2 = profile_support(SpectralAmplitude(grid, t.amp2), w.detector2.x,
                                      w.t_start - probe_margin, w.t_end + probe_margin);
      reach(s1, s2, reach_lo, reach_hi, any);
    }
    for (const auto idx : involved21) {
      const auto& t = state.terms()[idx];
      const auto s1 = profile_support(SpectralAmplitude(grid, t.amp2), w.detector1.x,
                                      w.t_start - probe_margin, w.t_end + probe_margin);
      const auto s2 = profile_support(SpectralAmplitude(grid, t.amp1), w.detector2.x,
                                      w.t_start - probe_margin, w.t_end + probe_margin);
      reach(s1, s2, reach_lo, reach_hi, any);
    }
    if (!any) return {};
    tau_lo = std::max(tau_lo, reach_lo);
    tau_hi = std::min(tau_hi, reach_hi);
    if (tau_lo > tau_hi) return {};
  }

  // Snap the lattice to an integer subdivision of the window spacing so the
  // shifted-window prefix trick applies whenever affordable.
  const std::size_t subdivide =
      static_cast<std::size_t>(std::ceil(std::max(1.0, h_window / target)));
  const bool aligned = subdivide <= 8 && node_report == nullptr;

  const double n2 = state.norm_factor() * state.norm_factor();
  const double sign = static_cast<double>(state.statistics().sign);
  const double prefactor = sigma / (2.0 * std::sqrt(std::numbers::pi));

  RateSplit split;

  if (aligned) {
    AlignedEngine eng;
    eng.h = h_window / static_cast<double>(subdivide);
    eng.fine_count = (w.n_time_samples - 1) * subdivide + 1;
    const long off_lo = static_cast<long>(std::floor(tau_lo / eng.h));
    const long off_hi = static_cast<long>(std::ceil(tau_hi / eng.h));
    const std::size_t n_nodes = static_cast<std::size_t>(off_hi - off_lo + 1);
    if (n_nodes > kMaxNodes)
      fail(ErrorKind::NumericalGuard, "displaced-pair node count exceeds engine limit");
    eng.node_offset.resize(n_nodes);
    eng.node_weight.resize(n_nodes);
    for (std::size_t r = 0; r < n_nodes; ++r) {
      const long off = off_lo + static_cast<long>(r);
      const double tau = eng.h * static_cast<double>(off);
      eng.node_offset[r] = off;
      const double trap = (r == 0 || r + 1 == n_nodes) ? 0.5 * eng.h : eng.h;
      eng.node_weight[r] = prefactor * trap * std::exp(-sigma * sigma * tau * tau / 4.0) *
                           std::polar(1.0, -kern.peak_sum_frequency * tau);
    }
    // Extended lattice covers window samples shifted by every node offset.
    eng.ext_lo = -off_hi;
    const long ext_hi = static_cast<long>(eng.fine_count) - 1 - off_lo;
    eng.ext_count = static_cast<std::size_t>(ext_hi - eng.ext_lo + 1);

    auto extended_profile = [&](const std::vector<cplx>& amp, double x) {
      return wavepacket_profile(SpectralAmplitude(grid, amp), x,
                                w.t_start + eng.h * static_cast<double>(eng.ext_lo), eng.h,
                                eng.ext_count);
    };

    for (const auto c1 : pols1) {
      for (const auto c2 : pols2) {
        const auto lists =
            match_terms(state, ModeLabel{w.detector1.port, c1}, ModeLabel{w.detector2.port, c2});
        if (lists.l12.empty() && lists.l21.empty()) continue;
        std::vector<SlotProfiles> p12, p21;
        for (const auto i : lists.l12)
          p12.push_back({extended_profile(state.terms()[i].amp1, w.detector1.x),
                         extended_profile(state.terms()[i].amp2, w.detector2.x)});
        for (const auto i : lists.l21)
          p21.push_back({extended_profile(state.terms()[i].amp2, w.detector1.x),
                         extended_profile(state.terms()[i].amp1, w.detector2.x)});

        cplx s11 = 0.0, s22 = 0.0, s12 = 0.0;
        for (std::size_t i = 0; i < p12.size(); ++i)
          for (std::size_t j = 0; j < p12.size(); ++j)
            s11 += aligned_node_pair_sum(eng, p12[i].at_d1, p12[j].at_d1, p12[i].at_d2,
                                         p12[j].at_d2);
        for (std::size_t i = 0; i < p21.size(); ++i)
          for (std::size_t j = 0; j < p21.size(); ++j)
            s22 += aligned_node_pair_sum(eng, p21[i].at_d1, p21[j].at_d1, p21[i].at_d2,
                                         p21[j].at_d2);
        for (std::size_t i = 0; i < p12.size(); ++i)
          for (std::size_t j = 0; j < p21.size(); ++j)
            s12 += aligned_node_pair_sum(eng, p12[i].at_d1, p21[j].at_d1, p12[i].at_d2,
                                         p21[j].at_d2);
        split.direct += n2 * (s11.real() + s22.real());
        split.exchange += 2.0 * sign * n2 * s12.real();
      }
    }
    return split;
  }

  // Free-node path: explicit per-node profiles on the window lattice.
  std::size_t n_nodes = 257;
  const double span = tau_hi - tau_lo;
  if (span / static_cast<double>(n_nodes - 1) > target)
    n_nodes = std::min<std::size_t>(4097,
                                    static_cast<std::size_t>(std::ceil(span / target)) + 1);
  if (span / static_cast<double>(n_nodes - 1) > target)
    fail(ErrorKind::NumericalGuard,
         "entanglement kernel demands more displaced-pair nodes than the engine cap");
  if (span <= h_window) n_nodes = std::min<std::size_t>(n_nodes, 65);

  std::vector<double> taus(n_nodes);
  std::vector<cplx> weights(n_nodes);
  for (std::size_t r = 0; r < n_nodes; ++r) {
    const double tau =
        tau_lo + span * static_cast<double>(r) / static_cast<double>(n_nodes - 1);
    taus[r] = tau;
    const double trap = (r == 0 || r + 1 == n_nodes) ? 0.5 * span / (n_nodes - 1)
                                                     : span / (n_nodes - 1);
    weights[r] = prefactor * trap * std::exp(-sigma * sigma * tau * tau / 4.0) *
                 std::polar(1.0, -kern.peak_sum_frequency * tau);
  }

  const double h = w.spacing();
  const std::size_t count = w.n_time_samples;
  auto node_profile = [&](const std::vector<cplx>& amp, double x, double tau) {
    return wavepacket_profile(SpectralAmplitude(grid, amp), x, w.t_start - tau, h, count);
  };

  for (const auto c1 : pols1) {
    for (const auto c2 : pols2) {
      const auto lists =
          match_terms(state, ModeLabel{w.detector1.port, c1}, ModeLabel{w.detector2.port, c2});
      if (lists.l12.empty() && lists.l21.empty()) continue;

      // Profiles indexed [term][node].
      auto build = [&](const std::vector<std::size_t>& idx, bool swap_slots) {
        std::vector<std::vector<SlotProfiles>> out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i) {
          const auto& t = state.terms()[idx[i]];
          out[i].resize(n_nodes);
          for (std::size_t r = 0; r < n_nodes; ++r) {
            const auto& a1 = swap_slots ? t.amp2 : t.amp1;
            const auto& a2 = swap_slots ? t.amp1 : t.amp2;
            out[i][r] = {node_profile(a1, w.detector1.x, taus[r]),
                         node_profile(a2, w.detector2.x, taus[r])};
          }
        }
        return out;
      };
      const auto p12 = build(lists.l12, false);
      const auto p21 = build(lists.l21, true);

      auto pair_sum = [&](const std::vector<std::vector<SlotProfiles>>& pa,
                          const std::vector<std::vector<SlotProfiles>>& pb, cplx& out,
                          bool report) {
        for (std::size_t i = 0; i < pa.size(); ++i) {
          for (std::size_t j = 0; j < pb.size(); ++j) {
            for (std::size_t r = 0; r < n_nodes; ++r) {
              for (std::size_t rp = 0; rp < n_nodes; ++rp) {
                const cplx x1 = window_dot(pa[i][r].at_d1, pb[j][rp].at_d1, h);
                const cplx x2 = window_dot(pa[i][r].at_d2, pb[j][rp].at_d2, h);
                const cplx contrib = weights[r] * std::conj(weights[rp]) * x1 * x2;
                out += contrib;
                if (report && node_report)
                  node_report->push_back(
                      {taus[r], taus[rp],
                       std::abs(2.0 * sign * n2 * contrib)});
              }
            }
          }
        }
      };

      cplx s11 = 0.0, s22 = 0.0, s12 = 0.0;
      pair_sum(p12, p12, s11, false);
      pair_sum(p21, p21, s22, false);
      pair_sum(p12, p21, s12, node_report != nullptr);
      split.direct += n2 * (s11.real() + s22.real());
      split.exchange += 2.0 * sign * n2 * s12.real();
    }
  }
  return split;
}

double windowed_dense_rate(const BiphotonState& state, const CoincidenceWindow& w,
                           std::span<const Polarization> pols1,
                           std::span<const Polarization> pols2) {
  const double h = w.spacing();
  double rate = 0.0;
  for (std::size_t j1 = 0; j1 < w.n_time_samples; ++j1) {
    const double t1 = w.t_start + h * static_cast<double>(j1);
    for (std::size_t j2 = 0; j2 < w.n_time_samples; ++j2) {
      const double t2 = w.t_start + h * static_cast<double>(j2);
      double w2 = 0.0;
      for (const auto c1 : pols1)
        for (const auto c2 : pols2)
          w2 += 2.0 * std::norm(two_photon_amplitude(
                    state, {w.detector1.port, c1, w.detector1.x, t1},
                    {w.detector2.port, c2, w.detector2.x, t2}));
      rate += trap_weight(j1, w.n_time_samples, h) * trap_weight(j2, w.n_time_samples, h) * w2;
    }
  }
  return rate;
}

RateSplit windowed_rates_impl(const BiphotonState& state, const CoincidenceWindow& window,
                              std::vector<NodePairContribution>* node_report) {
  window.validate();
  const auto pols1 = port_components(state, window.detector1.port, window.detector1.polarization);
  const auto pols2 = port_components(state, window.detector2.port, window.detector2.polarization);
  nyquist_guard(state, window);
  if (state.representation() == BiphotonState::Representation::Dense)
    fail(ErrorKind::Validation,
         "windowed direct/exchange split requires a product-form state");
  if (state.kernel())
    return windowed_products_entangled(state, window, pols1, pols2, node_report);
  return windowed_products_plain(state, window, pols1, pols2);
}

}  // namespace

double windowed_coincidence(const BiphotonState& state, const CoincidenceWindow& window) {
  window.validate();
  const auto pols1 = port_components(state, window.detector1.port, window.detector1.polarization);
  const auto pols2 = port_components(state, window.detector2.port, window.detector2.polarization);
  nyquist_guard(state, window);
  if (state.representation() == BiphotonState::Representation::Dense)
    return windowed_dense_rate(state, window, pols1, pols2);
  const auto split = windowed_rates_impl(state, window, nullptr);
  return split.rate();
}

RateSplit windowed_rates(const BiphotonState& state, const CoincidenceWindow& window) {
  return windowed_rates_impl(state, window, nullptr);
}

std::vector<NodePairContribution> windowed_exchange_nodes(const BiphotonState& state,
                                                          const CoincidenceWindow& window) {
  if (!state.kernel())
    fail(ErrorKind::Validation, "node report requires an entangled-Gaussian state");
  std::vector<NodePairContribution> report;
  windowed_rates_impl(state, window, &report);
  return report;
}

double visibility(std::span<const double> parameters, std::span<const double> rates) {
  if (parameters.size() != rates.size() || parameters.empty())
    fail(ErrorKind::InvalidArgument, "visibility requires matching non-empty scans");
  std::size_t base_idx = 0;
  for (std::size_t i = 1; i < parameters.size(); ++i)
    if (std::abs(parameters[i]) > std::abs(parameters[base_idx])) base_idx = i;
  const double baseline = rates[base_idx];
  if (baseline == 0.0) fail(ErrorKind::Validation, "visibility baseline rate is zero");
  std::size_t ext_idx = 0;
  for (std::size_t i = 1; i < rates.size(); ++i)
    if (std::abs(rates[i] - baseline) > std::abs(rates[ext_idx] - baseline)) ext_idx = i;
  return (baseline - rates[ext_idx]) / baseline;
}

}  // namespace tpi
