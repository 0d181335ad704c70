#pragma once

#include <optional>
#include <vector>

#include "tpi/modes.hpp"
#include "tpi/spectral.hpp"

namespace tpi {

/// One photon distributed over labeled modes; each component is a spectral
/// amplitude on the shared grid.
class SinglePhotonState {
 public:
  struct Component {
    ModeLabel mode;
    std::vector<cplx> amplitude;
  };

  SinglePhotonState(const SpectralAmplitude& g, const ModeLabel& mode);
  SinglePhotonState(FrequencyGrid grid, std::vector<Component> components);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<Component>& components() const { return components_; }
  const std::vector<cplx>* component(const ModeLabel& mode) const;
  double norm() const;

 private:
  FrequencyGrid grid_;
  std::vector<Component> components_;
};

/// Gaussian frequency-entanglement kernel exp(-(w + w' - peak)^2 / sigma^2)
/// multiplying the whole two-photon amplitude.
struct EntangledKernel {
  double sigma = 0.0;
  double peak_sum_frequency = 0.0;

  double operator()(double w_sum) const;
};

/// One separable product component of a two-photon amplitude:
/// f contribution amp1(k) on mode1 times amp2(k') on mode2.
struct ProductTerm {
  ModeLabel mode1;
  ModeLabel mode2;
  std::vector<cplx> amp1;
  std::vector<cplx> amp2;
};

/// Two-photon spectral amplitude f over (mode, k) pairs, stored
/// non-symmetrized; symmetrization is applied only at detection pairing.
///
/// Two representations are supported: a sum of product terms with an optional
/// shared entanglement kernel (the shipped constructors, closed under linear
/// optical networks), and a dense table over the full (mode x k) pair space.
class BiphotonState {
 public:
  enum class Representation { Products, Dense };

  /// Dense tabulated amplitude; `table` is row-major over the flattened
  /// (mode index * grid size + k index) pair space of the sorted mode list.
  /// Pair dimensions above 1024 are rejected with ErrorKind::SizeLimit.
  static BiphotonState from_table(std::vector<ModeLabel> modes, FrequencyGrid grid,
                                  std::vector<cplx> table, ExchangeStatistics stats);

  Representation representation() const { return dense_.empty() ? Representation::Products : Representation::Dense; }
  const FrequencyGrid& grid() const { return grid_; }
  ExchangeStatistics statistics() const { return stats_; }
  double norm_factor() const { return norm_factor_; }
  const std::vector<ModeLabel>& modes() const { return modes_; }
  std::optional<double> entanglement_width() const;
  const std::optional<EntangledKernel>& kernel() const { return kernel_; }
  const std::vector<ProductTerm>& terms() const { return terms_; }
  const std::vector<cplx>& dense_table() const { return dense_; }

  std::size_t mode_index(const ModeLabel& m) const;  // throws on unknown mode
  bool has_mode(const ModeLabel& m) const;
  std::size_t pair_dimension() const { return modes_.size() * grid_.size(); }

  /// Non-symmetrized amplitude f((m1, k1), (m2, k2)) by grid node index.
  cplx f_amplitude(const ModeLabel& m1, std::size_t k1, const ModeLabel& m2,
                   std::size_t k2) const;

 private:
  friend BiphotonState separable_state(const SpectralAmplitude&, const ModeLabel&,
                                       const SpectralAmplitude&, const ModeLabel&,
                                       ExchangeStatistics);
  friend BiphotonState entangled_gaussian_state(const SpectralAmplitude&, const ModeLabel&,
                                                const SpectralAmplitude&, const ModeLabel&,
                                                double, double);
  friend class OpticalNetwork;

  BiphotonState(FrequencyGrid grid, ExchangeStatistics stats);
  void rebuild_mode_list();
  void compute_norm_factor();

  FrequencyGrid grid_;
  ExchangeStatistics stats_;
  double norm_factor_ = 1.0;
  std::vector<ModeLabel> modes_;
  std::vector<ProductTerm> terms_;
  std::optional<EntangledKernel> kernel_;
  std::vector<cplx> dense_;
};

/// f(l, l') = p(k) q(k') on the given mode pair, with the normalization factor
/// N = (1 + |<p|q>|^2)^(-1/2) generalized to the full mode-resolved overlap.
BiphotonState separable_state(const SpectralAmplitude& p, const ModeLabel& mode_p,
                              const SpectralAmplitude& q, const ModeLabel& mode_q,
                              ExchangeStatistics stats);

/// f(k, k') = p(k) q(k') exp(-(w_k + w_k' - peak_sum_frequency)^2 / sigma^2).
/// `peak_sum_frequency` is the peak of the photon pair's summed frequency.
BiphotonState entangled_gaussian_state(const SpectralAmplitude& p, const ModeLabel& mode_p,
                                       const SpectralAmplitude& q, const ModeLabel& mode_q,
                                       double sigma, double peak_sum_frequency);

/// f(l, l') + sign * f(l', l): the combination entering every detection
/// amplitude.
cplx symmetrized_amplitude(const BiphotonState& state, const ModeLabel& m1, std::size_t k1,
                           const ModeLabel& m2, std::size_t k2);

struct DisplacedPair {
  cplx weight;
  SpectralAmplitude p;
  SpectralAmplitude q;
};

/// Uniform node set over +-(half_width_factor / sigma), count nodes.
std::vector<double> default_displacement_nodes(double sigma, std::size_t count = 257,
                                               double half_width_factor = 6.0);

/// Rewrites an entangled-Gaussian state as a weighted superposition of
/// separable pairs, each pair delayed by a common time t:
/// weight(t) = N(sigma) (sigma / 2 sqrt(pi)) exp(-sigma^2 t^2 / 4) exp(-i peak t).
/// Only states built by entangled_gaussian_state can be decomposed.
std::vector<DisplacedPair> displaced_pair_decomposition(const BiphotonState& state,
                                                        std::span<const double> t_nodes);

/// Spectral-sum total detection probability over all ordered mode pairs and
/// unbounded detection times, in units where a normalized state gives 1.
double total_two_photon_probability(const BiphotonState& state);

}  // namespace tpi
