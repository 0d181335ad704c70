#pragma once

#include <complex>
#include <span>
#include <vector>

#include "tpi/grid.hpp"

namespace tpi {

using cplx = std::complex<double>;

/// One-photon spectral amplitude g(k) tabulated on a frequency grid.
///
/// Physical states carry unit norm, sum_k w_k |g(k)|^2 = 1; the constructor
/// does not normalize, use normalized() or the factory functions.
class SpectralAmplitude {
 public:
  SpectralAmplitude(FrequencyGrid grid, std::vector<cplx> values);

  const FrequencyGrid& grid() const { return grid_; }
  std::span<const cplx> values() const { return values_; }
  cplx value(std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

  /// sqrt(sum_k w_k |g(k)|^2)
  double norm() const;

  /// Copy scaled to unit norm. Throws ErrorKind::ZeroNorm on (near-)zero input.
  SpectralAmplitude normalized() const;

 private:
  FrequencyGrid grid_;
  std::vector<cplx> values_;
};

/// Gaussian packet: g(k) ~ exp(-(k - center)^2 / (4 bandwidth^2)), normalized
/// on the grid, so |g|^2 is Gaussian with standard deviation `bandwidth`.
/// Throws ErrorKind::NumericalGuard when the probability mass truncated by the
/// grid edges exceeds 1e-8.
SpectralAmplitude make_gaussian_amplitude(double center_frequency, double bandwidth,
                                          const FrequencyGrid& grid);

/// Quadrature of conj(p) * q. Grids must match.
cplx inner_product(const SpectralAmplitude& p, const SpectralAmplitude& q);

/// g(k) -> g(k) exp(i w_k delay); a packet delayed in time by `delay`.
SpectralAmplitude apply_delay_phase(const SpectralAmplitude& g, double delay);

/// V(x, t) = sum_k w_k g(k) exp(i (k x - w_k t)), with w_k = k.
cplx wavepacket_amplitude(const SpectralAmplitude& g, double x, double t);

/// V(x, t_j) on a uniform time lattice t_j = t0 + j dt, j = 0..count-1.
std::vector<cplx> wavepacket_profile(const SpectralAmplitude& g, double x, double t0,
                                     double dt, std::size_t count);

/// Gaussian tail mass outside [lo, hi] for a normal density with the given
/// center and standard deviation.
double gaussian_tail_mass(double center, double stddev, double lo, double hi);

}  // namespace tpi
