#include "tpi/spectral.hpp"

#include <cmath>
#include <sstream>

namespace tpi {

namespace {
constexpr double kTruncationTolerance = 1e-8;
}

SpectralAmplitude::SpectralAmplitude(FrequencyGrid grid, std::vector<cplx> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size())
    fail(ErrorKind::InvalidArgument, "spectral amplitude length does not match grid");
}

double SpectralAmplitude::norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) s += grid_.weight(i) * std::norm(values_[i]);
  return std::sqrt(s);
}

SpectralAmplitude SpectralAmplitude::normalized() const {
  const double n = norm();
  if (n < 1e-300) fail(ErrorKind::ZeroNorm, "cannot normalize a zero spectral amplitude");
  std::vector<cplx> scaled(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) scaled[i] = values_[i] / n;
  return SpectralAmplitude(grid_, std::move(scaled));
}

double gaussian_tail_mass(double center, double stddev, double lo, double hi) {
  const double inv = 1.0 / (std::sqrt(2.0) * stddev);
  return 0.5 * (std::erfc((center - lo) * inv) + std::erfc((hi - center) * inv));
}

SpectralAmplitude make_gaussian_amplitude(double center_frequency, double bandwidth,
                                          const FrequencyGrid& grid) {
  if (!(bandwidth > 0.0)) fail(ErrorKind::Validation, "bandwidth must be positive");
  const double tail = gaussian_tail_mass(center_frequency, bandwidth, grid.k_min(), grid.k_max());
  if (tail > kTruncationTolerance) {
    std::ostringstream msg;
    msg << "grid too narrow for packet: truncated probability mass " << tail << " exceeds "
        << kTruncationTolerance << " (center " << center_frequency << ", bandwidth " << bandwidth
        << ", grid [" << grid.k_min() << ", " << grid.k_max() << "])";
    fail(ErrorKind::NumericalGuard, msg.str());
  }
  std::vector<cplx> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double u = grid.node(i) - center_frequency;
    values[i] = std::exp(-u * u / (4.0 * bandwidth * bandwidth));
  }
  return SpectralAmplitude(grid, std::move(values)).normalized();
}

cplx inner_product(const SpectralAmplitude& p, const SpectralAmplitude& q) {
  p.grid().require_same(q.grid());
  cplx s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    s += p.grid().weight(i) * std::conj(p.value(i)) * q.value(i);
  return s;
}

SpectralAmplitude apply_delay_phase(const SpectralAmplitude& g, double delay) {
  std::vector<cplx> values(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = g.grid().node(i);
    values[i] = g.value(i) * std::polar(1.0, w * delay);
  }
  return SpectralAmplitude(g.grid(), std::move(values));
}

cplx wavepacket_amplitude(const SpectralAmplitude& g, double x, double t) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.grid().node(i);
    s += g.grid().weight(i) * g.value(i) * std::polar(1.0, k * (x - t));
  }
  return s;
}

std::vector<cplx> wavepacket_profile(const SpectralAmplitude& g, double x, double t0, double dt,
                                     std::size_t count) {
  std::vector<cplx> out(count, cplx(0.0, 0.0));
  // Per-k phase recurrence, re-anchored in chunks to keep rounding at bay.
  constexpr std::size_t kChunk = 64;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double k = g.grid().node(i);
    const cplx coeff = g.grid().weight(i) * g.value(i);
    const cplx step = std::polar(1.0, -k * dt);
    for (std::size_t j0 = 0; j0 < count; j0 += kChunk) {
      const std::size_t j1 = std::min(count, j0 + kChunk);
      cplx phase = std::polar(1.0, k * (x - (t0 + dt * static_cast<double>(j0))));
      for (std::size_t j = j0; j < j1; ++j) {
        out[j] += coeff * phase;
        phase *= step;
      }
    }
  }
  return out;
}

}  // namespace tpi
