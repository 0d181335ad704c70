#pragma once

#include <optional>
#include <span>

#include "tpi/biphoton.hpp"

namespace tpi {

/// Where and when a field is evaluated. A detector with no polarization
/// filter sums rate contributions over every polarization present at the
/// port; amplitudes themselves always refer to one resolved component.
struct DetectionPoint {
  std::string port;
  std::optional<Polarization> polarization;
  double x = 0.0;
  double t = 0.0;
};

struct DetectorSlot {
  std::string port;
  std::optional<Polarization> polarization;
  double x = 0.0;
};

/// Time interval over which coincidences integrate, with the two detector
/// positions fixed.
struct CoincidenceWindow {
  double t_start;
  double t_end;
  std::size_t n_time_samples;
  DetectorSlot detector1;
  DetectorSlot detector2;

  void validate() const;
  double spacing() const { return (t_end - t_start) / static_cast<double>(n_time_samples - 1); }
};

/// Amplitude of the one-photon wave function at a detection point; exactly 0
/// on unoccupied modes.
cplx single_photon_wavefunction(const SinglePhotonState& state, const DetectionPoint& p);

/// w1 = |Phi|^2, summed over polarization components if the detector carries
/// no filter.
double first_order_rate(const SinglePhotonState& state, const DetectionPoint& p);

/// Biphoton wave function (norm_factor / sqrt2) * double quadrature of the
/// symmetrized amplitude against the detection kernels. Requires resolved
/// polarizations on both points.
cplx two_photon_amplitude(const BiphotonState& state, const DetectionPoint& p1,
                          const DetectionPoint& p2);

/// w2 = 2 sum over detected polarization components of |Phi|^2.
double second_order_rate(const BiphotonState& state, const DetectionPoint& p1,
                         const DetectionPoint& p2);

struct RateSplit {
  double direct = 0.0;
  double exchange = 0.0;

  double rate() const { return direct + exchange; }
};

/// Splits w2 into classical independent-particle terms and the interference
/// (exchange) terms; direct + exchange equals second_order_rate. Dense states
/// carry no product decomposition and are rejected.
RateSplit exchange_decomposition(const BiphotonState& state, const DetectionPoint& p1,
                                 const DetectionPoint& p2);

/// Double time integral of w2 over the window square. Entangled states are
/// expanded over displaced-pair nodes internally. Throws
/// ErrorKind::NumericalGuard when the window sampling fails the Nyquist check
/// (8 samples per the shortest beat period present).
double windowed_coincidence(const BiphotonState& state, const CoincidenceWindow& window);

/// Windowed rate together with its direct/exchange split.
RateSplit windowed_rates(const BiphotonState& state, const CoincidenceWindow& window);

/// Per-(t,T) displaced-pair node contributions to the windowed exchange term
/// of an entangled state; used to locate which node pairs carry interference.
struct NodePairContribution {
  double t;
  double T;
  double exchange_magnitude;
};
std::vector<NodePairContribution> windowed_exchange_nodes(const BiphotonState& state,
                                                          const CoincidenceWindow& window);

/// (baseline - extremum) / baseline where baseline is the rate at the largest
/// |parameter| and the extremum deviates most from it; in [-1, 1], negative
/// for anti-dips.
double visibility(std::span<const double> parameters, std::span<const double> rates);

}  // namespace tpi
