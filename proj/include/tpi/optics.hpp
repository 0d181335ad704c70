#pragma once

#include <utility>
#include <vector>

#include "tpi/biphoton.hpp"
#include "tpi/modes.hpp"

namespace tpi {

/// One summand of a frequency-dependent coupling: amp * exp(i w_k delay).
/// Compositions of the shipped elements stay inside this family, so maps are
/// exact at every wavenumber with no grid attached.
struct PhaseTerm {
  cplx amp;
  double delay = 0.0;
};

/// Frequency-dependent linear map on creation operators. Modes the map does
/// not mention pass through unchanged.
class ModeMap {
 public:
  struct Coupling {
    ModeLabel in;
    ModeLabel out;
    std::vector<PhaseTerm> terms;
  };

  ModeMap() = default;
  explicit ModeMap(std::vector<Coupling> couplings);

  const std::vector<Coupling>& couplings() const { return couplings_; }
  std::vector<ModeLabel> input_modes() const;
  std::vector<ModeLabel> output_modes() const;
  bool has_input(const ModeLabel& m) const;

  cplx coefficient(const ModeLabel& in, const ModeLabel& out, double k) const;

  /// Per-k coupling matrix, rows over `outputs`, columns over `inputs`.
  std::vector<cplx> per_k_matrix(double k, std::span<const ModeLabel> inputs,
                                 std::span<const ModeLabel> outputs) const;

  /// max_k || I - A_k^dagger A_k || over the grid nodes (columns restricted to
  /// the map's declared inputs).
  double isometry_defect(const FrequencyGrid& grid) const;

 private:
  std::vector<Coupling> couplings_;
};

/// Ordered sequence of mode maps composed into one effective map.
class OpticalNetwork {
 public:
  OpticalNetwork() = default;

  const std::vector<ModeMap>& stages() const { return stages_; }
  const ModeMap& effective_map() const { return effective_; }

  BiphotonState apply(const BiphotonState& state) const;
  SinglePhotonState apply(const SinglePhotonState& state) const;

 private:
  friend OpticalNetwork compose(std::vector<ModeMap> stages);
  std::vector<ModeMap> stages_;
  ModeMap effective_;
};

/// 50/50 splitter: in1 -> e^{iw delta}(out2 - i out1)/sqrt2,
/// in2 -> e^{iw delta}(out1 - i out2)/sqrt2. Reflection carries the -i.
ModeMap beamsplitter_5050(const ModeLabel& in1, const ModeLabel& in2, const ModeLabel& out1,
                          const ModeLabel& out2, double propagation_delay = 0.0);

/// Diagonal phase e^{i w_k tau} on one mode.
ModeMap delay_line(const ModeLabel& mode, double tau);

/// H/V polarizing splitter-or-combiner: in_h(H) -> out_h(H), in_v(V) -> out_v(V)
/// with unit coefficients. All four labels must carry the indicated
/// polarizations.
ModeMap pbs_hv(const ModeLabel& in_h, const ModeLabel& in_v, const ModeLabel& out_h,
               const ModeLabel& out_v);

/// Splitting form: routes (port,H) and (port,V) to two ports.
ModeMap pbs_hv(const std::string& in_port, const std::string& out_h_port,
               const std::string& out_v_port);

/// 45-degree polarizing splitter: V -> e^{iw delta}(plus + minus)/sqrt2,
/// H -> e^{iw delta}(plus - minus)/sqrt2, outputs labeled +-45.
ModeMap pbs_diagonal(const std::string& in_port, const std::string& out_plus_port,
                     const std::string& out_minus_port, double propagation_delay = 0.0);

/// Validates stage wiring (a mode consumed by an earlier stage cannot feed a
/// later one) and precomputes the effective single map.
OpticalNetwork compose(std::vector<ModeMap> stages);

}  // namespace tpi
