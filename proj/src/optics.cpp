#include "tpi/optics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace tpi {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

cplx eval_terms(const std::vector<PhaseTerm>& terms, double k) {
  cplx s = 0.0;
  for (const auto& t : terms) s += t.amp * std::polar(1.0, k * t.delay);
  return s;
}

void require_distinct(std::initializer_list<ModeLabel> labels, const char* what) {
  std::set<ModeLabel> seen;
  for (const auto& l : labels)
    if (!seen.insert(l).second)
      fail(ErrorKind::Validation, std::string(what) + ": duplicate mode label " + to_string(l));
}

}  // namespace

ModeMap::ModeMap(std::vector<Coupling> couplings) : couplings_(std::move(couplings)) {}

std::vector<ModeLabel> ModeMap::input_modes() const {
  std::set<ModeLabel> s;
  for (const auto& c : couplings_) s.insert(c.in);
  return {s.begin(), s.end()};
}

std::vector<ModeLabel> ModeMap::output_modes() const {
  std::set<ModeLabel> s;
  for (const auto& c : couplings_) s.insert(c.out);
  return {s.begin(), s.end()};
}

bool ModeMap::has_input(const ModeLabel& m) const {
  for (const auto& c : couplings_)
    if (c.in == m) return true;
  return false;
}

cplx ModeMap::coefficient(const ModeLabel& in, const ModeLabel& out, double k) const {
  cplx s = 0.0;
  for (const auto& c : couplings_)
    if (c.in == in && c.out == out) s += eval_terms(c.terms, k);
  return s;
}

std::vector<cplx> ModeMap::per_k_matrix(double k, std::span<const ModeLabel> inputs,
                                        std::span<const ModeLabel> outputs) const {
  std::vector<cplx> m(outputs.size() * inputs.size(), cplx(0.0));
  for (std::size_t r = 0; r < outputs.size(); ++r)
    for (std::size_t c = 0; c < inputs.size(); ++c)
      m[r * inputs.size() + c] = coefficient(inputs[c], outputs[r], k);
  return m;
}

double ModeMap::isometry_defect(const FrequencyGrid& grid) const {
  const auto ins = input_modes();
  const auto outs = output_modes();
  double worst = 0.0;
  for (std::size_t ki = 0; ki < grid.size(); ++ki) {
    const auto m = per_k_matrix(grid.node(ki), ins, outs);
    for (std::size_t a = 0; a < ins.size(); ++a) {
      for (std::size_t b = 0; b < ins.size(); ++b) {
        cplx dot = 0.0;
        for (std::size_t r = 0; r < outs.size(); ++r)
          dot += std::conj(m[r * ins.size() + a]) * m[r * ins.size() + b];
        const cplx expect = (a == b) ? cplx(1.0) : cplx(0.0);
        worst = std::max(worst, std::abs(dot - expect));
      }
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Elements

ModeMap beamsplitter_5050(const ModeLabel& in1, const ModeLabel& in2, const ModeLabel& out1,
                          const ModeLabel& out2, double propagation_delay) {
  require_distinct({in1, in2, out1, out2}, "beamsplitter");
  std::vector<ModeMap::Coupling> c;
  c.push_back({in1, out2, {{kInvSqrt2, propagation_delay}}});
  c.push_back({in1, out1, {{cplx(0.0, -kInvSqrt2), propagation_delay}}});
  c.push_back({in2, out1, {{kInvSqrt2, propagation_delay}}});
  c.push_back({in2, out2, {{cplx(0.0, -kInvSqrt2), propagation_delay}}});
  return ModeMap(std::move(c));
}

ModeMap delay_line(const ModeLabel& m, double tau) {
  return ModeMap({{m, m, {{cplx(1.0), tau}}}});
}

ModeMap pbs_hv(const ModeLabel& in_h, const ModeLabel& in_v, const ModeLabel& out_h,
               const ModeLabel& out_v) {
  if (in_h.polarization != Polarization::H || out_h.polarization != Polarization::H ||
      in_v.polarization != Polarization::V || out_v.polarization != Polarization::V)
    fail(ErrorKind::Validation, "pbs_hv: inconsistent polarization labels");
  require_distinct({in_h, in_v}, "pbs_hv");
  require_distinct({out_h, out_v}, "pbs_hv");
  std::vector<ModeMap::Coupling> c;
  c.push_back({in_h, out_h, {{cplx(1.0), 0.0}}});
  c.push_back({in_v, out_v, {{cplx(1.0), 0.0}}});
  return ModeMap(std::move(c));
}

ModeMap pbs_hv(const std::string& in_port, const std::string& out_h_port,
               const std::string& out_v_port) {
  return pbs_hv(mode(in_port, Polarization::H), mode(in_port, Polarization::V),
                mode(out_h_port, Polarization::H), mode(out_v_port, Polarization::V));
}

ModeMap pbs_diagonal(const std::string& in_port, const std::string& out_plus_port,
                     const std::string& out_minus_port, double propagation_delay) {
  const ModeLabel in_h = mode(in_port, Polarization::H);
  const ModeLabel in_v = mode(in_port, Polarization::V);
  const ModeLabel out_p = mode(out_plus_port, Polarization::Plus45);
  const ModeLabel out_m = mode(out_minus_port, Polarization::Minus45);
  std::vector<ModeMap::Coupling> c;
  c.push_back({in_v, out_p, {{kInvSqrt2, propagation_delay}}});
  c.push_back({in_v, out_m, {{kInvSqrt2, propagation_delay}}});
  c.push_back({in_h, out_p, {{kInvSqrt2, propagation_delay}}});
  c.push_back({in_h, out_m, {{-kInvSqrt2, propagation_delay}}});
  return ModeMap(std::move(c));
}

// ---------------------------------------------------------------------------
// Composition

OpticalNetwork compose(std::vector<ModeMap> stages) {
  OpticalNetwork net;
  // Effective couplings as a running map from original inputs to current
  // outputs; modes a stage does not mention pass through unchanged.
  std::map<std::pair<ModeLabel, ModeLabel>, std::vector<PhaseTerm>> eff;
  std::set<ModeLabel> primary_inputs;
  std::set<ModeLabel> consumed;

  auto current_outputs = [&]() {
    std::set<ModeLabel> outs;
    for (const auto& [key, terms] : eff) outs.insert(key.second);
    return outs;
  };

  for (const auto& stage : stages) {
    const auto outs = current_outputs();
    for (const auto& in : stage.input_modes()) {
      if (consumed.count(in)) {
        fail(ErrorKind::Validation,
             "compose: mode " + to_string(in) + " was already consumed by an earlier stage");
      }
      if (!outs.count(in)) {
        // New primary input entering at this stage.
        if (primary_inputs.count(in))
          fail(ErrorKind::Validation,
               "compose: mode " + to_string(in) + " reused as a stage input");
        primary_inputs.insert(in);
        eff[{in, in}] = {{cplx(1.0), 0.0}};
      }
    }

    std::map<std::pair<ModeLabel, ModeLabel>, std::vector<PhaseTerm>> next;
    for (const auto& [key, terms] : eff) {
      const ModeLabel& mid = key.second;
      if (!stage.has_input(mid)) {
        auto& dst = next[key];
        dst.insert(dst.end(), terms.begin(), terms.end());
        continue;
      }
      for (const auto& c : stage.couplings()) {
        if (c.in != mid) continue;
        auto& dst = next[{key.first, c.out}];
        for (const auto& a : terms)
          for (const auto& b : c.terms) dst.push_back({a.amp * b.amp, a.delay + b.delay});
      }
    }
    eff = std::move(next);

    for (const auto& in : stage.input_modes()) {
      bool self = false;
      for (const auto& out : stage.output_modes())
        if (out == in) self = true;
      if (!self) consumed.insert(in);
    }
    // A label produced by this stage is live again even if an earlier stage
    // consumed it.
    for (const auto& out : stage.output_modes()) consumed.erase(out);
  }

  std::vector<ModeMap::Coupling> couplings;
  for (auto& [key, terms] : eff)
    couplings.push_back({key.first, key.second, std::move(terms)});
  net.stages_ = std::move(stages);
  net.effective_ = ModeMap(std::move(couplings));
  return net;
}

BiphotonState OpticalNetwork::apply(const BiphotonState& state) const {
  const auto& map = effective_;
  const std::size_t n = state.grid().size();

  if (state.representation() == BiphotonState::Representation::Dense) {
    // Contract the dense table against the per-k coupling matrix on each side.
    std::set<ModeLabel> out_set;
    for (const auto& m : state.modes())
      if (!map.has_input(m)) out_set.insert(m);
    for (const auto& m : map.output_modes()) out_set.insert(m);
    std::vector<ModeLabel> out_modes(out_set.begin(), out_set.end());

    const std::size_t d_in = state.pair_dimension();
    const std::size_t d_out = out_modes.size() * n;
    if (d_out > 1024) fail(ErrorKind::SizeLimit, "network output pair dimension exceeds 1024");

    // coeff[out][in] for each k node; identity on pass-through modes.
    const auto& in_modes = state.modes();
    std::vector<std::vector<cplx>> coeff(n);
    for (std::size_t ki = 0; ki < n; ++ki) {
      coeff[ki].assign(out_modes.size() * in_modes.size(), cplx(0.0));
      for (std::size_t o = 0; o < out_modes.size(); ++o) {
        for (std::size_t i = 0; i < in_modes.size(); ++i) {
          cplx v;
          if (!map.has_input(in_modes[i]))
            v = (out_modes[o] == in_modes[i]) ? cplx(1.0) : cplx(0.0);
          else
            v = map.coefficient(in_modes[i], out_modes[o], state.grid().node(ki));
          coeff[ki][o * in_modes.size() + i] = v;
        }
      }
    }

    std::vector<cplx> out_table(d_out * d_out, cplx(0.0));
    for (std::size_t k1 = 0; k1 < n; ++k1) {
      for (std::size_t k2 = 0; k2 < n; ++k2) {
        for (std::size_t o1 = 0; o1 < out_modes.size(); ++o1) {
          for (std::size_t o2 = 0; o2 < out_modes.size(); ++o2) {
            cplx s = 0.0;
            for (std::size_t i1 = 0; i1 < in_modes.size(); ++i1) {
              const cplx c1 = coeff[k1][o1 * in_modes.size() + i1];
              if (c1 == cplx(0.0)) continue;
              for (std::size_t i2 = 0; i2 < in_modes.size(); ++i2) {
                const cplx c2 = coeff[k2][o2 * in_modes.size() + i2];
                if (c2 == cplx(0.0)) continue;
                s += c1 * c2 *
                     state.dense_table()[(i1 * n + k1) * d_in + (i2 * n + k2)];
              }
            }
            out_table[(o1 * n + k1) * d_out + (o2 * n + k2)] = s;
          }
        }
      }
    }
    BiphotonState out(state.grid(), state.statistics());
    out.modes_ = std::move(out_modes);
    out.dense_ = std::move(out_table);
    out.norm_factor_ = state.norm_factor();
    return out;
  }

  // Product representation: each photon amplitude expands over output modes.
  struct Branch {
    ModeLabel out;
    std::vector<cplx> amp;
  };
  auto expand = [&](const ModeLabel& in, const std::vector<cplx>& amp) {
    std::vector<Branch> branches;
    if (!map.has_input(in)) {
      branches.push_back({in, amp});
      return branches;
    }
    for (const auto& out : map.output_modes()) {
      bool coupled = false;
      for (const auto& c : map.couplings())
        if (c.in == in && c.out == out) coupled = true;
      if (!coupled) continue;
      std::vector<cplx> scaled(n);
      for (std::size_t ki = 0; ki < n; ++ki)
        scaled[ki] = amp[ki] * map.coefficient(in, out, state.grid().node(ki));
      branches.push_back({out, std::move(scaled)});
    }
    return branches;
  };

  BiphotonState out(state.grid(), state.statistics());
  for (const auto& t : state.terms()) {
    const auto b1 = expand(t.mode1, t.amp1);
    const auto b2 = expand(t.mode2, t.amp2);
    for (const auto& x : b1)
      for (const auto& y : b2) out.terms_.push_back({x.out, y.out, x.amp, y.amp});
  }
  out.kernel_ = state.kernel_;
  out.norm_factor_ = state.norm_factor();
  out.rebuild_mode_list();
  return out;
}

SinglePhotonState OpticalNetwork::apply(const SinglePhotonState& state) const {
  const auto& map = effective_;
  const std::size_t n = state.grid().size();
  std::map<ModeLabel, std::vector<cplx>> acc;
  auto add_into = [&](const ModeLabel& m, const std::vector<cplx>& amp) {
    auto& dst = acc[m];
    if (dst.empty()) dst.assign(n, cplx(0.0));
    for (std::size_t i = 0; i < n; ++i) dst[i] += amp[i];
  };
  for (const auto& comp : state.components()) {
    if (!map.has_input(comp.mode)) {
      add_into(comp.mode, comp.amplitude);
      continue;
    }
    for (const auto& out : map.output_modes()) {
      std::vector<cplx> scaled(n, cplx(0.0));
      bool any = false;
      for (std::size_t ki = 0; ki < n; ++ki) {
        const cplx c = map.coefficient(comp.mode, out, state.grid().node(ki));
        if (c != cplx(0.0)) any = true;
        scaled[ki] = c * comp.amplitude[ki];
      }
      if (any) add_into(out, scaled);
    }
  }
  std::vector<SinglePhotonState::Component> components;
  for (auto& [m, amp] : acc) components.push_back({m, std::move(amp)});
  return SinglePhotonState(state.grid(), std::move(components));
}

}  // namespace tpi
