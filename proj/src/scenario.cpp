#include "tpi/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "tpi/correlation.hpp"
#include "tpi/optics.hpp"

namespace tpi {

namespace {

FrequencyGrid config_grid(const ScenarioConfig& c) {
  return FrequencyGrid(c.grid_min, c.grid_max, c.grid_points);
}

CoincidenceWindow config_window(const ScenarioConfig& c, DetectorSlot d1, DetectorSlot d2) {
  return CoincidenceWindow{c.window_min, c.window_max, c.window_samples, std::move(d1),
                           std::move(d2)};
}

std::vector<double> scan_values(const ScenarioConfig& c) {
  std::vector<double> v(c.scan_steps);
  for (std::size_t i = 0; i < c.scan_steps; ++i)
    v[i] = c.scan_min + (c.scan_max - c.scan_min) * static_cast<double>(i) /
                            static_cast<double>(c.scan_steps - 1);
  return v;
}

/// Evaluates one windowed split per scan value, optionally across threads.
/// Points are independent and written into fixed slots, so the output does
/// not depend on the worker count.
template <typename PointFn>
std::vector<RateSplit> run_points(const std::vector<double>& params, int threads, PointFn&& fn) {
  std::vector<RateSplit> out(params.size());
  const int n_workers = std::max(1, std::min<int>(threads, static_cast<int>(params.size())));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < params.size(); ++i) out[i] = fn(i, params[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int wkr = 0; wkr < n_workers; ++wkr) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= params.size()) return;
        try {
          out[i] = fn(i, params[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

ScanResult assemble(const ScenarioConfig& config, const char* param_name,
                    const std::vector<double>& params, const std::vector<RateSplit>& splits) {
  ScanResult result;
  result.scenario_name = to_string(config.scenario);
  result.parameter_name = param_name;
  result.config = config;
  result.rows.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    result.rows.push_back({params[i], splits[i].rate(), splits[i].direct, splits[i].exchange});
  result.validate();
  return result;
}

}  // namespace

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::Hom: return "hom";
    case ScenarioKind::HomEntangled: return "hom_entangled";
    case ScenarioKind::Eraser: return "eraser";
    case ScenarioKind::PostponedCompensation: return "postponed_compensation";
    case ScenarioKind::NoMeeting: return "no_meeting";
  }
  return "?";
}

std::vector<std::string> scenario_names() {
  return {"hom", "hom_entangled", "eraser", "postponed_compensation", "no_meeting"};
}

std::string ScenarioConfig::effective_scan_axis() const {
  if (!scan_axis.empty()) return scan_axis;
  switch (scenario) {
    case ScenarioKind::Hom:
    case ScenarioKind::HomEntangled:
    case ScenarioKind::Eraser: return "delta_t";
    case ScenarioKind::PostponedCompensation: return "tau2";
    case ScenarioKind::NoMeeting: return "tau3";
  }
  return "delta_t";
}

void ScenarioConfig::validate() const {
  auto check = [](bool ok, const std::string& field, const std::string& what) {
    if (!ok) fail(ErrorKind::Validation, "config field '" + field + "': " + what);
  };
  check(std::isfinite(center) && center > 0.0, "center", "must be finite and positive");
  check(std::isfinite(bandwidth) && bandwidth > 0.0, "bandwidth", "must be finite and positive");
  if (center_q)
    check(std::isfinite(*center_q) && *center_q > 0.0, "center_q",
          "must be finite and positive");
  check(std::isfinite(grid_min) && grid_min > 0.0, "grid_min", "must be finite and positive");
  check(std::isfinite(grid_max) && grid_max > grid_min, "grid_max", "must exceed grid_min");
  check(grid_points >= 16, "grid_points", "must be at least 16");
  check(std::isfinite(window_min) && std::isfinite(window_max) && window_max > window_min,
        "window_max", "window must be a finite non-empty interval");
  check(window_samples >= 64, "window_samples", "must be at least 64");
  check(scan_steps >= 2, "scan_steps", "must be at least 2");
  check(std::isfinite(scan_min) && std::isfinite(scan_max) && scan_max > scan_min, "scan_max",
        "scan range must be a finite non-empty interval");
  check(stats.sign == 1 || stats.sign == -1, "stats", "must be boson or fermion");
  for (const auto& [name, value] :
       {std::pair<const char*, double>{"delta_t", delta_t}, {"tau1", tau1}, {"tau2", tau2},
        {"tau3", tau3}})
    check(std::isfinite(value), name, "must be finite");

  const bool entangled_scenario =
      scenario == ScenarioKind::HomEntangled ||
      (scenario == ScenarioKind::PostponedCompensation && entangled);
  if (entangled_scenario) {
    check(sigma.has_value(), "sigma", "required for an entangled scenario");
    check(std::isfinite(*sigma) && *sigma > 0.0, "sigma", "must be finite and positive");
    if (sum_center)
      check(std::isfinite(*sum_center) && *sum_center > 0.0, "sum_center",
            "must be finite and positive");
  } else {
    check(!sigma.has_value(), "sigma", "only valid for an entangled scenario");
  }

  const std::string axis = effective_scan_axis();
  switch (scenario) {
    case ScenarioKind::Hom:
    case ScenarioKind::HomEntangled:
    case ScenarioKind::Eraser:
      check(axis == "delta_t", "scan", "scenario scans delta_t");
      break;
    case ScenarioKind::PostponedCompensation:
      check(axis == "tau2", "scan", "scenario scans tau2");
      break;
    case ScenarioKind::NoMeeting:
      check(axis == "tau3", "scan", "scenario scans tau3");
      break;
  }
  if (scenario != ScenarioKind::Hom) {
    check(channel == CoincidenceChannel::Cross, "channel",
          "same-port channel is only available for the hom scenario");
    check(!center_q.has_value(), "center_q", "only valid for the hom scenario");
  }
}

// ---------------------------------------------------------------------------
// Scenarios

ScanResult scenario_hom(const ScenarioConfig& config, int threads) {
  config.validate();
  if (config.scenario != ScenarioKind::Hom)
    fail(ErrorKind::Validation, "config field 'scenario': expected hom");
  const FrequencyGrid grid = config_grid(config);
  const SpectralAmplitude gp = make_gaussian_amplitude(config.center, config.bandwidth, grid);
  const SpectralAmplitude gq0 =
      make_gaussian_amplitude(config.effective_center_q(), config.bandwidth, grid);
  const ModeLabel a = mode("a"), b = mode("b"), c = mode("c"), d = mode("d");
  const OpticalNetwork net = compose({beamsplitter_5050(a, b, c, d)});

  const auto params = scan_values(config);
  std::vector<RateSplit> same(params.size());
  auto splits = run_points(params, threads, [&](std::size_t idx, double delta_t) {
    const SpectralAmplitude gq = apply_delay_phase(gq0, delta_t);
    const BiphotonState state = net.apply(separable_state(gp, a, gq, b, config.stats));
    const auto cross = windowed_rates(
        state, config_window(config, {"c", std::nullopt, 0.0}, {"d", std::nullopt, 0.0}));
    same[idx] = windowed_rates(
        state, config_window(config, {"c", std::nullopt, 0.0}, {"c", std::nullopt, 0.0}));
    return cross;
  });

  const bool primary_same = config.channel == CoincidenceChannel::Same;
  ScanResult result =
      assemble(config, "delta_t", params, primary_same ? same : splits);
  auto channel_rates = [](const std::vector<RateSplit>& s) {
    std::vector<double> r(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) r[i] = s[i].rate();
    return r;
  };
  result.aux["same_port_rate"] = channel_rates(same);
  result.aux["same_port_direct"] = [&] {
    std::vector<double> r(same.size());
    for (std::size_t i = 0; i < same.size(); ++i) r[i] = same[i].direct;
    return r;
  }();
  result.aux["cross_port_rate"] = channel_rates(splits);
  return result;
}

ScanResult scenario_hom_entangled(const ScenarioConfig& config, int threads) {
  config.validate();
  if (config.scenario != ScenarioKind::HomEntangled)
    fail(ErrorKind::Validation, "config field 'scenario': expected hom_entangled");
  const FrequencyGrid grid = config_grid(config);
  const SpectralAmplitude gp = make_gaussian_amplitude(config.center, config.bandwidth, grid);
  const ModeLabel a = mode("a"), b = mode("b"), c = mode("c"), d = mode("d");
  const OpticalNetwork net = compose({beamsplitter_5050(a, b, c, d)});

  const auto params = scan_values(config);
  auto splits = run_points(params, threads, [&](std::size_t, double delta_t) {
    const SpectralAmplitude gq = apply_delay_phase(gp, delta_t);
    const BiphotonState state = net.apply(entangled_gaussian_state(
        gp, a, gq, b, *config.sigma, config.effective_sum_center()));
    return windowed_rates(
        state, config_window(config, {"c", std::nullopt, 0.0}, {"d", std::nullopt, 0.0}));
  });
  return assemble(config, "delta_t", params, splits);
}

namespace {

OpticalNetwork eraser_network(bool with_diagonal_pbs) {
  std::vector<ModeMap> stages;
  stages.push_back(beamsplitter_5050(mode("a", Polarization::H), mode("b", Polarization::H),
                                     mode("c", Polarization::H), mode("d", Polarization::H)));
  stages.push_back(beamsplitter_5050(mode("a", Polarization::V), mode("b", Polarization::V),
                                     mode("c", Polarization::V), mode("d", Polarization::V)));
  if (with_diagonal_pbs) {
    stages.push_back(pbs_diagonal("c", "e", "g"));
    stages.push_back(pbs_diagonal("d", "f", "h"));
  }
  return compose(std::move(stages));
}

}  // namespace

ScanResult scenario_eraser(const ScenarioConfig& config, bool with_diagonal_pbs, int threads) {
  config.validate();
  if (config.scenario != ScenarioKind::Eraser)
    fail(ErrorKind::Validation, "config field 'scenario': expected eraser");
  const FrequencyGrid grid = config_grid(config);
  const SpectralAmplitude gp = make_gaussian_amplitude(config.center, config.bandwidth, grid);
  const ModeLabel a_h = mode("a", Polarization::H);
  const ModeLabel b_v = mode("b", Polarization::V);
  const OpticalNetwork net = eraser_network(with_diagonal_pbs);

  const DetectorSlot d1 = with_diagonal_pbs
                              ? DetectorSlot{"e", Polarization::Plus45, 0.0}
                              : DetectorSlot{"c", std::nullopt, 0.0};
  const DetectorSlot d2 = with_diagonal_pbs
                              ? DetectorSlot{"f", Polarization::Plus45, 0.0}
                              : DetectorSlot{"d", std::nullopt, 0.0};

  const auto params = scan_values(config);
  auto splits = run_points(params, threads, [&](std::size_t, double delta_t) {
    const SpectralAmplitude gq = apply_delay_phase(gp, delta_t);
    const BiphotonState state = net.apply(separable_state(gp, a_h, gq, b_v, config.stats));
    return windowed_rates(state, config_window(config, d1, d2));
  });
  return assemble(config, "delta_t", params, splits);
}

namespace {

OpticalNetwork postponed_compensation_network(double tau1, double tau2) {
  std::vector<ModeMap> stages;
  stages.push_back(delay_line(mode("b", Polarization::V), tau1));
  stages.push_back(beamsplitter_5050(mode("a", Polarization::H), mode("b", Polarization::H),
                                     mode("c", Polarization::H), mode("d", Polarization::H)));
  stages.push_back(beamsplitter_5050(mode("a", Polarization::V), mode("b", Polarization::V),
                                     mode("c", Polarization::V), mode("d", Polarization::V)));
  stages.push_back(delay_line(mode("d", Polarization::H), tau2));
  stages.push_back(pbs_diagonal("c", "c", "e"));
  stages.push_back(pbs_diagonal("d", "d", "f"));
  return compose(std::move(stages));
}

}  // namespace

ScanResult scenario_postponed_compensation(const ScenarioConfig& config, bool entangled,
                                           int threads) {
  config.validate();
  if (config.scenario != ScenarioKind::PostponedCompensation)
    fail(ErrorKind::Validation, "config field 'scenario': expected postponed_compensation");
  if (entangled && !config.sigma)
    fail(ErrorKind::Validation, "config field 'sigma': required for an entangled scenario");
  const FrequencyGrid grid = config_grid(config);
  const SpectralAmplitude gp = make_gaussian_amplitude(config.center, config.bandwidth, grid);
  const ModeLabel a_h = mode("a", Polarization::H);
  const ModeLabel b_v = mode("b", Polarization::V);

  const auto params = scan_values(config);
  auto splits = run_points(params, threads, [&](std::size_t, double tau2) {
    const OpticalNetwork net = postponed_compensation_network(config.tau1, tau2);
    const BiphotonState input =
        entangled ? entangled_gaussian_state(gp, a_h, gp, b_v, *config.sigma,
                                             config.effective_sum_center())
                  : separable_state(gp, a_h, gp, b_v, config.stats);
    const BiphotonState state = net.apply(input);
    return windowed_rates(state, config_window(config, {"c", Polarization::Plus45, 0.0},
                                               {"d", Polarization::Plus45, 0.0}));
  });
  return assemble(config, "tau2", params, splits);
}

namespace {

OpticalNetwork no_meeting_network(double tau1, double tau2, double tau3) {
  std::vector<ModeMap> stages;
  stages.push_back(delay_line(mode("a", Polarization::H), tau1));
  stages.push_back(beamsplitter_5050(mode("a", Polarization::H), mode("b", Polarization::H),
                                     mode("c", Polarization::H), mode("d", Polarization::H)));
  stages.push_back(beamsplitter_5050(mode("a", Polarization::V), mode("b", Polarization::V),
                                     mode("c", Polarization::V), mode("d", Polarization::V)));
  stages.push_back(delay_line(mode("c", Polarization::V), tau2));
  stages.push_back(delay_line(mode("d", Polarization::V), tau3));
  stages.push_back(pbs_diagonal("c", "e", "g"));
  stages.push_back(pbs_diagonal("d", "f", "h"));
  return compose(std::move(stages));
}

}  // namespace

ScanResult scenario_no_meeting(const ScenarioConfig& config, int threads) {
  config.validate();
  if (config.scenario != ScenarioKind::NoMeeting)
    fail(ErrorKind::Validation, "config field 'scenario': expected no_meeting");
  const FrequencyGrid grid = config_grid(config);
  const SpectralAmplitude gp = make_gaussian_amplitude(config.center, config.bandwidth, grid);
  const ModeLabel a_h = mode("a", Polarization::H);
  const ModeLabel b_v = mode("b", Polarization::V);

  const auto params = scan_values(config);
  auto splits = run_points(params, threads, [&](std::size_t, double tau3) {
    const OpticalNetwork net = no_meeting_network(config.tau1, config.tau2, tau3);
    const BiphotonState state = net.apply(separable_state(gp, a_h, gp, b_v, config.stats));
    return windowed_rates(state, config_window(config, {"e", Polarization::Plus45, 0.0},
                                               {"f", Polarization::Plus45, 0.0}));
  });
  return assemble(config, "tau3", params, splits);
}

ScanResult run_scenario(const ScenarioConfig& config, int threads) {
  switch (config.scenario) {
    case ScenarioKind::Hom: return scenario_hom(config, threads);
    case ScenarioKind::HomEntangled: return scenario_hom_entangled(config, threads);
    case ScenarioKind::Eraser: return scenario_eraser(config, config.diagonal_pbs, threads);
    case ScenarioKind::PostponedCompensation:
      return scenario_postponed_compensation(config, config.entangled, threads);
    case ScenarioKind::NoMeeting: return scenario_no_meeting(config, threads);
  }
  fail(ErrorKind::Validation, "config field 'scenario': unknown scenario");
}

// ---------------------------------------------------------------------------
// ScanResult invariants

void ScanResult::validate() const {
  for (const auto& row : rows) {
    if (!(row.rate >= -1e-12))
      fail(ErrorKind::NumericalGuard, "scan invariant violated: negative rate " +
                                          std::to_string(row.rate) + " at parameter " +
                                          std::to_string(row.parameter));
    const double residual = std::abs(row.rate - (row.direct + row.exchange));
    const double scale = std::max({1.0, std::abs(row.direct), std::abs(row.rate)});
    if (residual > 1e-9 * scale)
      fail(ErrorKind::NumericalGuard,
           "scan invariant violated: rate != direct + exchange at parameter " +
               std::to_string(row.parameter));
  }
}

std::vector<double> ScanResult::parameters() const {
  std::vector<double> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i].parameter;
  return v;
}

std::vector<double> ScanResult::rates() const {
  std::vector<double> v(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) v[i] = rows[i].rate;
  return v;
}

}  // namespace tpi
