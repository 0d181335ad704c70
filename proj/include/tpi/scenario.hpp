#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tpi/errors.hpp"
#include "tpi/modes.hpp"

namespace tpi {

enum class ScenarioKind { Hom, HomEntangled, Eraser, PostponedCompensation, NoMeeting };

enum class CoincidenceChannel { Cross, Same };

const char* to_string(ScenarioKind kind);
std::vector<std::string> scenario_names();

/// Flat configuration for one scan; defaults are the desk-scale parameters
/// every shipped scenario starts from.
struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Hom;
  ExchangeStatistics stats = ExchangeStatistics::boson();

  double center = 10.0;
  std::optional<double> center_q;  // second packet center; defaults to center
  double bandwidth = 1.0;
  double grid_min = 4.0;
  double grid_max = 16.0;
  std::size_t grid_points = 512;

  double window_min = -30.0;
  double window_max = 30.0;
  std::size_t window_samples = 512;

  double delta_t = 0.0;  // input delay when it is not the scan axis
  double tau1 = 0.0;
  double tau2 = 0.0;
  double tau3 = 0.0;
  std::optional<double> sigma;       // entanglement width, entangled scenarios only
  std::optional<double> sum_center;  // kernel peak sum frequency; defaults to 2*center
  bool diagonal_pbs = true;          // eraser: keep the 45-degree splitters
  bool entangled = false;            // postponed compensation input choice
  CoincidenceChannel channel = CoincidenceChannel::Cross;

  std::string scan_axis;  // defaults per scenario: delta_t / tau2 / tau3
  double scan_min = -5.0;
  double scan_max = 5.0;
  std::size_t scan_steps = 101;

  /// Throws ErrorKind::Validation with the offending field named.
  void validate() const;
  double effective_center_q() const { return center_q.value_or(center); }
  double effective_sum_center() const { return sum_center ? *sum_center : 2.0 * center; }
  std::string effective_scan_axis() const;
};

struct ScanRow {
  double parameter;
  double rate;
  double direct;
  double exchange;
};

/// A parameter sweep of windowed coincidence rates with their
/// direct/exchange split. `aux` carries secondary channels (e.g. the HOM
/// same-port rate) that are not part of the CSV contract.
struct ScanResult {
  std::string scenario_name;
  std::string parameter_name;
  std::vector<ScanRow> rows;
  std::map<std::string, std::vector<double>> aux;
  ScenarioConfig config;

  /// Rowwise invariants: rate >= -1e-12 and rate = direct + exchange to 1e-9.
  void validate() const;
  std::vector<double> parameters() const;
  std::vector<double> rates() const;
};

ScanResult scenario_hom(const ScenarioConfig& config, int threads = 1);
ScanResult scenario_hom_entangled(const ScenarioConfig& config, int threads = 1);
ScanResult scenario_eraser(const ScenarioConfig& config, bool with_diagonal_pbs,
                           int threads = 1);
ScanResult scenario_postponed_compensation(const ScenarioConfig& config, bool entangled,
                                           int threads = 1);
ScanResult scenario_no_meeting(const ScenarioConfig& config, int threads = 1);

/// Dispatch on config.scenario (flags taken from the config).
ScanResult run_scenario(const ScenarioConfig& config, int threads = 1);

/// Parse the flat key = value configuration format (one scenario per file;
/// '#' and ';' comments). Unknown keys and malformed values are errors.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

/// CSV with header param,rate,direct,exchange, 12 significant digits, LF line
/// endings, rows in ascending parameter order.
std::string csv_string(const ScanResult& result);
void emit_csv(const ScanResult& result, const std::string& path);

/// Load -> run -> (optionally re-check invariants) -> write CSV.
void run_scan_file(const std::string& config_path, const std::string& out_path, int threads,
                   bool check);

}  // namespace tpi
